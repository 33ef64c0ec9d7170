#include "eraser/biphoton.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "eraser/parallel.hpp"

namespace eraser::biphoton {

using optics::ComplexField;
using optics::FresnelPropagator;
using optics::TransverseGrid;
using std::numbers::pi;

OpticalArm::OpticalArm(std::vector<ArmElement> elements, TransverseGrid grid, double wavelength, std::string name)
    : elements_(std::move(elements)), grid_(std::move(grid)), wavelength_(wavelength), name_(std::move(name)) {
  if (!(wavelength_ > 0.0) || !std::isfinite(wavelength_))
    throw std::invalid_argument("arm: wavelength must be positive");
  for (const auto& e : elements_) {
    if (const auto* g = std::get_if<Gap>(&e); g && !(g->distance >= 0.0 && std::isfinite(g->distance)))
      throw std::invalid_argument("arm: gap distances must be non-negative");
    if (const auto* l = std::get_if<Lens>(&e); l && (l->focal_length == 0.0 || !std::isfinite(l->focal_length)))
      throw std::invalid_argument("arm: lens focal length must be nonzero");
    if (const auto* p = std::get_if<Pinhole>(&e); p && p->diameter && !(*p->diameter > 0.0))
      throw std::invalid_argument("arm: pinhole diameter must be positive");
  }
}

double OpticalArm::length() const noexcept {
  double s = 0.0;
  for (const auto& e : elements_)
    if (const auto* g = std::get_if<Gap>(&e)) s += g->distance;
  return s;
}

BiphotonSource::BiphotonSource(double wavelength, double q_aperture, TransverseGrid grid)
    : wavelength_(wavelength), q_aperture_(q_aperture), grid_(std::move(grid)) {
  if (!(wavelength_ > 0.0)) throw std::invalid_argument("source: wavelength must be positive");
  if (!(q_aperture_ > 0.0)) throw std::invalid_argument("source: q_aperture must be positive");
  if (!(q_aperture_ < grid_.max_momentum()))
    throw std::invalid_argument("source: q_aperture exceeds the grid's Nyquist momentum");
}

BiphotonSource BiphotonSource::from_divergence(double wavelength, double divergence, TransverseGrid grid) {
  return BiphotonSource(wavelength, (2.0 * pi / wavelength) * 0.5 * divergence, std::move(grid));
}

long BiphotonSource::max_mode() const noexcept {
  return static_cast<long>(std::floor(q_aperture_ / grid_.dq() * (1.0 + 1e-12)));
}

IndexRange centered_range(const TransverseGrid& grid, double half_width) {
  if (!(half_width >= 0.0)) throw std::invalid_argument("centered_range: half width must be non-negative");
  const auto n = static_cast<long>(grid.size());
  const long half = static_cast<long>(std::floor(half_width / grid.dx() * (1.0 + 1e-12)));
  const long lo = std::max(0L, n / 2 - half);
  const long hi = std::min(n - 1, n / 2 + half);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo + 1)};
}

BiphotonMap::BiphotonMap(std::vector<Complex> amplitude, std::vector<double> x1, std::vector<double> x2, double dx)
    : amplitude_(std::move(amplitude)), x1_(std::move(x1)), x2_(std::move(x2)), dx_(dx) {
  if (amplitude_.size() != x1_.size() * x2_.size()) throw std::invalid_argument("map: shape mismatch");
  if (!(dx_ > 0.0)) throw std::invalid_argument("map: spacing must be positive");
}

namespace {

/// Arm elements turned into precomputed pointwise and propagation stages.
class CompiledArm {
public:
  enum class Direction { forward, reverse };

  CompiledArm(const OpticalArm& arm, Direction dir) {
    const auto& grid = arm.grid();
    const double lambda = arm.wavelength();
    const double sign = dir == Direction::forward ? 1.0 : -1.0;

    std::vector<ArmElement> order(arm.elements().begin(), arm.elements().end());
    if (dir == Direction::reverse) std::reverse(order.begin(), order.end());

    double pending_gap = 0.0;
    auto flush_gap = [&] {
      if (pending_gap != 0.0) stages_.emplace_back(FresnelPropagator(grid, lambda, sign * pending_gap));
      pending_gap = 0.0;
    };
    for (const auto& e : order) {
      if (const auto* g = std::get_if<Gap>(&e)) {
        pending_gap += g->distance;
        continue;
      }
      flush_gap();
      if (const auto* l = std::get_if<Lens>(&e)) {
        stages_.emplace_back(optics::lens_phase(grid, lambda, sign * l->focal_length));
      } else if (const auto* m = std::get_if<Mask>(&e)) {
        stages_.emplace_back(optics::sample_mask(m->mask, grid));
      } else if (const auto* p = std::get_if<Pinhole>(&e)) {
        const double d = p->diameter.value_or(grid.dx());
        if (d >= grid.extent())
          stages_.emplace_back(std::vector<double>(grid.size(), 1.0));
        else
          stages_.emplace_back(optics::sample_mask(optics::TransmissionMask::single_slit(d), grid));
      }
    }
    flush_gap();
  }

  void apply(std::span<Complex> v) const {
    for (const auto& s : stages_) {
      if (const auto* p = std::get_if<FresnelPropagator>(&s)) {
        p->apply(v);
      } else if (const auto* c = std::get_if<std::vector<Complex>>(&s)) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= (*c)[i];
      } else {
        const auto& t = std::get<std::vector<double>>(s);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= t[i];
      }
    }
  }

private:
  std::vector<std::variant<FresnelPropagator, std::vector<Complex>, std::vector<double>>> stages_;
};

/// exp(i q_m x_k) for lattice mode m, with the phase reduced exactly modulo 2 pi.
void lattice_plane_wave(long m, std::size_t n, std::span<Complex> out) {
  const long nn = static_cast<long>(n);
  const long half = nn / 2;
  for (long k = 0; k < nn; ++k) {
    long r = (m * (k - half)) % nn;
    if (r < 0) r += nn;
    out[static_cast<std::size_t>(k)] = std::polar(1.0, 2.0 * pi * static_cast<double>(r) / static_cast<double>(nn));
  }
}

void require_same_grid(const TransverseGrid& a, const TransverseGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(what);
}

IndexRange resolve(const std::optional<IndexRange>& r, std::size_t n) {
  if (!r) return {0, n};
  if (r->count == 0 || r->first + r->count > n) throw std::invalid_argument("biphoton_map: window outside grid");
  return *r;
}

void init_eigen() {
  static std::once_flag once;
  std::call_once(once, [] { Eigen::initParallel(); });
}

}  // namespace

ComplexField arm_green_function(const OpticalArm& arm, double q) {
  const auto& grid = arm.grid();
  if (!std::isfinite(q) || std::abs(q) > grid.max_momentum())
    throw std::invalid_argument("arm_green_function: momentum outside grid range");
  std::vector<Complex> v(grid.size());
  const double m = q / grid.dq();
  if (std::abs(m - std::round(m)) < 1e-9) {
    lattice_plane_wave(static_cast<long>(std::round(m)), grid.size(), v);
  } else {
    const auto x = grid.positions();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::polar(1.0, q * x[k]);
  }
  CompiledArm(arm, CompiledArm::Direction::forward).apply(v);
  return ComplexField(grid, std::move(v), arm.wavelength());
}

BiphotonMap biphoton_map(const OpticalArm& arm1, const OpticalArm& arm2, const BiphotonSource& source,
                         const MapWindow& window) {
  if (std::abs(arm1.wavelength() - arm2.wavelength()) > 1e-12 * arm1.wavelength() ||
      std::abs(arm1.wavelength() - source.wavelength()) > 1e-12 * arm1.wavelength())
    throw std::invalid_argument("biphoton_map: arm and source wavelengths differ");
  require_same_grid(arm1.grid(), arm2.grid(), "biphoton_map: arms use different grids");
  require_same_grid(arm1.grid(), source.grid(), "biphoton_map: source grid differs from arm grid");
  init_eigen();

  const auto& grid = arm1.grid();
  const std::size_t n = grid.size();
  const IndexRange w1 = resolve(window.x1, n);
  const IndexRange w2 = resolve(window.x2, n);
  const long max_m = source.max_mode();
  const auto n_modes = static_cast<std::size_t>(2 * max_m + 1);

  const CompiledArm c1(arm1, CompiledArm::Direction::forward);
  const CompiledArm c2(arm2, CompiledArm::Direction::forward);

  Eigen::MatrixXcd g1(static_cast<Eigen::Index>(w1.count), static_cast<Eigen::Index>(n_modes));
  Eigen::MatrixXcd g2(static_cast<Eigen::Index>(w2.count), static_cast<Eigen::Index>(n_modes));
  parallel_chunks(n_modes, 16, [&](std::size_t begin, std::size_t end) {
    std::vector<Complex> buf(n);
    for (std::size_t c = begin; c < end; ++c) {
      const long m = static_cast<long>(c) - max_m;
      const auto col = static_cast<Eigen::Index>(c);
      lattice_plane_wave(m, n, buf);
      c1.apply(buf);
      for (std::size_t i = 0; i < w1.count; ++i) g1(static_cast<Eigen::Index>(i), col) = buf[w1.first + i];
      lattice_plane_wave(-m, n, buf);
      c2.apply(buf);
      for (std::size_t i = 0; i < w2.count; ++i) g2(static_cast<Eigen::Index>(i), col) = buf[w2.first + i];
    }
  });

  // Columns of A whose arm-2 response vanishes for every mode (outside a
  // pinhole) are exactly zero and skipped.
  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < w2.count; ++j)
    if (g2.row(static_cast<Eigen::Index>(j)).squaredNorm() > 0.0) live.push_back(j);

  const double dq = grid.dq();
  Eigen::MatrixXcd rhs(static_cast<Eigen::Index>(n_modes), static_cast<Eigen::Index>(live.size()));
  for (std::size_t t = 0; t < live.size(); ++t)
    rhs.col(static_cast<Eigen::Index>(t)) = g2.row(static_cast<Eigen::Index>(live[t])).transpose() * dq;

  std::vector<Complex> amp(w1.count * w2.count, Complex{});
  if (!live.empty()) {
    parallel_chunks(w1.count, 64, [&](std::size_t begin, std::size_t end) {
      const auto r0 = static_cast<Eigen::Index>(begin);
      const auto nr = static_cast<Eigen::Index>(end - begin);
      const Eigen::MatrixXcd block = g1.middleRows(r0, nr) * rhs;
      for (Eigen::Index i = 0; i < nr; ++i)
        for (std::size_t t = 0; t < live.size(); ++t)
          amp[(begin + static_cast<std::size_t>(i)) * w2.count + live[t]] = block(i, static_cast<Eigen::Index>(t));
    });
  }

  const auto x = grid.positions();
  std::vector<double> x1(x.begin() + static_cast<long>(w1.first), x.begin() + static_cast<long>(w1.first + w1.count));
  std::vector<double> x2(x.begin() + static_cast<long>(w2.first), x.begin() + static_cast<long>(w2.first + w2.count));
  return BiphotonMap(std::move(amp), std::move(x1), std::move(x2), grid.dx());
}

namespace {

std::vector<double> normalized(std::vector<double> v, const char* what) {
  const double peak = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  if (!(peak > 0.0)) throw std::domain_error(what);
  for (auto& r : v) r /= peak;
  return v;
}

}  // namespace

std::vector<double> erase_pattern(const BiphotonMap& map, double x2_fixed) {
  const double j = std::round((x2_fixed - map.x2().front()) / map.dx());
  if (!(j >= 0.0 && j < static_cast<double>(map.cols())))
    throw std::invalid_argument("erase_pattern: x2 outside the map window");
  const auto col = static_cast<std::size_t>(j);
  std::vector<double> v(map.rows());
  for (std::size_t i = 0; i < map.rows(); ++i) v[i] = map.g2(i, col);
  return normalized(std::move(v), "erase_pattern: no coincidences at this x2");
}

std::vector<double> read_pattern(const BiphotonMap& map) {
  std::vector<double> v(map.rows(), 0.0);
  for (std::size_t i = 0; i < map.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < map.cols(); ++j) s += map.g2(i, j);
    v[i] = s * map.dx();
  }
  return normalized(std::move(v), "read_pattern: map is identically zero");
}

ComplexField advanced_wave_at_source(const OpticalArm& arm2, const BiphotonSource& source, double x2_fixed) {
  const auto& grid = arm2.grid();
  require_same_grid(grid, source.grid(), "klyshko_unfold: source grid differs from arm grid");
  const double half = 0.5 * grid.extent();
  if (!(x2_fixed >= -half && x2_fixed < half)) throw std::invalid_argument("klyshko_unfold: x2 outside grid");

  const std::size_t n = grid.size();
  std::vector<Complex> v(n, Complex{});
  v[grid.nearest_index(x2_fixed)] = 1.0;
  CompiledArm(arm2, CompiledArm::Direction::reverse).apply(v);

  // Phase-conjugating mirror at the crystal, then the angular acceptance.
  for (auto& c : v) c = std::conj(c);
  const optics::Fft fft(n);
  fft.forward(v);
  const long max_m = source.max_mode();
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(grid.fft_mode(j)) > max_m) v[j] = 0.0;
  fft.inverse(v);
  for (auto& c : v) c *= grid.dq();
  return ComplexField(grid, std::move(v), arm2.wavelength());
}

ComplexField klyshko_unfold(const OpticalArm& arm1, const OpticalArm& arm2, const BiphotonSource& source,
                            double x2_fixed) {
  require_same_grid(arm1.grid(), arm2.grid(), "klyshko_unfold: arms use different grids");
  const auto wave = advanced_wave_at_source(arm2, source, x2_fixed);
  std::vector<Complex> v(wave.values().begin(), wave.values().end());
  CompiledArm(arm1, CompiledArm::Direction::forward).apply(v);
  return ComplexField(arm1.grid(), std::move(v), arm1.wavelength());
}

}  // namespace eraser::biphoton
