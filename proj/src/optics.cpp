#include "eraser/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace eraser::optics {

using std::numbers::pi;

struct TransverseGrid::Data {
  std::size_t n;
  double extent;
  double dx;
  double dq;
  std::vector<double> x;
  std::vector<double> q;
};

TransverseGrid::TransverseGrid(std::size_t n_points, double extent) {
  if (n_points < 2 || (n_points & (n_points - 1)) != 0)
    throw std::invalid_argument("grid: n_points must be a power of two >= 2");
  if (!(extent > 0.0) || !std::isfinite(extent))
    throw std::invalid_argument("grid: extent must be positive and finite");

  auto d = std::make_shared<Data>();
  d->n = n_points;
  d->extent = extent;
  d->dx = extent / static_cast<double>(n_points);
  d->dq = 2.0 * pi / extent;
  d->x.resize(n_points);
  d->q.resize(n_points);
  const long half = static_cast<long>(n_points / 2);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double m = static_cast<double>(static_cast<long>(k) - half);
    d->x[k] = m * d->dx;
    d->q[k] = m * d->dq;
  }
  data_ = std::move(d);
}

std::size_t TransverseGrid::size() const noexcept { return data_->n; }
double TransverseGrid::extent() const noexcept { return data_->extent; }
double TransverseGrid::dx() const noexcept { return data_->dx; }
double TransverseGrid::dq() const noexcept { return data_->dq; }
std::span<const double> TransverseGrid::positions() const noexcept { return data_->x; }
std::span<const double> TransverseGrid::momenta() const noexcept { return data_->q; }

double TransverseGrid::position(std::size_t k) const { return data_->x.at(k); }

std::size_t TransverseGrid::nearest_index(double x) const noexcept {
  const double k = std::round(x / data_->dx) + static_cast<double>(data_->n / 2);
  if (!(k > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(k), data_->n - 1);
}

double TransverseGrid::max_momentum() const noexcept { return static_cast<double>(data_->n / 2) * data_->dq; }

long TransverseGrid::fft_mode(std::size_t j) const noexcept {
  const auto n = static_cast<long>(data_->n);
  const auto jj = static_cast<long>(j);
  return jj < n / 2 ? jj : jj - n;
}

bool TransverseGrid::operator==(const TransverseGrid& other) const noexcept {
  return data_ == other.data_ || (data_->n == other.data_->n && data_->extent == other.data_->extent);
}

TransverseGrid make_grid(std::size_t n_points, double extent) { return TransverseGrid(n_points, extent); }

// ---------------------------------------------------------------------------

ComplexField::ComplexField(TransverseGrid grid, std::vector<Complex> values, double wavelength)
    : grid_(std::move(grid)), values_(std::move(values)), wavelength_(wavelength) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field: sample count does not match grid");
  if (!(wavelength_ > 0.0) || !std::isfinite(wavelength_))
    throw std::invalid_argument("field: wavelength must be positive");
}

double ComplexField::wavenumber() const noexcept { return 2.0 * pi / wavelength_; }

double ComplexField::energy() const noexcept {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return s * grid_.dx();
}

// ---------------------------------------------------------------------------

TransmissionMask TransmissionMask::double_slit(double width, double separation) {
  if (!(width > 0.0) || !(separation > width)) throw std::invalid_argument("double slit: need 0 < width < separation");
  return TransmissionMask(DoubleSlit{width, separation});
}

TransmissionMask TransmissionMask::single_slit(double width, double center) {
  if (!(width > 0.0) || !std::isfinite(center)) throw std::invalid_argument("single slit: width must be positive");
  return TransmissionMask(SingleSlit{width, center});
}

TransmissionMask TransmissionMask::open() { return TransmissionMask(OpenAperture{}); }

TransmissionMask TransmissionMask::custom(std::vector<double> samples) {
  for (double v : samples)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("custom mask: samples must lie in [0, 1]");
  return TransmissionMask(CustomMask{std::move(samples)});
}

std::string TransmissionMask::description() const {
  std::ostringstream os;
  os.precision(6);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DoubleSlit>)
          os << "double slit a=" << s.width << " m d=" << s.separation << " m";
        else if constexpr (std::is_same_v<T, SingleSlit>)
          os << "single slit a=" << s.width << " m at " << s.center << " m";
        else if constexpr (std::is_same_v<T, OpenAperture>)
          os << "open";
        else
          os << "custom (" << s.samples.size() << " samples)";
      },
      shape_);
  return os.str();
}

namespace {

void add_box(std::vector<double>& t, const TransverseGrid& grid, double lo, double hi) {
  const double dx = grid.dx();
  const auto x = grid.positions();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double a = std::max(lo, x[k] - 0.5 * dx);
    const double b = std::min(hi, x[k] + 0.5 * dx);
    if (b > a) t[k] = std::min(1.0, t[k] + (b - a) / dx);
  }
}

}  // namespace

std::vector<double> sample_mask(const TransmissionMask& mask, const TransverseGrid& grid) {
  const double half = 0.5 * grid.extent();
  std::vector<double> t(grid.size(), 0.0);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DoubleSlit>) {
          if (s.separation + s.width >= grid.extent())
            throw std::invalid_argument("sample_mask: double slit wider than grid extent");
          add_box(t, grid, -0.5 * s.separation - 0.5 * s.width, -0.5 * s.separation + 0.5 * s.width);
          add_box(t, grid, 0.5 * s.separation - 0.5 * s.width, 0.5 * s.separation + 0.5 * s.width);
        } else if constexpr (std::is_same_v<T, SingleSlit>) {
          if (std::abs(s.center) + 0.5 * s.width > half)
            throw std::invalid_argument("sample_mask: slit extends beyond grid");
          add_box(t, grid, s.center - 0.5 * s.width, s.center + 0.5 * s.width);
        } else if constexpr (std::is_same_v<T, OpenAperture>) {
          std::fill(t.begin(), t.end(), 1.0);
        } else {
          if (s.samples.size() != grid.size())
            throw std::invalid_argument("sample_mask: custom mask length does not match grid");
          t = s.samples;
        }
      },
      mask.shape());
  return t;
}

// ---------------------------------------------------------------------------

FresnelPropagator::FresnelPropagator(const TransverseGrid& grid, double wavelength, double distance)
    : fft_(grid.size()), distance_(distance), transfer_(grid.size()) {
  if (!std::isfinite(distance)) throw std::invalid_argument("propagate: distance must be finite");
  if (!(wavelength > 0.0)) throw std::invalid_argument("propagate: wavelength must be positive");
  const double k = 2.0 * pi / wavelength;
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double q = static_cast<double>(grid.fft_mode(j)) * grid.dq();
    transfer_[j] = std::polar(inv_n, -distance * q * q / (2.0 * k));
  }
}

void FresnelPropagator::apply(std::span<Complex> field) const {
  if (distance_ == 0.0) return;
  fft_.forward(field);
  for (std::size_t j = 0; j < field.size(); ++j) field[j] *= transfer_[j];
  fft_.inverse(field);
}

std::vector<Complex> lens_phase(const TransverseGrid& grid, double wavelength, double focal_length) {
  if (focal_length == 0.0 || !std::isfinite(focal_length))
    throw std::invalid_argument("lens: focal length must be nonzero and finite");
  const double k = 2.0 * pi / wavelength;
  std::vector<Complex> phase(grid.size());
  const auto x = grid.positions();
  for (std::size_t i = 0; i < phase.size(); ++i) phase[i] = std::polar(1.0, -k * x[i] * x[i] / (2.0 * focal_length));
  return phase;
}

ComplexField fresnel_propagate(const ComplexField& field, double distance) {
  const FresnelPropagator prop(field.grid(), field.wavelength(), distance);
  std::vector<Complex> v(field.values().begin(), field.values().end());
  prop.apply(v);
  return ComplexField(field.grid(), std::move(v), field.wavelength());
}

ComplexField apply_lens(const ComplexField& field, double focal_length) {
  const auto phase = lens_phase(field.grid(), field.wavelength(), focal_length);
  std::vector<Complex> v(field.values().begin(), field.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= phase[i];
  return ComplexField(field.grid(), std::move(v), field.wavelength());
}

ComplexField apply_mask(const ComplexField& field, const TransmissionMask& mask) {
  const auto t = sample_mask(mask, field.grid());
  std::vector<Complex> v(field.values().begin(), field.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= t[i];
  return ComplexField(field.grid(), std::move(v), field.wavelength());
}

double fourier_plane_distance(double object_distance, double f_prime) {
  if (f_prime == 0.0 || !std::isfinite(f_prime) || !std::isfinite(object_distance))
    throw std::invalid_argument("fourier_plane_distance: focal length must be nonzero and finite");
  if (object_distance == f_prime)
    throw std::invalid_argument("fourier_plane_distance: object in the focal plane images to infinity");
  return object_distance * f_prime / (object_distance - f_prime);
}

}  // namespace eraser::optics
