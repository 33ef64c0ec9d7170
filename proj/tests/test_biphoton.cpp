#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "eraser/biphoton.hpp"
#include "eraser/presets.hpp"

using namespace eraser;
using namespace eraser::biphoton;
using optics::Complex;
using optics::TransmissionMask;
using std::numbers::pi;

namespace {

const presets::EraserSetup kSet1 = presets::paper_setup(1);

std::vector<double> column_g2(const BiphotonMap& map, std::size_t j) {
  std::vector<double> v(map.rows());
  for (std::size_t i = 0; i < map.rows(); ++i) v[i] = map.g2(i, j);
  return v;
}

std::vector<double> row_g2(const BiphotonMap& map, std::size_t i) {
  std::vector<double> v(map.cols());
  for (std::size_t j = 0; j < map.cols(); ++j) v[j] = map.g2(i, j);
  return v;
}

double relative_rms_normalized(std::vector<double> a, std::vector<double> b) {
  const double pa = *std::max_element(a.begin(), a.end());
  const double pb = *std::max_element(b.begin(), b.end());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] / pa - b[i] / pb) * (a[i] / pa - b[i] / pb);
    den += (b[i] / pb) * (b[i] / pb);
  }
  return std::sqrt(num / den);
}

/// Position of the maximum of a sampled profile, refined by a parabola.
double peak_position(std::span<const double> x, std::span<const double> v) {
  const auto top = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  REQUIRE(top > 0);
  REQUIRE(top + 1 < v.size());
  const double a = v[top - 1], b = v[top], c = v[top + 1];
  return x[top] + 0.5 * (a - c) / (a - 2.0 * b + c) * (x[1] - x[0]);
}

/// NCC of the x2 profile at x1 = 0 against |T(x2)|^2 over |x2| <= d + a.
double ghost_ncc(const OpticalArm& arm2, const optics::TransverseGrid& grid, const presets::EraserSetup& s) {
  const double reach = 620e-6;
  const MapWindow window{centered_range(grid, 0.0), centered_range(grid, reach)};
  const auto map = biphoton_map(presets::signal_arm(s, grid), arm2, presets::make_source(s, grid), window);
  const auto t = optics::sample_mask(s.slit, grid);
  std::vector<double> image = row_g2(map, 0), target;
  for (std::size_t j = 0; j < map.cols(); ++j) target.push_back(t[window.x2->first + j] * t[window.x2->first + j]);
  return presets::normalized_cross_correlation(image, target);
}

}  // namespace

// --- Klyshko picture ----------------------------------------------------------

TEST_CASE("Klyshko unfold reproduces the map column on n = 1024") {
  const auto grid = presets::default_grid(kSet1, 1024);
  const auto source = presets::make_source(kSet1, grid);
  const auto arm1 = presets::signal_arm(kSet1, grid);
  for (const auto& arm2 :
       {presets::erase_arm(kSet1, grid), presets::read_arm(kSet1, grid), presets::ghost_arm(kSet1, grid)}) {
    const auto map = biphoton_map(arm1, arm2, source);
    for (double x2 : {0.0, 0.31e-3, -1.7e-3}) {
      if (arm2.name() == "erase" && x2 != 0.0) continue;  // pinhole blocks everything else
      CAPTURE(arm2.name());
      CAPTURE(x2);
      const std::size_t j = grid.nearest_index(x2);
      const auto unfolded = klyshko_unfold(arm1, arm2, source, x2);
      std::vector<double> a(grid.size());
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        a[i] = std::norm(unfolded.values()[i]);
        num += std::norm(unfolded.values()[i] - map.amplitude(i, j));
        den += std::norm(map.amplitude(i, j));
      }
      CHECK(relative_rms_normalized(a, column_g2(map, j)) <= 1e-6);
      CHECK(std::sqrt(num / den) <= 1e-9);  // amplitudes agree including scale and phase
    }
  }
}

TEST_CASE("the advanced wave reaching the slits through the erase arm is collimated") {
  const auto grid = presets::default_grid(kSet1);
  const auto wave = advanced_wave_at_source(presets::erase_arm(kSet1, grid), presets::make_source(kSet1, grid), 0.0);
  const auto at_slits = optics::fresnel_propagate(wave, kSet1.d_A);
  const std::size_t c = grid.size() / 2;
  const Complex ref = at_slits.values()[c];
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(grid.position(k)) > 0.5 * (470e-6 + 150e-6)) continue;
    worst = std::max(worst, std::abs(std::arg(at_slits.values()[k] / ref)));
  }
  CHECK(worst < 0.05);
}

// --- structure of the map -----------------------------------------------------

TEST_CASE("identical arms give an exchange-symmetric amplitude") {
  const auto grid = optics::make_grid(512, 12e-3);
  const auto source = BiphotonSource::from_divergence(915.8e-9, 0.027, grid);
  const OpticalArm arm({Gap{0.2}, Mask{TransmissionMask::double_slit(150e-6, 470e-6)}, Lens{0.3}, Gap{0.45}}, grid,
                       915.8e-9);
  const auto map = biphoton_map(arm, arm, source);
  double peak = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < map.rows(); ++i)
    for (std::size_t j = 0; j < map.cols(); ++j) {
      peak = std::max(peak, std::abs(map.amplitude(i, j)));
      worst = std::max(worst, std::abs(map.amplitude(i, j) - map.amplitude(j, i)));
    }
  CHECK(worst <= 1e-12 * peak);
}

TEST_CASE("empty arms correlate positions: A(x1, x2) depends on x1 - x2 and peaks on the diagonal") {
  const auto grid = optics::make_grid(256, 6e-3);
  const auto source = BiphotonSource::from_divergence(915.8e-9, 0.027, grid);
  const OpticalArm bare({}, grid, 915.8e-9);
  const auto map = biphoton_map(bare, bare, source);
  for (std::size_t i = 0; i < map.rows(); ++i) {
    CHECK(std::abs(map.amplitude(i, i) - map.amplitude(0, 0)) < 1e-12 * std::abs(map.amplitude(0, 0)));
    const auto row = row_g2(map, i);
    CHECK(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) == i);
  }
  // The diagonal value is the number of modes times dq.
  CHECK(std::abs(map.amplitude(7, 7)) ==
        doctest::Approx((2.0 * static_cast<double>(source.max_mode()) + 1.0) * grid.dq()));
}

TEST_CASE("free-space Green's function is the propagated plane wave") {
  const auto grid = optics::make_grid(1024, 5e-3);
  const double lambda = 915.8e-9, z = 0.73, k = 2.0 * pi / lambda;
  const OpticalArm arm({Gap{0.5}, Gap{0.23}}, grid, lambda);
  for (long m : {0L, 3L, -17L, 200L}) {
    const double q = static_cast<double>(m) * grid.dq();
    const auto g = arm_green_function(arm, q);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Complex expect = std::polar(1.0, q * grid.position(i) - z * q * q / (2.0 * k));
      worst = std::max(worst, std::abs(g.values()[i] - expect));
    }
    CHECK(worst < 1e-10);
  }
  CHECK_THROWS_AS(arm_green_function(arm, 1.01 * grid.max_momentum()), std::invalid_argument);
}

TEST_CASE("read pattern with an open detector plane does not depend on arm 2") {
  const auto grid = presets::default_grid(kSet1, 1024);
  const auto source = presets::make_source(kSet1, grid);
  const auto arm1 = presets::signal_arm(kSet1, grid);
  const auto reference = read_pattern(biphoton_map(arm1, presets::read_arm(kSet1, grid), source));
  for (const auto& arm2 : {presets::ghost_arm(kSet1, grid), presets::fourier_arm(kSet1, grid),
                           OpticalArm({Gap{0.3}}, grid, kSet1.signal_wavelength)}) {
    const auto other = read_pattern(biphoton_map(arm1, arm2, source));
    double worst = 0.0;
    for (std::size_t i = 0; i < other.size(); ++i) worst = std::max(worst, std::abs(other[i] - reference[i]));
    CHECK(worst < 1e-10);
  }
}

// --- ghost imaging --------------------------------------------------------------

TEST_CASE("ghost image reproduces the slit mask and defocus destroys it") {
  const auto grid = presets::default_grid(kSet1);
  const double focused = ghost_ncc(presets::ghost_arm(kSet1, grid), grid, kSet1);
  CHECK(focused >= 0.95);

  // Lens moved 20% toward the crystal, detector distance unchanged.
  const double shift = 0.2 * kSet1.d_B;
  const OpticalArm defocused({Gap{kSet1.d_B - shift}, Lens{kSet1.f}, Gap{kSet1.d_B_prime() + shift}}, grid,
                             kSet1.signal_wavelength);
  CHECK(focused - ghost_ncc(defocused, grid, kSet1) >= 0.1);

  const auto set2 = presets::paper_setup(2);
  CHECK(ghost_ncc(presets::ghost_arm(set2, grid), grid, set2) >= 0.95);
}

TEST_CASE("the ghost image is inverted in lab coordinates") {
  // A slit at +c in arm 1 shows up at x2 = -c, the 2f-2f imaging magnification of -1.
  auto s = kSet1;
  s.slit = TransmissionMask::single_slit(150e-6, 400e-6);
  const auto grid = presets::default_grid(kSet1);
  const MapWindow window{centered_range(grid, 0.0), centered_range(grid, 1e-3)};
  const auto map =
      biphoton_map(presets::signal_arm(s, grid), presets::ghost_arm(s, grid), presets::make_source(s, grid), window);
  const auto image = row_g2(map, 0);
  CHECK(peak_position(map.x2(), image) == doctest::Approx(-400e-6).epsilon(0.05));
}

TEST_CASE("narrower source aperture blurs the ghost image edges monotonically") {
  auto s = kSet1;
  s.slit = TransmissionMask::single_slit(1e-3);
  const auto grid = presets::default_grid(kSet1, 2048);
  const MapWindow window{centered_range(grid, 0.0), centered_range(grid, 1.5e-3)};
  double previous = 0.0;
  for (double divergence : {0.027, 0.018, 0.012, 0.008, 0.005}) {
    const auto source = BiphotonSource::from_divergence(s.signal_wavelength, divergence, grid);
    const auto map = biphoton_map(presets::signal_arm(s, grid), presets::ghost_arm(s, grid), source, window);
    auto image = row_g2(map, 0);
    // 10-90% rise of the left edge, measured against the plateau level at the center.
    const double plateau = image[image.size() / 2];
    auto crossing = [&](double level) {
      for (std::size_t j = 1; j < image.size() / 2; ++j)
        if (image[j] >= level * plateau && image[j - 1] < level * plateau)
          return map.x2()[j - 1] + (level * plateau - image[j - 1]) / (image[j] - image[j - 1]) * grid.dx();
      return 0.0;
    };
    const double width = crossing(0.9) - crossing(0.1);
    CAPTURE(divergence);
    CHECK(width > previous);
    previous = width;
  }
}

// --- Fourier-plane (erasing) geometry -------------------------------------------

TEST_CASE("without the pinhole, g2 depends on x1 / d_A' - x2 / z only") {
  // Moving detector 2 by s in its Fourier plane moves the erase fringes by s d_A' / z_T.
  const auto grid = presets::default_grid(kSet1);
  const double lobe = presets::envelope_half_width(kSet1);
  const MapWindow window{centered_range(grid, 0.5 * lobe), centered_range(grid, 25.0 * grid.dx())};
  const auto map = biphoton_map(presets::signal_arm(kSet1, grid), presets::fourier_arm(kSet1, grid),
                                presets::make_source(kSet1, grid), window);
  const double ratio = kSet1.d_A_prime / kSet1.z_T;
  const std::size_t center = map.cols() / 2;
  const double x0 = peak_position(map.x1(), column_g2(map, center));
  CHECK(std::abs(x0) < grid.dx());
  for (int step : {-20, -10, 10, 20}) {
    const std::size_t j = center + static_cast<std::size_t>(step);
    const double s = map.x2()[j];
    CAPTURE(step);
    CHECK(peak_position(map.x1(), column_g2(map, j)) - x0 == doctest::Approx(ratio * s).epsilon(0.03));
  }
}

TEST_CASE("erase slice for an open mask has no fringes") {
  auto s = kSet1;
  s.slit = TransmissionMask::open();
  const auto grid = presets::default_grid(kSet1);
  const double period = presets::fringe_period(kSet1);
  const MapWindow window{centered_range(grid, period), centered_range(grid, 0.0)};
  const auto map =
      biphoton_map(presets::signal_arm(s, grid), presets::erase_arm(s, grid), presets::make_source(s, grid), window);
  // A broad beam with a few percent of sample-scale aliasing ripple; slits
  // would instead drive the pattern to zero at +-P/2.
  const auto slice = erase_pattern(map, 0.0);
  CHECK(*std::min_element(slice.begin(), slice.end()) > 0.9);
}

// --- contracts --------------------------------------------------------------------

TEST_CASE("mismatched arms, windows and patterns are rejected") {
  const auto grid = optics::make_grid(256, 6e-3);
  const auto other = optics::make_grid(512, 6e-3);
  const auto source = BiphotonSource::from_divergence(915.8e-9, 0.027, grid);
  const OpticalArm a({Gap{0.1}}, grid, 915.8e-9);
  CHECK_THROWS_AS(biphoton_map(a, OpticalArm({Gap{0.1}}, grid, 800e-9), source), std::invalid_argument);
  CHECK_THROWS_AS(biphoton_map(a, OpticalArm({Gap{0.1}}, other, 915.8e-9), source), std::invalid_argument);
  CHECK_THROWS_AS(biphoton_map(a, a, source, MapWindow{IndexRange{250, 10}, std::nullopt}), std::invalid_argument);
  CHECK_THROWS_AS(OpticalArm({Gap{-0.1}}, grid, 915.8e-9), std::invalid_argument);
  CHECK_THROWS_AS(OpticalArm({Lens{0.0}}, grid, 915.8e-9), std::invalid_argument);
  CHECK_THROWS_AS(BiphotonSource(915.8e-9, grid.max_momentum(), grid), std::invalid_argument);

  const auto map = biphoton_map(a, a, source, MapWindow{std::nullopt, IndexRange{100, 20}});
  CHECK(map.rows() == 256);
  CHECK(map.cols() == 20);
  CHECK_THROWS_AS(erase_pattern(map, 2.5e-3), std::invalid_argument);

  const OpticalArm blocked({Mask{TransmissionMask::single_slit(40e-6, 2e-3)}, Pinhole{}}, grid, 915.8e-9);
  const auto dark = biphoton_map(a, blocked, source, MapWindow{std::nullopt, centered_range(grid, 0.0)});
  CHECK_THROWS_AS(erase_pattern(dark, 0.0), std::domain_error);
  CHECK_THROWS_AS(read_pattern(dark), std::domain_error);
}

TEST_CASE("maps are bit-identical for any thread count") {
  const auto grid = presets::default_grid(kSet1, 1024);
  const auto source = presets::make_source(kSet1, grid);
  auto compute = [&](const char* threads) {
    setenv("ERASER_SIM_THREADS", threads, 1);
    return biphoton_map(presets::signal_arm(kSet1, grid), presets::read_arm(kSet1, grid), source);
  };
  const auto one = compute("1");
  const auto four = compute("4");
  unsetenv("ERASER_SIM_THREADS");
  CHECK(std::equal(one.data().begin(), one.data().end(), four.data().begin(), four.data().end()));
}
