#include "eraser/presets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace eraser::presets {

using biphoton::Gap;
using biphoton::Lens;
using biphoton::Mask;
using biphoton::OpticalArm;
using biphoton::Pinhole;
using optics::TransmissionMask;
using optics::TransverseGrid;
using std::numbers::pi;

void validate(const EraserSetup& s) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("setup: ") + name + " must be positive");
  };
  positive(s.pump_wavelength, "pump_wavelength");
  positive(s.signal_wavelength, "signal_wavelength");
  if (std::abs(s.signal_wavelength - 2.0 * s.pump_wavelength) > 0.005 * 2.0 * s.pump_wavelength)
    throw std::invalid_argument("setup: signal_wavelength must be within 0.5% of twice the pump wavelength");
  positive(s.d_A, "d_A");
  positive(s.d_A_prime, "d_A_prime");
  positive(s.d_B, "d_B");
  positive(s.d_NPBS, "d_NPBS");
  positive(s.d_Lprime, "d_Lprime");
  positive(s.f, "f");
  positive(s.f_T_prime, "f_T_prime");
  positive(s.f_R_prime, "f_R_prime");
  positive(s.z_T, "z_T");
  positive(s.z_R, "z_R");
  positive(s.detector1_width, "detector1_width");
  positive(s.divergence, "divergence");
  if (!(s.divergence < pi)) throw std::invalid_argument("setup: divergence must be below pi");
  if (!(s.fiber_length_T >= 0.0) || !(s.fiber_length_R >= 0.0))
    throw std::invalid_argument("setup: fiber lengths must be non-negative");
  if (!(s.fiber_index >= 1.0)) throw std::invalid_argument("setup: fiber_index must be at least 1");
  if (s.pinhole_T_diameter) positive(*s.pinhole_T_diameter, "pinhole_T_diameter");
  if (s.pinhole_R_diameter) positive(*s.pinhole_R_diameter, "pinhole_R_diameter");
}

EraserSetup paper_setup(int slit_set) {
  EraserSetup s{};
  s.pump_wavelength = 457.9e-9;
  s.signal_wavelength = 915.8e-9;
  s.d_A = 0.115;
  s.d_A_prime = 1.25;
  s.d_B = 0.885;
  s.d_NPBS = 0.985;
  s.d_Lprime = 0.015;
  s.f = 0.5;
  s.f_T_prime = 0.25;
  s.f_R_prime = 0.05;
  s.z_T = 0.5;
  s.z_R = 0.055;
  s.detector1_width = 200e-6;
  s.divergence = 0.027;
  s.fiber_length_T = 4.5;
  s.fiber_length_R = 2.0;
  s.fiber_index = 1.496;
  switch (slit_set) {
    case 1:
      s.slit = TransmissionMask::double_slit(150e-6, 470e-6);
      break;
    case 2:
      s.slit = TransmissionMask::double_slit(100e-6, 250e-6);
      break;
    default:
      throw std::invalid_argument("paper_setup: slit set must be 1 or 2");
  }
  return s;
}

namespace {

const optics::DoubleSlit& double_slit_of(const EraserSetup& s) {
  const auto* ds = std::get_if<optics::DoubleSlit>(&s.slit.shape());
  if (!ds) throw std::invalid_argument("setup: slit is not a double slit");
  return *ds;
}

double widest_aperture(const TransmissionMask& m) {
  if (const auto* ds = std::get_if<optics::DoubleSlit>(&m.shape())) return ds->separation + ds->width;
  if (const auto* ss = std::get_if<optics::SingleSlit>(&m.shape())) return 2.0 * std::abs(ss->center) + ss->width;
  return 0.0;
}

}  // namespace

double fringe_period(const EraserSetup& s) { return s.signal_wavelength * s.d_A_prime / double_slit_of(s).separation; }

double envelope_half_width(const EraserSetup& s) { return s.signal_wavelength * s.d_A_prime / double_slit_of(s).width; }

double default_extent(const EraserSetup& s, std::size_t n_points) {
  const double by_aperture = 8.0 * widest_aperture(s.slit);
  const double by_wrap =
      std::ceil(1.2 * std::sqrt(static_cast<double>(n_points) * s.signal_wavelength * s.d_A_prime) * 1e3) / 1e3;
  const double by_nyquist =
      std::floor(static_cast<double>(n_points) * s.signal_wavelength / (1.1 * s.divergence) * 1e3) / 1e3;
  return std::max(by_aperture, std::min(by_wrap, by_nyquist));
}

TransverseGrid default_grid(const EraserSetup& s, std::size_t n_points) {
  return optics::make_grid(n_points, default_extent(s, n_points));
}

OpticalArm signal_arm(const EraserSetup& s, const TransverseGrid& grid) {
  return OpticalArm({Gap{s.d_A}, Mask{s.slit}, Gap{s.d_A_prime}}, grid, s.signal_wavelength, "signal");
}

OpticalArm ghost_arm(const EraserSetup& s, const TransverseGrid& grid) {
  return OpticalArm({Gap{s.d_B}, Lens{s.f}, Gap{s.d_B_prime()}}, grid, s.signal_wavelength, "ghost");
}

OpticalArm fourier_arm(const EraserSetup& s, const TransverseGrid& grid) {
  return OpticalArm({Gap{s.d_B}, Lens{s.f}, Gap{s.d_NPBS}, Gap{s.d_Lprime}, Lens{s.f_T_prime}, Gap{s.z_T}}, grid,
                    s.signal_wavelength, "fourier");
}

OpticalArm erase_arm(const EraserSetup& s, const TransverseGrid& grid) {
  return OpticalArm({Gap{s.d_B}, Lens{s.f}, Gap{s.d_NPBS}, Gap{s.d_Lprime}, Lens{s.f_T_prime}, Gap{s.z_T},
                     Pinhole{s.pinhole_T_diameter}},
                    grid, s.signal_wavelength, "erase");
}

OpticalArm read_arm(const EraserSetup& s, const TransverseGrid& grid) {
  return OpticalArm({Gap{s.d_B}, Lens{s.f}, Gap{s.d_NPBS}, Gap{s.d_Lprime}, Lens{s.f_R_prime}, Gap{s.z_R},
                     Pinhole{s.pinhole_R_diameter.value_or(grid.extent())}},
                    grid, s.signal_wavelength, "read");
}

biphoton::BiphotonSource make_source(const EraserSetup& s, const TransverseGrid& grid) {
  return biphoton::BiphotonSource::from_divergence(s.signal_wavelength, s.divergence, grid);
}

double analytic_erase(const EraserSetup& s, double x1) {
  const auto& ds = double_slit_of(s);
  const double scale = pi * x1 / (s.signal_wavelength * s.d_A_prime);
  const double beta = scale * ds.width;
  const double sinc = beta == 0.0 ? 1.0 : std::sin(beta) / beta;
  const double c = std::cos(scale * ds.separation);
  return sinc * sinc * c * c;
}

// ---------------------------------------------------------------------------

PatternRecord make_pattern(std::vector<double> positions, std::vector<double> rates, PatternKind kind,
                           double fringe_period) {
  if (positions.size() != rates.size()) throw std::invalid_argument("pattern: positions and rates differ in length");
  if (positions.size() < 2) throw std::invalid_argument("pattern: need at least two samples");
  const double h = (positions.back() - positions.front()) / static_cast<double>(positions.size() - 1);
  if (!(h > 0.0)) throw std::invalid_argument("pattern: positions must increase");
  for (std::size_t i = 1; i < positions.size(); ++i)
    if (std::abs(positions[i] - positions[i - 1] - h) > 1e-6 * h)
      throw std::invalid_argument("pattern: positions must be uniformly spaced");
  const double peak = *std::max_element(rates.begin(), rates.end());
  if (!(peak > 0.0)) throw std::domain_error("pattern: all rates are zero");
  for (double& r : rates) {
    if (!(r >= 0.0)) throw std::invalid_argument("pattern: rates must be non-negative");
    r /= peak;
  }
  return PatternRecord{std::move(positions), std::move(rates), kind, fringe_period};
}

namespace {

double spacing(const PatternRecord& p) {
  return (p.positions.back() - p.positions.front()) / static_cast<double>(p.positions.size() - 1);
}

}  // namespace

double visibility(const PatternRecord& p) {
  const double period = p.fringe_period;
  if (!(period > 0.0)) throw std::invalid_argument("visibility: fringe period must be positive");
  if (p.positions.size() < 2) throw std::invalid_argument("visibility: insufficient range");
  const double h = spacing(p);
  const double tol = 1e-9 * h;
  if (p.positions.front() > -0.5 * period + 0.5 * h + tol || p.positions.back() < 0.5 * period - 0.5 * h - tol)
    throw std::invalid_argument("visibility: insufficient range, positions must reach +-P/2");

  const double reach = 0.5 * period + 0.5 * h + tol;
  double hi = -1.0;
  double lo = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < p.positions.size(); ++i) {
    if (std::abs(p.positions[i]) > reach) continue;
    const double r = p.rates[i];
    if (!any) {
      hi = lo = r;
      any = true;
    }
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  if (!any || hi + lo <= 0.0) return 0.0;
  return (hi - lo) / (hi + lo);
}

PatternRecord smear_with_detector(const PatternRecord& p, double width) {
  if (!(width >= 0.0) || !std::isfinite(width)) throw std::invalid_argument("smear: width must be non-negative");
  const std::size_t n = p.positions.size();
  if (n < 2) throw std::invalid_argument("smear: pattern too short");
  const double x0 = p.positions.front();
  const double x_end = p.positions.back();
  if (width >= x_end - x0) throw std::invalid_argument("smear: detector width exceeds the pattern span");
  if (width == 0.0) return p;

  const double h = spacing(p);
  const auto& f = p.rates;
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) cumulative[i] = cumulative[i - 1] + 0.5 * h * (f[i - 1] + f[i]);

  // Integral of the linear interpolant from x0 to t.
  auto integral = [&](double t) {
    double s = std::floor((t - x0) / h);
    s = std::clamp(s, 0.0, static_cast<double>(n - 2));
    const auto i = static_cast<std::size_t>(s);
    const double u = t - (x0 + static_cast<double>(i) * h);
    return cumulative[i] + f[i] * u + (f[i + 1] - f[i]) * u * u / (2.0 * h);
  };

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::max(x0, p.positions[i] - 0.5 * width);
    const double b = std::min(x_end, p.positions[i] + 0.5 * width);
    out[i] = (integral(b) - integral(a)) / (b - a);
  }
  return make_pattern(p.positions, std::move(out), p.kind, p.fringe_period);
}

double measured_fringe_period(const PatternRecord& p) {
  const double period = p.fringe_period;
  if (!(period > 0.0)) throw std::invalid_argument("measured_fringe_period: fringe period must be positive");
  if (p.positions.front() > -0.75 * period || p.positions.back() < 0.75 * period)
    throw std::invalid_argument("measured_fringe_period: pattern does not reach 3P/4");
  const double h = spacing(p);

  auto dark_fringe = [&](double target) {
    std::size_t best = p.positions.size();
    for (std::size_t i = 1; i + 1 < p.positions.size(); ++i) {
      if (std::abs(p.positions[i] - target) > 0.25 * period) continue;
      if (best == p.positions.size() || p.rates[i] < p.rates[best]) best = i;
    }
    if (best == p.positions.size()) throw std::invalid_argument("measured_fringe_period: no samples near P/2");
    const double a = p.rates[best - 1], b = p.rates[best], c = p.rates[best + 1];
    const double curvature = a - 2.0 * b + c;
    const double shift = curvature > 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    return p.positions[best] + std::clamp(shift, -0.5, 0.5) * h;
  };
  return dark_fringe(0.5 * period) - dark_fringe(-0.5 * period);
}

double max_deviation_from_mean(const PatternRecord& p, double half_width) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.positions.size(); ++i)
    if (std::abs(p.positions[i]) <= half_width) {
      sum += p.rates[i];
      ++n;
    }
  if (n == 0 || !(sum > 0.0)) throw std::invalid_argument("max_deviation_from_mean: no samples in range");
  const double mean = sum / static_cast<double>(n);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.positions.size(); ++i)
    if (std::abs(p.positions[i]) <= half_width) worst = std::max(worst, std::abs(p.rates[i] - mean) / mean);
  return worst;
}

double rms_against_analytic(const EraserSetup& setup, const PatternRecord& p, double half_width) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.positions.size(); ++i) {
    if (std::abs(p.positions[i]) > half_width) continue;
    const double d = p.rates[i] - analytic_erase(setup, p.positions[i]);
    s += d * d;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("rms_against_analytic: no samples in range");
  return std::sqrt(s / static_cast<double>(n));
}

double normalized_cross_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation: profiles differ in length");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw std::invalid_argument("correlation: constant profile");
  return sab / std::sqrt(saa * sbb);
}

// ---------------------------------------------------------------------------

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "PASS";
    case CheckStatus::fail:
      return "FAIL";
    case CheckStatus::info:
      return "INFO";
  }
  return "?";
}

bool AuditReport::passed() const noexcept {
  return std::none_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.status == CheckStatus::fail; });
}

const AuditCheck& AuditReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("audit: no check named " + name);
}

std::string AuditReport::to_text() const {
  std::string out;
  char value[64];
  for (const auto& c : checks) {
    std::snprintf(value, sizeof value, "%.6g", c.value);
    out += to_string(c.status) + " " + c.name + " " + value + " " + c.detail + "\n";
  }
  return out;
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

AuditCheck fourier_check(const std::string& name, double object_distance, double f_prime, double z_actual) {
  try {
    const double z = optics::fourier_plane_distance(object_distance, f_prime);
    const double dev = std::abs(z_actual - z) / std::abs(z);
    const CheckStatus st = dev <= 1e-9 ? CheckStatus::pass : dev <= 0.015 ? CheckStatus::info : CheckStatus::fail;
    return {name, st, dev, fmt("relative offset; lens-to-detector %.6g m, Fourier plane at %.6g m", z_actual, z)};
  } catch (const std::exception& e) {
    return {name, CheckStatus::fail, 0.0, e.what()};
  }
}

}  // namespace

AuditReport geometry_audit(const EraserSetup& s) {
  AuditReport r;
  const double object = s.d_A + s.d_B;
  const double image = s.d_B_prime();

  const double residual = 1.0 / object + 1.0 / image - 1.0 / s.f;
  r.checks.push_back({"two_photon_lens_equation",
                      std::abs(residual * s.f) <= 1e-9 ? CheckStatus::pass : CheckStatus::fail, residual,
                      fmt("1/(d_A+d_B) + 1/d_B' - 1/f in 1/m; d_A+d_B=%.6g m, d_B'=%.6g m", object, image)});

  const double mag_err = std::max(std::abs(object - 2.0 * s.f), std::abs(image - 2.0 * s.f)) / (2.0 * s.f);
  r.checks.push_back({"unit_magnification", mag_err <= 1e-9 ? CheckStatus::pass : CheckStatus::fail, mag_err,
                      fmt("max relative offset of d_A+d_B and d_B' from 2f=%.6g m", 2.0 * s.f)});

  r.checks.push_back(fourier_check("fourier_plane_T", image - s.f, s.f_T_prime, s.z_T));
  r.checks.push_back(fourier_check("fourier_plane_R", image - s.f, s.f_R_prime, s.z_R));

  if (const auto* ds = std::get_if<optics::DoubleSlit>(&s.slit.shape())) {
    const double slit_angle = s.signal_wavelength / ds->separation;
    const double ratio = s.divergence / slit_angle;
    r.checks.push_back(
        {"divergence_margin", ratio >= 5.0 ? CheckStatus::pass : CheckStatus::fail, ratio,
         fmt("divergence / (lambda/d); lambda/d=%.6g rad, divergence=%.6g rad", slit_angle, s.divergence)});
  } else {
    r.checks.push_back({"divergence_margin", CheckStatus::info, 0.0, "no double slit"});
  }
  return r;
}

}  // namespace eraser::presets
