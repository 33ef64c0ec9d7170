// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "eraser/biphoton.hpp"
#include "eraser/cli.hpp"
#include "eraser/coincidence.hpp"
#include "eraser/optics.hpp"
#include "eraser/presets.hpp"

using namespace eraser;
using biphoton::centered_range;
using biphoton::MapWindow;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kGhostNcc = 0.95;
constexpr double kGhostSeconds = 60.0;
constexpr double kEraseRms = 0.02;
constexpr double kReadFlatness = 0.02;
constexpr double kKlyshkoRms = 1e-6;
constexpr double kZrInfo = 0.015;
constexpr double kDivergenceRatio = 5.0;
constexpr double kMargin = 1.684e-9;
constexpr double kMarginTolerance = 0.05e-9;
constexpr double kJitterFwhm = 1e-9;
constexpr double kFwhmTolerance = 0.10;
constexpr double kSplitTolerance = 0.002;
constexpr double kMcVisibility = 0.95;
constexpr double kMcReadFlatness = 0.03;
constexpr double kMcSeconds = 120.0;
constexpr double kMeasuredVisibility[] = {0.85, 0.95};

__attribute__((format(printf, 1, 2))) std::string format(const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

struct Line {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& text) {
    if (!detail.str().empty()) detail << "; ";
    detail << text << (ok ? "" : " [FAIL]");
    pass = pass && ok;
  }
};

int failures = 0;

void criterion(int n, const char* title, const std::function<void(Line&)>& body) {
  Line line;
  try {
    body(line);
  } catch (const std::exception& e) {
    line.require(false, format("error: %s", e.what()));
  }
  if (!line.pass) ++failures;
  std::printf("%s %d %s: %s\n", line.pass ? "PASS" : "FAIL", n, title, line.detail.str().c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double relative_rms_normalized(const std::vector<double>& a, const std::vector<double>& b) {
  const double pa = *std::max_element(a.begin(), a.end());
  const double pb = *std::max_element(b.begin(), b.end());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] / pa - b[i] / pb) * (a[i] / pa - b[i] / pb);
    den += (b[i] / pb) * (b[i] / pb);
  }
  return std::sqrt(num / den);
}

presets::PatternRecord numeric_erase(const presets::EraserSetup& s, const optics::TransverseGrid& grid) {
  const MapWindow window{centered_range(grid, presets::envelope_half_width(s)), centered_range(grid, 0.0)};
  const auto map = biphoton::biphoton_map(presets::signal_arm(s, grid), presets::erase_arm(s, grid),
                                          presets::make_source(s, grid), window);
  return presets::make_pattern({map.x1().begin(), map.x1().end()}, biphoton::erase_pattern(map, 0.0),
                               presets::PatternKind::erase, presets::fringe_period(s));
}

presets::PatternRecord numeric_read(const presets::EraserSetup& s, const optics::TransverseGrid& grid) {
  const MapWindow window{centered_range(grid, presets::envelope_half_width(s)), std::nullopt};
  const auto map = biphoton::biphoton_map(presets::signal_arm(s, grid), presets::read_arm(s, grid),
                                          presets::make_source(s, grid), window);
  return presets::make_pattern({map.x1().begin(), map.x1().end()}, biphoton::read_pattern(map),
                               presets::PatternKind::read, presets::fringe_period(s));
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  setenv("ERASER_SIM_THREADS", "1", 1);
  const presets::EraserSetup sets[] = {presets::paper_setup(1), presets::paper_setup(2)};

  criterion(1, "ghost image", [&](Line& line) {
    const auto& s = sets[0];
    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = presets::default_grid(s, 4096);
    const double reach = 470e-6 + 150e-6;
    const MapWindow window{centered_range(grid, 0.0), centered_range(grid, reach)};
    const auto map = biphoton::biphoton_map(presets::signal_arm(s, grid), presets::ghost_arm(s, grid),
                                            presets::make_source(s, grid), window);
    std::vector<double> image(map.cols()), target(map.cols());
    const auto t = optics::sample_mask(s.slit, grid);
    for (std::size_t j = 0; j < map.cols(); ++j) {
      image[j] = map.g2(0, j);
      target[j] = t[window.x2->first + j] * t[window.x2->first + j];
    }
    const double ncc = presets::normalized_cross_correlation(image, target);
    const double elapsed = seconds_since(t0);
    line.require(ncc >= kGhostNcc, format("NCC %.4f >= %.2f at n=4096", ncc, kGhostNcc));
    line.require(elapsed <= kGhostSeconds, format("%.2f s <= %.0f s on 1 thread", elapsed, kGhostSeconds));
  });

  criterion(2, "erase oracle", [&](Line& line) {
    const double quoted[] = {2.44e-3, 4.58e-3};
    for (int k = 0; k < 2; ++k) {
      const auto& s = sets[k];
      const auto grid = presets::default_grid(s, 4096);
      const auto pattern = numeric_erase(s, grid);
      const double rms = presets::rms_against_analytic(s, pattern, presets::envelope_half_width(s));
      const double expected = presets::fringe_period(s);
      const double measured = presets::measured_fringe_period(pattern);
      line.require(rms <= kEraseRms, format("set %d RMS %.4f <= %.2f", k + 1, rms, kEraseRms));
      line.require(std::abs(measured - expected) <= grid.dx(), format("period %.4f mm vs %.4f mm within dx %.1f um",
                                                                      measured * 1e3, expected * 1e3, grid.dx() * 1e6));
      line.require(std::abs(expected - quoted[k]) < 0.005e-3,
                   format("lambda d_A'/d rounds to %.2f mm", quoted[k] * 1e3));
    }
  });

  criterion(3, "read flatness", [&](Line& line) {
    for (int k = 0; k < 2; ++k) {
      const auto& s = sets[k];
      const auto pattern = numeric_read(s, presets::default_grid(s, 4096));
      const double dev = presets::max_deviation_from_mean(pattern, 1.5 * presets::fringe_period(s));
      line.require(dev <= kReadFlatness,
                   format("set %d max deviation %.4f <= %.2f over |x1| <= 1.5P", k + 1, dev, kReadFlatness));
    }
  });

  criterion(4, "Klyshko equivalence", [&](Line& line) {
    const auto& s = sets[0];
    const auto grid = presets::default_grid(s, 1024);
    const auto source = presets::make_source(s, grid);
    const auto arm1 = presets::signal_arm(s, grid);
    struct Case {
      const char* label;
      biphoton::OpticalArm arm2;
      std::vector<double> x2;
    };
    const Case cases[] = {{"reading", presets::read_arm(s, grid), {0.0, 0.31e-3, -1.7e-3}},
                          {"erasing", presets::erase_arm(s, grid), {0.0}}};
    for (const auto& c : cases) {
      const auto map = biphoton::biphoton_map(arm1, c.arm2, source);
      double worst = 0.0;
      for (double x2 : c.x2) {
        const std::size_t j = grid.nearest_index(x2);
        const auto unfolded = biphoton::klyshko_unfold(arm1, c.arm2, source, x2);
        std::vector<double> a(grid.size()), b(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
          a[i] = std::norm(unfolded.values()[i]);
          b[i] = map.g2(i, j);
        }
        worst = std::max(worst, relative_rms_normalized(a, b));
      }
      line.require(worst <= kKlyshkoRms, format("%s relative RMS %.2e <= %.0e", c.label, worst, kKlyshkoRms));
    }
  });

  criterion(5, "geometry audit", [&](Line& line) {
    for (int k = 0; k < 2; ++k) {
      const auto& s = sets[k];
      const auto report = presets::geometry_audit(s);
      const double residual = report.at("two_photon_lens_equation").value;
      line.require(residual == 0.0 && report.at("two_photon_lens_equation").status == presets::CheckStatus::pass,
                   format("set %d lens residual %g", k + 1, residual));
      const double object = s.d_B_prime() - s.f;
      const double z_t = optics::fourier_plane_distance(object, s.f_T_prime);
      line.require(z_t == 0.5 && report.at("fourier_plane_T").status == presets::CheckStatus::pass,
                   format("z_T %.6f m", z_t));
      const double z_r = optics::fourier_plane_distance(object, s.f_R_prime);
      const auto& r = report.at("fourier_plane_R");
      line.require(r.status == presets::CheckStatus::info && r.value <= kZrInfo,
                   format("z_R %.2f mm vs 55 mm INFO %.2f%%", z_r * 1e3, r.value * 100.0));
      const double ratio = report.at("divergence_margin").value;
      line.require(ratio >= kDivergenceRatio, format("divergence ratio %.2f >= %.0f", ratio, kDivergenceRatio));
      line.require(report.passed(), format("audit passed"));
    }
  });

  criterion(6, "delayed-choice timing", [&](Line& line) {
    const auto report = mc::delayed_choice_audit(sets[0], kJitterFwhm);
    line.require(
        std::abs(report.margin - kMargin) <= kMarginTolerance,
        format("margin %.4f ns vs %.3f +- %.2f ns", report.margin * 1e9, kMargin * 1e9, kMarginTolerance * 1e9));
    line.require(report.passed, format("%s against %.0f ns FWHM", report.passed ? "PASS" : "FAIL", kJitterFwhm * 1e9));
  });

  criterion(7, "Monte Carlo", [&](Line& line) {
    cli::RunConfig config;
    config.preset = "paper-1";
    config.setup = sets[0];
    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = cli::grid_for(config);
    const auto r = cli::run_monte_carlo(config, grid);
    const double elapsed = seconds_since(t0);
    const auto& h = r.histogram;
    line.require(h.peaks.size() == 2, format("%zu MCA peaks", h.peaks.size()));
    for (const auto& p : h.peaks)
      line.require(std::abs(p.fwhm - kJitterFwhm) <= kFwhmTolerance * kJitterFwhm,
                   format("%s FWHM %.3f ns", p.label ? mc::to_string(*p.label) : "?", p.fwhm * 1e9));
    std::size_t n_t = 0;
    for (const auto& e : r.events) n_t += e.choice == mc::Choice::T;
    const double split = static_cast<double>(n_t) / static_cast<double>(r.events.size());
    line.require(std::abs(split - 0.5) <= kSplitTolerance, format("T fraction %.5f of %zu", split, r.events.size()));
    if (!r.erase || !r.read) {
      line.require(false, format("no windowed patterns"));
      return;
    }
    const double v = presets::visibility(*r.erase);
    const double flat = presets::max_deviation_from_mean(*r.read, 1.5 * presets::fringe_period(sets[0]));
    line.require(v >= kMcVisibility, format("erase visibility %.4f >= %.2f", v, kMcVisibility));
    line.require(flat <= kMcReadFlatness, format("read deviation %.4f <= %.2f", flat, kMcReadFlatness));
    line.require(elapsed <= kMcSeconds, format("%.2f s <= %.0f s", elapsed, kMcSeconds));
  });

  criterion(8, "detector smearing", [&](Line& line) {
    for (int k = 0; k < 2; ++k) {
      const auto& s = sets[k];
      const auto pattern = numeric_erase(s, presets::default_grid(s, 4096));
      const double v200 = presets::visibility(presets::smear_with_detector(pattern, s.detector1_width));
      line.require(v200 >= kMeasuredVisibility[k],
                   format("set %d V(200 um) %.4f >= %.2f", k + 1, v200, kMeasuredVisibility[k]));
      double previous = presets::visibility(pattern);
      bool monotone = true;
      for (double w = 25e-6; w <= 1e-3 + 1e-9; w += 25e-6) {
        const double v = presets::visibility(presets::smear_with_detector(pattern, w));
        monotone = monotone && v <= previous + 1e-12;
        previous = v;
      }
      line.require(monotone, format("monotone over 0..1 mm"));
    }
  });

  criterion(9, "determinism", [&](Line& line) {
    const auto root = fs::temp_directory_path() / "eraser_acceptance";
    fs::remove_all(root);
    std::ostringstream log;
    for (const char* name : {"a", "b"}) {
      cli::RunConfig config;
      config.preset = "paper-1";
      config.mc.n_events = 200'000;
      config.output_dir = (root / name).string();
      if (cli::run(config, log) != cli::kExitOk) throw std::runtime_error("run failed");
    }
    std::size_t compared = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      identical += slurp(entry.path()) == slurp(root / "b" / entry.path().filename());
    }
    line.require(compared > 0 && identical == compared, format("%zu of %zu CSVs byte-identical", identical, compared));
    fs::remove_all(root);
  });

  std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
