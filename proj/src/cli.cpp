#include "eraser/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include "eraser/csv.hpp"

namespace eraser::cli {

namespace fs = std::filesystem;
using biphoton::centered_range;
using biphoton::IndexRange;
using biphoton::MapWindow;

optics::TransverseGrid grid_for(const RunConfig& c) {
  const double extent = c.grid.extent.value_or(presets::default_extent(c.setup, c.grid.n_points));
  return optics::make_grid(c.grid.n_points, extent);
}

namespace {

double period_of(const presets::EraserSetup& s) {
  try {
    return presets::fringe_period(s);
  } catch (const std::invalid_argument&) {
    throw ConfigError("this experiment needs a double-slit setup");
  }
}

std::vector<double> positions_of(const biphoton::BiphotonMap& map) { return {map.x1().begin(), map.x1().end()}; }

}  // namespace

McResult run_monte_carlo(const RunConfig& c, const optics::TransverseGrid& grid) {
  const auto& s = c.setup;
  const double period = period_of(s);
  const double bin = mc::odd_sample_bin(grid.dx(), c.mc.pattern_bin_width.value_or(period / 8.0));
  const long per_bin = std::lround(bin / grid.dx());
  const long bins_each_side = static_cast<long>(std::ceil(c.mc.scan_half_width_periods * period / bin));
  const long half = bins_each_side * per_bin + (per_bin - 1) / 2;
  const long n = static_cast<long>(grid.size());
  if (2 * half + 1 > n) throw ConfigError("mc: detector-1 scan range exceeds the grid");
  const MapWindow window{IndexRange{static_cast<std::size_t>(n / 2 - half), static_cast<std::size_t>(2 * half + 1)},
                         std::nullopt};

  const auto source = presets::make_source(s, grid);
  const auto arm1 = presets::signal_arm(s, grid);
  const auto map_T = biphoton::biphoton_map(arm1, presets::erase_arm(s, grid), source, window);
  const auto map_R = biphoton::biphoton_map(arm1, presets::read_arm(s, grid), source, window);

  McResult r;
  r.pattern_bin_width = bin;
  const auto optics = mc::choice_optics(s, c.mc.jitter_fwhm, c.mc.splitter_ratio);
  r.events = mc::sample_events(map_T, map_R, optics, c.mc.n_events, c.mc.seed);
  r.histogram = mc::build_mca(r.events, c.mc.bin_width);
  if (c.mc.window_T) r.histogram.window_T = c.mc.window_T;
  if (c.mc.window_R) r.histogram.window_R = c.mc.window_R;

  const auto& h = r.histogram;
  if (h.window_T && h.window_R && !h.window_T->overlaps(*h.window_R)) {
    auto [erase, read] = mc::windowed_patterns(r.events, h, mc::PatternBinning{bin, period});
    r.erase = std::move(erase);
    r.read = std::move(read);
  }
  return r;
}

namespace {

class Runner {
public:
  Runner(const RunConfig& c, std::ostream& log) : c_(c), log_(log), grid_(grid_for(c)), dir_(c.output_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError("cannot create output directory " + dir_.string());
    write("config.json", [&](std::ostream& os) { os << serialize(c_); });
  }

  int execute() {
    int status = kExitOk;
    switch (c_.experiment) {
      case Experiment::ghost_image:
        ghost_image();
        break;
      case Experiment::erase:
        erase();
        break;
      case Experiment::read:
        read();
        break;
      case Experiment::mca:
        monte_carlo(false);
        break;
      case Experiment::audit:
        status = audit() ? kExitOk : kExitAuditFail;
        break;
      case Experiment::full_eraser:
        audit();
        erase();
        read();
        monte_carlo(true);
        break;
    }
    write("summary.txt", [&](std::ostream& os) { os << summary_.str(); });
    log_ << summary_.str();
    return status;
  }

private:
  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + path.string());
    body(os);
    os.flush();
    if (!os) throw ConfigError("cannot write " + path.string());
    log_ << "wrote " << path.string() << '\n';
  }

  void note(const std::string& key, double value) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    summary_ << key << " = " << buf << '\n';
  }

  void note(const std::string& key, const std::string& value) { summary_ << key << " = " << value << '\n'; }

  bool audit() {
    const auto geometry = presets::geometry_audit(c_.setup);
    const auto timing = mc::delayed_choice_audit(c_.setup, c_.mc.jitter_fwhm);
    write("audit.txt", [&](std::ostream& os) { os << geometry.to_text() << timing.to_text(); });
    const bool ok = geometry.passed() && timing.passed;
    note("audit", ok ? "PASS" : "FAIL");
    note("delayed_choice_margin_s", timing.margin);
    return ok;
  }

  void ghost_image() {
    const auto& s = c_.setup;
    double reach = 0.0;
    if (const auto* ds = std::get_if<optics::DoubleSlit>(&s.slit.shape()))
      reach = ds->separation + ds->width;
    else if (const auto* ss = std::get_if<optics::SingleSlit>(&s.slit.shape()))
      reach = std::abs(ss->center) + ss->width;
    else
      throw ConfigError("ghost_image needs a slit mask");

    const MapWindow window{centered_range(grid_, 1e-3), centered_range(grid_, 2.0 * reach)};
    const auto map = biphoton::biphoton_map(presets::signal_arm(s, grid_), presets::ghost_arm(s, grid_),
                                            presets::make_source(s, grid_), window);
    const std::size_t row = map.rows() / 2;
    std::vector<double> profile(map.cols());
    for (std::size_t j = 0; j < map.cols(); ++j) profile[j] = map.g2(row, j);
    const auto ghost =
        presets::make_pattern({map.x2().begin(), map.x2().end()}, profile, presets::PatternKind::ghost, 0.0);

    const auto t = optics::sample_mask(s.slit, grid_);
    std::vector<double> a, b;
    for (std::size_t j = 0; j < map.cols(); ++j) {
      if (std::abs(map.x2()[j]) > reach) continue;
      const double tj = t[window.x2->first + j];
      a.push_back(ghost.rates[j]);
      b.push_back(tj * tj);
    }
    write("ghost_profile.csv", [&](std::ostream& os) { csv::write_pattern(os, ghost, "x2_m"); });
    write("ghost_map.csv", [&](std::ostream& os) { csv::write_map(os, map); });
    note("ghost_ncc", presets::normalized_cross_correlation(a, b));
  }

  void erase() {
    const auto& s = c_.setup;
    const double period = period_of(s);
    const double lobe = presets::envelope_half_width(s);
    const double pinhole = s.pinhole_T_diameter.value_or(grid_.dx());
    const MapWindow window{centered_range(grid_, lobe), centered_range(grid_, std::max(grid_.dx(), 0.5 * pinhole))};
    const auto map = biphoton::biphoton_map(presets::signal_arm(s, grid_), presets::erase_arm(s, grid_),
                                            presets::make_source(s, grid_), window);
    const auto x1 = positions_of(map);
    const auto pattern =
        presets::make_pattern(x1, biphoton::erase_pattern(map, 0.0), presets::PatternKind::erase, period);
    std::vector<double> ideal(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) ideal[i] = presets::analytic_erase(s, x1[i]);
    const auto analytic = presets::make_pattern(x1, ideal, presets::PatternKind::erase, period);
    const auto detector = presets::smear_with_detector(pattern, s.detector1_width);

    write("erase_pattern.csv", [&](std::ostream& os) { csv::write_pattern(os, pattern); });
    write("erase_analytic.csv", [&](std::ostream& os) { csv::write_pattern(os, analytic); });
    write("erase_detector.csv", [&](std::ostream& os) { csv::write_pattern(os, detector); });
    note("erase_visibility", presets::visibility(pattern));
    note("erase_visibility_detector", presets::visibility(detector));
    note("erase_fringe_period_expected_m", period);
    note("erase_fringe_period_measured_m", presets::measured_fringe_period(pattern));
    note("erase_rms_vs_analytic", presets::rms_against_analytic(s, pattern, lobe));
  }

  void read() {
    const auto& s = c_.setup;
    const double period = period_of(s);
    const MapWindow window{centered_range(grid_, presets::envelope_half_width(s)), std::nullopt};
    const auto map = biphoton::biphoton_map(presets::signal_arm(s, grid_), presets::read_arm(s, grid_),
                                            presets::make_source(s, grid_), window);
    const auto pattern =
        presets::make_pattern(positions_of(map), biphoton::read_pattern(map), presets::PatternKind::read, period);
    write("read_pattern.csv", [&](std::ostream& os) { csv::write_pattern(os, pattern); });
    note("read_visibility", presets::visibility(pattern));
    note("read_max_deviation", presets::max_deviation_from_mean(pattern, 1.5 * period));
  }

  void monte_carlo(bool with_patterns) {
    const auto r = run_monte_carlo(c_, grid_);
    const auto& h = r.histogram;
    write("mca_histogram.csv", [&](std::ostream& os) { csv::write_histogram(os, h); });
    if (c_.mc.write_events) write("events.csv", [&](std::ostream& os) { csv::write_events(os, r.events); });

    std::size_t n_t = 0;
    for (const auto& e : r.events) n_t += e.choice == mc::Choice::T;
    note("mc_events", static_cast<double>(r.events.size()));
    note("mc_transmitted_fraction", static_cast<double>(n_t) / static_cast<double>(r.events.size()));
    note("mca_peaks", static_cast<double>(h.peaks.size()));
    for (const auto& p : h.peaks) {
      const std::string tag = p.label ? mc::to_string(*p.label) : "unlabeled";
      note("mca_peak_" + tag + "_center_s", p.center);
      note("mca_peak_" + tag + "_fwhm_s", p.fwhm);
    }
    if (h.peaks.size() == 2) note("mca_peak_separation_s", std::abs(h.peaks[0].center - h.peaks[1].center));
    const auto optics = mc::choice_optics(c_.setup, c_.mc.jitter_fwhm, c_.mc.splitter_ratio);
    note("mca_expected_separation_s", std::abs(optics.delay_T - optics.delay_R));
    if (!with_patterns) return;

    if (!r.erase || !r.read) {
      note("mc_patterns", "unavailable: T and R windows missing or overlapping");
      return;
    }
    const double period = period_of(c_.setup);
    write("mc_erase_pattern.csv", [&](std::ostream& os) { csv::write_pattern(os, *r.erase); });
    write("mc_read_pattern.csv", [&](std::ostream& os) { csv::write_pattern(os, *r.read); });
    const auto leak = mc::cross_contamination(r.events, h);
    note("mc_pattern_bin_width_m", r.pattern_bin_width);
    note("mc_erase_visibility", presets::visibility(*r.erase));
    note("mc_read_max_deviation", presets::max_deviation_from_mean(*r.read, 1.5 * period));
    note("mc_T_in_R_window", leak.t_in_r);
    note("mc_R_in_T_window", leak.r_in_t);
  }

  const RunConfig& c_;
  std::ostream& log_;
  optics::TransverseGrid grid_;
  fs::path dir_;
  std::ostringstream summary_;
};

}  // namespace

int run(const RunConfig& config, std::ostream& log) {
  try {
    presets::validate(config.setup);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  Runner runner(config, log);
  return runner.execute();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delayed-choice quantum eraser simulator"};
  std::string config_path, preset, experiment, output_dir;
  std::optional<std::size_t> events, grid_n;
  std::optional<std::uint64_t> seed;
  std::optional<double> extent;
  bool write_events = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--preset", preset, "paper-1 or paper-2");
  app.add_option("--experiment", experiment, "ghost_image, erase, read, mca, audit or full_eraser");
  app.add_option("--events", events, "Monte Carlo event count");
  app.add_option("--seed", seed, "Monte Carlo seed");
  app.add_option("--grid-n", grid_n, "grid points (power of two)");
  app.add_option("--extent", extent, "grid extent in meters");
  app.add_option("--out", output_dir, "output directory");
  app.add_flag("--write-events", write_events, "also write events.csv");

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.emplace_back("eraser_sim");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    RunConfig c;
    if (!config_path.empty()) {
      c = parse_config(config_path);
      if (!preset.empty()) {
        c.preset = preset;
        c.setup = preset_setup(preset);
      }
    } else if (!preset.empty()) {
      c.preset = preset;
      c.setup = preset_setup(preset);
    } else {
      throw ConfigError("give --config <file> or --preset <name>");
    }
    if (!experiment.empty()) c.experiment = parse_experiment(experiment);
    if (events) {
      if (*events == 0) throw ConfigError("--events must be positive");
      c.mc.n_events = *events;
    }
    if (seed) c.mc.seed = *seed;
    if (grid_n) {
      if (*grid_n < 2 || (*grid_n & (*grid_n - 1)) != 0) throw ConfigError("--grid-n must be a power of two >= 2");
      c.grid.n_points = *grid_n;
    }
    if (extent) {
      if (!(*extent > 0.0)) throw ConfigError("--extent must be positive");
      c.grid.extent = *extent;
    }
    if (!output_dir.empty()) c.output_dir = output_dir;
    if (write_events) c.mc.write_events = true;
    return run(c, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace eraser::cli
