#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eraser/coincidence.hpp"
#include "eraser/presets.hpp"

namespace eraser::cli {

/// Invalid or unreadable run configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { ghost_image, erase, read, mca, audit, full_eraser };
std::string to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

struct GridSettings {
  std::size_t n_points = 4096;
  std::optional<double> extent;  // m; unset picks presets::default_extent
  bool operator==(const GridSettings&) const = default;
};

struct McSettings {
  std::size_t n_events = 1'000'000;
  std::uint64_t seed = 42;
  double bin_width = 0.1e-9;  // s, MCA channel width
  double jitter_fwhm = 1e-9;  // s
  double splitter_ratio = 0.5;
  /// x1 bin for windowed patterns, m; unset uses the odd-sample bin nearest P/8.
  std::optional<double> pattern_bin_width;
  /// Half width of the detector-1 range sampled by the Monte Carlo, in fringe
  /// periods; the default covers the central three erase fringes.
  double scan_half_width_periods = 1.5;
  std::optional<mc::TimeWindow> window_T;
  std::optional<mc::TimeWindow> window_R;
  bool write_events = false;
  bool operator==(const McSettings&) const = default;
};

struct RunConfig {
  Experiment experiment = Experiment::full_eraser;
  std::optional<std::string> preset;  // "paper-1" or "paper-2"; setup then holds its values
  presets::EraserSetup setup = presets::paper_setup(1);
  GridSettings grid;
  McSettings mc;
  std::string output_dir = "out";
  bool operator==(const RunConfig&) const = default;
};

/// Setup for a named preset. Throws ConfigError for unknown names.
presets::EraserSetup preset_setup(std::string_view name);

/// Parses a JSON config. Top-level keys: experiment, preset or setup, grid,
/// mc, output_dir. Unknown keys, strings where numbers are expected and JSON
/// syntax errors throw ConfigError naming the key or line.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

/// JSON text that parse_config_text turns back into an equal config.
std::string serialize(const RunConfig& config);

}  // namespace eraser::cli
