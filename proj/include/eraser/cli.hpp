#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "eraser/biphoton.hpp"
#include "eraser/coincidence.hpp"
#include "eraser/config.hpp"

namespace eraser::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitAuditFail = 3;

/// Grid for a config: its n_points with the configured or default extent.
optics::TransverseGrid grid_for(const RunConfig& config);

/// Everything the Monte Carlo stage produces.
struct McResult {
  double pattern_bin_width;  // m, an odd multiple of the grid spacing
  std::vector<mc::EventRecord> events;
  mc::McaHistogram histogram;
  std::optional<presets::PatternRecord> erase;  // set when both windows exist and are disjoint
  std::optional<presets::PatternRecord> read;
};

/// Builds erase and read maps over the configured detector-1 scan range,
/// samples events, histograms dt and, when possible, the windowed patterns.
/// Configured windows override the proposed ones.
McResult run_monte_carlo(const RunConfig& config, const optics::TransverseGrid& grid);

/// Runs one experiment, writing CSVs, reports and summary.txt under
/// output_dir and a short log to `log`. Returns kExitAuditFail when an
/// audit-mode check fails. Throws ConfigError for unusable configs or
/// output paths.
int run(const RunConfig& config, std::ostream& log);

/// Command-line front end; returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eraser::cli
