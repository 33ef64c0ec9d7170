#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eraser/biphoton.hpp"
#include "eraser/presets.hpp"

namespace eraser::mc {

inline constexpr double kSpeedOfLight = 299792458.0;
/// FWHM of a Gaussian divided by its standard deviation, 2 sqrt(2 ln 2).
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

/// Which splitter output the idler took: T erases, R reads.
enum class Choice { T, R };
const char* to_string(Choice c);

/// Splitter and timing chain between detector 2 and the TAC stop input.
struct ChoiceOptics {
  double splitter_ratio = 0.5;  // probability of transmission
  double delay_T = 0.0;         // s
  double delay_R = 0.0;         // s
  double jitter_fwhm = 1e-9;    // s; zero gives exact delays
};

/// Throws unless 0 <= ratio <= 1, delays finite and jitter >= 0.
void validate(const ChoiceOptics& optics);
/// Delays from the fiber lengths and index of the setup.
ChoiceOptics choice_optics(const presets::EraserSetup& setup, double jitter_fwhm = 1e-9, double splitter_ratio = 0.5);

struct EventRecord {
  std::uint64_t index;
  Choice choice;
  double x1;
  double x2;
  double t1;  // TAC start, always 0
  double t2;
  double dt() const noexcept { return t2 - t1; }
};

/// Draws n_events coincidences.
///
/// Each event picks T with probability splitter_ratio, then (x1, x2) from
/// |A|^2 of that choice's map, then t2 = delay + Gaussian jitter. Events come
/// in fixed blocks with one std::mt19937_64 per block seeded from (seed,
/// block index), so output is identical for any thread count. Both maps must
/// share their x1 samples; throws on mismatch, n_events == 0 or an all-zero map
/// that can be selected.
std::vector<EventRecord> sample_events(const biphoton::BiphotonMap& map_T, const biphoton::BiphotonMap& map_R,
                                       const ChoiceOptics& optics, std::size_t n_events, std::uint64_t seed);

struct TimeWindow {
  double lo;
  double hi;
  bool contains(double t) const noexcept { return t >= lo && t <= hi; }
  bool overlaps(const TimeWindow& o) const noexcept { return lo <= o.hi && o.lo <= hi; }
  bool operator==(const TimeWindow&) const = default;
};

struct McaPeak {
  double center;  // s
  double fwhm;    // s
  std::uint64_t height;
  std::optional<Choice> label;  // majority choice of events within +-3 sigma
};

/// Histogram of dt on bins [origin + i w, origin + (i+1) w), origin a multiple of w.
struct McaHistogram {
  double bin_width = 0.0;
  double origin = 0.0;
  std::vector<std::uint64_t> counts;
  std::vector<McaPeak> peaks;  // at most two, in order of decreasing height
  std::optional<TimeWindow> window_T;
  std::optional<TimeWindow> window_R;

  double bin_center(std::size_t i) const noexcept { return origin + (static_cast<double>(i) + 0.5) * bin_width; }
  std::uint64_t total() const noexcept;
};

/// Bins dt, locates up to two peaks and proposes +-3 sigma windows for the T
/// and R peaks when both are found. Throws for bin_width <= 0 or no events.
McaHistogram build_mca(std::span<const EventRecord> events, double bin_width);

/// x1 binning for windowed patterns: bin j covers [(j - 1/2) w, (j + 1/2) w).
struct PatternBinning {
  double bin_width;
  double fringe_period;
};

/// Odd multiple of dx nearest to target, at least dx. Bins of this width
/// centered on x = 0 hold the same number of grid samples each.
double odd_sample_bin(double dx, double target);

/// x1 patterns of events whose dt falls in the T window (erase) and the R window (read).
/// Throws if either window is missing or they overlap.
std::pair<presets::PatternRecord, presets::PatternRecord> windowed_patterns(std::span<const EventRecord> events,
                                                                            const McaHistogram& histogram,
                                                                            const PatternBinning& binning);

/// Fraction of T events falling in the R window, and of R events in the T window.
struct Contamination {
  double t_in_r;
  double r_in_t;
};
Contamination cross_contamination(std::span<const EventRecord> events, const McaHistogram& histogram);

struct TimingReport {
  double margin;       // s, idler path beyond the signal path
  double jitter_fwhm;  // s
  bool passed;
  std::string to_text() const;
};

/// Idler arrival at the choice splitter minus signal arrival at detector 1,
/// ((d_B + d_NPBS) - (d_A + d_A')) / c. Passes when it exceeds the jitter FWHM.
TimingReport delayed_choice_audit(const presets::EraserSetup& setup, double jitter_fwhm = 1e-9);

}  // namespace eraser::mc
