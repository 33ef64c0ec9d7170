#include "eraser/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "eraser/parallel.hpp"

namespace eraser::mc {

const char* to_string(Choice c) { return c == Choice::T ? "T" : "R"; }

void validate(const ChoiceOptics& o) {
  if (!(o.splitter_ratio >= 0.0 && o.splitter_ratio <= 1.0))
    throw std::invalid_argument("choice optics: splitter ratio must lie in [0, 1]");
  if (!std::isfinite(o.delay_T) || !std::isfinite(o.delay_R))
    throw std::invalid_argument("choice optics: delays must be finite");
  if (!(o.jitter_fwhm >= 0.0) || !std::isfinite(o.jitter_fwhm))
    throw std::invalid_argument("choice optics: jitter must be non-negative");
}

ChoiceOptics choice_optics(const presets::EraserSetup& s, double jitter_fwhm, double splitter_ratio) {
  ChoiceOptics o;
  o.splitter_ratio = splitter_ratio;
  o.delay_T = s.fiber_length_T * s.fiber_index / kSpeedOfLight;
  o.delay_R = s.fiber_length_R * s.fiber_index / kSpeedOfLight;
  o.jitter_fwhm = jitter_fwhm;
  validate(o);
  return o;
}

namespace {

/// Inverse-CDF sampler over the cells of one map, row-major.
class CellSampler {
public:
  explicit CellSampler(const biphoton::BiphotonMap& map) : map_(map), cdf_(map.rows() * map.cols()) {
    double s = 0.0;
    for (std::size_t c = 0; c < cdf_.size(); ++c) {
      s += std::norm(map.data()[c]);
      cdf_[c] = s;
    }
  }

  bool empty() const noexcept { return cdf_.empty() || !(cdf_.back() > 0.0); }

  std::pair<double, double> draw(double u) const {
    const double target = u * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    if (it == cdf_.end()) --it;
    const auto c = static_cast<std::size_t>(it - cdf_.begin());
    return {map_.x1()[c / map_.cols()], map_.x2()[c % map_.cols()]};
  }

private:
  const biphoton::BiphotonMap& map_;
  std::vector<double> cdf_;
};

constexpr std::size_t kBlock = 1u << 16;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<EventRecord> sample_events(const biphoton::BiphotonMap& map_T, const biphoton::BiphotonMap& map_R,
                                       const ChoiceOptics& optics, std::size_t n_events, std::uint64_t seed) {
  validate(optics);
  if (n_events == 0) throw std::invalid_argument("sample_events: n_events must be positive");
  if (!std::equal(map_T.x1().begin(), map_T.x1().end(), map_R.x1().begin(), map_R.x1().end()))
    throw std::invalid_argument("sample_events: maps do not share their x1 samples");

  const CellSampler sampler_T(map_T);
  const CellSampler sampler_R(map_R);
  if (optics.splitter_ratio > 0.0 && sampler_T.empty())
    throw std::invalid_argument("sample_events: erase map has no coincidences");
  if (optics.splitter_ratio < 1.0 && sampler_R.empty())
    throw std::invalid_argument("sample_events: read map has no coincidences");

  const double sigma = optics.jitter_fwhm / kFwhmPerSigma;
  std::vector<EventRecord> events(n_events);
  const std::size_t n_blocks = (n_events + kBlock - 1) / kBlock;
  parallel_chunks(n_blocks, 1, [&](std::size_t block, std::size_t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> jitter(0.0, 1.0);
    const std::size_t begin = block * kBlock;
    const std::size_t end = std::min(n_events, begin + kBlock);
    for (std::size_t i = begin; i < end; ++i) {
      const bool transmitted = uniform01(rng) < optics.splitter_ratio;
      const auto [x1, x2] = (transmitted ? sampler_T : sampler_R).draw(uniform01(rng));
      const double noise = jitter(rng);
      const double delay = transmitted ? optics.delay_T : optics.delay_R;
      events[i] = EventRecord{i, transmitted ? Choice::T : Choice::R, x1, x2, 0.0, delay + sigma * noise};
    }
  });
  return events;
}

// ---------------------------------------------------------------------------

std::uint64_t McaHistogram::total() const noexcept {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

namespace {

/// Center and FWHM of the peak at bin `top`, from linearly interpolated half-maximum crossings.
std::pair<double, double> measure_peak(const McaHistogram& h, std::size_t top) {
  const double half = 0.5 * static_cast<double>(h.counts[top]);
  const auto value = [&](std::size_t i) { return static_cast<double>(h.counts[i]); };

  std::size_t l = top;
  while (l > 0 && value(l - 1) >= half) --l;
  double left = h.bin_center(l) - 0.5 * h.bin_width;
  if (l > 0) left = h.bin_center(l - 1) + (half - value(l - 1)) / (value(l) - value(l - 1)) * h.bin_width;

  std::size_t r = top;
  while (r + 1 < h.counts.size() && value(r + 1) >= half) ++r;
  double right = h.bin_center(r) + 0.5 * h.bin_width;
  if (r + 1 < h.counts.size()) right = h.bin_center(r) + (value(r) - half) / (value(r) - value(r + 1)) * h.bin_width;

  // Width at least one bin, so a jitter-free delta still gets a finite window.
  const double fwhm = std::max(right - left, h.bin_width);
  return {0.5 * (left + right), fwhm};
}

}  // namespace

McaHistogram build_mca(std::span<const EventRecord> events, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw std::invalid_argument("build_mca: bin width must be positive");
  if (events.empty()) throw std::invalid_argument("build_mca: no events");

  McaHistogram h;
  h.bin_width = bin_width;
  double lo = events.front().dt();
  double hi = lo;
  for (const auto& e : events) {
    lo = std::min(lo, e.dt());
    hi = std::max(hi, e.dt());
  }
  const double first = std::floor(lo / bin_width);
  const double last = std::floor(hi / bin_width);
  h.origin = first * bin_width;
  h.counts.assign(static_cast<std::size_t>(last - first) + 1, 0);
  for (const auto& e : events) {
    const auto i = static_cast<std::size_t>(std::floor(e.dt() / bin_width) - first);
    ++h.counts[std::min(i, h.counts.size() - 1)];
  }

  std::vector<bool> masked(h.counts.size(), false);
  for (int p = 0; p < 2; ++p) {
    std::size_t top = h.counts.size();
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      if (!masked[i] && h.counts[i] > 0 && (top == h.counts.size() || h.counts[i] > h.counts[top])) top = i;
    if (top == h.counts.size()) break;
    if (!h.peaks.empty() && static_cast<double>(h.counts[top]) < 0.05 * static_cast<double>(h.peaks.front().height))
      break;
    const auto [center, fwhm] = measure_peak(h, top);
    h.peaks.push_back({center, fwhm, h.counts[top], std::nullopt});
    const double reach = 5.0 * fwhm / kFwhmPerSigma + bin_width;
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      if (std::abs(h.bin_center(i) - center) <= reach) masked[i] = true;
  }

  for (auto& peak : h.peaks) {
    const double sigma = peak.fwhm / kFwhmPerSigma;
    std::uint64_t n_t = 0;
    std::uint64_t n_r = 0;
    for (const auto& e : events) {
      if (std::abs(e.dt() - peak.center) > 3.0 * sigma) continue;
      (e.choice == Choice::T ? n_t : n_r) += 1;
    }
    if (n_t + n_r > 0) peak.label = n_t >= n_r ? Choice::T : Choice::R;
  }

  if (h.peaks.size() == 2 && h.peaks[0].label && h.peaks[1].label && h.peaks[0].label != h.peaks[1].label) {
    for (const auto& peak : h.peaks) {
      const double reach = 3.0 * peak.fwhm / kFwhmPerSigma;
      const TimeWindow w{peak.center - reach, peak.center + reach};
      (*peak.label == Choice::T ? h.window_T : h.window_R) = w;
    }
  }
  return h;
}

double odd_sample_bin(double dx, double target) {
  if (!(dx > 0.0) || !(target > 0.0))
    throw std::invalid_argument("odd_sample_bin: spacing and target must be positive");
  const double k = std::max(0.0, std::round((target / dx - 1.0) / 2.0));
  return (2.0 * k + 1.0) * dx;
}

namespace {

presets::PatternRecord bin_events(std::span<const EventRecord> events, const TimeWindow& window, long j_lo, long j_hi,
                                  const PatternBinning& b, presets::PatternKind kind) {
  std::vector<double> counts(static_cast<std::size_t>(j_hi - j_lo + 1), 0.0);
  for (const auto& e : events) {
    if (!window.contains(e.dt())) continue;
    const long j = std::lround(e.x1 / b.bin_width);
    counts[static_cast<std::size_t>(j - j_lo)] += 1.0;
  }
  std::vector<double> centers(counts.size());
  for (std::size_t i = 0; i < centers.size(); ++i)
    centers[i] = static_cast<double>(j_lo + static_cast<long>(i)) * b.bin_width;
  return presets::make_pattern(std::move(centers), std::move(counts), kind, b.fringe_period);
}

}  // namespace

std::pair<presets::PatternRecord, presets::PatternRecord> windowed_patterns(std::span<const EventRecord> events,
                                                                            const McaHistogram& h,
                                                                            const PatternBinning& b) {
  if (!h.window_T || !h.window_R) throw std::invalid_argument("windowed_patterns: T and R windows must both be set");
  if (h.window_T->overlaps(*h.window_R)) throw std::invalid_argument("windowed_patterns: overlapping windows");
  if (!(b.bin_width > 0.0)) throw std::invalid_argument("windowed_patterns: bin width must be positive");
  if (events.empty()) throw std::invalid_argument("windowed_patterns: no events");

  long j_lo = std::lround(events.front().x1 / b.bin_width);
  long j_hi = j_lo;
  for (const auto& e : events) {
    const long j = std::lround(e.x1 / b.bin_width);
    j_lo = std::min(j_lo, j);
    j_hi = std::max(j_hi, j);
  }
  return {bin_events(events, *h.window_T, j_lo, j_hi, b, presets::PatternKind::erase),
          bin_events(events, *h.window_R, j_lo, j_hi, b, presets::PatternKind::read)};
}

Contamination cross_contamination(std::span<const EventRecord> events, const McaHistogram& h) {
  if (!h.window_T || !h.window_R) throw std::invalid_argument("cross_contamination: windows not set");
  double n_t = 0, n_r = 0, t_in_r = 0, r_in_t = 0;
  for (const auto& e : events) {
    if (e.choice == Choice::T) {
      n_t += 1;
      if (h.window_R->contains(e.dt())) t_in_r += 1;
    } else {
      n_r += 1;
      if (h.window_T->contains(e.dt())) r_in_t += 1;
    }
  }
  return {n_t > 0 ? t_in_r / n_t : 0.0, n_r > 0 ? r_in_t / n_r : 0.0};
}

// ---------------------------------------------------------------------------

std::string TimingReport::to_text() const {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s delayed_choice_margin %.6g s (jitter FWHM %.6g s)\n", passed ? "PASS" : "FAIL",
                margin, jitter_fwhm);
  return buf;
}

TimingReport delayed_choice_audit(const presets::EraserSetup& s, double jitter_fwhm) {
  if (!(jitter_fwhm >= 0.0)) throw std::invalid_argument("delayed_choice_audit: jitter must be non-negative");
  const double margin = ((s.d_B + s.d_NPBS) - (s.d_A + s.d_A_prime)) / kSpeedOfLight;
  return {margin, jitter_fwhm, margin > jitter_fwhm};
}

}  // namespace eraser::mc
