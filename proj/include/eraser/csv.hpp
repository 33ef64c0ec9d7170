#pragma once

#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "eraser/biphoton.hpp"
#include "eraser/coincidence.hpp"
#include "eraser/presets.hpp"

namespace eraser::csv {

/// 17 significant digits, enough to read back the identical double.
std::string number(double v);

/// Columns x1_m,rate_normalized (first header overridable, e.g. x2_m).
void write_pattern(std::ostream& os, const presets::PatternRecord& p, std::string_view position_column = "x1_m");
/// Columns x1_m,x2_m,g2 for every cell of the map.
void write_map(std::ostream& os, const biphoton::BiphotonMap& map);
/// Columns bin_center_s,count.
void write_histogram(std::ostream& os, const mc::McaHistogram& h);
/// Columns index,choice,x1_m,x2_m,dt_s.
void write_events(std::ostream& os, std::span<const mc::EventRecord> events);

}  // namespace eraser::csv
