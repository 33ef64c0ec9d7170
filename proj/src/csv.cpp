#include "eraser/csv.hpp"

#include <cstdio>

namespace eraser::csv {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_pattern(std::ostream& os, const presets::PatternRecord& p, std::string_view position_column) {
  os << position_column << ",rate_normalized\n";
  for (std::size_t i = 0; i < p.positions.size(); ++i)
    os << number(p.positions[i]) << ',' << number(p.rates[i]) << '\n';
}

void write_map(std::ostream& os, const biphoton::BiphotonMap& map) {
  os << "x1_m,x2_m,g2\n";
  for (std::size_t i = 0; i < map.rows(); ++i)
    for (std::size_t j = 0; j < map.cols(); ++j)
      os << number(map.x1()[i]) << ',' << number(map.x2()[j]) << ',' << number(map.g2(i, j)) << '\n';
}

void write_histogram(std::ostream& os, const mc::McaHistogram& h) {
  os << "bin_center_s,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) os << number(h.bin_center(i)) << ',' << h.counts[i] << '\n';
}

void write_events(std::ostream& os, std::span<const mc::EventRecord> events) {
  os << "index,choice,x1_m,x2_m,dt_s\n";
  for (const auto& e : events)
    os << e.index << ',' << mc::to_string(e.choice) << ',' << number(e.x1) << ',' << number(e.x2) << ','
       << number(e.dt()) << '\n';
}

}  // namespace eraser::csv
