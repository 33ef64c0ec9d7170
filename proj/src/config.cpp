#include "eraser/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>

namespace eraser::cli {

using json = nlohmann::json;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::ghost_image:
      return "ghost_image";
    case Experiment::erase:
      return "erase";
    case Experiment::read:
      return "read";
    case Experiment::mca:
      return "mca";
    case Experiment::audit:
      return "audit";
    case Experiment::full_eraser:
      return "full_eraser";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (auto e : {Experiment::ghost_image, Experiment::erase, Experiment::read, Experiment::mca, Experiment::audit,
                 Experiment::full_eraser})
    if (to_string(e) == name) return e;
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected ghost_image, erase, read, mca, audit or full_eraser)");
}

presets::EraserSetup preset_setup(std::string_view name) {
  if (name == "paper-1") return presets::paper_setup(1);
  if (name == "paper-2") return presets::paper_setup(2);
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected paper-1 or paper-2)");
}

namespace {

/// Typed access to one JSON object with key-path error messages.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : j_.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(k, "unknown key");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key) const {
    const json& v = get(key);
    if (v.is_string())
      fail(key, "expected a plain number in SI units, got the string \"" + v.get<std::string>() + "\"");
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "expected a finite number");
    return d;
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key) || j_.at(key).is_null()) return std::nullopt;
    return number(key);
  }

  std::uint64_t whole(const std::string& key) const {
    const json& v = get(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
    fail(key, "expected a non-negative integer");
  }

  std::string string(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  Reader child(const std::string& key) const { return Reader(get(key), join(key)); }

  std::optional<mc::TimeWindow> window(const std::string& key) const {
    if (!has(key) || j_.at(key).is_null()) return std::nullopt;
    const json& v = get(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(key, "expected [lo, hi] in seconds");
    const mc::TimeWindow w{v[0].get<double>(), v[1].get<double>()};
    if (!(w.lo < w.hi)) fail(key, "window needs lo < hi");
    return w;
  }

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    throw ConfigError("config: " + join(key) + ": " + message);
  }

private:
  const json& get(const std::string& key) const {
    if (!j_.contains(key)) fail(key, "missing");
    return j_.at(key);
  }

  std::string join(std::string_view key) const {
    if (key.empty()) return path_.empty() ? std::string("<root>") : path_;
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json& j_;
  std::string path_;
};

optics::TransmissionMask read_slit(const Reader& r) {
  const std::string type = r.string("type");
  try {
    if (type == "double_slit") {
      r.allow({"type", "width", "separation"});
      return optics::TransmissionMask::double_slit(r.number("width"), r.number("separation"));
    }
    if (type == "single_slit") {
      r.allow({"type", "width", "center"});
      return optics::TransmissionMask::single_slit(r.number("width"), r.has("center") ? r.number("center") : 0.0);
    }
    if (type == "open") {
      r.allow({"type"});
      return optics::TransmissionMask::open();
    }
  } catch (const std::invalid_argument& e) {
    r.fail("", e.what());
  }
  r.fail("type", "expected double_slit, single_slit or open");
}

presets::EraserSetup read_setup(const Reader& r) {
  r.allow({"pump_wavelength",
           "signal_wavelength",
           "d_A",
           "d_A_prime",
           "d_B",
           "d_NPBS",
           "d_Lprime",
           "f",
           "f_T_prime",
           "f_R_prime",
           "z_T",
           "z_R",
           "slit",
           "detector1_width",
           "divergence",
           "fiber_length_T",
           "fiber_length_R",
           "fiber_index",
           "pinhole_T_diameter",
           "pinhole_R_diameter"});
  presets::EraserSetup s{};
  s.pump_wavelength = r.number("pump_wavelength");
  s.signal_wavelength = r.number("signal_wavelength");
  s.d_A = r.number("d_A");
  s.d_A_prime = r.number("d_A_prime");
  s.d_B = r.number("d_B");
  s.d_NPBS = r.number("d_NPBS");
  s.d_Lprime = r.number("d_Lprime");
  s.f = r.number("f");
  s.f_T_prime = r.number("f_T_prime");
  s.f_R_prime = r.number("f_R_prime");
  s.z_T = r.number("z_T");
  s.z_R = r.number("z_R");
  s.slit = read_slit(r.child("slit"));
  s.detector1_width = r.number("detector1_width");
  s.divergence = r.number("divergence");
  s.fiber_length_T = r.number("fiber_length_T");
  s.fiber_length_R = r.number("fiber_length_R");
  s.fiber_index = r.number("fiber_index");
  s.pinhole_T_diameter = r.optional_number("pinhole_T_diameter");
  s.pinhole_R_diameter = r.optional_number("pinhole_R_diameter");
  try {
    presets::validate(s);
  } catch (const std::invalid_argument& e) {
    r.fail("", e.what());
  }
  return s;
}

json write_slit(const optics::TransmissionMask& m) {
  if (const auto* d = std::get_if<optics::DoubleSlit>(&m.shape()))
    return {{"type", "double_slit"}, {"width", d->width}, {"separation", d->separation}};
  if (const auto* s = std::get_if<optics::SingleSlit>(&m.shape()))
    return {{"type", "single_slit"}, {"width", s->width}, {"center", s->center}};
  if (std::holds_alternative<optics::OpenAperture>(m.shape())) return {{"type", "open"}};
  throw ConfigError("serialize: sampled custom masks have no config representation");
}

json write_setup(const presets::EraserSetup& s) {
  json j = {{"pump_wavelength", s.pump_wavelength},
            {"signal_wavelength", s.signal_wavelength},
            {"d_A", s.d_A},
            {"d_A_prime", s.d_A_prime},
            {"d_B", s.d_B},
            {"d_NPBS", s.d_NPBS},
            {"d_Lprime", s.d_Lprime},
            {"f", s.f},
            {"f_T_prime", s.f_T_prime},
            {"f_R_prime", s.f_R_prime},
            {"z_T", s.z_T},
            {"z_R", s.z_R},
            {"slit", write_slit(s.slit)},
            {"detector1_width", s.detector1_width},
            {"divergence", s.divergence},
            {"fiber_length_T", s.fiber_length_T},
            {"fiber_length_R", s.fiber_length_R},
            {"fiber_index", s.fiber_index}};
  if (s.pinhole_T_diameter) j["pinhole_T_diameter"] = *s.pinhole_T_diameter;
  if (s.pinhole_R_diameter) j["pinhole_R_diameter"] = *s.pinhole_R_diameter;
  return j;
}

int line_of(std::string_view text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(end), '\n'));
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("config: syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }

  const Reader root(j, "");
  root.allow({"experiment", "preset", "setup", "grid", "mc", "output_dir"});
  RunConfig c;
  if (root.has("experiment")) c.experiment = parse_experiment(root.string("experiment"));

  if (root.has("preset") && root.has("setup")) root.fail("setup", "give either preset or setup, not both");
  if (root.has("preset")) {
    c.preset = root.string("preset");
    c.setup = preset_setup(*c.preset);
  } else if (root.has("setup")) {
    c.setup = read_setup(root.child("setup"));
  } else {
    root.fail("preset", "missing (or give a setup object)");
  }

  if (root.has("grid")) {
    const Reader g = root.child("grid");
    g.allow({"n_points", "extent"});
    if (g.has("n_points")) {
      const auto n = g.whole("n_points");
      if (n < 2 || (n & (n - 1)) != 0) g.fail("n_points", "must be a power of two >= 2");
      c.grid.n_points = static_cast<std::size_t>(n);
    }
    c.grid.extent = g.optional_number("extent");
    if (c.grid.extent && !(*c.grid.extent > 0.0)) g.fail("extent", "must be positive");
  }

  if (root.has("mc")) {
    const Reader m = root.child("mc");
    m.allow({"n_events", "seed", "bin_width", "jitter_fwhm", "splitter_ratio", "pattern_bin_width",
             "scan_half_width_periods", "window_T", "window_R", "write_events"});
    if (m.has("n_events")) {
      c.mc.n_events = static_cast<std::size_t>(m.whole("n_events"));
      if (c.mc.n_events == 0) m.fail("n_events", "must be positive");
    }
    if (m.has("seed")) c.mc.seed = m.whole("seed");
    if (m.has("bin_width")) {
      c.mc.bin_width = m.number("bin_width");
      if (!(c.mc.bin_width > 0.0)) m.fail("bin_width", "must be positive");
    }
    if (m.has("jitter_fwhm")) {
      c.mc.jitter_fwhm = m.number("jitter_fwhm");
      if (!(c.mc.jitter_fwhm >= 0.0)) m.fail("jitter_fwhm", "must be non-negative");
    }
    if (m.has("splitter_ratio")) {
      c.mc.splitter_ratio = m.number("splitter_ratio");
      if (!(c.mc.splitter_ratio >= 0.0 && c.mc.splitter_ratio <= 1.0)) m.fail("splitter_ratio", "must lie in [0, 1]");
    }
    c.mc.pattern_bin_width = m.optional_number("pattern_bin_width");
    if (c.mc.pattern_bin_width && !(*c.mc.pattern_bin_width > 0.0)) m.fail("pattern_bin_width", "must be positive");
    if (m.has("scan_half_width_periods")) {
      c.mc.scan_half_width_periods = m.number("scan_half_width_periods");
      if (!(c.mc.scan_half_width_periods > 0.0)) m.fail("scan_half_width_periods", "must be positive");
    }
    c.mc.window_T = m.window("window_T");
    c.mc.window_R = m.window("window_R");
    if (m.has("write_events")) c.mc.write_events = m.boolean("write_events");
  }

  if (root.has("output_dir")) {
    c.output_dir = root.string("output_dir");
    if (c.output_dir.empty()) root.fail("output_dir", "must not be empty");
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string serialize(const RunConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  if (c.preset)
    j["preset"] = *c.preset;
  else
    j["setup"] = write_setup(c.setup);

  j["grid"] = {{"n_points", c.grid.n_points}};
  if (c.grid.extent) j["grid"]["extent"] = *c.grid.extent;

  json m = {{"n_events", c.mc.n_events},
            {"seed", c.mc.seed},
            {"bin_width", c.mc.bin_width},
            {"jitter_fwhm", c.mc.jitter_fwhm},
            {"splitter_ratio", c.mc.splitter_ratio},
            {"scan_half_width_periods", c.mc.scan_half_width_periods},
            {"write_events", c.mc.write_events}};
  if (c.mc.pattern_bin_width) m["pattern_bin_width"] = *c.mc.pattern_bin_width;
  if (c.mc.window_T) m["window_T"] = {c.mc.window_T->lo, c.mc.window_T->hi};
  if (c.mc.window_R) m["window_R"] = {c.mc.window_R->lo, c.mc.window_R->hi};
  j["mc"] = m;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace eraser::cli
