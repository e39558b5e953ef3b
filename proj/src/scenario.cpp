#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "laserpick/errors.hpp"
#include "laserpick/scene_io.hpp"

namespace laserpick {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<Entry> entries;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Section> tokenize(std::istream& in) {
  std::vector<Section> sections;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) throw ParseError("malformed section header '" + text + "'", line);
      sections.push_back({trim(text.substr(1, text.size() - 2)), line, {}});
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    if (sections.empty()) throw ParseError("key outside of any [section]", line);
    Entry e{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line};
    if (e.key.empty()) throw ParseError("empty key", line);
    if (e.value.empty()) throw ParseError("key '" + e.key + "' has no value", line);
    for (const auto& prev : sections.back().entries) {
      if (prev.key == e.key) {
        throw ParseError("duplicate key '" + e.key + "' in [" + sections.back().name + "] (first on line " +
                             std::to_string(prev.line) + ")",
                         line);
      }
    }
    sections.back().entries.push_back(std::move(e));
  }
  return sections;
}

std::vector<double> numbers(const Entry& e, std::size_t expected) {
  std::istringstream ss(e.value);
  std::vector<double> out;
  for (std::string tok; ss >> tok;) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw ParseError("key '" + e.key + "': invalid number '" + tok + "'", e.line);
    }
    out.push_back(v);
  }
  if (expected != 0 && out.size() != expected) {
    throw ParseError("key '" + e.key + "' expects " + std::to_string(expected) + " value(s), got " +
                         std::to_string(out.size()),
                     e.line);
  }
  if (out.empty()) throw ParseError("key '" + e.key + "' expects at least one value", e.line);
  return out;
}

double real(const Entry& e) { return numbers(e, 1)[0]; }

Vec3 vec3(const Entry& e) {
  const auto v = numbers(e, 3);
  return {v[0], v[1], v[2]};
}

std::uint64_t unsigned_int(const Entry& e) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    throw ParseError("key '" + e.key + "' expects a non-negative integer", e.line);
  }
  return v;
}

int integer(const Entry& e) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    throw ParseError("key '" + e.key + "' expects an integer", e.line);
  }
  return v;
}

Rgb rgb(const Entry& e) {
  const auto v = numbers(e, 3);
  Rgb out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (v[i] != std::floor(v[i]) || v[i] < 0 || v[i] > 255) {
      throw ParseError("key '" + e.key + "' expects three integers in [0, 255]", e.line);
    }
    out[i] = static_cast<int>(v[i]);
  }
  return out;
}

void limits(const Entry& e, AxisLimits& axis) {
  const auto v = numbers(e, 2);
  axis.min = v[0];
  axis.max = v[1];
}

SpatialWindow window(const Entry& e) {
  const auto v = numbers(e, 6);
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

using Handler = std::function<void(const Entry&)>;

/// Applies handlers to a section's entries; unknown keys and missing required
/// keys are errors.
void bind(const Section& section, const std::map<std::string, Handler>& handlers,
          const std::set<std::string>& required = {}) {
  std::set<std::string> seen;
  for (const auto& e : section.entries) {
    const auto it = handlers.find(e.key);
    if (it == handlers.end()) throw ParseError("unknown key '" + e.key + "' in [" + section.name + "]", e.line);
    it->second(e);
    seen.insert(e.key);
  }
  for (const auto& key : required) {
    if (!seen.contains(key)) {
      throw ParseError("missing required key '" + key + "' in [" + section.name + "]", section.line);
    }
  }
}

void bind_camera(const Section& sec, CameraSpec& cam) {
  bind(sec, {{"position", [&](const Entry& e) { cam.position = vec3(e); }},
             {"rpy_deg", [&](const Entry& e) { cam.rpy_deg = vec3(e); }}});
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  const auto sections = tokenize(in);
  std::set<std::string> singletons;
  bool have_scenario = false;

  for (const auto& sec : sections) {
    if (sec.name != "berry" && !singletons.insert(sec.name).second) {
      throw ParseError("duplicate section [" + sec.name + "]", sec.line);
    }
    if (sec.name == "scenario") {
      have_scenario = true;
      bind(sec,
           {{"seed", [&](const Entry& e) { s.seed = unsigned_int(e); }},
            {"berry_points", [&](const Entry& e) { s.berry_points = unsigned_int(e); }},
            {"color_gain", [&](const Entry& e) { s.colors.gain = real(e); }}},
           {"seed"});
    } else if (sec.name == "berry") {
      BerrySpec b;
      bind(sec,
           {{"centroid", [&](const Entry& e) { b.centroid = vec3(e); }},
            {"diameter", [&](const Entry& e) { b.diameter = real(e); }},
            {"height", [&](const Entry& e) { b.height = real(e); }},
            {"stem_diameter_mm", [&](const Entry& e) { b.stem_diameter_mm = real(e); }},
            {"stem_length", [&](const Entry& e) { b.stem_length = real(e); }},
            {"toughness", [&](const Entry& e) { b.toughness = real(e); }}},
           {"centroid"});
      s.berries.push_back(b);
    } else if (sec.name == "colors") {
      bind(sec, {{"berry", [&](const Entry& e) { s.colors.berry = rgb(e); }},
                 {"berry_jitter", [&](const Entry& e) { s.colors.berry_jitter = integer(e); }},
                 {"foliage", [&](const Entry& e) { s.colors.foliage = rgb(e); }},
                 {"foliage_jitter", [&](const Entry& e) { s.colors.foliage_jitter = integer(e); }}});
    } else if (sec.name == "palette") {
      bind(sec, {{"center", [&](const Entry& e) { s.palette.center = vec3(e); }},
                 {"size", [&](const Entry& e) { s.palette.size = vec3(e); }},
                 {"color", [&](const Entry& e) { s.palette.color = rgb(e); }},
                 {"jitter", [&](const Entry& e) { s.palette.jitter = integer(e); }},
                 {"points", [&](const Entry& e) { s.palette.points = unsigned_int(e); }}});
    } else if (sec.name == "camera1") {
      bind_camera(sec, s.camera1);
    } else if (sec.name == "camera2") {
      bind_camera(sec, s.camera2);
    } else if (sec.name == "foliage") {
      bind(sec, {{"points", [&](const Entry& e) { s.foliage.points = unsigned_int(e); }},
                 {"min", [&](const Entry& e) { s.foliage.min = vec3(e); }},
                 {"max", [&](const Entry& e) { s.foliage.max = vec3(e); }},
                 {"stem_points", [&](const Entry& e) { s.foliage.stem_points = unsigned_int(e); }}});
    } else if (sec.name == "gantry") {
      auto& g = s.gantry;
      bind(sec, {{"max_velocity", [&](const Entry& e) { g.set_max_velocity(real(e)); }},
                 {"max_accel",
                  [&](const Entry& e) {
                    const double a = real(e);
                    g.x.max_accel = g.y.max_accel = g.z.max_accel = a;
                  }},
                 {"x_limits", [&](const Entry& e) { limits(e, g.x); }},
                 {"y_limits", [&](const Entry& e) { limits(e, g.y); }},
                 {"z_limits", [&](const Entry& e) { limits(e, g.z); }},
                 {"start", [&](const Entry& e) { g.start = vec3(e); }},
                 {"dt", [&](const Entry& e) { g.dt = real(e); }},
                 {"trapper_slew_deg_s", [&](const Entry& e) { g.trapper.slew_rate_deg_s = real(e); }},
                 {"capture_radius", [&](const Entry& e) { g.trapper.capture_radius = real(e); }},
                 {"lens_homing_speed_mm_s", [&](const Entry& e) { g.lens.homing_speed_mm_s = real(e); }},
                 {"lens_stroke_mm", [&](const Entry& e) { g.lens.stroke_mm = real(e); }},
                 {"lens_initial_mm", [&](const Entry& e) { g.lens.initial_position_mm = real(e); }},
                 {"beam_depths", [&](const Entry& e) { g.interrupters.beam_depths = numbers(e, 0); }},
                 {"beam_half_span", [&](const Entry& e) { g.interrupters.half_span = real(e); }}});
    } else if (sec.name == "localization") {
      auto& l = s.localization;
      bind(sec, {{"scene_window", [&](const Entry& e) { l.scene_window = window(e); }},
                 {"palette_window", [&](const Entry& e) { l.palette_window = window(e); }},
                 {"r_th", [&](const Entry& e) { l.thresholds.r = real(e); }},
                 {"g_th", [&](const Entry& e) { l.thresholds.g = real(e); }},
                 {"b_th", [&](const Entry& e) { l.thresholds.b = real(e); }},
                 {"tolerance", [&](const Entry& e) { l.clusters.tolerance = real(e); }},
                 {"s_min", [&](const Entry& e) { l.clusters.min_size = unsigned_int(e); }},
                 {"s_max", [&](const Entry& e) { l.clusters.max_size = unsigned_int(e); }}});
    } else if (sec.name == "laser") {
      bind(sec, {{"spot_diameter_mm", [&](const Entry& e) { s.laser.spot_diameter_mm = real(e); }},
                 {"lateral_velocity_mm_s", [&](const Entry& e) { s.laser.lateral_velocity_mm_s = real(e); }},
                 {"dataset", [&](const Entry& e) { s.laser.dataset = e.value; }},
                 {"min_lateral_velocity_mm_s", [&](const Entry& e) { s.laser.min_lateral_velocity_mm_s = real(e); }},
                 {"toughness", [&](const Entry& e) { s.laser.toughness = real(e); }}});
    } else if (sec.name == "controller") {
      auto& c = s.controller;
      bind(sec, {{"approach_below", [&](const Entry& e) { c.approach_below = real(e); }},
                 {"rise_above", [&](const Entry& e) { c.rise_above = real(e); }},
                 {"retract_clearance", [&](const Entry& e) { c.retract_clearance = real(e); }},
                 {"cut_timeout_s", [&](const Entry& e) { c.cut_timeout_s = real(e); }},
                 {"stem_engage_tolerance", [&](const Entry& e) { c.stem_engage_tolerance = real(e); }}});
    } else {
      throw ParseError("unknown section [" + sec.name + "]", sec.line);
    }
  }
  if (!have_scenario) throw ParseError("missing required section [scenario] (key 'seed')", 0);

  s.controller.spot_diameter_mm = s.laser.spot_diameter_mm;
  s.controller.lateral_velocity_mm_s = s.laser.lateral_velocity_mm_s;
  try {
    s.validate();
  } catch (const ValidationError& err) {
    throw ParseError(std::string("invalid scenario: ") + err.what(), 0);
  } catch (const DomainError& err) {
    throw ParseError(std::string("invalid scenario: ") + err.what(), 0);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path.string());
  return parse_scenario(in);
}

}  // namespace laserpick
