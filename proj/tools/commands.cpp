#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "laserpick/datasets.hpp"
#include "laserpick/demo.hpp"
#include "laserpick/errors.hpp"
#include "laserpick/laser_model.hpp"
#include "laserpick/localization.hpp"
#include "laserpick/scene_io.hpp"

namespace laserpick::cli {

namespace {

namespace fs = std::filesystem;

enum class LogLevel { Off, Warn, Info, Debug };

LogLevel log_level() {
  const char* env = std::getenv("LASERPICK_LOG");
  if (env == nullptr) return LogLevel::Warn;
  const std::string_view v(env);
  if (v == "off" || v == "0") return LogLevel::Off;
  if (v == "info") return LogLevel::Info;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err), level_(log_level()) {}
  void info(const std::string& msg) const { emit(LogLevel::Info, "info", msg); }
  void debug(const std::string& msg) const { emit(LogLevel::Debug, "debug", msg); }

 private:
  void emit(LogLevel at, const char* tag, const std::string& msg) const {
    if (level_ >= at) err_ << "[" << tag << "] " << msg << "\n";
  }
  std::ostream& err_;
  LogLevel level_;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

Scenario scenario_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
  Scenario s = load_scenario(path);
  if (seed) s.seed = *seed;
  return s;
}

// ---- localize ----

void write_boxes_csv(const std::vector<BerryBox>& boxes, std::ostream& out) {
  out << "rank,point_count,centroid_x,centroid_y,centroid_z,min_x,min_y,min_z,max_x,max_y,max_z\n";
  for (const auto& b : boxes) {
    out << b.rank << ',' << b.point_count;
    for (const Vec3* v : {&b.centroid, &b.box.min, &b.box.max}) {
      for (int k = 0; k < 3; ++k) out << ',' << fixed((*v)[k], 6);
    }
    out << '\n';
  }
}

// Base-frame scene crop with berry-box points recoloured per rank.
PointCloud annotate(const PointCloud& c1, const PointCloud& c2, const RigidTransform& t1, const RigidTransform& t2,
                    const LocalizationConfig& cfg, const std::vector<BerryBox>& boxes) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 6> kPalette{
      {{230, 25, 75}, {255, 225, 25}, {0, 130, 200}, {245, 130, 48}, {145, 30, 180}, {70, 240, 240}}};
  const PointCloud merged = merge_clouds(extract_window(transform_cloud(t1, c1, Frame::Base), cfg.scene_window),
                                         extract_window(transform_cloud(t2, c2, Frame::Base), cfg.scene_window));
  std::vector<ColoredPoint> pts(merged.begin(), merged.end());
  for (auto& p : pts) {
    const auto hit = std::find_if(boxes.begin(), boxes.end(), [&](const BerryBox& b) { return b.box.contains(p.position()); });
    if (hit == boxes.end()) {
      p.r = p.g = p.b = 128;
    } else {
      const auto& c = kPalette[hit->rank % kPalette.size()];
      p.r = c[0];
      p.g = c[1];
      p.b = c[2];
    }
  }
  return PointCloud(Frame::Base, std::move(pts));
}

struct LocalizeArgs {
  std::string scenario;
  std::vector<std::string> pcds;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

int cmd_localize(const LocalizeArgs& a, std::ostream& out, const Logger& log) {
  if (a.scenario.empty() && a.pcds.size() != 2) {
    throw CLI::ValidationError("localize", "needs --scenario or two PCD files");
  }
  if (!a.pcds.empty() && a.pcds.size() != 2) throw CLI::ValidationError("localize", "expected exactly two PCD files");
  Scenario s;
  if (!a.scenario.empty()) s = scenario_with_seed(a.scenario, a.seed);

  PointCloud c1{Frame::Camera1};
  PointCloud c2{Frame::Camera2};
  if (a.pcds.size() == 2) {
    c1 = read_pcd(fs::path(a.pcds[0]), Frame::Camera1);
    c2 = read_pcd(fs::path(a.pcds[1]), Frame::Camera2);
  } else {
    auto scene = generate_scene(s);
    c1 = std::move(scene.camera1);
    c2 = std::move(scene.camera2);
  }
  log.debug("camera clouds: " + std::to_string(c1.size()) + " + " + std::to_string(c2.size()) + " points");

  const auto t1 = s.camera1.base_from_camera();
  const auto t2 = s.camera2.base_from_camera();
  const auto start = std::chrono::steady_clock::now();
  const auto boxes = localize(c1, c2, t1, t2, s.localization);
  log.info("localized " + std::to_string(boxes.size()) + " boxes in " + fixed(elapsed_ms(start), 1) + " ms");

  write_boxes_csv(boxes, out);
  if (!a.out_dir.empty()) {
    ensure_dir(a.out_dir);
    auto f = open_out(fs::path(a.out_dir) / "boxes.csv");
    write_boxes_csv(boxes, f);
    write_pcd(annotate(c1, c2, t1, t2, s.localization, boxes), fs::path(a.out_dir) / "annotated.pcd");
  }
  return kExitOk;
}

// ---- simulate ----

void write_metrics_csv(const CycleMetrics& m, std::ostream& out) {
  out << "fruit_index,success,motion_time_s,cut_time_s,cycle_time_s,failure_reason\n";
  for (const auto& f : m.fruits) {
    out << f.fruit_index << ',' << (f.success ? 1 : 0) << ',' << fixed(f.motion_time_s, 3) << ','
        << fixed(f.cut_time_s, 3) << ',' << fixed(f.cycle_time_s, 3) << ',' << to_string(f.failure) << '\n';
  }
}

std::string summary_line(const CycleMetrics& m) {
  return "# summary mean_cycle=" + fixed(m.mean_cycle_s(), 3) + " mean_cut=" + fixed(m.mean_cut_s(), 3) +
         " harvested=" + std::to_string(m.successes()) + "/" + std::to_string(m.fruits.size());
}

void write_cycle_svg(const CycleMetrics& m, std::ostream& out) {
  constexpr double kW = 640, kH = 360, kPad = 48;
  double ymax = 1.0;
  for (const auto& f : m.fruits) ymax = std::max(ymax, f.cycle_time_s);
  ymax *= 1.1;
  const double n = static_cast<double>(std::max<std::size_t>(m.fruits.size(), 1));
  const double slot = (kW - 2 * kPad) / n;
  const auto y_of = [&](double v) { return kH - kPad - v / ymax * (kH - 2 * kPad); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kPad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">cycle time per fruit (s)"
      << "</text>\n";
  for (std::size_t i = 0; i < m.fruits.size(); ++i) {
    const auto& f = m.fruits[i];
    const double x = kPad + slot * static_cast<double>(i) + 0.1 * slot;
    const double w = 0.8 * slot;
    const double motion_top = y_of(f.motion_time_s);
    const double cycle_top = y_of(f.cycle_time_s);
    out << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(motion_top, 1) << "\" width=\"" << fixed(w, 1)
        << "\" height=\"" << fixed(y_of(0) - motion_top, 1) << "\" fill=\"" << (f.success ? "#4a7ab8" : "#999") << "\"/>\n";
    out << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(cycle_top, 1) << "\" width=\"" << fixed(w, 1)
        << "\" height=\"" << fixed(motion_top - cycle_top, 1) << "\" fill=\"#d9534f\"/>\n";
    out << "<text x=\"" << fixed(x + w / 2, 1) << "\" y=\"" << fixed(kH - kPad + 16, 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << f.fruit_index << "</text>\n";
  }
  const double mean = m.mean_cycle_s();
  out << "<line x1=\"" << kPad << "\" x2=\"" << kW - kPad << "\" y1=\"" << fixed(y_of(mean), 1) << "\" y2=\""
      << fixed(y_of(mean), 1) << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n"
      << "<text x=\"" << kW - kPad << "\" y=\"" << fixed(y_of(mean) - 4, 1)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">mean " << fixed(mean, 2) << " s</text>\n"
      << "<line x1=\"" << kPad << "\" x2=\"" << kW - kPad << "\" y1=\"" << fixed(y_of(0), 1) << "\" y2=\""
      << fixed(y_of(0), 1) << "\" stroke=\"black\"/>\n"
      << "</svg>\n";
}

struct SimulateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool svg = false;
  std::optional<double> calibrate;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, const Logger& log) {
  const Scenario s = scenario_with_seed(a.scenario, a.seed);
  if (a.calibrate) {
    const double v = calibrate_max_velocity(s, *a.calibrate);
    out << "max_velocity = " << fmt("%.6f", v) << "\n";
    return kExitOk;
  }
  const auto start = std::chrono::steady_clock::now();
  const CycleMetrics m = simulate_scenario(s);
  log.info("simulated " + std::to_string(m.fruits.size()) + " fruits in " + fixed(elapsed_ms(start), 1) + " ms");
  log.info("lens homings: " + std::to_string(m.lens_homings));

  write_metrics_csv(m, out);
  out << summary_line(m) << "\n";
  if (!a.out_dir.empty()) {
    ensure_dir(a.out_dir);
    auto f = open_out(fs::path(a.out_dir) / "metrics.csv");
    write_metrics_csv(m, f);
    if (a.svg) {
      auto svg = open_out(fs::path(a.out_dir) / "cycle_times.svg");
      write_cycle_svg(m, svg);
    }
  } else if (a.svg) {
    throw CLI::ValidationError("--svg", "requires --out");
  }
  return kExitOk;
}

// ---- optimize-spot ----

std::vector<PierceRecord> pierce_records(const std::string& dataset) {
  if (dataset == "coarse" || dataset == "fine") return embedded_pierce_dataset(dataset);
  return read_pierce_csv(dataset);
}

void write_cp_svg(const std::vector<PierceRecord>& records, double best, std::ostream& out) {
  constexpr double kW = 640, kH = 360, kPad = 48;
  auto xs = std::minmax_element(records.begin(), records.end(),
                                [](const auto& l, const auto& r) { return l.spot_diameter_mm < r.spot_diameter_mm; });
  const double x0 = xs.first->spot_diameter_mm;
  const double x1 = std::max(xs.second->spot_diameter_mm, x0 + 1e-9);
  double ymax = 0.0;
  for (const auto& r : records) ymax = std::max(ymax, r.pierce_constant_mm2_s);
  ymax = ymax > 0 ? 1.1 * ymax : 1.0;
  const auto px = [&](double x) { return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad); };
  const auto py = [&](double y) { return kH - kPad - y / ymax * (kH - 2 * kPad); };

  std::vector<PierceRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& l, const auto& r) { return l.spot_diameter_mm < r.spot_diameter_mm; });
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kPad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << "pierce constant (mm^2/s) vs spot diameter (mm)</text>\n<polyline fill=\"none\" stroke=\"#4a7ab8\" points=\"";
  for (const auto& r : sorted) out << fixed(px(r.spot_diameter_mm), 1) << ',' << fixed(py(r.pierce_constant_mm2_s), 1) << ' ';
  out << "\"/>\n";
  for (const auto& r : sorted) {
    out << "<circle cx=\"" << fixed(px(r.spot_diameter_mm), 1) << "\" cy=\"" << fixed(py(r.pierce_constant_mm2_s), 1)
        << "\" r=\"3\" fill=\"#4a7ab8\"/>\n"
        << "<text x=\"" << fixed(px(r.spot_diameter_mm), 1) << "\" y=\"" << fixed(kH - kPad + 16, 1)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << fmt("%g", r.spot_diameter_mm)
        << "</text>\n";
  }
  out << "<line x1=\"" << fixed(px(best), 1) << "\" x2=\"" << fixed(px(best), 1) << "\" y1=\"" << kPad << "\" y2=\""
      << kH - kPad << "\" stroke=\"#d9534f\" stroke-dasharray=\"4 3\"/>\n"
      << "</svg>\n";
}

struct OptimizeArgs {
  std::string dataset = "fine";
  std::optional<double> lo;
  std::optional<double> hi;
  bool continuous = false;
  std::string out_dir;
  bool svg = false;
};

int cmd_optimize_spot(const OptimizeArgs& a, std::ostream& out) {
  const auto records = pierce_records(a.dataset);
  if (records.empty()) throw ValidationError("dataset has no rows");
  double lo = records.front().spot_diameter_mm;
  double hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, r.spot_diameter_mm);
    hi = std::max(hi, r.spot_diameter_mm);
  }
  lo = a.lo.value_or(lo);
  hi = a.hi.value_or(hi);

  const double best = a.continuous ? optimal_spot_continuous(records, lo, hi) : optimal_spot(records, lo, hi);
  out << "spot_diameter_mm,pierce_constant_mm2_s,in_range\n";
  for (const auto& r : records) {
    const bool in = r.spot_diameter_mm >= lo && r.spot_diameter_mm <= hi;
    out << fmt("%g", r.spot_diameter_mm) << ',' << fmt("%g", r.pierce_constant_mm2_s) << ',' << (in ? 1 : 0) << '\n';
  }
  out << "# optimal spot_diameter_mm=" << fmt("%.4g", best) << " cp=" << fmt("%.4g", interpolate_cp(best, records))
      << (a.continuous ? " (continuous)" : "") << "\n";

  if (a.svg) {
    if (a.out_dir.empty()) throw CLI::ValidationError("--svg", "requires --out");
    ensure_dir(a.out_dir);
    auto f = open_out(fs::path(a.out_dir) / "cp_curve.svg");
    write_cp_svg(records, best, f);
  }
  return kExitOk;
}

// ---- verify-tables ----

struct VerifyArgs {
  double tolerance = 0.03;
  std::string lateral;
  std::string coarse;
  std::string fine;
};

int cmd_verify_tables(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  Datasets ds = load_datasets();
  if (!a.lateral.empty()) ds.lateral = read_lateral_csv(a.lateral);
  if (!a.coarse.empty()) ds.coarse = read_pierce_csv(a.coarse);
  if (!a.fine.empty()) ds.fine = read_pierce_csv(a.fine);

  const TableAudit audit = verify_tables(ds, a.tolerance);
  out << "table,row,column,published,recomputed,deviation,status\n";
  for (const auto& c : audit.checks) {
    const bool ok = c.deviation() <= audit.tolerance;
    out << c.table << ',' << c.row + 1 << ',' << c.column << ',' << fmt("%g", c.published) << ','
        << fixed(c.recomputed, 4) << ',' << fixed(c.deviation(), 4) << ',' << (ok ? "ok" : "FAIL") << '\n';
  }
  out << "# max_deviation=" << fixed(audit.max_deviation(), 4) << " tolerance=" << fmt("%g", audit.tolerance)
      << " result=" << (audit.passed() ? "PASS" : "FAIL") << "\n";
  if (audit.passed()) return kExitOk;
  for (const auto& c : audit.failures()) {
    err << "error: " << c.table << " row " << c.row + 1 << " column " << c.column << " deviates by "
        << fixed(c.deviation(), 4) << " (published " << fmt("%g", c.published) << ", recomputed "
        << fixed(c.recomputed, 4) << ")\n";
  }
  return kExitDomain;
}

// ---- gen-scene ----

struct GenArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

int cmd_gen_scene(const GenArgs& a, std::ostream& out) {
  const Scenario s = scenario_with_seed(a.scenario, a.seed);
  const GeneratedScene scene = generate_scene(s);
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  write_pcd(scene.camera1, dir / "camera1.pcd");
  write_pcd(scene.camera2, dir / "camera2.pcd");
  auto gt = open_out(dir / "ground_truth.csv");
  gt << "berry_index,centroid_x,centroid_y,centroid_z,stem_diameter_mm\n";
  const auto stems = s.stem_diameters_mm();
  for (std::size_t i = 0; i < scene.truth.berry_centroids.size(); ++i) {
    const Vec3& c = scene.truth.berry_centroids[i];
    gt << i << ',' << fixed(c.x(), 6) << ',' << fixed(c.y(), 6) << ',' << fixed(c.z(), 6) << ',' << fixed(stems[i], 4)
       << '\n';
  }
  if (!gt) throw IoError("write failed for ground_truth.csv");
  out << "wrote " << (dir / "camera1.pcd").string() << " (" << scene.camera1.size() << " points), "
      << (dir / "camera2.pcd").string() << " (" << scene.camera2.size() << " points), "
      << (dir / "ground_truth.csv").string() << " (" << stems.size() << " berries)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laser strawberry harvester twin", "laserpick"};
  app.require_subcommand(1, 1);

  LocalizeArgs loc;
  auto* localize_cmd = app.add_subcommand("localize", "Localize berries from two camera clouds or a scenario");
  localize_cmd->add_option("pcds", loc.pcds, "camera-1 and camera-2 PCD files");
  localize_cmd->add_option("--scenario", loc.scenario, "Scenario file (cameras, windows, scene)");
  localize_cmd->add_option("--seed", loc.seed, "Override the scenario seed");
  localize_cmd->add_option("--out", loc.out_dir, "Write boxes.csv and annotated.pcd here");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Localize and harvest a scenario");
  simulate_cmd->add_option("--scenario", sim.scenario, "Scenario file")->required();
  simulate_cmd->add_option("--seed", sim.seed, "Override the scenario seed");
  simulate_cmd->add_option("--out", sim.out_dir, "Write metrics.csv here");
  simulate_cmd->add_flag("--svg", sim.svg, "Also write cycle_times.svg (needs --out)");
  simulate_cmd->add_option("--calibrate", sim.calibrate, "Print the max_velocity reaching this mean cycle time (s)")
      ->check(CLI::PositiveNumber);

  OptimizeArgs opt;
  auto* optimize_cmd = app.add_subcommand("optimize-spot", "Best spot diameter over a pierce dataset");
  optimize_cmd->add_option("dataset", opt.dataset, "coarse, fine, or a pierce CSV path")->capture_default_str();
  optimize_cmd->add_option("--lo", opt.lo, "Lower spot bound (mm)");
  optimize_cmd->add_option("--hi", opt.hi, "Upper spot bound (mm)");
  optimize_cmd->add_flag("--continuous", opt.continuous, "Maximise the interpolated curve instead of the knots");
  optimize_cmd->add_option("--out", opt.out_dir, "Output directory for --svg");
  optimize_cmd->add_flag("--svg", opt.svg, "Write cp_curve.svg (needs --out)");

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify-tables", "Recompute the published table columns");
  verify_cmd->add_option("--tolerance", ver.tolerance, "Maximum allowed deviation")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--lateral", ver.lateral, "Replace the lateral-velocity table");
  verify_cmd->add_option("--coarse", ver.coarse, "Replace the coarse pierce table");
  verify_cmd->add_option("--fine", ver.fine, "Replace the fine pierce table");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-scene", "Write synthetic camera clouds for a scenario");
  gen_cmd->add_option("--scenario", gen.scenario, "Scenario file")->required();
  gen_cmd->add_option("--seed", gen.seed, "Override the scenario seed");
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->capture_default_str();

  const Logger log(err);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (localize_cmd->parsed()) return cmd_localize(loc, out, log);
    if (simulate_cmd->parsed()) return cmd_simulate(sim, out, log);
    if (optimize_cmd->parsed()) return cmd_optimize_spot(opt, out);
    if (verify_cmd->parsed()) return cmd_verify_tables(ver, out, err);
    return cmd_gen_scene(gen, out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomain;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace laserpick::cli
