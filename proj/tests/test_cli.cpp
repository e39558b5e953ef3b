#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = laserpick::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kDemo = LASERPICK_SOURCE_DIR "/scenarios/demo11.scn";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("laserpick_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const std::string& csv) {
  std::size_t n = 0;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) n += !line.empty() && line[0] != '#' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("argument errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"verify-tables", "--bogus"}).code == 2);
  CHECK(run({"simulate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"simulate", "--scenario", "/nonexistent.scn"}).code == 1);
  CHECK(run({"localize", "/nonexistent1.pcd", "/nonexistent2.pcd"}).code == 1);
  CHECK(run({"localize", "only_one.pcd"}).code == 2);
}

TEST_CASE("verify-tables") {
  const Result r = run({"verify-tables"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("table,row,column,published,recomputed,deviation,status\n", 0) == 0);
  CHECK(r.out.find("result=PASS") != std::string::npos);
  CHECK(r.out.find(",FAIL\n") == std::string::npos);

  CHECK(run({"verify-tables", "--tolerance", "0.001"}).code == 2);

  SUBCASE("corrupted table names the row") {
    TempDir dir("verify");
    const std::string fine = dir.file("fine.csv",
                                      "spot_diameter_mm,stem_diameter_mm,pierce_time_s,pierce_velocity_mm_s,"
                                      "pierce_constant_mm2_s\n"
                                      "0.5,2.1,1.16,1.81,0.90\n0.6,2.4,1.34,1.79,1.07\n0.8,2.1,1.50,1.4,1.14\n"
                                      "0.9,2.2,1.47,1.49,2.50\n1.0,2.1,1.74,1.21,1.23\n1.1,2.3,2.52,0.91,1.02\n");
    const Result bad = run({"verify-tables", "--fine", fine});
    CHECK(bad.code == 2);
    CHECK(bad.out.find("result=FAIL") != std::string::npos);
    CHECK(bad.err.find("row 4") != std::string::npos);
    CHECK(bad.err.find("pierce_constant") != std::string::npos);
    CHECK(bad.err.find("row 3") == std::string::npos);

    const std::string garbled = dir.file("garbled.csv", "spot_diameter_mm,stem_diameter_mm\n0.5,abc\n");
    CHECK(run({"verify-tables", "--fine", garbled}).code == 1);
  }
}

TEST_CASE("optimize-spot") {
  Result r = run({"optimize-spot"});
  CHECK(r.code == 0);
  CHECK(r.out.find("# optimal spot_diameter_mm=0.9 ") != std::string::npos);
  CHECK(data_rows(r.out) == 6);
  r = run({"optimize-spot", "coarse"});
  CHECK(r.code == 0);
  CHECK(r.out.find("# optimal spot_diameter_mm=0.71 ") != std::string::npos);
  CHECK(run({"optimize-spot", "--lo", "5", "--hi", "6"}).code == 2);
  CHECK(run({"optimize-spot", "/nonexistent.csv"}).code == 1);

  TempDir dir("optimize");
  r = run({"optimize-spot", "--out", dir.path.string(), "--svg"});
  CHECK(r.code == 0);
  CHECK(slurp(dir.path / "cp_curve.svg").find("<svg") != std::string::npos);
}

TEST_CASE("localize from a scenario") {
  const Result r = run({"localize", "--scenario", kDemo});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("rank,point_count,centroid_x", 0) == 0);
  CHECK(data_rows(r.out) == 11);
  CHECK(run({"localize", "--scenario", kDemo}).out == r.out);

  SUBCASE("missing palette is a calibration failure") {
    TempDir dir("palette");
    const std::string scn = dir.file("nopalette.scn",
                                     "[scenario]\nseed = 3\n[palette]\npoints = 0\n[foliage]\npoints = 2000\n"
                                     "[berry]\ncentroid = 0 0 0.6\n");
    const Result bad = run({"localize", "--scenario", scn});
    CHECK(bad.code == 2);
    CHECK_FALSE(bad.err.empty());
  }
  SUBCASE("malformed scenario") {
    TempDir dir("malformed");
    const std::string scn = dir.file("bad.scn", "[scenario]\nseed = 3\nseed = 4\n");
    const Result bad = run({"localize", "--scenario", scn});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("line 3") != std::string::npos);
  }
}

TEST_CASE("gen-scene then localize the written clouds") {
  TempDir dir("gen");
  const Result g = run({"gen-scene", "--scenario", kDemo, "--out", dir.path.string()});
  REQUIRE(g.code == 0);
  CHECK(fs::exists(dir.path / "camera1.pcd"));
  CHECK(fs::exists(dir.path / "camera2.pcd"));
  CHECK(data_rows(slurp(dir.path / "ground_truth.csv")) == 11);

  const Result from_files =
      run({"localize", (dir.path / "camera1.pcd").string(), (dir.path / "camera2.pcd").string(), "--scenario", kDemo,
           "--out", dir.path.string()});
  REQUIRE(from_files.code == 0);
  CHECK(data_rows(from_files.out) == 11);
  CHECK(data_rows(slurp(dir.path / "boxes.csv")) == 11);
  CHECK(fs::exists(dir.path / "annotated.pcd"));

  const Result reseeded = run({"gen-scene", "--scenario", kDemo, "--seed", "99", "--out", dir.path.string()});
  CHECK(reseeded.code == 0);
}

TEST_CASE("simulate") {
  TempDir dir("simulate");
  const Result a = run({"simulate", "--scenario", kDemo, "--out", dir.path.string(), "--svg"});
  REQUIRE(a.code == 0);
  CHECK(a.out.find("harvested=11/11") != std::string::npos);
  CHECK(data_rows(a.out) == 11);
  CHECK(slurp(dir.path / "metrics.csv").find("fruit") != std::string::npos);
  CHECK(fs::exists(dir.path / "cycle_times.svg"));

  const Result b = run({"simulate", "--scenario", kDemo});
  CHECK(b.out == a.out);
  const Result c = run({"simulate", "--scenario", kDemo, "--seed", "7"});
  CHECK(c.code == 0);
  CHECK(c.out != a.out);

  CHECK(run({"simulate", "--scenario", kDemo, "--svg"}).code == 2);
  const Result cal = run({"simulate", "--scenario", kDemo, "--calibrate", "5.56"});
  CHECK(cal.code == 0);
  CHECK(cal.out.find("max_velocity = 0.2022") != std::string::npos);
}
