#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "laserpick/datasets.hpp"
#include "laserpick/errors.hpp"
#include "laserpick/laser_model.hpp"
#include "oracles.hpp"

using namespace laserpick;
using doctest::Approx;

namespace {

const std::vector<PierceRecord>& fine() { return embedded_pierce_dataset("fine"); }
const std::vector<PierceRecord>& coarse() { return embedded_pierce_dataset("coarse"); }

double disc_area(double d_mm) { return std::numbers::pi * d_mm * d_mm / 4.0; }

std::vector<PierceRecord> knots(std::initializer_list<std::pair<double, double>> spot_cp) {
  std::vector<PierceRecord> out;
  for (auto [spot, cp] : spot_cp) out.push_back({spot, 2.2, 1.0, 1.0, cp});
  return out;
}

}  // namespace

TEST_CASE("pierce_constant") {
  CHECK(pierce_constant(2.42, 0.71) == Approx(1.7182));
  CHECK(std::abs(pierce_constant(2.42, 0.71) - 1.72) <= 0.03);
  CHECK(pierce_constant(3.3, 0.0) == 0.0);
  CHECK(pierce_constant(1.81, 0.5) == Approx(0.905));
  CHECK(std::abs(pierce_constant(1.81, 0.5) - 0.90) <= 0.03);
  CHECK_THROWS_AS(pierce_constant(-1.0, 0.5), ValidationError);
  CHECK_THROWS_AS(pierce_constant(1.0, -0.5), ValidationError);
}

TEST_CASE("pierce_constant is bilinear") {
  oracle::Fuzz fz(3);
  for (int i = 0; i < 100; ++i) {
    const double v = fz.real(0, 5), s = fz.real(0, 4), a = fz.real(0, 10);
    CHECK(pierce_constant(a * v, s) == Approx(a * pierce_constant(v, s)));
    CHECK(pierce_constant(v, a * s) == Approx(a * pierce_constant(v, s)));
  }
}

TEST_CASE("pierce_velocity") {
  CHECK(pierce_velocity(2.2, 0.71) == Approx(3.0986).epsilon(1e-4));
  CHECK(std::abs(pierce_velocity(2.2, 0.71) - 3.09) <= 0.03);
  CHECK(pierce_velocity(2.4, 2.61) == Approx(0.9195).epsilon(1e-4));
  CHECK(pierce_velocity(0.0, 5.0) == 0.0);
  CHECK_THROWS_AS(pierce_velocity(2.2, 0.0), ValidationError);
  CHECK_THROWS_AS(pierce_velocity(2.2, -1.0), ValidationError);
}

TEST_CASE("embedded datasets mirror the published tables") {
  const Datasets& ds = load_datasets();
  REQUIRE(ds.lateral.size() == 10);
  REQUIRE(ds.coarse.size() == 7);
  REQUIRE(ds.fine.size() == 6);
  CHECK(ds.lateral.front().spot_diameter_mm == 0.1);
  CHECK(ds.lateral.front().lateral_velocity_mm_s == 10);
  CHECK(ds.lateral.back().spot_diameter_mm == 0.5);
  CHECK(ds.lateral.back().cut_time_s == 7.33);
  CHECK(ds.coarse.front().spot_diameter_mm == 3.79);
  CHECK(ds.coarse.front().pierce_time_s == 32.0);
  CHECK(ds.coarse[5].pierce_constant_mm2_s == 1.72);
  CHECK(ds.fine[3].spot_diameter_mm == 0.9);
  CHECK(ds.fine[3].pierce_constant_mm2_s == 1.36);
  CHECK(&coarse() == &ds.coarse);
  CHECK_THROWS_AS(embedded_pierce_dataset("medium"), ValidationError);
}

TEST_CASE("dataset parsing") {
  SUBCASE("header is required") {
    std::istringstream in("spot,stem\n0.9,2.2\n");
    CHECK_THROWS_AS(parse_pierce_csv(in), ParseError);
  }
  SUBCASE("comments and blank lines skipped") {
    std::istringstream in("# note\n\n" + std::string(kPierceCsvHeader) + "\n0.9,2.2,1.47,1.49,1.36\n\n");
    const auto rows = parse_pierce_csv(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].pierce_time_s == 1.47);
  }
  SUBCASE("bad row names its line") {
    std::istringstream in(std::string(kPierceCsvHeader) + "\n0.9,2.2,1.47,1.49,1.36\n0.9,2.2,abc,1.49,1.36\n");
    try {
      parse_pierce_csv(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("wrong column count and non-positive values") {
    std::istringstream a(std::string(kLateralCsvHeader) + "\n0.1,10,2.27,11.98\n");
    CHECK_THROWS_AS(parse_lateral_csv(a), ParseError);
    std::istringstream b(std::string(kLateralCsvHeader) + "\n0.1,10,2.27,-11.98,0.19\n");
    CHECK_THROWS_AS(parse_lateral_csv(b), ParseError);
  }
  SUBCASE("files on disk match the embedded copies") {
    const auto f = read_pierce_csv(LASERPICK_SOURCE_DIR "/data/pierce_fine.csv");
    REQUIRE(f.size() == fine().size());
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i].pierce_constant_mm2_s == fine()[i].pierce_constant_mm2_s);
    CHECK(read_lateral_csv(LASERPICK_SOURCE_DIR "/data/lateral_velocity.csv").size() == 10);
    CHECK_THROWS_AS(read_pierce_csv("/nonexistent/file.csv"), IoError);
  }
}

TEST_CASE("interpolate_cp") {
  CHECK(interpolate_cp(0.9, fine()) == 1.36);
  CHECK(interpolate_cp(0.71, coarse()) == 1.72);
  const auto no_mid = knots({{0.8, 1.14}, {1.0, 1.23}});
  CHECK(interpolate_cp(0.9, no_mid) == Approx(1.185));
  CHECK(interpolate_cp(0.85, no_mid) == Approx(1.14 + 0.25 * 0.09));
  CHECK_THROWS_AS(interpolate_cp(4.0, coarse()), DomainError);
  CHECK_THROWS_AS(interpolate_cp(0.05, coarse()), DomainError);
  CHECK_THROWS_AS(interpolate_cp(0.9, std::vector<PierceRecord>{}), DomainError);
  // unsorted input (coarse is stored largest-first) interpolates the same
  CHECK(interpolate_cp(1.0, coarse()) == Approx(1.21 + (1.72 - 1.21) * (1.32 - 1.0) / (1.32 - 0.71)));
}

TEST_CASE("cut_time closed form") {
  const CutModel model(fine());
  const double want = disc_area(2.2) / 1.36;
  CHECK(want == Approx(2.795).epsilon(1e-3));
  CHECK(cut_time(2.2, model, 0.9, 96) == Approx(want));
  CHECK(std::abs(cut_time(2.2, model, 0.9, 96) - 2.88) / 2.88 <= 0.10);
  CHECK(cut_time(1e-9, model, 0.9, 96) < 1e-15);
  CHECK(cut_time(2.2, model.with_toughness(1.5), 0.9, 96) == Approx(1.5 * want));
  CHECK_THROWS_AS(cut_time(2.2, model, 0.9, 5.0), UnsupportedRegimeError);
  CHECK_NOTHROW(cut_time(2.2, model, 0.9, 10.0));
  CHECK_THROWS_AS(cut_time(2.2, model, 2.0, 96), DomainError);
}

TEST_CASE("cut_time against the lateral-velocity table") {
  const CutModel model(coarse());
  for (const auto& row : load_datasets().lateral) {
    if (row.spot_diameter_mm != 0.1) continue;
    const double predicted = cut_time(row.stem_diameter_mm, model, 0.1, row.lateral_velocity_mm_s);
    CHECK(std::abs(predicted - row.cut_time_s) / row.cut_time_s <= 0.30);
  }
  // with the nearest measured constant the prediction lands near 14 s
  const CutModel flat(knots({{0.09, 0.28}, {0.11, 0.28}}));
  CHECK(cut_time(2.25, flat, 0.1, 96) == Approx(disc_area(2.25) / 0.28));
  CHECK(cut_time(2.25, flat, 0.1, 96) == Approx(14.2).epsilon(0.01));
}

TEST_CASE("cut_time monotonicity and v_l invariance") {
  const CutModel model(coarse());
  oracle::Fuzz fz(41);
  for (int i = 0; i < 200; ++i) {
    const double d = fz.real(0.5, 3.0), spot = fz.real(0.1, 3.7), v = fz.real(10, 500);
    const double t = cut_time(d, model, spot, v);
    CHECK(cut_time(d, model, spot, 96.0) == t);
    CHECK(cut_time(d * 1.1, model, spot, v) > t);
    CHECK(cut_time(d, model.with_toughness(1.2), spot, v) > t);
  }
  const auto lo = knots({{0.5, 1.0}, {1.5, 1.0}});
  const auto hi = knots({{0.5, 2.0}, {1.5, 2.0}});
  CHECK(cut_time(2.2, CutModel(hi), 1.0, 96) < cut_time(2.2, CutModel(lo), 1.0, 96));
}

TEST_CASE("cut model validation") {
  CHECK_THROWS_AS(CutModel(fine(), 0.0), ValidationError);
  CHECK_THROWS_AS(CutModel(fine(), -1.0), ValidationError);
  CHECK_THROWS_AS(CutModel({}), ValidationError);
  CHECK_THROWS_AS(CutModel(knots({{0.5, 0.0}, {1.0, 1.0}})), ValidationError);
  const CutModel m(fine(), 1.0, 10.0);
  CHECK(m.etch_rate(0.9, 96) == Approx(1.36));
  CHECK_THROWS_AS(m.etch_rate(0.9, 9.99), UnsupportedRegimeError);
}

TEST_CASE("etch_step") {
  const CutModel model(fine());
  const EtchState start = EtchState::for_stem(2.2);
  CHECK(start.target_area_mm2 == Approx(3.8013).epsilon(1e-4));
  CHECK(start.cut_area_mm2 == 0.0);
  CHECK_FALSE(start.severed);

  SUBCASE("laser off leaves state unchanged") {
    const EtchState s = etch_step(start, 5.0, false, model, 0.9, 96);
    CHECK(s.cut_area_mm2 == start.cut_area_mm2);
    CHECK_FALSE(s.severed);
  }
  SUBCASE("below the minimum lateral velocity nothing is etched") {
    CHECK(etch_step(start, 1.0, true, model, 0.9, 5.0).cut_area_mm2 == 0.0);
  }
  SUBCASE("one long step clamps") {
    const EtchState s = etch_step(start, 10.0, true, model, 0.9, 96);
    CHECK(s.severed);
    CHECK(s.cut_area_mm2 == s.target_area_mm2);
  }
  SUBCASE("1 ms stepping matches the closed form within one step") {
    EtchState s = start;
    int steps = 0;
    while (!s.severed) {
      s = etch_step(s, 0.001, true, model, 0.9, 96);
      ++steps;
      CHECK(s.cut_area_mm2 <= s.target_area_mm2);
    }
    CHECK(std::abs(steps * 0.001 - disc_area(2.2) / 1.36) <= 0.001);
  }
  SUBCASE("any partition of the interval integrates exactly") {
    oracle::Fuzz fz(5);
    const double closed = cut_time(2.2, model, 0.9, 96);
    for (int trial = 0; trial < 20; ++trial) {
      EtchState s = start;
      double t = 0.0, last_dt = 0.0;
      while (!s.severed) {
        last_dt = fz.real(0.0005, 0.05);
        s = etch_step(s, last_dt, true, model, 0.9, 96);
        t += last_dt;
      }
      CHECK(t >= closed - 1e-9);
      CHECK(t - closed <= last_dt + 1e-9);
    }
  }
}

TEST_CASE("optimal_spot") {
  CHECK(optimal_spot(fine(), 0.5, 1.1) == 0.9);
  CHECK(optimal_spot(coarse(), 0.09, 3.79) == 0.71);
  CHECK(optimal_spot(knots({{1.3, 0.7}}), 0.0, 5.0) == 1.3);
  CHECK(optimal_spot(fine(), 0.95, 1.1) == 1.0);
  CHECK(optimal_spot(knots({{0.4, 1.0}, {0.6, 1.0}, {0.5, 0.2}}), 0.0, 1.0) == 0.4);
  CHECK_THROWS_AS(optimal_spot(fine(), 1.2, 2.0), ValidationError);
  CHECK_THROWS_AS(optimal_spot(fine(), 0.91, 0.99), ValidationError);
}

TEST_CASE("optimal_spot is invariant to rescaling C_p") {
  oracle::Fuzz fz(9);
  for (double scale : {0.01, 0.5, 3.0, 1000.0}) {
    auto scaled = coarse();
    for (auto& r : scaled) r.pierce_constant_mm2_s *= scale;
    CHECK(optimal_spot(scaled, 0.09, 3.79) == 0.71);
  }
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PierceRecord> recs;
    for (int k = 0; k < 8; ++k) recs.push_back({0.1 + 0.3 * k, 2.2, 1, 1, fz.real(0.1, 2)});
    const double best = optimal_spot(recs, 0.0, 5.0);
    auto scaled = recs;
    const double a = fz.real(0.1, 10);
    for (auto& r : scaled) r.pierce_constant_mm2_s *= a;
    CHECK(optimal_spot(scaled, 0.0, 5.0) == best);
  }
}

TEST_CASE("optimal_spot_continuous") {
  const double best = optimal_spot_continuous(fine(), 0.5, 1.1);
  CHECK(best == Approx(0.9).epsilon(1e-3));
  const auto tent = knots({{0.0 + 0.1, 0.0 + 0.1}, {0.7, 1.0}, {1.5, 0.2}});
  CHECK(optimal_spot_continuous(tent, 0.1, 1.5) == Approx(0.7).epsilon(1e-3));
  CHECK(optimal_spot_continuous(tent, 0.1, 0.5) == Approx(0.5).epsilon(1e-3));
}

TEST_CASE("verify_tables") {
  const TableAudit audit = verify_tables(load_datasets());
  CHECK(audit.passed());
  CHECK(audit.max_deviation() <= 0.03);
  CHECK(audit.max_deviation() == Approx(0.024).epsilon(0.02));
  CHECK(audit.failures().empty());
  // lateral: one velocity check per row; pierce: velocity and constant per row
  CHECK(audit.checks.size() == 10 + 2 * 7 + 2 * 6);

  const auto find = [&](const std::string& table, std::size_t row, const std::string& col) {
    for (const auto& c : audit.checks) {
      if (c.table == table && c.row == row && c.column == col) return c;
    }
    FAIL("missing check");
    return TableDeviation{};
  };
  const auto c071 = find("coarse", 5, "pierce_velocity_mm_s");
  CHECK(c071.recomputed == Approx(2.3 / 0.96));
  CHECK(c071.deviation() == Approx(0.0242).epsilon(0.01));
  const auto f09 = find("fine", 3, "pierce_constant_mm2_s");
  CHECK(f09.recomputed == Approx(1.49 * 0.9));
  CHECK(f09.deviation() == Approx(0.019).epsilon(0.01));
  const auto l05 = find("lateral", 9, "cut_velocity_mm_s");
  CHECK(l05.recomputed == Approx(2.34 / 7.33));
  CHECK(l05.deviation() <= 0.03);

  SUBCASE("corrupted constant fails and is named") {
    Datasets bad = load_datasets();
    bad.fine[2].pierce_constant_mm2_s += 0.1;
    const TableAudit a = verify_tables(bad);
    CHECK_FALSE(a.passed());
    REQUIRE(a.failures().size() == 1);
    CHECK(a.failures()[0].table == "fine");
    CHECK(a.failures()[0].row == 2);
    CHECK(a.failures()[0].column == "pierce_constant_mm2_s");
  }
  SUBCASE("tight tolerance fails on published rounding") {
    CHECK_FALSE(verify_tables(load_datasets(), 0.001).passed());
  }
}
