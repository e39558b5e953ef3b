#include <doctest.h>

#include "laserpick/demo.hpp"
#include "laserpick/errors.hpp"
#include "laserpick/localization.hpp"
#include "laserpick/scene_io.hpp"
#include "oracles.hpp"

using namespace laserpick;

namespace {

std::vector<ColoredPoint> to_vec(const PointCloud& c) { return {c.begin(), c.end()}; }

Scenario demo_scenario() { return load_scenario(LASERPICK_SOURCE_DIR "/scenarios/demo11.scn"); }

std::vector<ColoredPoint> blob(const Vec3& center, std::size_t n, double half, oracle::Fuzz& fz) {
  std::vector<ColoredPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = center + fz.vec(-half, half);
    out.push_back({p.x(), p.y(), p.z(), 200, 40, 40});
  }
  return out;
}

}  // namespace

TEST_CASE("spatial window sorts its bounds") {
  const SpatialWindow a(-0.3, 0.3, -0.2, 0.2, 0.5, 0.7);
  const SpatialWindow b(0.3, -0.3, 0.2, -0.2, 0.7, 0.5);
  CHECK(a.lower() == b.lower());
  CHECK(a.upper() == b.upper());
  CHECK(a.lower() == Vec3(-0.3, -0.2, 0.5));
}

TEST_CASE("extract_window") {
  const SpatialWindow w(-0.3, 0.3, -0.2, 0.2, 0.5, 0.7);
  SUBCASE("example membership") {
    const PointCloud c(Frame::Base, {{0, 0, 0.6}, {0.5, 0, 0.6}, {0, 0, 0.9}});
    const PointCloud out = extract_window(c, w);
    REQUIRE(out.size() == 1);
    CHECK(out[0].position() == Vec3(0, 0, 0.6));
  }
  SUBCASE("bounds are strict") {
    const PointCloud c(Frame::Base, {{0.3, 0, 0.6}, {0, -0.2, 0.6}, {0, 0, 0.5}, {0.2999, 0.1999, 0.6999}});
    CHECK(extract_window(c, w).size() == 1);
  }
  SUBCASE("empty and degenerate") {
    CHECK(extract_window(PointCloud(Frame::Base), w).empty());
    const PointCloud c(Frame::Base, {{0, 0, 0.6}});
    CHECK(extract_window(c, SpatialWindow(0, 0, 0, 0, 0.6, 0.6)).empty());
  }
  SUBCASE("fuzzed points match the predicate oracle, order kept") {
    oracle::Fuzz fz(8);
    for (int trial = 0; trial < 10; ++trial) {
      const auto pts = fz.cloud(200, -0.5, 0.8);
      const auto out = to_vec(extract_window(PointCloud(Frame::Base, pts), w));
      std::vector<ColoredPoint> want;
      for (const auto& p : pts) {
        if (oracle::in_open_box(p, Vec3(-0.3, -0.2, 0.5), Vec3(0.3, 0.2, 0.7))) want.push_back(p);
      }
      CHECK(out == want);
    }
  }
}

TEST_CASE("calibration_reference") {
  const ColorThresholds th{30, 30, 30};
  SUBCASE("two-point mean") {
    const PointCloud c(Frame::Base, {{0, 0, 0, 200, 40, 40}, {0, 0, 0, 180, 60, 40}});
    const auto ref = calibration_reference(c, th);
    CHECK(ref.mean_r == 190);
    CHECK(ref.mean_g == 50);
    CHECK(ref.mean_b == 40);
    CHECK(ref.r_th == 30);
    CHECK(ref.g_th == 30);
    CHECK(ref.b_th == 30);
  }
  SUBCASE("single point") {
    const auto ref = calibration_reference(PointCloud(Frame::Base, {{0, 0, 0, 7, 8, 9}}), th);
    CHECK(ref.mean_r == 7);
    CHECK(ref.mean_g == 8);
    CHECK(ref.mean_b == 9);
  }
  SUBCASE("empty palette is a calibration error") {
    CHECK_THROWS_AS(calibration_reference(PointCloud(Frame::Base), th), CalibrationError);
  }
  SUBCASE("fuzzed means match direct summation") {
    oracle::Fuzz fz(21);
    const auto pts = fz.cloud(500, 0, 1);
    const auto ref = calibration_reference(PointCloud(Frame::Base, pts), th);
    const auto want = oracle::mean_rgb(pts);
    CHECK(std::abs(ref.mean_r - want[0]) < 1e-9);
    CHECK(std::abs(ref.mean_g - want[1]) < 1e-9);
    CHECK(std::abs(ref.mean_b - want[2]) < 1e-9);
  }
}

TEST_CASE("filter_red") {
  const ColorReference ref{180, 40, 50, 40, 40, 40};
  CHECK(filter_red(PointCloud(Frame::Base, {{0, 0, 0, 200, 60, 70}}), ref).size() == 1);
  CHECK(filter_red(PointCloud(Frame::Base, {{0, 0, 0, 100, 40, 50}}), ref).empty());
  // boundary: a delta equal to the threshold is rejected
  CHECK(filter_red(PointCloud(Frame::Base, {{0, 0, 0, 220, 40, 50}}), ref).empty());
  CHECK(filter_red(PointCloud(Frame::Base, {{0, 0, 0, 219, 79, 11}}), ref).size() == 1);

  oracle::Fuzz fz(31);
  const auto pts = fz.cloud(1000, 0, 1);
  const auto out = to_vec(filter_red(PointCloud(Frame::Base, pts), ref));
  std::vector<ColoredPoint> want;
  for (const auto& p : pts) {
    if (std::abs(p.r - 180.0) < 40 && std::abs(p.g - 40.0) < 40 && std::abs(p.b - 50.0) < 40) want.push_back(p);
  }
  CHECK(out == want);
}

TEST_CASE("filter_red separates berries from foliage on the synthetic scene") {
  const Scenario s = demo_scenario();
  const GeneratedScene scene = generate_scene(s);
  const struct {
    const PointCloud* cloud;
    const std::vector<int>* labels;
    RigidTransform pose;
  } cams[] = {{&scene.camera1, &scene.truth.labels_camera1, s.camera1.base_from_camera()},
              {&scene.camera2, &scene.truth.labels_camera2, s.camera2.base_from_camera()}};
  for (const auto& cam : cams) {
    const PointCloud base = transform_cloud(cam.pose, *cam.cloud, Frame::Base);
    const auto ref = calibration_reference(extract_window(base, s.localization.palette_window), s.localization.thresholds);
    std::vector<ColoredPoint> berry, foliage;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const int label = (*cam.labels)[i];
      if (label >= 0) berry.push_back(base[i]);
      if (label == static_cast<int>(PointLabel::Foliage)) foliage.push_back(base[i]);
    }
    REQUIRE(!berry.empty());
    REQUIRE(!foliage.empty());
    const double berry_kept = static_cast<double>(filter_red(PointCloud(Frame::Base, berry), ref).size()) / berry.size();
    const double foliage_kept =
        static_cast<double>(filter_red(PointCloud(Frame::Base, foliage), ref).size()) / foliage.size();
    CHECK(berry_kept >= 0.99);
    CHECK(foliage_kept <= 0.01);
  }
}

TEST_CASE("merge_clouds") {
  oracle::Fuzz fz(1);
  const PointCloud a(Frame::Base, fz.cloud(3, 0, 1));
  const PointCloud b(Frame::Base, fz.cloud(4, 0, 1));
  const PointCloud m = merge_clouds(a, b);
  REQUIRE(m.size() == 7);
  for (std::size_t i = 0; i < 3; ++i) CHECK(m[i] == a[i]);
  for (std::size_t i = 0; i < 4; ++i) CHECK(m[3 + i] == b[i]);
  CHECK(merge_clouds(PointCloud(Frame::Base), b) == b);
  CHECK_THROWS_AS(merge_clouds(a, PointCloud(Frame::Camera1)), ValidationError);
}

TEST_CASE("cluster params validation") {
  CHECK_NOTHROW(ClusterParams{}.validate());
  CHECK_THROWS_AS((ClusterParams{0.0, 1, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((ClusterParams{0.01, 0, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((ClusterParams{0.01, 5, 2}.validate()), ValidationError);
  CHECK_THROWS_AS(euclidean_clusters(PointCloud(Frame::Base), ClusterParams{-1.0, 1, 2}), ValidationError);
}

TEST_CASE("euclidean_clusters examples") {
  oracle::Fuzz fz(5);
  SUBCASE("two blobs 100mm apart") {
    auto pts = blob(Vec3(0, 0, 0.6), 60, 0.008, fz);
    const auto second = blob(Vec3(0, 0.1, 0.6), 60, 0.008, fz);
    pts.insert(pts.end(), second.begin(), second.end());
    const ClusterParams p{0.020, 10, 1000};
    const auto clusters = euclidean_clusters(PointCloud(Frame::Base, pts), p);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].size() == 60);
    CHECK(clusters[1].size() == 60);
    CHECK(clusters[0][0].y < 0.05);
    CHECK(oracle::as_partition(euclidean_cluster_indices(PointCloud(Frame::Base, pts), p)) ==
          oracle::union_find_clusters(pts, 0.020, 10, 1000));
  }
  SUBCASE("chain links transitively") {
    std::vector<ColoredPoint> chain;
    for (int i = 0; i < 50; ++i) chain.push_back({i * 0.009, 0.0, 0.0});
    const auto clusters = euclidean_clusters(PointCloud(Frame::Base, chain), ClusterParams{0.010, 2, 1000});
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].size() == 50);
  }
  SUBCASE("small blob dropped, oversize blob dropped") {
    const auto small = blob(Vec3::Zero(), 5, 0.002, fz);
    CHECK(euclidean_clusters(PointCloud(Frame::Base, small), ClusterParams{0.010, 10, 100}).empty());
    const auto big = blob(Vec3::Zero(), 200, 0.004, fz);
    CHECK(euclidean_clusters(PointCloud(Frame::Base, big), ClusterParams{0.010, 10, 100}).empty());
  }
  SUBCASE("empty input") { CHECK(euclidean_clusters(PointCloud(Frame::Base), ClusterParams{}).empty()); }
  SUBCASE("clusters keep input order and sort by centroid y") {
    std::vector<ColoredPoint> pts;
    for (double y : {0.3, -0.1, 0.1}) {
      const auto b = blob(Vec3(0, y, 0), 20, 0.003, fz);
      pts.insert(pts.end(), b.begin(), b.end());
    }
    const auto idx = euclidean_cluster_indices(PointCloud(Frame::Base, pts), ClusterParams{0.01, 5, 100});
    REQUIRE(idx.size() == 3);
    CHECK(idx[0].front() == 20);
    CHECK(idx[1].front() == 40);
    CHECK(idx[2].front() == 0);
    for (const auto& c : idx) CHECK(std::is_sorted(c.begin(), c.end()));
  }
}

TEST_CASE("euclidean_clusters matches union-find oracle on fuzzed clouds") {
  oracle::Fuzz fz(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = fz.blobby_cloud(fz.index(0, 400));
    const double t = fz.real(0.003, 0.03);
    const std::size_t smin = fz.index(1, 20);
    const std::size_t smax = smin + fz.index(0, 300);
    const auto idx = euclidean_cluster_indices(PointCloud(Frame::Base, pts), ClusterParams{t, smin, smax});
    CHECK(oracle::as_partition(idx) == oracle::union_find_clusters(pts, t, smin, smax));
  }
}

TEST_CASE("euclidean_clusters is invariant to input order") {
  oracle::Fuzz fz(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = fz.blobby_cloud(300);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), fz.engine());
    std::vector<ColoredPoint> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    const ClusterParams p{0.012, 3, 1000};
    oracle::Partition mapped;
    for (const auto& c : euclidean_cluster_indices(PointCloud(Frame::Base, shuffled), p)) {
      std::set<std::size_t> s;
      for (auto i : c) s.insert(perm[i]);
      mapped.insert(s);
    }
    CHECK(mapped == oracle::as_partition(euclidean_cluster_indices(PointCloud(Frame::Base, pts), p)));
  }
}

TEST_CASE("merge then cluster equals clustering the union") {
  oracle::Fuzz fz(12);
  const auto a = fz.blobby_cloud(200);
  const auto b = fz.blobby_cloud(150);
  std::vector<ColoredPoint> uni = a;
  uni.insert(uni.end(), b.begin(), b.end());
  const auto merged = merge_clouds(PointCloud(Frame::Base, a), PointCloud(Frame::Base, b));
  CHECK(oracle::as_partition(euclidean_cluster_indices(merged, ClusterParams{0.01, 5, 1000})) ==
        oracle::union_find_clusters(uni, 0.01, 5, 1000));
}

TEST_CASE("bounding_boxes") {
  SUBCASE("two-point cluster") {
    const auto boxes = bounding_boxes({PointCloud(Frame::Base, {{0, 0, 0}, {0.02, 0.01, 0.03}})});
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].box.min == Vec3(0, 0, 0));
    CHECK(boxes[0].box.max == Vec3(0.02, 0.01, 0.03));
    CHECK(boxes[0].point_count == 2);
    CHECK(boxes[0].rank == 0);
  }
  SUBCASE("single point is degenerate") {
    const auto boxes = bounding_boxes({PointCloud(Frame::Base, {{0.1, 0.2, 0.3}})});
    CHECK(boxes[0].box.min == boxes[0].box.max);
    CHECK(boxes[0].centroid == Vec3(0.1, 0.2, 0.3));
  }
  SUBCASE("fuzzed clusters match the fold oracle") {
    oracle::Fuzz fz(6);
    std::vector<PointCloud> clusters;
    std::vector<oracle::Fold> want;
    for (int i = 0; i < 20; ++i) {
      const auto pts = fz.cloud(fz.index(1, 80), -1, 1);
      clusters.emplace_back(Frame::Base, pts);
      want.push_back(oracle::fold(pts));
    }
    const auto boxes = bounding_boxes(clusters);
    REQUIRE(boxes.size() == 20);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      CHECK(boxes[i].rank == i);
      CHECK(boxes[i].box.min == want[i].min);
      CHECK(boxes[i].box.max == want[i].max);
      CHECK((boxes[i].centroid - want[i].mean()).norm() < 1e-12);
      CHECK(boxes[i].box.contains(boxes[i].centroid));
    }
  }
}

TEST_CASE("localize on the demo scene") {
  const Scenario s = demo_scenario();
  const auto boxes = localize_scenario(s);
  REQUIRE(boxes.size() == 11);
  std::vector<Vec3> truth;
  for (const auto& b : s.berries) truth.push_back(b.centroid);
  std::sort(truth.begin(), truth.end(), [](const Vec3& a, const Vec3& b) { return a.y() < b.y(); });
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    CHECK(boxes[i].rank == i);
    CHECK((boxes[i].centroid - truth[i]).norm() <= 0.005);
    CHECK(boxes[i].point_count >= s.localization.clusters.min_size);
    CHECK(boxes[i].box.contains(boxes[i].centroid));
    if (i > 0) CHECK(boxes[i].centroid.y() > boxes[i - 1].centroid.y());
  }
}

TEST_CASE("localize edge cases") {
  Scenario s = demo_scenario();
  s.foliage.points = 3000;
  SUBCASE("no berries gives no boxes") {
    s.berries.clear();
    CHECK(localize_scenario(s).empty());
  }
  SUBCASE("missing palette is a calibration error") {
    s.palette.points = 0;
    CHECK_THROWS_AS(localize_scenario(s), CalibrationError);
  }
  SUBCASE("colour gain keeps the boxes") {
    const auto before = localize_scenario(s);
    s.colors.gain = 0.7;
    const auto after = localize_scenario(s);
    REQUIRE(after.size() == before.size());
    for (std::size_t i = 0; i < after.size(); ++i) CHECK((after[i].centroid - before[i].centroid).norm() < 0.002);
  }
}
