#include <algorithm>
#include <cmath>

#include <doctest.h>
#include <Eigen/SVD>

#include "silcal/hull.hpp"
#include "silcal/synth.hpp"
#include "support.hpp"

using namespace silcal;
using testing::error_of;
using testing::sphere_scene;

namespace {

Vec2 centroid(const SilhouetteMask& m) {
  Vec2 sum = Vec2::Zero();
  double n = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) {
        sum += Vec2(x, y);
        n += 1;
      }
    }
  }
  return sum / n;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// Reference raster: how many of each pixel's 4x4 subsamples fall inside some
// outline conic.
std::vector<int> coverage(const SceneScript& s, const CameraPair& cams, int camera, int t) {
  const Mat34 P = camera == 0 ? cams.P1() : cams.P2();
  std::vector<Mat3> conics;
  for (const auto& e : s.ellipsoids) conics.push_back(outline_conic(dual_quadric(e, t), P));
  std::vector<int> cover;
  for (int y = 0; y < cams.height; ++y) {
    for (int x = 0; x < cams.width; ++x) {
      int inside = 0;
      for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
          const Vec3 p(x - 0.375 + 0.25 * i, y - 0.375 + 0.25 * j, 1.0);
          for (const auto& C : conics) {
            if (p.dot(C * p) < 0.0) {
              ++inside;
              break;
            }
          }
        }
      }
      cover.push_back(inside);
    }
  }
  return cover;
}

}  // namespace

TEST_CASE("ground-truth F from the camera pair") {
  for (double base : {10.0, 30.0, 60.0}) {
    const auto cams = CameraPair::standard(base);
    const Mat3 raw = cams.K2.inverse().transpose() * skew(cams.t) * cams.R * cams.K1.inverse();
    const Mat3 a = raw / raw.norm();
    const Mat3 b = cams.fundamental().matrix();
    // Scale equivalence: the stacked entries are parallel.
    const Eigen::Map<const Eigen::Matrix<double, 9, 1>> va(a.data()), vb(b.data());
    const Eigen::Matrix<double, 9, 1> d = va - va.dot(vb) * vb;
    CHECK(d.norm() < 1e-10);
    const Eigen::JacobiSVD<Mat3> svd(b);
    CHECK(svd.singularValues()(2) < 1e-10);
    CHECK((b * cams.left_epipole()).norm() < 1e-10 * cams.left_epipole().norm());
  }
}

TEST_CASE("sphere on the optical axis renders a centered circle") {
  auto s = sphere_scene({Vec3(0, 0, 5)}, 0.5);
  s.cameras.R = Mat3::Identity();
  s.cameras.t = Vec3(-1, 0, 0);
  const auto left = render_frame(s.script, s.cameras, 0, 0);
  const Vec2 c = centroid(left);
  CHECK(c.x() == doctest::Approx(s.cameras.K1(0, 2)).epsilon(1e-3));
  CHECK(c.y() == doctest::Approx(s.cameras.K1(1, 2)).epsilon(1e-3));
  // Radius of the outline is f r / sqrt(d^2 - r^2).
  const double r = 800.0 * 0.5 / std::sqrt(25.0 - 0.25);
  const double area = static_cast<double>(left.count());
  CHECK(area == doctest::Approx(std::numbers::pi * r * r).epsilon(0.01));
}

TEST_CASE("sliding right moves the centroid right") {
  auto s = sphere_scene({Vec3(0, 0, 5)}, 0.4, 8);
  for (int t = 0; t < 8; ++t) s.script.ellipsoids[0].centers[t] = Vec3(-0.8 + 0.2 * t, 0, 5);
  const auto [left, right] = render_silhouettes(s.script, s.cameras);
  for (std::size_t t = 1; t < left.size(); ++t) {
    CHECK(centroid(left[t]).x() > centroid(left[t - 1]).x());
    CHECK(centroid(right[t]).x() > centroid(right[t - 1]).x());
  }
}

TEST_CASE("raster agrees with a supersampled reference") {
  for (const auto& preset : scene_presets()) {
    auto scene = generate_scene(preset, 3, 20);
    scene.script.boundary_noise = 0.0;
    for (int t : {0, 7, 19}) {
      for (int cam : {0, 1}) {
        const auto m = render_frame(scene.script, scene.cameras, cam, t);
        const auto cover = coverage(scene.script, scene.cameras, cam, t);
        // Half-covered pixels have no majority and may go either way.
        std::size_t boundary = 0, disagree = 0;
        for (int y = 0; y < m.height(); ++y) {
          for (int x = 0; x < m.width(); ++x) {
            const int c = cover[static_cast<std::size_t>(y) * m.width() + x];
            boundary += c > 0 && c < 16;
            if (c != 8) disagree += m.at(x, y) != (c > 8);
          }
        }
        CAPTURE(preset);
        CHECK(static_cast<double>(disagree) < 0.01 * static_cast<double>(boundary));
      }
    }
  }
}

TEST_CASE("ground-truth frontier points") {
  SUBCASE("lie on corresponding epipolar lines") {
    for (const auto& preset : scene_presets()) {
      const auto scene = generate_scene(preset, 1);
      const Mat3 F = scene.cameras.fundamental().matrix();
      for (int t = 0; t < scene.script.frames; t += 9) {
        for (const auto& c : ground_truth_frontier_points(scene.script, scene.cameras, t)) {
          const Vec3 l = F * homogeneous(c.x);
          CHECK(std::abs(homogeneous(c.x_prime).dot(l)) / std::hypot(l.x(), l.y()) < 1e-8);
          CHECK(c.t == t);
        }
      }
    }
  }

  SUBCASE("one sphere gives two") {
    const auto s = sphere_scene({Vec3(0.2, -0.1, 5)}, 0.6);
    const auto pts = ground_truth_frontier_points(s.script, s.cameras, 0);
    CHECK(pts.size() == 2);
    CHECK((pts[0].x - pts[1].x).norm() > 50.0);
  }

  SUBCASE("epipole inside an outline") {
    const auto s = testing::epipole_in_outline_scene();
    CHECK(error_of([&] { ground_truth_frontier_points(s.script, s.cameras, 0); }) ==
          ErrorCode::kFrontierUndefined);
  }

  SUBCASE("each sits on the epipolar tangent of a nearby critical point") {
    // The tangency point itself can fall between two hull vertices; the
    // vertex that carries the tangent line is close to the line, not to the point.
    const auto scene = generate_scene("single-ellipsoid", 0);
    const auto [left, right] = render_silhouettes(scene.script, scene.cameras);
    const Vec3 e = scene.cameras.left_epipole();
    for (int t = 0; t < scene.script.frames; t += 3) {
      const auto cps = extract_critical_points(left[t], extract_convex_hull(left[t]));
      for (const auto& c : ground_truth_frontier_points(scene.script, scene.cameras, t)) {
        const Vec3 l = homogeneous(c.x).cross(e);
        double best = 1e9;
        for (const auto& k : cps) {
          if ((k.position - c.x).norm() > 10.0) continue;
          best = std::min(best, std::abs(l.dot(homogeneous(k.position))) / std::hypot(l.x(), l.y()));
        }
        CHECK(best <= 1.0);
      }
    }
  }

  SUBCASE("move slowly") {
    const auto scene = generate_scene("single-ellipsoid", 2);
    auto prev = ground_truth_frontier_points(scene.script, scene.cameras, 0);
    for (int t = 1; t < scene.script.frames; ++t) {
      const auto cur = ground_truth_frontier_points(scene.script, scene.cameras, t);
      REQUIRE(cur.size() == prev.size());
      for (std::size_t i = 0; i < cur.size(); ++i) {
        CHECK((cur[i].x - prev[i].x).norm() < 15.0);
        CHECK((cur[i].x_prime - prev[i].x_prime).norm() < 15.0);
      }
      prev = cur;
    }
  }
}

TEST_CASE("single-ellipsoid centroid steps stay within 3 px") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto scene = generate_scene("single-ellipsoid", seed, 100);
    CHECK(scene.script.frames == 100);
    const auto [left, right] = render_silhouettes(scene.script, scene.cameras);
    REQUIRE(left.size() == 100);
    for (std::size_t t = 1; t < left.size(); ++t) {
      CHECK((centroid(left[t]) - centroid(left[t - 1])).norm() <= 3.0);
      CHECK((centroid(right[t]) - centroid(right[t - 1])).norm() <= 3.0);
    }
  }
}

TEST_CASE("crossing-motion brings the two frontier tracks within 2C") {
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    const auto scene = generate_scene("crossing-motion", seed);
    double closest = 1e9;
    for (int t = 0; t < scene.script.frames; ++t) {
      const auto pts = ground_truth_frontier_points(scene.script, scene.cameras, t);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
          closest = std::min(closest, std::min((pts[i].x - pts[j].x).norm(), (pts[i].x_prime - pts[j].x_prime).norm()));
        }
      }
    }
    CHECK(closest < 30.0);
  }
}

TEST_CASE("generation is deterministic") {
  for (const auto& preset : scene_presets()) {
    const auto a = generate_scene(preset, 17, 30);
    const auto b = generate_scene(preset, 17, 30);
    REQUIRE(a.script.ellipsoids.size() == b.script.ellipsoids.size());
    for (std::size_t i = 0; i < a.script.ellipsoids.size(); ++i) {
      CHECK(a.script.ellipsoids[i].semi_axes == b.script.ellipsoids[i].semi_axes);
      CHECK(a.script.ellipsoids[i].centers == b.script.ellipsoids[i].centers);
      CHECK(a.script.ellipsoids[i].orientations == b.script.ellipsoids[i].orientations);
    }
    CHECK(render_frame(a.script, a.cameras, 1, 12) == render_frame(b.script, b.cameras, 1, 12));
    const auto c = generate_scene(preset, 18, 30);
    CHECK(c.script.ellipsoids[0].centers != a.script.ellipsoids[0].centers);
  }
}

TEST_CASE("errors") {
  CHECK(error_of([] { generate_scene("teapot", 0); }) == ErrorCode::kUnknownPreset);
  auto s = sphere_scene({Vec3(3, 0, 5)}, 0.5);
  CHECK(error_of([&] { render_silhouettes(s.script, s.cameras); }) == ErrorCode::kOutOfFrame);
  s = sphere_scene({Vec3(0, 0, -5)}, 0.5);
  CHECK(error_of([&] { render_frame(s.script, s.cameras, 0, 0); }) == ErrorCode::kOutOfFrame);
}
