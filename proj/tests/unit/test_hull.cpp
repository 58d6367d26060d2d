#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <doctest.h>

#include "silcal/hull.hpp"
#include "silcal/mask_io.hpp"
#include "support.hpp"

using namespace silcal;
using testing::disc;
using testing::error_of;
using testing::fill_rect;

namespace {

std::vector<Vec2> foreground(const SilhouetteMask& m) {
  std::vector<Vec2> pts;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) pts.emplace_back(x, y);
    }
  }
  return pts;
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

// Hull vertices by the edge test: (p, q) is a hull edge when every point is
// on its left or on the closed segment. Vertices are edge endpoints.
std::set<std::pair<double, double>> brute_force_hull(const std::vector<Vec2>& pts) {
  std::set<std::pair<double, double>> out;
  for (const auto& p : pts) {
    for (const auto& q : pts) {
      if (p == q) continue;
      bool edge = true;
      for (const auto& r : pts) {
        const double c = cross(p, q, r);
        if (c < 0.0) {
          edge = false;
          break;
        }
        if (c == 0.0) {
          const double s = (r - p).dot(q - p) / (q - p).squaredNorm();
          if (s < 0.0 || s > 1.0) {
            edge = false;
            break;
          }
        }
      }
      if (edge) {
        out.insert({p.x(), p.y()});
        out.insert({q.x(), q.y()});
      }
    }
  }
  return out;
}

std::set<std::pair<double, double>> as_set(const ConvexHullPolygon& h) {
  std::set<std::pair<double, double>> out;
  for (const auto& v : h.vertices) out.insert({v.x(), v.y()});
  return out;
}

SilhouetteMask l_shape() {
  SilhouetteMask m(16, 16);
  fill_rect(m, 0, 0, 9, 3);
  fill_rect(m, 0, 0, 3, 9);
  return m;
}

double signed_area(const ConvexHullPolygon& h) {
  double a = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) a += cross(Vec2::Zero(), h.vertex(i), h.vertex(i + 1));
  return 0.5 * a;
}

}  // namespace

TEST_CASE("single pixel mask has a degenerate hull") {
  SilhouetteMask m(5, 5);
  m.set(2, 2);
  CHECK(error_of([&] { extract_convex_hull(m); }) == ErrorCode::kDegenerateMask);
}

TEST_CASE("empty mask") {
  SilhouetteMask m(5, 5);
  CHECK(error_of([&] { extract_convex_hull(m); }) == ErrorCode::kEmptyMask);
}

TEST_CASE("collinear pixels") {
  SilhouetteMask m(10, 10);
  for (int x = 1; x < 8; ++x) m.set(x, 4);
  CHECK(error_of([&] { extract_convex_hull(m); }) == ErrorCode::kDegenerateMask);
}

TEST_CASE("filled square hull is its four corners") {
  SilhouetteMask m(12, 12);
  fill_rect(m, 2, 3, 8, 9);
  const auto h = extract_convex_hull(m);
  CHECK(as_set(h) == std::set<std::pair<double, double>>{{2, 3}, {8, 3}, {8, 9}, {2, 9}});
  CHECK(signed_area(h) > 0.0);
}

TEST_CASE("L-shaped mask hull matches brute force") {
  const auto m = l_shape();
  const auto h = extract_convex_hull(m);
  CHECK(as_set(h) == brute_force_hull(foreground(m)));
  // The notch chord runs from (9,3) to (3,9); (9,0) and (0,9) end the arms.
  CHECK(as_set(h) == std::set<std::pair<double, double>>{{0, 0}, {9, 0}, {9, 3}, {3, 9}, {0, 9}});
}

TEST_CASE("random masks: hull vertices match brute force") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(0, 19);
  for (int trial = 0; trial < 40; ++trial) {
    SilhouetteMask m(20, 20);
    const int n = 3 + trial % 25;
    for (int i = 0; i < n; ++i) m.set(coord(rng), coord(rng));
    const auto pts = foreground(m);
    const auto expected = brute_force_hull(pts);
    if (expected.size() < 3) continue;
    const auto h = extract_convex_hull(m);
    CHECK(as_set(h) == expected);
    CHECK(signed_area(h) > 0.0);
    // Idempotence.
    CHECK(as_set(convex_hull(h.vertices)) == as_set(h));
  }
}

TEST_CASE("convex mask: critical points are exactly the hull vertices") {
  const auto m = disc(40, 40, 20, 20, 9.5);
  const auto h = extract_convex_hull(m);
  const auto cps = extract_critical_points(m, h);
  REQUIRE(cps.size() == h.size());
  std::set<std::pair<double, double>> got;
  for (const auto& cp : cps) got.insert({cp.position.x(), cp.position.y()});
  CHECK(got == as_set(h));
}

TEST_CASE("L-shaped mask: nothing on the chord interior") {
  const auto m = l_shape();
  const auto h = extract_convex_hull(m);
  const auto cps = extract_critical_points(m, h);
  const Vec2 a(9, 3), b(3, 9);
  for (const auto& cp : cps) {
    const Vec2 p = cp.position;
    const double along = (p - a).dot(b - a) / (b - a).squaredNorm();
    const double off = std::abs(cross(a, b, p)) / (b - a).norm();
    const bool interior = off <= kOnBoundaryTolerance && along > 0.0 && along < 1.0;
    CHECK_FALSE(interior);
  }
  // Chord endpoints are critical.
  auto has = [&](double x, double y) {
    return std::any_of(cps.begin(), cps.end(), [&](const CriticalPoint& c) { return c.position == Vec2(x, y); });
  };
  CHECK(has(9, 3));
  CHECK(has(3, 9));
  CHECK(cps.size() <= 2 * h.size());
}

TEST_CASE("two discs: critical points lie on a disc and on the joint hull") {
  SilhouetteMask m = disc(60, 30, 12, 15, 7.5);
  const auto second = disc(60, 30, 45, 15, 7.5);
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 60; ++x) {
      if (second.at(x, y)) m.set(x, y);
    }
  }
  const auto h = extract_convex_hull(m);
  const auto cps = extract_critical_points(m, h);
  REQUIRE_FALSE(cps.empty());
  for (const auto& cp : cps) {
    const int x = static_cast<int>(cp.position.x());
    const int y = static_cast<int>(cp.position.y());
    CHECK(m.is_boundary(x, y));
    CHECK(h.boundary_distance(cp.position) <= kOnBoundaryTolerance);
    // The bridge spans x in (19.5, 37.5); none of its interior qualifies.
    CHECK((x <= 19 || x >= 38));
  }
  CHECK(cps.size() <= 2 * h.size());
}

TEST_CASE("tangent set on an edge interior is that edge's line") {
  SilhouetteMask m(12, 12);
  fill_rect(m, 1, 1, 9, 9);
  const auto h = extract_convex_hull(m);
  const auto ts = incident_tangents(Vec2(5, 1), h);
  REQUIRE(ts.lines.size() == 1);
  CHECK(ts.lines[0].distance(Vec2(1, 1)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ts.lines[0].distance(Vec2(9, 1)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("square corner tangents") {
  SilhouetteMask m(12, 12);
  fill_rect(m, 0, 0, 9, 9);
  const auto h = extract_convex_hull(m);
  SUBCASE("includes both edge lines") {
    const auto ts = incident_tangents(Vec2(0, 0), h);
    bool horizontal = false, vertical = false;
    for (const auto& l : ts.lines) {
      horizontal |= std::abs(std::abs(l.b) - 1.0) < 1e-12 && std::abs(l.c) < 1e-12;
      vertical |= std::abs(std::abs(l.a) - 1.0) < 1e-12 && std::abs(l.c) < 1e-12;
    }
    CHECK(horizontal);
    CHECK(vertical);
  }
  SUBCASE("45 degree resolution gives the bisector as the third line") {
    const auto ts = incident_tangents(Vec2(0, 0), h, std::numbers::pi / 4.0);
    REQUIRE(ts.lines.size() == 3);
    int diagonal = 0;
    for (const auto& l : ts.lines) {
      if (std::abs(std::abs(l.a) - std::sqrt(0.5)) < 1e-12 && std::abs(std::abs(l.b) - std::sqrt(0.5)) < 1e-12) {
        ++diagonal;
      }
    }
    CHECK(diagonal == 1);
  }
  SUBCASE("point away from the hull") {
    CHECK(error_of([&] { incident_tangents(Vec2(5, 5), h); }) == ErrorCode::kNotOnHull);
  }
}

TEST_CASE("every tangent line supports the silhouette") {
  const auto m = disc(50, 50, 24.3, 25.1, 14.2);
  const auto h = extract_convex_hull(m);
  const auto pts = foreground(m);
  for (const auto& cp : extract_critical_points(m, h)) {
    REQUIRE_FALSE(cp.tangents.lines.empty());
    for (const auto& l : cp.tangents.lines) {
      CHECK(std::hypot(l.a, l.b) == doctest::Approx(1.0));
      double worst = -1e9;
      for (const auto& p : pts) worst = std::max(worst, l.signed_distance(p));
      CHECK(worst <= kOnBoundaryTolerance);
    }
  }
}

TEST_CASE("mask I/O round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "silcal_test_mask_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto m = disc(31, 17, 15, 8, 6.2);

  SUBCASE("pgm") {
    write_pgm(dir / "a.pgm", m);
    CHECK(read_pgm(dir / "a.pgm") == m);
    CHECK(read_mask(dir / "a.pgm") == m);
  }
  SUBCASE("png") {
    write_png(dir / "a.png", m);
    CHECK(read_png(dir / "a.png") == m);
    CHECK(read_mask(dir / "a.png") == m);
  }
  SUBCASE("pgm threshold and comments") {
    std::ofstream out(dir / "g.pgm", std::ios::binary);
    out << "P5\n# written by hand\n3 1\n255\n";
    const unsigned char px[3] = {127, 128, 255};
    out.write(reinterpret_cast<const char*>(px), 3);
    out.close();
    const auto g = read_pgm(dir / "g.pgm");
    CHECK_FALSE(g.at(0, 0));
    CHECK(g.at(1, 0));
    CHECK(g.at(2, 0));
  }
  SUBCASE("sequence with manifest") {
    std::vector<SilhouetteMask> frames{m, disc(31, 17, 10, 8, 4), disc(31, 17, 20, 9, 5)};
    const SilhouetteSequence seq(frames);
    write_sequence(dir / "seq", seq, "png");
    const auto back = read_sequence(dir / "seq");
    REQUIRE(back.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) CHECK(back[t] == frames[t]);
    CHECK(frame_file_name(0, "pgm") == "frame_000001.pgm");
  }
  SUBCASE("errors") {
    CHECK(error_of([&] { read_pgm(dir / "missing.pgm"); }) == ErrorCode::kIo);
    std::ofstream(dir / "bad.pgm") << "P2\n1 1\n255\n0\n";
    CHECK(error_of([&] { read_pgm(dir / "bad.pgm"); }) == ErrorCode::kParse);
    CHECK(error_of([&] { read_sequence(dir / "nowhere"); }) == ErrorCode::kIo);
    std::filesystem::create_directories(dir / "empty");
    std::ofstream(dir / "empty" / kManifestName) << "# nothing\n\n";
    CHECK(error_of([&] { read_sequence(dir / "empty"); }) == ErrorCode::kEmptySequence);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("sequence frames must agree in size") {
  std::vector<SilhouetteMask> frames{SilhouetteMask(4, 4), SilhouetteMask(5, 4)};
  CHECK(error_of([&] { SilhouetteSequence s(frames); }) == ErrorCode::kInvalidArgument);
}
