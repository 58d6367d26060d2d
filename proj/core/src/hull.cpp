#include "silcal/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "silcal/error.hpp"

namespace silcal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

struct EdgeTouch {
  double s;  // projection along the edge from its start vertex
  Vec2 pixel;
};

// Silhouette-boundary pixels within `tol` of the interior of edge a->b.
std::vector<EdgeTouch> edge_touches(const SilhouetteMask& mask, const Vec2& a, const Vec2& b,
                                    double tol) {
  std::vector<EdgeTouch> out;
  const Vec2 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return out;
  const Vec2 u = d / len;
  const Vec2 n(u.y(), -u.x());
  const bool along_x = std::abs(d.x()) >= std::abs(d.y());
  const int reach = static_cast<int>(std::ceil(tol)) + 1;

  auto consider = [&](int x, int y) {
    if (!mask.is_boundary(x, y)) return;
    const Vec2 p(x, y);
    if (std::abs(n.dot(p - a)) > tol) return;
    const double s = u.dot(p - a);
    if (s <= 1e-9 || s >= len - 1e-9) return;
    out.push_back({s, p});
  };

  if (along_x) {
    const int x0 = static_cast<int>(std::floor(std::min(a.x(), b.x())));
    const int x1 = static_cast<int>(std::ceil(std::max(a.x(), b.x())));
    for (int x = x0; x <= x1; ++x) {
      const double y = a.y() + (x - a.x()) * d.y() / d.x();
      const int yc = static_cast<int>(std::lround(y));
      for (int yy = yc - reach; yy <= yc + reach; ++yy) consider(x, yy);
    }
  } else {
    const int y0 = static_cast<int>(std::floor(std::min(a.y(), b.y())));
    const int y1 = static_cast<int>(std::ceil(std::max(a.y(), b.y())));
    for (int y = y0; y <= y1; ++y) {
      const double x = a.x() + (y - a.y()) * d.x() / d.y();
      const int xc = static_cast<int>(std::lround(x));
      for (int xx = xc - reach; xx <= xc + reach; ++xx) consider(xx, y);
    }
  }
  std::sort(out.begin(), out.end(), [](const EdgeTouch& l, const EdgeTouch& r) { return l.s < r.s; });
  return out;
}

}  // namespace

Vec2 ConvexHullPolygon::outward_normal(std::size_t i) const {
  const Vec2 d = (vertex(i + 1) - vertex(i)).normalized();
  return {d.y(), -d.x()};
}

Line2 ConvexHullPolygon::edge_line(std::size_t i) const {
  return Line2::from_normal(outward_normal(i), vertex(i));
}

double ConvexHullPolygon::boundary_distance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    best = std::min(best, segment_distance(p, vertex(i), vertex(i + 1)));
  }
  return best;
}

bool ConvexHullPolygon::contains(const Vec2& p, double tol) const {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (edge_line(i).signed_distance(p) > tol) return false;
  }
  return !vertices.empty();
}

ConvexHullPolygon convex_hull(std::span<const Vec2> points) {
  if (points.empty()) throw Error(ErrorCode::kEmptyMask, "no points to hull");
  std::vector<Vec2> pts(points.begin(), points.end());
  auto less = [](const Vec2& l, const Vec2& r) {
    return l.x() < r.x() || (l.x() == r.x() && l.y() < r.y());
  };
  std::sort(pts.begin(), pts.end(), less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // Andrew's monotone chain; non-left turns are popped so the result is
  // strictly convex.
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  if (hull.size() < 3) {
    throw Error(ErrorCode::kDegenerateMask, "foreground points are collinear");
  }
  return ConvexHullPolygon{std::move(hull)};
}

ConvexHullPolygon extract_convex_hull(const SilhouetteMask& mask) {
  // Row extremes carry every hull vertex.
  std::vector<Vec2> pts;
  for (int y = 0; y < mask.height(); ++y) {
    int lo = -1, hi = -1;
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      if (lo < 0) lo = x;
      hi = x;
    }
    if (lo < 0) continue;
    pts.emplace_back(lo, y);
    if (hi != lo) pts.emplace_back(hi, y);
  }
  if (pts.empty()) throw Error(ErrorCode::kEmptyMask, "mask has no foreground pixels");
  return convex_hull(pts);
}

TangentSet vertex_tangents(const ConvexHullPolygon& hull, std::size_t i, double resolution) {
  const std::size_t n = hull.size();
  const Vec2& v = hull.vertex(i);
  const Vec2 n_prev = hull.outward_normal((i + n - 1) % n);
  const Vec2 n_next = hull.outward_normal(i);
  const double phi0 = std::atan2(n_prev.y(), n_prev.x());
  double span = std::atan2(n_next.y(), n_next.x()) - phi0;
  while (span <= 0.0) span += kTwoPi;
  while (span > kTwoPi) span -= kTwoPi;

  TangentSet out;
  out.lines.push_back(Line2::from_normal(n_prev, v));
  if (resolution > 0.0) {
    for (int k = 1; k * resolution < span - 1e-9; ++k) {
      const double phi = phi0 + k * resolution;
      out.lines.push_back(Line2::from_normal(Vec2(std::cos(phi), std::sin(phi)), v));
    }
  }
  out.lines.push_back(Line2::from_normal(n_next, v));
  return out;
}

TangentSet incident_tangents(const Vec2& point, const ConvexHullPolygon& hull, double resolution,
                             double tol) {
  std::size_t best_vertex = 0;
  double best_vertex_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double d = (point - hull.vertex(i)).norm();
    if (d < best_vertex_dist) {
      best_vertex_dist = d;
      best_vertex = i;
    }
  }
  if (best_vertex_dist <= tol) return vertex_tangents(hull, best_vertex, resolution);

  std::size_t best_edge = 0;
  double best_edge_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double d = segment_distance(point, hull.vertex(i), hull.vertex(i + 1));
    if (d < best_edge_dist) {
      best_edge_dist = d;
      best_edge = i;
    }
  }
  if (best_edge_dist > tol) {
    throw Error(ErrorCode::kNotOnHull, "point is " + std::to_string(best_edge_dist) +
                                           " px from the hull boundary");
  }
  return TangentSet{{hull.edge_line(best_edge)}};
}

std::vector<CriticalPoint> extract_critical_points(const SilhouetteMask& mask,
                                                   const ConvexHullPolygon& hull, int frame,
                                                   const CriticalPointOptions& options) {
  std::vector<CriticalPoint> out;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    out.push_back({hull.vertex(i), frame,
                   vertex_tangents(hull, i, options.tangent_resolution)});

    const Vec2& a = hull.vertex(i);
    const Vec2& b = hull.vertex(i + 1);
    const double len = (b - a).norm();
    const auto touches = edge_touches(mask, a, b, options.on_boundary_tolerance);
    std::size_t start = 0;
    while (start < touches.size()) {
      std::size_t end = start;
      while (end + 1 < touches.size() && touches[end + 1].s - touches[end].s <= options.run_gap) {
        ++end;
      }
      const bool attached = touches[start].s <= options.run_gap ||
                            touches[end].s >= len - options.run_gap;
      if (!attached) {
        const double mid = 0.5 * (touches[start].s + touches[end].s);
        std::size_t rep = start;
        for (std::size_t k = start + 1; k <= end; ++k) {
          if (std::abs(touches[k].s - mid) < std::abs(touches[rep].s - mid)) rep = k;
        }
        out.push_back({touches[rep].pixel, frame, TangentSet{{hull.edge_line(i)}}});
      }
      start = end + 1;
    }
  }
  return out;
}

}  // namespace silcal
