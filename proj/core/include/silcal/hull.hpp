#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "silcal/geometry.hpp"
#include "silcal/mask.hpp"

namespace silcal {

// On-boundary tolerance, pixels.
inline constexpr double kOnBoundaryTolerance = 0.5;
// Default angular step for supporting lines at a hull corner.
inline constexpr double kDefaultTangentResolution = 2.0 * std::numbers::pi / 180.0;

// Counter-clockwise (positive signed area), strictly convex polygon.
struct ConvexHullPolygon {
  std::vector<Vec2> vertices;

  std::size_t size() const noexcept { return vertices.size(); }
  const Vec2& vertex(std::size_t i) const { return vertices[i % vertices.size()]; }

  // Unit outward normal of edge i (vertex i -> vertex i+1).
  Vec2 outward_normal(std::size_t i) const;
  Line2 edge_line(std::size_t i) const;

  // Distance from p to the polygon boundary (inside or outside).
  double boundary_distance(const Vec2& p) const;
  // True when p lies inside or within `tol` of the polygon.
  bool contains(const Vec2& p, double tol = 0.0) const;
};

// Supporting lines of the hull through one critical point. Every line is
// oriented so the hull lies on its non-positive side.
struct TangentSet {
  std::vector<Line2> lines;
};

struct CriticalPoint {
  Vec2 position = Vec2::Zero();
  int frame = 0;
  TangentSet tangents;
};

struct CriticalPointOptions {
  double on_boundary_tolerance = kOnBoundaryTolerance;
  double tangent_resolution = kDefaultTangentResolution;  // radians
  // Touching pixels whose projections along an edge are further apart than
  // this start a new boundary run.
  double run_gap = 1.5;
};

// Hull of an arbitrary point set. Collinear and duplicate points are dropped.
// Throws EmptyMask for no points, DegenerateMask when all points are collinear.
ConvexHullPolygon convex_hull(std::span<const Vec2> points);

// Hull of the foreground pixel centers.
ConvexHullPolygon extract_convex_hull(const SilhouetteMask& mask);

// Every hull vertex, plus one representative (run midpoint) for each maximal
// run of silhouette-boundary pixels touching an edge interior that is not
// connected to either edge endpoint. Ordered counter-clockwise along the hull.
std::vector<CriticalPoint> extract_critical_points(const SilhouetteMask& mask,
                                                   const ConvexHullPolygon& hull,
                                                   int frame = 0,
                                                   const CriticalPointOptions& options = {});

// Supporting lines at `point`: at a vertex, both edge lines plus the lines in
// between sampled every `resolution` radians; on an edge interior, that edge's
// line. Throws NotOnHull when the point is further than `tol` from the boundary.
TangentSet incident_tangents(const Vec2& point, const ConvexHullPolygon& hull,
                             double resolution = kDefaultTangentResolution,
                             double tol = kOnBoundaryTolerance);

// Supporting lines at hull vertex i.
TangentSet vertex_tangents(const ConvexHullPolygon& hull, std::size_t i, double resolution);

}  // namespace silcal
