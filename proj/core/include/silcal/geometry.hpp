#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace silcal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Image line a*x + b*y + c = 0 with a^2 + b^2 = 1.
struct Line2 {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  static Line2 from_normal(const Vec2& unit_normal, const Vec2& through) {
    return {unit_normal.x(), unit_normal.y(), -unit_normal.dot(through)};
  }

  // Normalizes arbitrary homogeneous coefficients; (0,0,c) is not a line.
  static Line2 from_homogeneous(const Vec3& l) {
    const double n = std::hypot(l.x(), l.y());
    return {l.x() / n, l.y() / n, l.z() / n};
  }

  static Line2 through(const Vec2& p, const Vec2& q) {
    return from_homogeneous(Vec3(p.x(), p.y(), 1.0).cross(Vec3(q.x(), q.y(), 1.0)));
  }

  double signed_distance(const Vec2& p) const { return a * p.x() + b * p.y() + c; }
  double distance(const Vec2& p) const { return std::abs(signed_distance(p)); }
  Vec3 homogeneous() const { return {a, b, c}; }
};

// A putative or ground-truth point match between the left and right view.
struct Correspondence {
  Vec2 x = Vec2::Zero();        // left image, pixels
  Vec2 x_prime = Vec2::Zero();  // right image, pixels
  int t = 0;                    // frame index
  double weight = 1.0;          // similarity-derived confidence
};

inline Vec3 homogeneous(const Vec2& p) { return {p.x(), p.y(), 1.0}; }

}  // namespace silcal
