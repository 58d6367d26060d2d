#include "silcal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "silcal/error.hpp"

namespace silcal {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxStep = 2.5;  // px per frame for the projected centers

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t hash_name(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

// Uniform in [-1, 1) from a pixel's identity.
double pixel_noise(std::uint64_t seed, int camera, int t, int x, int y) {
  std::uint64_t k = mix(seed);
  k = mix(k ^ ((static_cast<std::uint64_t>(camera) << 32) | static_cast<std::uint32_t>(t)));
  k = mix(k ^ ((static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 32) |
               static_cast<std::uint32_t>(x)));
  return static_cast<double>(k >> 11) * 0x1.0p-52 - 1.0;
}

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

Vec2 dehomogenize(const Vec3& h) { return {h.x() / h.z(), h.y() / h.z()}; }

double conic_value(const Mat3& c, const Vec2& p) {
  const Vec3 h = homogeneous(p);
  return h.dot(c * h);
}

// Extent of a dual conic along x (axis 0) or y (axis 1).
std::pair<double, double> conic_range(const Mat3& dual, int axis) {
  const double a = dual(2, 2);
  const double b = dual(axis, 2);
  const double c = dual(axis, axis);
  const double disc = std::sqrt(std::max(0.0, b * b - a * c));
  const double u1 = (b - disc) / a;
  const double u2 = (b + disc) / a;
  return {std::min(u1, u2), std::max(u1, u2)};
}

struct Wave {
  double amplitude = 0.0;
  double period = 1.0;
  double phase = 0.0;
  double at(int t) const { return amplitude * std::sin(2.0 * kPi * t / period + phase); }
};

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Wave wave(double amp_lo, double amp_hi, double per_lo, double per_hi) {
    const double a = (*this)(amp_lo, amp_hi);
    const double p = (*this)(per_lo, per_hi);
    const double ph = (*this)(0.0, 2.0 * kPi);
    return {a, p, ph};
  }

 private:
  std::mt19937_64 rng_;
};

double max_center_step(const EllipsoidTrack& e, const CameraPair& cams) {
  double worst = 0.0;
  for (const Mat34& p : {cams.P1(), cams.P2()}) {
    for (std::size_t t = 1; t < e.centers.size(); ++t) {
      const Vec2 a = dehomogenize(p * e.centers[t - 1].homogeneous());
      const Vec2 b = dehomogenize(p * e.centers[t].homogeneous());
      worst = std::max(worst, (a - b).norm());
    }
  }
  return worst;
}

Scene single_ellipsoid(std::uint64_t seed, int frames) {
  Draw draw(seed);
  Scene scene;
  scene.cameras = CameraPair::standard();
  EllipsoidTrack e;
  e.semi_axes = Vec3(draw(0.3, 0.4), draw(0.2, 0.3), draw(0.25, 0.35));
  const Vec3 base(draw(-0.1, 0.1), draw(-0.1, 0.1), 5.0 + draw(-0.2, 0.2));
  // Oscillation about a fixed mean rather than drift, so that each tangent
  // line is crossed many times and its barcode is informative.
  std::vector<std::array<Wave, 3>> move;
  move.push_back({draw.wave(0.02, 0.05, 90, 160), draw.wave(0.02, 0.05, 90, 160), draw.wave(0.02, 0.05, 90, 160)});
  for (int k = 0; k < 3; ++k) {
    move.push_back({draw.wave(0.03, 0.08, 12, 40), draw.wave(0.03, 0.08, 12, 40), draw.wave(0.03, 0.08, 12, 40)});
  }
  const Vec3 pose(draw(-0.5, 0.5), draw(-0.5, 0.5), draw(-kPi, kPi));
  std::vector<std::array<Wave, 3>> spin;
  spin.push_back({draw.wave(0.1, 0.2, 80, 150), draw.wave(0.1, 0.2, 80, 150), draw.wave(0.1, 0.2, 80, 150)});
  spin.push_back({draw.wave(0.03, 0.08, 15, 45), draw.wave(0.03, 0.08, 15, 45), draw.wave(0.03, 0.08, 15, 45)});
  for (int t = 0; t < frames; ++t) {
    Vec3 a = pose;
    for (const auto& w : spin) a += Vec3(w[0].at(t), w[1].at(t), w[2].at(t));
    e.orientations.push_back(rot_z(a.z()) * rot_y(a.y()) * rot_x(a.x()));
  }
  for (;;) {
    e.centers.clear();
    for (int t = 0; t < frames; ++t) {
      Vec3 c = base;
      for (const auto& w : move) c += Vec3(w[0].at(t), w[1].at(t), w[2].at(t));
      e.centers.push_back(c);
    }
    const double step = max_center_step(e, scene.cameras);
    if (step <= kMaxStep) break;
    for (auto& axes : move) {
      for (auto& w : axes) w.amplitude *= 0.95 * kMaxStep / step;
    }
  }
  scene.script.ellipsoids.push_back(std::move(e));
  return scene;
}

Scene articulated_pair(std::uint64_t seed, int frames) {
  Draw draw(seed);
  Scene scene;
  scene.cameras = CameraPair::standard();
  scene.script.boundary_noise = 1.0;
  EllipsoidTrack body, limb;
  body.semi_axes = Vec3(draw(0.2, 0.26), draw(0.32, 0.4), draw(0.18, 0.22));
  limb.semi_axes = Vec3(0.07, draw(0.2, 0.26), 0.07);
  const Vec3 base(draw(-0.1, 0.0), draw(-0.05, 0.05), 5.0 + draw(-0.2, 0.2));
  std::vector<std::array<Wave, 3>> move;
  move.push_back({draw.wave(0.02, 0.05, 90, 160), draw.wave(0.02, 0.05, 90, 160), draw.wave(0.02, 0.05, 90, 160)});
  for (int k = 0; k < 3; ++k) {
    move.push_back({draw.wave(0.03, 0.08, 12, 40), draw.wave(0.03, 0.08, 12, 40), draw.wave(0.03, 0.08, 12, 40)});
  }
  const double yaw = draw(-0.4, 0.4);
  const Wave sway = draw.wave(0.1, 0.2, 30, 60);
  const Wave tilt = draw.wave(0.05, 0.1, 20, 50);
  const double rest = draw(0.5, 0.8);
  const Wave swing = draw.wave(0.3, 0.5, 25, 50);
  const Vec3 shoulder(body.semi_axes.x() * 0.8, -body.semi_axes.y() * 0.5, 0.0);
  const double reach = limb.semi_axes.y() * 0.85;

  for (;;) {
    body.centers.clear();
    body.orientations.clear();
    limb.centers.clear();
    limb.orientations.clear();
    for (int t = 0; t < frames; ++t) {
      Vec3 c = base;
      for (const auto& w : move) c += Vec3(w[0].at(t), w[1].at(t), w[2].at(t));
      const Mat3 rb = rot_y(yaw + sway.at(t)) * rot_z(tilt.at(t));
      const double phi = rest + swing.at(t);
      const Vec3 dir(std::sin(phi), std::cos(phi), 0.0);
      body.centers.push_back(c);
      body.orientations.push_back(rb);
      limb.centers.push_back(c + rb * (shoulder + reach * dir));
      limb.orientations.push_back(rb * rot_z(-phi));
    }
    const double step = max_center_step(body, scene.cameras);
    if (step <= kMaxStep) break;
    for (auto& axes : move) {
      for (auto& w : axes) w.amplitude *= 0.95 * kMaxStep / step;
    }
  }
  scene.script.ellipsoids.push_back(std::move(body));
  scene.script.ellipsoids.push_back(std::move(limb));
  return scene;
}

// A thin rod tumbling in the image plane of the left camera. Seen side-on
// its two frontier points are only about twice the short axis apart.
Scene crossing_motion(std::uint64_t seed, int frames) {
  Draw draw(seed);
  Scene scene;
  scene.cameras = CameraPair::standard();
  EllipsoidTrack e;
  e.semi_axes = Vec3(0.085, draw(0.62, 0.7), 0.085);
  const double rate = draw(0.014, 0.02) * (draw(0.0, 1.0) < 0.5 ? -1.0 : 1.0);
  const double crossing = draw(0.35, 0.65) * (frames - 1);
  const double start = kPi / 2.0 - rate * crossing;
  const Wave wobble = draw.wave(0.1, 0.25, 60, 100);
  const Vec3 base(draw(-0.1, 0.1), draw(-0.05, 0.05), 5.0);
  std::array<Wave, 3> move{draw.wave(0.03, 0.08, 60, 120), draw.wave(0.02, 0.05, 60, 120),
                           draw.wave(0.03, 0.08, 60, 120)};
  for (int t = 0; t < frames; ++t) {
    e.centers.push_back(base + Vec3(move[0].at(t), move[1].at(t), move[2].at(t)));
    e.orientations.push_back(rot_z(start + rate * t) * rot_x(wobble.at(t)));
  }
  scene.script.ellipsoids.push_back(std::move(e));
  return scene;
}

}  // namespace

Mat34 CameraPair::P1() const {
  Mat34 p;
  p << K1, Vec3::Zero();
  return p;
}

Mat34 CameraPair::P2() const {
  Mat34 rt;
  rt << R, t;
  return K2 * rt;
}

FundamentalMatrix CameraPair::fundamental() const {
  Mat3 tx;
  tx << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
  return FundamentalMatrix::from_matrix(K2.inverse().transpose() * tx * R * K1.inverse());
}

Vec3 CameraPair::left_epipole() const { return K1 * (-R.transpose() * t); }

Vec3 CameraPair::right_epipole() const { return K2 * t; }

CameraPair CameraPair::standard(double baseline_deg, double depth, int width, int height, double focal) {
  CameraPair cams;
  cams.width = width;
  cams.height = height;
  cams.K1 << focal, 0, width / 2.0, 0, focal, height / 2.0, 0, 0, 1;
  cams.K2 = cams.K1;
  const double b = baseline_deg * kPi / 180.0;
  const Vec3 center(depth * std::sin(b), 0.0, depth - depth * std::cos(b));
  cams.R << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
  cams.t = -cams.R * center;
  return cams;
}

Mat4 dual_quadric(const EllipsoidTrack& e, int t) {
  Mat4 h = Mat4::Identity();
  h.topLeftCorner<3, 3>() = e.orientations.at(t);
  h.topRightCorner<3, 1>() = e.centers.at(t);
  const Eigen::Vector4d d(e.semi_axes.x() * e.semi_axes.x(), e.semi_axes.y() * e.semi_axes.y(),
                          e.semi_axes.z() * e.semi_axes.z(), -1.0);
  return h * d.asDiagonal() * h.transpose();
}

Mat3 outline_conic(const Mat4& q, const Mat34& p) {
  const Eigen::Vector4d principal = p.row(2).transpose();
  const Eigen::Vector4d center = q.col(3) / q(3, 3);  // Q* e4 ~ (c, 1)
  if (!(principal.dot(q * principal) < 0.0) || !(principal.dot(center) > 0.0)) {
    throw Error(ErrorCode::kOutOfFrame, "ellipsoid is not entirely in front of the camera");
  }
  const Mat3 dual = p * q * p.transpose();
  Mat3 c = dual.inverse();
  const Vec3 pc = p * center;
  if (pc.dot(c * pc) > 0.0) c = -c;
  return c / c.norm();
}

SilhouetteMask render_frame(const SceneScript& scene, const CameraPair& cams, int camera, int t) {
  const Mat34 p = camera == 0 ? cams.P1() : cams.P2();
  SilhouetteMask mask(cams.width, cams.height);
  const double noise = scene.boundary_noise;
  for (std::size_t i = 0; i < scene.ellipsoids.size(); ++i) {
    const Mat4 q = dual_quadric(scene.ellipsoids[i], t);
    const Mat3 c = outline_conic(q, p);
    const Mat3 dual = p * q * p.transpose();
    const auto [x0, x1] = conic_range(dual, 0);
    const auto [y0, y1] = conic_range(dual, 1);
    if (x0 < 0.0 || y0 < 0.0 || x1 > cams.width - 1 || y1 > cams.height - 1) {
      throw Error(ErrorCode::kOutOfFrame, "ellipsoid " + std::to_string(i) + " leaves camera " +
                                              std::to_string(camera + 1) + " at frame " + std::to_string(t));
    }
    const int xa = std::max(0, static_cast<int>(std::floor(x0 - noise)) - 1);
    const int xb = std::min(cams.width - 1, static_cast<int>(std::ceil(x1 + noise)) + 1);
    const int ya = std::max(0, static_cast<int>(std::floor(y0 - noise)) - 1);
    const int yb = std::min(cams.height - 1, static_cast<int>(std::ceil(y1 + noise)) + 1);
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        if (mask.at(x, y)) continue;
        const Vec3 h(x, y, 1.0);
        const double s = h.dot(c * h);
        bool inside = s <= 0.0;
        if (noise > 0.0) {
          const Vec3 g = c * h;
          const double d = s / (2.0 * std::hypot(g.x(), g.y()));
          inside = d <= noise * pixel_noise(scene.seed, camera, t, x, y);
        }
        if (inside) mask.set(x, y);
      }
    }
  }
  return mask;
}

std::pair<SilhouetteSequence, SilhouetteSequence> render_silhouettes(const SceneScript& scene,
                                                                     const CameraPair& cams) {
  std::vector<SilhouetteMask> left, right;
  for (int t = 0; t < scene.frames; ++t) {
    left.push_back(render_frame(scene, cams, 0, t));
    right.push_back(render_frame(scene, cams, 1, t));
  }
  return {SilhouetteSequence(std::move(left)), SilhouetteSequence(std::move(right))};
}

std::vector<Correspondence> ground_truth_frontier_points(const SceneScript& scene, const CameraPair& cams,
                                                         int t) {
  const Mat34 p1 = cams.P1();
  const Mat34 p2 = cams.P2();
  const Mat3 f = cams.fundamental().matrix();
  const Vec3 e1 = cams.left_epipole();
  const Vec3 e2 = cams.right_epipole();

  std::vector<Mat3> left, right;
  for (const auto& e : scene.ellipsoids) {
    const Mat4 q = dual_quadric(e, t);
    left.push_back(outline_conic(q, p1));
    right.push_back(outline_conic(q, p2));
  }

  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < left.size(); ++i) {
    const Mat3& c1 = left[i];
    const Mat3& c2 = right[i];
    if (e1.dot(c1 * e1) <= 0.0 || e2.dot(c2 * e2) <= 0.0) {
      throw Error(ErrorCode::kFrontierUndefined, "epipole inside the outline of ellipsoid " +
                                                     std::to_string(i) + " at frame " + std::to_string(t));
    }
    // Tangency points from the epipole lie on its polar line.
    const Vec3 polar = c1 * e1;
    const Vec2 n = Vec2(polar.x(), polar.y()).normalized();
    const double offset = polar.z() / std::hypot(polar.x(), polar.y());
    const Mat3 c1_dual = c1.inverse();
    const Vec2 center = dehomogenize(c1_dual.col(2));
    const Vec2 foot = center - (n.dot(center) + offset) * n;
    const Vec3 p0 = homogeneous(foot);
    const Vec3 d(-n.y(), n.x(), 0.0);
    const double qa = d.dot(c1 * d);
    const double qb = 2.0 * p0.dot(c1 * d);
    const double qc = p0.dot(c1 * p0);
    const double disc = qb * qb - 4.0 * qa * qc;
    if (!(disc > 0.0)) {
      throw Error(ErrorCode::kFrontierUndefined, "no epipolar tangency for ellipsoid " + std::to_string(i));
    }
    const Mat3 c2_dual = c2.inverse();
    std::vector<Correspondence> pair;
    for (double sgn : {-1.0, 1.0}) {
      const double s = (-qb + sgn * std::sqrt(disc)) / (2.0 * qa);
      const Vec2 x = foot + s * Vec2(d.x(), d.y());
      const Vec2 xp = dehomogenize(c2_dual * (f * homogeneous(x)));
      pair.push_back({x, xp, t, 1.0});
    }
    std::sort(pair.begin(), pair.end(), [](const Correspondence& a, const Correspondence& b) {
      return a.x.y() != b.x.y() ? a.x.y() < b.x.y() : a.x.x() < b.x.x();
    });
    for (const auto& c : pair) {
      bool hidden = false;
      for (std::size_t j = 0; j < left.size() && !hidden; ++j) {
        if (j == i) continue;
        hidden = conic_value(left[j], c.x) < 0.0 || conic_value(right[j], c.x_prime) < 0.0;
      }
      if (!hidden) out.push_back(c);
    }
  }
  return out;
}

const std::vector<std::string>& scene_presets() {
  static const std::vector<std::string> names{"single-ellipsoid", "articulated-pair", "crossing-motion"};
  return names;
}

Scene generate_scene(const std::string& preset, std::uint64_t seed, int frames) {
  if (frames < 1) throw Error(ErrorCode::kInvalidArgument, "a scene needs at least one frame");
  const std::uint64_t stream = mix(seed ^ hash_name(preset));
  Scene scene;
  if (preset == "single-ellipsoid") {
    scene = single_ellipsoid(stream, frames);
  } else if (preset == "articulated-pair") {
    scene = articulated_pair(stream, frames);
  } else if (preset == "crossing-motion") {
    scene = crossing_motion(stream, frames);
  } else {
    throw Error(ErrorCode::kUnknownPreset, "unknown preset '" + preset + "'");
  }
  scene.script.preset = preset;
  scene.script.seed = seed;
  scene.script.frames = frames;
  return scene;
}

}  // namespace silcal
