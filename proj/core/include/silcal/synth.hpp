#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "silcal/epigeom.hpp"
#include "silcal/geometry.hpp"
#include "silcal/mask.hpp"

namespace silcal {

using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// Two pinhole cameras. The world frame is the left camera's frame; (R, t)
// maps world points into the right camera: X2 = R X + t.
struct CameraPair {
  Mat3 K1 = Mat3::Identity();
  Mat3 K2 = Mat3::Identity();
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  int width = 640;
  int height = 480;

  Mat34 P1() const;
  Mat34 P2() const;
  // K2^-T [t]x R K1^-1, normalized.
  FundamentalMatrix fundamental() const;
  Vec3 left_epipole() const;   // image of the right camera center, homogeneous
  Vec3 right_epipole() const;  // image of the left camera center, homogeneous

  // f = 800 px, principal point at the image center, right camera swung
  // `baseline_deg` about the vertical axis through a point `depth` ahead.
  static CameraPair standard(double baseline_deg = 30.0, double depth = 5.0, int width = 640,
                             int height = 480, double focal = 800.0);
};

// One ellipsoid: semi-axes along its body axes, posed per frame.
struct EllipsoidTrack {
  Vec3 semi_axes = Vec3::Ones();
  std::vector<Vec3> centers;       // world coordinates, one per frame
  std::vector<Mat3> orientations;  // body -> world rotation, one per frame
};

struct SceneScript {
  std::string preset;
  std::uint64_t seed = 0;
  int frames = 0;
  std::vector<EllipsoidTrack> ellipsoids;
  // Pixels within this distance of an outline are set at random (0 = off).
  double boundary_noise = 0.0;
};

struct Scene {
  SceneScript script;
  CameraPair cameras;
};

// Dual quadric of ellipsoid `e` at frame t.
Mat4 dual_quadric(const EllipsoidTrack& e, int t);
// Outline of the dual quadric under P as a point conic, scaled so interior
// points evaluate negative and |C| = 1. Throws OutOfFrame when the ellipsoid
// is not entirely in front of the camera.
Mat3 outline_conic(const Mat4& dual_quadric, const Mat34& P);

// Per camera, the union of the filled outline conics (pixel centers inside
// are foreground), optionally with boundary noise. Throws OutOfFrame when an
// outline leaves either image.
std::pair<SilhouetteSequence, SilhouetteSequence> render_silhouettes(const SceneScript& scene,
                                                                     const CameraPair& cams);
SilhouetteMask render_frame(const SceneScript& scene, const CameraPair& cams, int camera, int t);

// Epipolar tangency points of every ellipsoid at frame t, two per ellipsoid,
// minus those hidden inside another ellipsoid's outline. Throws
// FrontierUndefined when an epipole lies inside an outline.
std::vector<Correspondence> ground_truth_frontier_points(const SceneScript& scene, const CameraPair& cams,
                                                         int t);

inline constexpr int kDefaultFrames = 100;

// Presets: "single-ellipsoid", "articulated-pair", "crossing-motion".
// Deterministic per (preset, seed, frames). Throws UnknownPreset.
Scene generate_scene(const std::string& preset, std::uint64_t seed, int frames = kDefaultFrames);

const std::vector<std::string>& scene_presets();

}  // namespace silcal
