#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "silcal/barcode.hpp"
#include "silcal/error.hpp"
#include "silcal/mask.hpp"
#include "silcal/solver.hpp"
#include "silcal/synth.hpp"
#include "silcal/trellis.hpp"

namespace testing {

using namespace silcal;

// Code of the silcal::Error thrown by f, or nothing when f returns.
template <typename F>
std::optional<ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline SilhouetteMask disc(int w, int h, double cx, double cy, double r) {
  SilhouetteMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y);
    }
  }
  return m;
}

inline void fill_rect(SilhouetteMask& m, int x0, int y0, int x1, int y1) {
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) m.set(x, y);
  }
}

struct RandomTrellisSpec {
  int frames = 5;
  int max_k = 5;
  double p_lo = 0.05;
  double p_hi = 0.95;
  double extent = 60.0;  // points are drawn in [0, extent]^2 per image
  double separation = 15.0;
};

// Vertices at random positions with random priors and random transition
// probabilities. Every layer gets at least two vertices.
inline TrellisGraph random_trellis(std::mt19937_64& rng, const RandomTrellisSpec& spec) {
  std::uniform_real_distribution<double> pos(0.0, spec.extent);
  std::uniform_real_distribution<double> prob(spec.p_lo, spec.p_hi);
  std::uniform_int_distribution<int> count(2, spec.max_k);
  std::vector<std::vector<TrellisVertex>> layers(spec.frames);
  for (auto& layer : layers) {
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      TrellisVertex v;
      v.left = i;
      v.right = i;
      v.x = Vec2(pos(rng), pos(rng));
      v.x_prime = Vec2(pos(rng), pos(rng));
      v.prior = VertexPrior{prob(rng)};
      layer.push_back(v);
    }
  }
  std::vector<std::vector<double>> transitions(spec.frames - 1);
  for (int t = 0; t + 1 < spec.frames; ++t) {
    for (std::size_t n = 0; n < layers[t].size() * layers[t + 1].size(); ++n) transitions[t].push_back(prob(rng));
  }
  return TrellisGraph(std::move(layers), std::move(transitions), spec.separation);
}

// Calls f(path) for every src -> trg path.
template <typename F>
void for_each_path(const TrellisGraph& g, F&& f) {
  TrellisPath path(g.frames(), 0);
  for (;;) {
    f(path);
    int t = g.frames() - 1;
    while (t >= 0 && ++path[t] == g.layer_size(t)) path[t--] = 0;
    if (t < 0) return;
  }
}

// Log-odds of one path, summed directly from the probabilities.
inline double path_log_odds(const TrellisGraph& g, const TrellisPath& p) {
  auto lo = [](double q) { return std::log(q / (1.0 - q)); };
  double s = 0.0;
  for (int t = 0; t < g.frames(); ++t) {
    s += lo(g.vertex(t, p[t]).prior.p);
    if (t > 0) s += lo(g.transition(t - 1, p[t - 1], p[t]).p);
  }
  return s;
}

inline bool separated(const TrellisGraph& g, const TrellisPath& a, const TrellisPath& b) {
  for (int t = 0; t < g.frames(); ++t) {
    if (a[t] == b[t]) return false;
    const auto& u = g.vertex(t, a[t]);
    const auto& v = g.vertex(t, b[t]);
    if (std::min((u.x - v.x).norm(), (u.x_prime - v.x_prime).norm()) < g.separation()) return false;
  }
  return true;
}

// Best total log-odds over all separated path pairs, by enumeration.
// Returns -inf when no pair is feasible.
inline double brute_force_two_paths(const TrellisGraph& g) {
  std::vector<TrellisPath> paths;
  std::vector<double> scores;
  for_each_path(g, [&](const TrellisPath& p) {
    paths.push_back(p);
    scores.push_back(path_log_odds(g, p));
  });
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      if (scores[i] + scores[j] > best && separated(g, paths[i], paths[j])) best = scores[i] + scores[j];
    }
  }
  return best;
}

// Still spheres of radius r at the given world points under the standard rig.
inline Scene sphere_scene(std::vector<Vec3> centers, double r, int frames = 1) {
  Scene s;
  s.cameras = CameraPair::standard();
  s.script.preset = "custom";
  s.script.frames = frames;
  for (const auto& c : centers) {
    EllipsoidTrack e;
    e.semi_axes = Vec3::Constant(r);
    e.centers.assign(frames, c);
    e.orientations.assign(frames, Mat3::Identity());
    s.script.ellipsoids.push_back(e);
  }
  return s;
}

// A small sphere halfway between the two camera centers: both epipoles fall
// inside its outlines.
inline Scene epipole_in_outline_scene() {
  const CameraPair cams = CameraPair::standard();
  const Vec3 right_center = -cams.R.transpose() * cams.t;
  return sphere_scene({0.5 * right_center}, 0.1);
}

}  // namespace testing
