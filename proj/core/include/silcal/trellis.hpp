#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "silcal/barcode.hpp"
#include "silcal/geometry.hpp"
#include "silcal/hull.hpp"

namespace silcal {

// A candidate match (x, x') between a left and a right critical point at
// one frame.
struct TrellisVertex {
  int left = -1;   // index into that frame's left critical points
  int right = -1;  // index into that frame's right critical points
  Vec2 x = Vec2::Zero();
  Vec2 x_prime = Vec2::Zero();
  VertexPrior prior;
};

// min(d(x, y), d(x', y')): the separation measure behind D(.).
double vertex_distance(const TrellisVertex& a, const TrellisVertex& b) noexcept;

// K1 x K2 vertex priors of one frame, row-major by left index.
struct PriorTable {
  int rows = 0;
  int cols = 0;
  std::vector<VertexPrior> values;
  // Optional, same layout as values: orders equal priors when capping,
  // higher first.
  std::vector<int> support;

  VertexPrior at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
};

struct TrellisOptions {
  double sigma = 1.0;        // transition kernel width, pixels
  double separation = 15.0;  // C, pixels
  int layer_cap = 64;        // vertices kept per frame, by prior, then support; no C-cluster may take over half
  double min_prior = 0.0;    // drop candidates below this prior before capping
};

// Layered DAG: src -> layer 0 -> ... -> layer T-1 -> trg, complete bipartite
// between consecutive layers. Edge weights are negated log-odds; the target
// edges weigh zero. Immutable after construction.
class TrellisGraph {
 public:
  // transitions[t] holds P(next | prev) for stage t -> t+1, row-major
  // (layer_size(t) x layer_size(t+1)).
  TrellisGraph(std::vector<std::vector<TrellisVertex>> layers,
               std::vector<std::vector<double>> transitions, double separation);

  int frames() const noexcept { return static_cast<int>(layers_.size()); }
  int layer_size(int t) const { return static_cast<int>(layers_[t].size()); }
  int max_layer_size() const noexcept;
  std::span<const TrellisVertex> layer(int t) const { return layers_[t]; }
  const TrellisVertex& vertex(int t, int k) const { return layers_[t][k]; }
  double separation() const noexcept { return separation_; }

  TransitionPrior transition(int t, int i, int j) const {
    return {transitions_[t][index(t, i, j)]};
  }
  // Weight of edge layer t vertex i -> layer t+1 vertex j.
  double edge_weight(int t, int i, int j) const { return weights_[t][index(t, i, j)]; }
  // Weights out of layer t, row-major: entry i * layer_size(t + 1) + j.
  const double* edge_weights(int t) const { return weights_[t].data(); }
  double source_weight(int k) const { return source_weights_[k]; }
  static constexpr double target_weight() noexcept { return 0.0; }

  double vertex_log_odds(int t, int k) const { return vertex_log_odds_[offsets_[t] + k]; }
  double transition_log_odds(int t, int i, int j) const { return transition_log_odds_[t][index(t, i, j)]; }

  // Position of layer t in arrays holding one entry per vertex, layer by layer.
  int layer_offset(int t) const { return offsets_[t]; }

  // j in D(i) at layer t. Never true for i == j.
  bool excludes(int t, int i, int j) const;
  // D(i) at layer t, ascending.
  std::span<const int> exclusion(int t, int i) const { return exclusion_lists_[t][i]; }

  std::size_t vertex_count() const noexcept;
  std::size_t edge_count() const noexcept;  // including src and trg edges

 private:
  std::size_t index(int t, int i, int j) const {
    return static_cast<std::size_t>(i) * layers_[t + 1].size() + j;
  }

  std::vector<std::vector<TrellisVertex>> layers_;
  std::vector<std::vector<double>> transitions_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> source_weights_;
  std::vector<double> vertex_log_odds_;
  std::vector<std::vector<double>> transition_log_odds_;
  std::vector<int> offsets_;  // frames() + 1 entries
  // Upper-triangular bit per unordered pair, one array per layer.
  std::vector<std::vector<std::uint8_t>> exclusion_bits_;
  std::vector<std::vector<std::vector<int>>> exclusion_lists_;
  double separation_ = 0.0;
};

// Builds the matcher graph from per-frame critical points and vertex priors.
// Throws InvalidArgument for fewer than two frames or mismatched inputs and
// InsufficientCandidates when a layer cannot host two separated vertices.
TrellisGraph build_trellis(std::span<const std::vector<CriticalPoint>> left_frames,
                           std::span<const std::vector<CriticalPoint>> right_frames,
                           std::span<const PriorTable> priors, const TrellisOptions& options = {});

// Line-oriented text dump:
//   trellis <T> <C>
//   vertex <t> <k> <left> <right> <x> <y> <x'> <y'> <prior>
//   source <k> <weight>
//   edge <t> <i> <j> <transition> <weight>
//   target <k> <weight>
// Weights are informational; read_trellis recomputes and cross-checks them.
void write_trellis(std::ostream& out, const TrellisGraph& graph);
TrellisGraph read_trellis(std::istream& in);

}  // namespace silcal
