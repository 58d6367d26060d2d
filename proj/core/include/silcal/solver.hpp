#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "silcal/geometry.hpp"
#include "silcal/trellis.hpp"

namespace silcal {

// One vertex index per layer.
using TrellisPath = std::vector<int>;

struct PathResult {
  TrellisPath vertices;
  double cost = 0.0;  // sum of traversed edge weights, src and trg edges included
};

struct TwoPathSolution {
  TrellisPath path1;
  TrellisPath path2;
  double objective = 0.0;  // total log-odds of both paths (higher is better)
  bool exact = false;
  bool degenerate_risk = false;
};

// Per-layer vertex blacklist for shortest_path.
class ForbiddenSet {
 public:
  ForbiddenSet() = default;
  explicit ForbiddenSet(const TrellisGraph& graph);

  void forbid(int t, int k);
  void forbid_layer(int t);
  bool forbidden(int t, int k) const {
    return t + 1 < static_cast<int>(offsets_.size()) && bits_[offsets_[t] + k] != 0;
  }

 private:
  std::vector<std::uint8_t> bits_;
  std::vector<int> offsets_;
};

// Sum of traversed weights for one src -> trg path.
double path_cost(const TrellisGraph& graph, const TrellisPath& path);

// Minimum-weight src -> trg path avoiding `forbidden`, by layer-wise dynamic
// programming in O(T K^2). Ties resolve to the lowest predecessor index.
// Throws NoPath.
PathResult shortest_path(const TrellisGraph& graph, const ForbiddenSet& forbidden = {});

// Shortest path, block it together with its exclusion neighbourhoods, then
// the shortest path in what remains. Throws NoSecondPath.
TwoPathSolution solve_two_paths(const TrellisGraph& graph);

struct ExactSolverOptions {
  // Upper bound on pair-to-pair transition evaluations.
  double budget = 1e9;
};

// Global optimum by dynamic programming over unordered separated vertex pairs
// per layer, O(T K^4). Throws BudgetExceeded or Infeasible.
TwoPathSolution solve_two_paths_exact(const TrellisGraph& graph, const ExactSolverOptions& options = {});

// First layer where the two paths are less than `distance` apart under
// vertex_distance, or -1.
int first_layer_within(const TrellisGraph& graph, const TrellisPath& a, const TrellisPath& b,
                       double distance);

// Unit flow on one edge. stage 0 is src -> layer 0 (from = -1), stage t in
// [1, T-1] is layer t-1 -> layer t, stage T is layer T-1 -> trg (to = -1).
struct EdgeFlow {
  int stage = 0;
  int from = -1;
  int to = -1;
  double value = 1.0;
};

std::vector<EdgeFlow> flows_of(const TwoPathSolution& solution);

enum class ConstraintFamily {
  kConservation = 0,  // inflow equals outflow at every vertex
  kCapacity,          // at most one unit leaves a vertex
  kNonNegativity,     // no negative flow
  kSourceSink,        // src emits two units, trg absorbs two
  kSeparation,        // no flow through both k and any m in D(k)
  kStructure,         // indices and path lengths are valid for the graph
};
inline constexpr std::size_t kConstraintFamilyCount = 6;

const char* to_string(ConstraintFamily family) noexcept;

struct ConstraintViolation {
  int t = -1;  // layer or stage, -1 when not applicable
  int k = -1;  // vertex, -1 when not applicable
  std::string detail;
};

struct ConstraintReport {
  std::array<std::vector<ConstraintViolation>, kConstraintFamilyCount> violations;

  bool satisfied(ConstraintFamily f) const { return violations[static_cast<std::size_t>(f)].empty(); }
  bool ok() const;
  std::string summary() const;
};

ConstraintReport check_flow_constraints(const TrellisGraph& graph, const std::vector<EdgeFlow>& flows);
ConstraintReport check_flow_constraints(const TrellisGraph& graph, const TwoPathSolution& solution);

// Sum over both paths of vertex and transition log-odds (the constant terms
// of the likelihood are dropped). Throws InfeasibleSolution.
double objective_value(const TrellisGraph& graph, const TwoPathSolution& solution);

// One correspondence per path vertex whose similarity (recovered from its
// prior) reaches `similarity_threshold`. Ordered by frame, then path.
std::vector<Correspondence> extract_correspondences(const TwoPathSolution& solution,
                                                    const TrellisGraph& graph,
                                                    double similarity_threshold);

}  // namespace silcal
