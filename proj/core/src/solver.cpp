#include "silcal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "silcal/error.hpp"

namespace silcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sum of log-odds along one path: every vertex once, every transition once.
double path_log_odds(const TrellisGraph& g, const TrellisPath& path) {
  double sum = 0.0;
  for (int t = 0; t < g.frames(); ++t) {
    sum += g.vertex_log_odds(t, path[t]);
    if (t > 0) sum += g.transition_log_odds(t - 1, path[t - 1], path[t]);
  }
  return sum;
}

// Fixed summation order so identical path pairs give bit-identical values.
double unchecked_objective(const TrellisGraph& g, const TwoPathSolution& sol) {
  const bool ordered = sol.path1 <= sol.path2;
  const TrellisPath& lo = ordered ? sol.path1 : sol.path2;
  const TrellisPath& hi = ordered ? sol.path2 : sol.path1;
  return path_log_odds(g, lo) + path_log_odds(g, hi);
}

}  // namespace

ForbiddenSet::ForbiddenSet(const TrellisGraph& graph) {
  offsets_.resize(graph.frames() + 1);
  for (int t = 0; t <= graph.frames(); ++t) offsets_[t] = graph.layer_offset(t);
  bits_.assign(offsets_.back(), 0);
}

void ForbiddenSet::forbid(int t, int k) {
  if (t < 0 || t + 1 >= static_cast<int>(offsets_.size()) || k < 0 || k >= offsets_[t + 1] - offsets_[t]) {
    throw std::out_of_range("ForbiddenSet::forbid");
  }
  bits_[offsets_[t] + k] = 1;
}

void ForbiddenSet::forbid_layer(int t) {
  if (t < 0 || t + 1 >= static_cast<int>(offsets_.size())) throw std::out_of_range("ForbiddenSet::forbid_layer");
  std::fill(bits_.begin() + offsets_[t], bits_.begin() + offsets_[t + 1], 1);
}

double path_cost(const TrellisGraph& g, const TrellisPath& path) {
  double cost = g.source_weight(path.front());
  for (int t = 1; t < g.frames(); ++t) cost += g.edge_weight(t - 1, path[t - 1], path[t]);
  return cost + TrellisGraph::target_weight();
}

PathResult shortest_path(const TrellisGraph& g, const ForbiddenSet& forbidden) {
  const int frames = g.frames();
  std::vector<double> cost(static_cast<std::size_t>(g.layer_offset(frames)), kInf);
  std::vector<int> pred(cost.size(), -1);

  for (int k = 0; k < g.layer_size(0); ++k) {
    if (!forbidden.forbidden(0, k)) cost[k] = g.source_weight(k);
  }
  for (int t = 1; t < frames; ++t) {
    const int n = g.layer_size(t);
    const int m = g.layer_size(t - 1);
    const double* prev = cost.data() + g.layer_offset(t - 1);
    double* cur = cost.data() + g.layer_offset(t);
    int* arg_out = pred.data() + g.layer_offset(t);
    const double* w = g.edge_weights(t - 1);
    for (int j = 0; j < n; ++j) {
      if (forbidden.forbidden(t, j)) continue;
      double best = kInf;
      int arg = -1;
      for (int i = 0; i < m; ++i) {
        if (prev[i] == kInf) continue;
        const double c = prev[i] + w[static_cast<std::size_t>(i) * n + j];
        if (c < best) {
          best = c;
          arg = i;
        }
      }
      cur[j] = best;
      arg_out[j] = arg;
    }
  }

  const double* last = cost.data() + g.layer_offset(frames - 1);
  int end = -1;
  for (int k = 0; k < g.layer_size(frames - 1); ++k) {
    if (last[k] != kInf && (end < 0 || last[k] < last[end])) end = k;
  }
  if (end < 0) throw Error(ErrorCode::kNoPath, "every src -> trg path crosses a forbidden vertex");

  PathResult out;
  out.cost = last[end] + TrellisGraph::target_weight();
  out.vertices.resize(frames);
  for (int t = frames - 1, k = end; t >= 0; --t) {
    out.vertices[t] = k;
    k = pred[g.layer_offset(t) + k];
  }
  return out;
}

int first_layer_within(const TrellisGraph& g, const TrellisPath& a, const TrellisPath& b,
                       double distance) {
  for (int t = 0; t < g.frames(); ++t) {
    if (vertex_distance(g.vertex(t, a[t]), g.vertex(t, b[t])) < distance) return t;
  }
  return -1;
}

TwoPathSolution solve_two_paths(const TrellisGraph& g) {
  const PathResult first = shortest_path(g);

  ForbiddenSet blocked(g);
  for (int t = 0; t < g.frames(); ++t) {
    const int k = first.vertices[t];
    blocked.forbid(t, k);
    for (int m : g.exclusion(t, k)) blocked.forbid(t, m);
  }

  PathResult second;
  try {
    second = shortest_path(g, blocked);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoPath) throw;
    throw Error(ErrorCode::kNoSecondPath,
                "blocking the first path and its neighbourhood disconnects the trellis");
  }

  TwoPathSolution sol;
  sol.path1 = first.vertices;
  sol.path2 = second.vertices;
  sol.exact = false;
  sol.objective = unchecked_objective(g, sol);
  sol.degenerate_risk = first_layer_within(g, sol.path1, sol.path2, 2.0 * g.separation()) >= 0;
  return sol;
}

TwoPathSolution solve_two_paths_exact(const TrellisGraph& g, const ExactSolverOptions& options) {
  const int frames = g.frames();
  struct Pair {
    int a, b;  // a < b
  };
  std::vector<Pair> pairs;
  std::vector<std::size_t> start(frames + 1, 0);
  std::size_t capacity = 0;
  for (int t = 0; t < frames; ++t) {
    const std::size_t n = static_cast<std::size_t>(g.layer_size(t));
    capacity += n * (n - 1) / 2;
  }
  pairs.reserve(capacity);
  for (int t = 0; t < frames; ++t) {
    const int n = g.layer_size(t);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (!g.excludes(t, a, b)) pairs.push_back({a, b});
      }
    }
    start[t + 1] = pairs.size();
    if (start[t + 1] == start[t]) {
      throw Error(ErrorCode::kInfeasible, "layer " + std::to_string(t) + " admits no separated pair");
    }
  }
  double work = 0.0;
  for (int t = 1; t < frames; ++t) {
    work += static_cast<double>(start[t] - start[t - 1]) * static_cast<double>(start[t + 1] - start[t]);
  }
  if (work > options.budget) {
    throw Error(ErrorCode::kBudgetExceeded, std::to_string(std::llround(work)) +
                                                " pair transitions exceed budget " +
                                                std::to_string(std::llround(options.budget)));
  }

  struct Cell {
    double cost = kInf;
    int pred = -1;
    bool crossed = false;
  };
  std::vector<Cell> dp(pairs.size());

  for (std::size_t p = start[0]; p < start[1]; ++p) {
    dp[p].cost = g.source_weight(pairs[p].a) + g.source_weight(pairs[p].b);
  }
  for (int t = 1; t < frames; ++t) {
    const std::size_t p0 = start[t - 1], p1 = start[t], q1 = start[t + 1];
    const std::size_t n = static_cast<std::size_t>(g.layer_size(t));
    const double* w = g.edge_weights(t - 1);
    for (std::size_t q = p1; q < q1; ++q) {
      const auto [a, b] = pairs[q];
      double best = kInf;
      int arg = -1;
      bool cross = false;
      for (std::size_t p = p0; p < p1; ++p) {
        const std::size_t i = static_cast<std::size_t>(pairs[p].a) * n;
        const std::size_t j = static_cast<std::size_t>(pairs[p].b) * n;
        const double straight = w[i + a] + w[j + b];
        const double swapped = w[i + b] + w[j + a];
        const bool use_swap = swapped < straight;
        const double c = dp[p].cost + (use_swap ? swapped : straight);
        if (c < best) {
          best = c;
          arg = static_cast<int>(p - p0);
          cross = use_swap;
        }
      }
      dp[q] = {best, arg, cross};
    }
  }

  std::size_t end = start[frames - 1];
  for (std::size_t q = end + 1; q < start[frames]; ++q) {
    if (dp[q].cost < dp[end].cost) end = q;
  }

  TwoPathSolution sol;
  sol.path1.resize(frames);
  sol.path2.resize(frames);
  std::size_t q = end;
  int u = pairs[q].a;  // vertex of path 1
  int v = pairs[q].b;  // vertex of path 2
  for (int t = frames - 1; t >= 0; --t) {
    sol.path1[t] = u;
    sol.path2[t] = v;
    if (t == 0) break;
    const auto [a, b] = pairs[q];
    const std::size_t p = start[t - 1] + static_cast<std::size_t>(dp[q].pred);
    const auto [i, j] = pairs[p];
    const bool cross = dp[q].crossed;
    const int prev_a = cross ? j : i;
    const int prev_b = cross ? i : j;
    u = (u == a) ? prev_a : prev_b;
    v = (v == a) ? prev_a : prev_b;
    q = p;
  }
  if (sol.path1.front() > sol.path2.front()) std::swap(sol.path1, sol.path2);

  sol.exact = true;
  sol.objective = unchecked_objective(g, sol);
  sol.degenerate_risk = first_layer_within(g, sol.path1, sol.path2, 2.0 * g.separation()) >= 0;
  return sol;
}

double objective_value(const TrellisGraph& g, const TwoPathSolution& sol) {
  const ConstraintReport report = check_flow_constraints(g, sol);
  if (!report.ok()) throw Error(ErrorCode::kInfeasibleSolution, report.summary());
  return unchecked_objective(g, sol);
}
std::vector<Correspondence> extract_correspondences(const TwoPathSolution& sol, const TrellisGraph& g,
                                                    double similarity_threshold) {
  std::vector<Correspondence> out;
  for (int t = 0; t < g.frames(); ++t) {
    for (const TrellisPath* path : {&sol.path1, &sol.path2}) {
      const TrellisVertex& v = g.vertex(t, (*path)[t]);
      const double s = similarity_from_prior(v.prior);
      if (s + 1e-9 < similarity_threshold) continue;
      out.push_back({v.x, v.x_prime, t, s});
    }
  }
  return out;
}

}  // namespace silcal
