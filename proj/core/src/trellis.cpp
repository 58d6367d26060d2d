#include "silcal/trellis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "silcal/error.hpp"

namespace silcal {

namespace {

std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) {
  // i < j
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

bool has_separated_pair(const TrellisGraph& g, int t) {
  const int n = g.layer_size(t);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(g.exclusion(t, i).size()) < n - 1) return true;
  }
  return false;
}

}  // namespace

double vertex_distance(const TrellisVertex& a, const TrellisVertex& b) noexcept {
  return std::min((a.x - b.x).norm(), (a.x_prime - b.x_prime).norm());
}

TrellisGraph::TrellisGraph(std::vector<std::vector<TrellisVertex>> layers,
                           std::vector<std::vector<double>> transitions, double separation)
    : layers_(std::move(layers)), transitions_(std::move(transitions)), separation_(separation) {
  if (layers_.empty()) throw Error(ErrorCode::kInvalidArgument, "trellis needs at least one layer");
  if (transitions_.size() + 1 != layers_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "expected one transition table per stage");
  }
  if (!(separation_ >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "separation must be >= 0");
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    if (layers_[t].empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty trellis layer " + std::to_string(t));
    }
    for (const auto& v : layers_[t]) {
      if (!(v.prior.p > 0.0 && v.prior.p < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "vertex prior outside (0,1)");
      }
    }
  }

  offsets_.push_back(0);
  for (const auto& layer : layers_) {
    for (const auto& v : layer) vertex_log_odds_.push_back(log_odds(v.prior.p));
    offsets_.push_back(static_cast<int>(vertex_log_odds_.size()));
  }
  for (std::size_t k = 0; k < layers_.front().size(); ++k) source_weights_.push_back(-vertex_log_odds_[k]);

  weights_.resize(transitions_.size());
  transition_log_odds_.resize(transitions_.size());
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const auto& next = layers_[t + 1];
    if (transitions_[t].size() != layers_[t].size() * next.size()) {
      throw Error(ErrorCode::kInvalidArgument, "transition table size mismatch at stage " +
                                                   std::to_string(t));
    }
    weights_[t].resize(transitions_[t].size());
    transition_log_odds_[t].resize(transitions_[t].size());
    const double* next_lo = vertex_log_odds_.data() + offsets_[t + 1];
    for (std::size_t i = 0; i < layers_[t].size(); ++i) {
      for (std::size_t j = 0; j < next.size(); ++j) {
        const std::size_t e = i * next.size() + j;
        const double p = transitions_[t][e];
        if (!(p > 0.0 && p < 1.0)) {
          throw Error(ErrorCode::kInvalidArgument, "transition probability outside (0,1)");
        }
        transition_log_odds_[t][e] = log_odds(p);
        weights_[t][e] = -next_lo[j] - transition_log_odds_[t][e];
      }
    }
  }

  exclusion_bits_.resize(layers_.size());
  exclusion_lists_.resize(layers_.size());
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    const auto& layer = layers_[t];
    const std::size_t n = layer.size();
    exclusion_bits_[t].assign(n * (n - 1) / 2, 0);
    exclusion_lists_[t].assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (vertex_distance(layer[i], layer[j]) < separation_) {
          exclusion_bits_[t][pair_index(n, i, j)] = 1;
          exclusion_lists_[t][i].push_back(static_cast<int>(j));
          exclusion_lists_[t][j].push_back(static_cast<int>(i));
        }
      }
    }
    for (auto& l : exclusion_lists_[t]) std::sort(l.begin(), l.end());
  }
}

int TrellisGraph::max_layer_size() const noexcept {
  std::size_t m = 0;
  for (const auto& l : layers_) m = std::max(m, l.size());
  return static_cast<int>(m);
}

bool TrellisGraph::excludes(int t, int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return exclusion_bits_[t][pair_index(layers_[t].size(), i, j)] != 0;
}

std::size_t TrellisGraph::vertex_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.size();
  return n;
}

std::size_t TrellisGraph::edge_count() const noexcept {
  std::size_t n = layers_.front().size() + layers_.back().size();
  for (const auto& w : weights_) n += w.size();
  return n;
}

TrellisGraph build_trellis(std::span<const std::vector<CriticalPoint>> left_frames,
                           std::span<const std::vector<CriticalPoint>> right_frames,
                           std::span<const PriorTable> priors, const TrellisOptions& options) {
  const std::size_t frames = left_frames.size();
  if (frames < 2) throw Error(ErrorCode::kInvalidArgument, "trellis needs T >= 2 frames");
  if (right_frames.size() != frames || priors.size() != frames) {
    throw Error(ErrorCode::kInvalidArgument, "left, right and prior inputs differ in length");
  }
  if (options.layer_cap < 2) throw Error(ErrorCode::kInvalidArgument, "layer cap must be >= 2");

  std::vector<std::vector<TrellisVertex>> layers(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto& left = left_frames[t];
    const auto& right = right_frames[t];
    const auto& table = priors[t];
    if (table.rows != static_cast<int>(left.size()) || table.cols != static_cast<int>(right.size()) ||
        table.values.size() != left.size() * right.size() ||
        (!table.support.empty() && table.support.size() != table.values.size())) {
      throw Error(ErrorCode::kInvalidArgument, "prior table shape mismatch at frame " +
                                                   std::to_string(t));
    }
    std::vector<TrellisVertex> candidates;
    std::vector<int> support;
    for (int i = 0; i < table.rows; ++i) {
      for (int j = 0; j < table.cols; ++j) {
        const VertexPrior p = table.at(i, j);
        if (p.p < options.min_prior) continue;
        candidates.push_back({i, j, left[i].position, right[j].position, p});
        support.push_back(table.support.empty() ? 0 : table.support[static_cast<std::size_t>(i) * table.cols + j]);
      }
    }
    // Highest prior first, then highest support; remaining ties keep
    // (left, right) order.
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (candidates[a].prior.p != candidates[b].prior.p) return candidates[a].prior.p > candidates[b].prior.p;
      return support[a] > support[b];
    });
    // Take candidates in that order, skipping any that would put more than
    // half the cap within C of one kept vertex, so one frontier cluster
    // cannot fill the layer.
    std::vector<TrellisVertex> kept;
    std::vector<int> crowd;
    const std::size_t cap = static_cast<std::size_t>(options.layer_cap);
    const int half = options.layer_cap / 2;
    for (std::size_t k : order) {
      if (kept.size() == cap) break;
      const TrellisVertex& v = candidates[k];
      std::vector<std::size_t> near;
      bool full = false;
      for (std::size_t m = 0; m < kept.size() && !full; ++m) {
        if (vertex_distance(v, kept[m]) < options.separation) {
          near.push_back(m);
          full = crowd[m] >= half;
        }
      }
      if (full) continue;
      for (std::size_t m : near) ++crowd[m];
      kept.push_back(v);
      crowd.push_back(static_cast<int>(near.size()) + 1);
    }
    candidates = std::move(kept);
    if (candidates.size() > static_cast<std::size_t>(options.layer_cap)) {
      candidates.resize(options.layer_cap);
    }
    std::sort(candidates.begin(), candidates.end(), [](const TrellisVertex& a, const TrellisVertex& b) {
      return a.left != b.left ? a.left < b.left : a.right < b.right;
    });
    if (candidates.size() < 2) {
      throw Error(ErrorCode::kInsufficientCandidates,
                  "frame " + std::to_string(t) + " has fewer than two candidate matches");
    }
    layers[t] = std::move(candidates);
  }

  std::vector<std::vector<double>> transitions(frames - 1);
  for (std::size_t t = 0; t + 1 < frames; ++t) {
    const auto& a = layers[t];
    const auto& b = layers[t + 1];
    transitions[t].resize(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        transitions[t][i * b.size() + j] =
            transition_prior(a[i].x, a[i].x_prime, b[j].x, b[j].x_prime, options.sigma).p;
      }
    }
  }

  TrellisGraph graph(std::move(layers), std::move(transitions), options.separation);
  for (int t = 0; t < graph.frames(); ++t) {
    if (!has_separated_pair(graph, t)) {
      throw Error(ErrorCode::kInsufficientCandidates,
                  "frame " + std::to_string(t) + " has no pair of vertices at least C apart");
    }
  }
  return graph;
}

void write_trellis(std::ostream& out, const TrellisGraph& g) {
  const auto old_precision = out.precision(17);
  out << "trellis " << g.frames() << ' ' << g.separation() << '\n';
  for (int t = 0; t < g.frames(); ++t) {
    for (int k = 0; k < g.layer_size(t); ++k) {
      const auto& v = g.vertex(t, k);
      out << "vertex " << t << ' ' << k << ' ' << v.left << ' ' << v.right << ' ' << v.x.x() << ' '
          << v.x.y() << ' ' << v.x_prime.x() << ' ' << v.x_prime.y() << ' ' << v.prior.p << '\n';
    }
  }
  for (int k = 0; k < g.layer_size(0); ++k) {
    out << "source " << k << ' ' << g.source_weight(k) << '\n';
  }
  for (int t = 0; t + 1 < g.frames(); ++t) {
    for (int i = 0; i < g.layer_size(t); ++i) {
      for (int j = 0; j < g.layer_size(t + 1); ++j) {
        out << "edge " << t << ' ' << i << ' ' << j << ' ' << g.transition(t, i, j).p << ' '
            << g.edge_weight(t, i, j) << '\n';
      }
    }
  }
  for (int k = 0; k < g.layer_size(g.frames() - 1); ++k) {
    out << "target " << k << ' ' << TrellisGraph::target_weight() << '\n';
  }
  out.precision(old_precision);
}

TrellisGraph read_trellis(std::istream& in) {
  auto fail = [](const std::string& what, std::size_t line_no) {
    return Error(ErrorCode::kParse, "trellis line " + std::to_string(line_no) + ": " + what);
  };
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };

  std::string line;
  std::size_t line_no = 0;
  int frames = -1;
  double separation = 0.0;
  std::vector<std::vector<TrellisVertex>> layers;
  std::vector<std::vector<double>> transitions;
  struct PendingWeight {
    std::string kind;
    int t, i, j;
    double weight;
    std::size_t line_no;
  };
  std::vector<PendingWeight> weights;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind) || kind.front() == '#') continue;
    if (kind == "trellis") {
      if (!(ls >> frames >> separation) || frames < 1) throw fail("bad header", line_no);
      layers.assign(frames, {});
      transitions.assign(frames - 1, {});
      continue;
    }
    if (frames < 0) throw fail("record before header", line_no);
    if (kind == "vertex") {
      int t, k;
      TrellisVertex v;
      if (!(ls >> t >> k >> v.left >> v.right >> v.x.x() >> v.x.y() >> v.x_prime.x() >>
            v.x_prime.y() >> v.prior.p)) {
        throw fail("bad vertex record", line_no);
      }
      if (t < 0 || t >= frames || k != static_cast<int>(layers[t].size())) {
        throw fail("vertex out of order", line_no);
      }
      layers[t].push_back(v);
    } else if (kind == "edge") {
      int t, i, j;
      double p, w;
      if (!(ls >> t >> i >> j >> p >> w)) throw fail("bad edge record", line_no);
      if (t < 0 || t + 1 >= frames) throw fail("edge stage out of range", line_no);
      auto& table = transitions[t];
      const std::size_t next = layers[t + 1].size();
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= layers[t].size() ||
          static_cast<std::size_t>(j) >= next || table.size() != static_cast<std::size_t>(i) * next + j) {
        throw fail("edge out of order", line_no);
      }
      table.push_back(p);
      weights.push_back({kind, t, i, j, w, line_no});
    } else if (kind == "source" || kind == "target") {
      int k;
      double w;
      if (!(ls >> k >> w)) throw fail("bad " + kind + " record", line_no);
      weights.push_back({kind, 0, k, 0, w, line_no});
    } else {
      throw fail("unknown record '" + kind + "'", line_no);
    }
  }
  if (frames < 0) throw Error(ErrorCode::kParse, "empty trellis dump");

  TrellisGraph g(std::move(layers), std::move(transitions), separation);
  for (const auto& w : weights) {
    double expected = 0.0;
    if (w.kind == "edge") {
      expected = g.edge_weight(w.t, w.i, w.j);
    } else if (w.kind == "source") {
      if (w.i < 0 || w.i >= g.layer_size(0)) throw fail("source index out of range", w.line_no);
      expected = g.source_weight(w.i);
    } else {
      if (w.i < 0 || w.i >= g.layer_size(g.frames() - 1)) throw fail("target index out of range", w.line_no);
      expected = TrellisGraph::target_weight();
    }
    if (!close(w.weight, expected)) throw fail("weight disagrees with probabilities", w.line_no);
  }
  return g;
}

}  // namespace silcal
