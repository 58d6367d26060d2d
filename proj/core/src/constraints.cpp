#include <cmath>
#include <sstream>

#include "silcal/solver.hpp"

namespace silcal {

namespace {

constexpr double kFlowTolerance = 1e-9;

void add(ConstraintReport& r, ConstraintFamily f, int t, int k, std::string detail) {
  r.violations[static_cast<std::size_t>(f)].push_back({t, k, std::move(detail)});
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(ConstraintFamily family) noexcept {
  switch (family) {
    case ConstraintFamily::kConservation: return "conservation";
    case ConstraintFamily::kCapacity: return "capacity";
    case ConstraintFamily::kNonNegativity: return "non-negativity";
    case ConstraintFamily::kSourceSink: return "source-sink";
    case ConstraintFamily::kSeparation: return "separation";
    case ConstraintFamily::kStructure: return "structure";
  }
  return "unknown";
}

bool ConstraintReport::ok() const {
  for (const auto& v : violations) {
    if (!v.empty()) return false;
  }
  return true;
}

std::string ConstraintReport::summary() const {
  if (ok()) return "all constraints satisfied";
  std::ostringstream os;
  bool first = true;
  for (std::size_t f = 0; f < kConstraintFamilyCount; ++f) {
    const auto& v = violations[f];
    if (v.empty()) continue;
    if (!first) os << "; ";
    first = false;
    os << to_string(static_cast<ConstraintFamily>(f)) << ": " << v.size() << " violation"
       << (v.size() == 1 ? "" : "s") << " (first at t=" << v.front().t << " k=" << v.front().k;
    if (!v.front().detail.empty()) os << ", " << v.front().detail;
    os << ")";
  }
  return os.str();
}

std::vector<EdgeFlow> flows_of(const TwoPathSolution& solution) {
  std::vector<EdgeFlow> flows;
  for (const TrellisPath* path : {&solution.path1, &solution.path2}) {
    const int frames = static_cast<int>(path->size());
    if (frames == 0) continue;
    flows.push_back({0, -1, (*path)[0], 1.0});
    for (int t = 1; t < frames; ++t) flows.push_back({t, (*path)[t - 1], (*path)[t], 1.0});
    flows.push_back({frames, (*path)[frames - 1], -1, 1.0});
  }
  return flows;
}

ConstraintReport check_flow_constraints(const TrellisGraph& g, const std::vector<EdgeFlow>& flows) {
  ConstraintReport report;
  const int frames = g.frames();
  std::vector<std::vector<double>> in(frames), out(frames);
  for (int t = 0; t < frames; ++t) {
    in[t].assign(g.layer_size(t), 0.0);
    out[t].assign(g.layer_size(t), 0.0);
  }
  double emitted = 0.0;
  double absorbed = 0.0;

  auto valid = [&](int t, int k) { return t >= 0 && t < frames && k >= 0 && k < g.layer_size(t); };

  for (const auto& f : flows) {
    if (!std::isfinite(f.value)) {
      add(report, ConstraintFamily::kStructure, f.stage, f.from, "non-finite flow");
      continue;
    }
    bool ok = f.stage >= 0 && f.stage <= frames;
    if (ok) {
      if (f.stage == 0) {
        ok = f.from == -1 && valid(0, f.to);
      } else if (f.stage == frames) {
        ok = valid(frames - 1, f.from) && f.to == -1;
      } else {
        ok = valid(f.stage - 1, f.from) && valid(f.stage, f.to);
      }
    }
    if (!ok) {
      add(report, ConstraintFamily::kStructure, f.stage, f.from,
          "no edge " + std::to_string(f.from) + " -> " + std::to_string(f.to));
      continue;
    }
    if (f.value < 0.0) {
      add(report, ConstraintFamily::kNonNegativity, f.stage, f.from, "flow " + num(f.value));
    }
    if (f.stage == 0) {
      emitted += f.value;
      in[0][f.to] += f.value;
    } else if (f.stage == frames) {
      absorbed += f.value;
      out[frames - 1][f.from] += f.value;
    } else {
      out[f.stage - 1][f.from] += f.value;
      in[f.stage][f.to] += f.value;
    }
  }

  if (std::abs(emitted - 2.0) > kFlowTolerance) {
    add(report, ConstraintFamily::kSourceSink, 0, -1, "src emits " + num(emitted));
  }
  if (std::abs(absorbed - 2.0) > kFlowTolerance) {
    add(report, ConstraintFamily::kSourceSink, frames, -1, "trg absorbs " + num(absorbed));
  }
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < g.layer_size(t); ++k) {
      if (std::abs(in[t][k] - out[t][k]) > kFlowTolerance) {
        add(report, ConstraintFamily::kConservation, t, k,
            "in " + num(in[t][k]) + " out " + num(out[t][k]));
      }
      if (out[t][k] > 1.0 + kFlowTolerance) {
        add(report, ConstraintFamily::kCapacity, t, k, "out " + num(out[t][k]));
      }
      // Separation over the edges leaving and, separately, entering D(k).
      for (const auto* flow : {&out, &in}) {
        const auto& layer = (*flow)[t];
        if (layer[k] <= kFlowTolerance) continue;
        double load = layer[k];
        for (int m : g.exclusion(t, k)) load += layer[m];
        if (load > 1.0 + kFlowTolerance) {
          add(report, ConstraintFamily::kSeparation, t, k,
              std::string(flow == &out ? "outgoing" : "incoming") + " neighbourhood carries " + num(load));
          break;
        }
      }
    }
  }
  return report;
}

ConstraintReport check_flow_constraints(const TrellisGraph& g, const TwoPathSolution& solution) {
  ConstraintReport report;
  int which = 0;
  for (const TrellisPath* path : {&solution.path1, &solution.path2}) {
    ++which;
    if (static_cast<int>(path->size()) != g.frames()) {
      add(report, ConstraintFamily::kStructure, -1, -1,
          "path " + std::to_string(which) + " has " + std::to_string(path->size()) + " layers, expected " +
              std::to_string(g.frames()));
      continue;
    }
    for (int t = 0; t < g.frames(); ++t) {
      const int k = (*path)[t];
      if (k < 0 || k >= g.layer_size(t)) {
        add(report, ConstraintFamily::kStructure, t, k,
            "path " + std::to_string(which) + " leaves layer bounds");
      }
    }
  }
  if (!report.ok()) return report;
  return check_flow_constraints(g, flows_of(solution));
}

}  // namespace silcal
