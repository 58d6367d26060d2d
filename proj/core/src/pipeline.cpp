#include "silcal/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "silcal/barcode.hpp"
#include "silcal/error.hpp"
#include "silcal/synth.hpp"

namespace silcal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs `body`, tagging any library error with `stage` unless it has one.
template <typename F>
auto in_stage(const char* stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_samples(std::uint64_t n) {
  return n == std::numeric_limits<std::uint64_t>::max() ? "inf" : std::to_string(n);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void PipelineConfig::validate() const {
  require(c_pixels >= 0.0 && std::isfinite(c_pixels), "c-pixels must be a finite value >= 0");
  require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  require(sim_threshold >= -1.0 && sim_threshold <= 1.0, "sim-threshold must lie in [-1, 1]");
  require(ransac_iterations >= 1, "ransac-iters must be >= 1");
  require(inlier_threshold > 0.0, "inlier-thresh must be positive");
  require(layer_cap >= 2, "layer-cap must be >= 2");
  require(lm_iterations >= 0, "lm iterations must be >= 0");
  require(ransac_partitions >= 1, "ransac partitions must be >= 1");
  require(exact_budget > 0.0, "exact budget must be positive");
  require(tangent_resolution_deg > 0.0 && tangent_resolution_deg <= 90.0,
          "tangent resolution must lie in (0, 90] degrees");
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& stage) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : stage) h = (h ^ c) * 1099511628211ull;
  std::uint64_t x = seed ^ h;
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::vector<std::vector<CriticalPoint>> sequence_critical_points(const SilhouetteSequence& seq,
                                                                 double tangent_resolution) {
  CriticalPointOptions options;
  options.tangent_resolution = tangent_resolution;
  std::vector<std::vector<CriticalPoint>> out;
  out.reserve(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    try {
      const ConvexHullPolygon hull = extract_convex_hull(seq[t]);
      out.push_back(extract_critical_points(seq[t], hull, static_cast<int>(t), options));
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(t) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PriorTable> sequence_priors(const std::vector<std::vector<CriticalPoint>>& left,
                                        const std::vector<std::vector<CriticalPoint>>& right,
                                        const SilhouetteSequence& left_seq,
                                        const SilhouetteSequence& right_seq) {
  if (left.size() != right.size()) throw Error(ErrorCode::kLengthMismatch, "critical point lists differ in length");
  auto barcodes = [](const std::vector<CriticalPoint>& points, const SilhouetteSequence& seq) {
    std::vector<std::vector<MotionBarcode>> out;
    for (const auto& cp : points) {
      std::vector<MotionBarcode> codes;
      for (const auto& line : cp.tangents.lines) codes.push_back(motion_barcode(line, seq));
      out.push_back(std::move(codes));
    }
    return out;
  };
  std::vector<PriorTable> tables;
  for (std::size_t t = 0; t < left.size(); ++t) {
    const auto lb = barcodes(left[t], left_seq);
    const auto rb = barcodes(right[t], right_seq);
    PriorTable table;
    table.rows = static_cast<int>(lb.size());
    table.cols = static_cast<int>(rb.size());
    for (const auto& l : lb) {
      for (const auto& r : rb) {
        table.values.push_back(prior_from_similarity(best_pair_similarity(l, r)));
        table.support.push_back(best_pair_support(l, r));
      }
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

TrellisGraph build_matcher_graph(const SilhouetteSequence& left, const SilhouetteSequence& right,
                                 const PipelineConfig& config) {
  in_stage("input", [&] {
    config.validate();
    if (left.size() != right.size()) {
      throw Error(ErrorCode::kLengthMismatch, "left sequence has " + std::to_string(left.size()) +
                                                  " frames, right has " + std::to_string(right.size()));
    }
    if (left.size() < 2) throw Error(ErrorCode::kInvalidArgument, "calibration needs at least 2 frames");
    return 0;
  });
  const double res = config.tangent_resolution_deg * std::numbers::pi / 180.0;
  const auto lcp = in_stage("silhouette", [&] { return sequence_critical_points(left, res); });
  const auto rcp = in_stage("silhouette", [&] { return sequence_critical_points(right, res); });
  const auto priors = in_stage("barcode", [&] { return sequence_priors(lcp, rcp, left, right); });
  return in_stage("trellis", [&] {
    TrellisOptions options;
    options.sigma = config.sigma;
    options.separation = config.c_pixels;
    options.layer_cap = config.layer_cap;
    return build_trellis(lcp, rcp, priors, options);
  });
}

CalibrationRun calibrate(const SilhouetteSequence& left, const SilhouetteSequence& right,
                         const PipelineConfig& config) {
  CalibrationRun run;
  const auto start = Clock::now();
  const TrellisGraph graph = build_matcher_graph(left, right, config);
  const double front_seconds = seconds_since(start);

  const auto solve_start = Clock::now();
  run.solution = in_stage("matcher", [&] {
    if (config.exact_solver) return solve_two_paths_exact(graph, {config.exact_budget});
    return solve_two_paths(graph);
  });
  const double solve_seconds = seconds_since(solve_start);
  const ConstraintReport report = check_flow_constraints(graph, run.solution);
  if (!report.ok()) {
    throw Error(ErrorCode::kInfeasibleSolution, report.summary(), "matcher");
  }
  run.correspondences = extract_correspondences(run.solution, graph, config.sim_threshold);

  const auto ransac_start = Clock::now();
  run.result = in_stage("epigeom", [&] {
    RansacOptions options;
    options.iterations = config.ransac_iterations;
    options.inlier_threshold = config.inlier_threshold;
    options.seed = derive_seed(config.seed, "ransac");
    options.partitions = config.ransac_partitions;
    return ransac_fundamental(run.correspondences, options);
  });
  const double ransac_seconds = seconds_since(ransac_start);
  run.q_before_refinement = run.result.q_error;

  std::vector<Correspondence> inliers;
  for (auto i : run.result.inliers) inliers.push_back(run.correspondences[i]);
  if (inliers.size() >= 8 && config.lm_iterations > 0) {
    const LmResult lm = in_stage("epigeom", [&] { return lm_refine(run.result.F, inliers, config.lm_iterations); });
    run.result.F = lm.F;
    run.result.q_error = lm.history.back();
    run.lm_converged = lm.converged;
  }

  const double per_iteration = ransac_seconds / static_cast<double>(run.result.iterations_used);
  run.equivalent_ransac_iterations = per_iteration > 0.0 ? (front_seconds + solve_seconds) / per_iteration : 0.0;

  auto& log = run.log;
  std::ostringstream os;
  os << "frames " << left.size() << ", trellis vertices " << graph.vertex_count() << ", max layer "
     << graph.max_layer_size();
  log.push_back(os.str());
  log.push_back(std::string("solver ") + (run.solution.exact ? "exact" : "iterative") + ", objective " +
                fmt(run.solution.objective) + ", degenerate_risk " +
                (run.solution.degenerate_risk ? "true" : "false"));
  log.push_back("constraints: " + report.summary());
  log.push_back("correspondences " + std::to_string(run.correspondences.size()) + " at similarity >= " +
                fmt(config.sim_threshold));
  log.push_back("ransac iterations " + std::to_string(run.result.iterations_used) + ", inliers " +
                std::to_string(run.result.inliers.size()) + ", Q before refinement " +
                fmt(run.q_before_refinement));
  log.push_back("refined Q " + fmt(run.result.q_error) + ", converged " + (run.lm_converged ? "true" : "false"));
  std::ostringstream timing;
  timing.precision(4);
  timing << "time: matcher front end " << front_seconds << " s, solve " << solve_seconds << " s, ransac "
         << ransac_seconds << " s; matcher overhead ~ " << std::llround(run.equivalent_ransac_iterations)
         << " RANSAC iterations";
  log.push_back(timing.str());
  return run;
}

EvaluationReport evaluate(std::span<const Correspondence> putative, const CalibrationResult& result,
                          const GroundTruth& gt, const EvaluateOptions& options, const PipelineConfig& config) {
  if (!gt.F) throw Error(ErrorCode::kMissingGroundTruth, "evaluation needs the true fundamental matrix");
  EvaluationReport report;
  if (putative.empty()) {
    for (double th : kReportThresholds) report.rows.push_back({th, 0.0, 0});
  } else {
    report.rows = inlier_probability_report(putative, *gt.F, kReportThresholds);
  }
  for (const auto& row : report.rows) {
    std::uint64_t n = 1;
    if (row.fraction <= 0.0) {
      n = std::numeric_limits<std::uint64_t>::max();
    } else if (row.fraction < 1.0) {
      n = expected_iterations(row.fraction, options.sample_size, options.confidence);
    }
    report.required_samples.push_back(n);
  }
  if (!gt.points.empty()) report.q_ground_truth = symmetric_epipolar_error(result.F, gt.points);

  if (options.gt_selection) {
    if (gt.points.empty()) {
      throw Error(ErrorCode::kMissingGroundTruth, "ground-truth selection needs true correspondences");
    }
    const std::uint64_t block = std::max<std::uint64_t>(1, options.block);
    const std::uint64_t blocks = (config.ransac_iterations + block - 1) / block;
    for (std::uint64_t b = 0; b < blocks; ++b) {
      RansacOptions ro;
      ro.iterations = block;
      ro.inlier_threshold = config.inlier_threshold;
      ro.seed = derive_seed(config.seed, "gt-selection/" + std::to_string(b));
      ro.partitions = config.ransac_partitions;
      CalibrationResult r;
      try {
        r = ransac_fundamental(putative, ro);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNoModel) continue;
        throw;
      }
      std::vector<Correspondence> inliers;
      for (auto i : r.inliers) inliers.push_back(putative[i]);
      if (inliers.size() >= 8 && config.lm_iterations > 0) r.F = lm_refine(r.F, inliers, config.lm_iterations).F;
      const double q = symmetric_epipolar_error(r.F, gt.points);
      if (!report.q_gt_selection || q < *report.q_gt_selection) report.q_gt_selection = q;
    }
  }
  return report;
}

void write_evaluation_csv(std::ostream& out, const EvaluationReport& report) {
  out << "metric";
  for (const auto& row : report.rows) out << ',' << fmt(row.threshold);
  out << "\ninlier_probability";
  for (const auto& row : report.rows) out << ',' << fmt(row.fraction);
  out << "\nrequired_samples";
  for (auto n : report.required_samples) out << ',' << fmt_samples(n);
  out << "\ncorrespondences";
  for (const auto& row : report.rows) out << ',' << row.count;
  out << '\n';
}

std::vector<SuiteRow> run_suite(std::span<const std::string> presets, std::span<const std::uint64_t> seeds,
                                const PipelineConfig& config, const SuiteOptions& options,
                                std::ostream* progress) {
  std::vector<SuiteRow> rows;
  for (const auto& preset : presets) {
    for (auto seed : seeds) {
      SuiteRow row;
      row.preset = preset;
      row.seed = seed;
      try {
        const Scene scene = in_stage("synth", [&] { return generate_scene(preset, seed, options.frames); });
        GroundTruth gt;
        gt.F = scene.cameras.fundamental();
        in_stage("synth", [&] {
          for (int t = 0; t < scene.script.frames; ++t) {
            auto pts = ground_truth_frontier_points(scene.script, scene.cameras, t);
            gt.points.insert(gt.points.end(), pts.begin(), pts.end());
          }
          return 0;
        });
        const auto [left, right] = in_stage("synth", [&] { return render_silhouettes(scene.script, scene.cameras); });
        PipelineConfig cfg = config;
        cfg.seed = derive_seed(config.seed, preset + "/" + std::to_string(seed));
        const CalibrationRun run = calibrate(left, right, cfg);
        const EvaluationReport report =
            in_stage("evaluate", [&] { return evaluate(run.correspondences, run.result, gt, options.evaluate, cfg); });
        row.status = "ok";
        row.correspondences = run.correspondences.size();
        row.inliers = run.result.inliers.size();
        row.q_error = run.result.q_error;
        row.q_gt = report.q_ground_truth.value_or(std::numeric_limits<double>::quiet_NaN());
        row.inlier_probability = report.rows.front().fraction;
        row.degenerate_risk = run.solution.degenerate_risk;
      } catch (const Error& e) {
        row.status = to_string(e.code());
        if (progress) *progress << preset << " seed " << seed << ": " << e.what() << '\n';
      }
      if (progress && row.status == "ok") {
        *progress << preset << " seed " << seed << ": Q_gt " << fmt(row.q_gt) << ", degenerate_risk "
                  << (row.degenerate_risk ? "true" : "false") << '\n';
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_suite_csv(std::ostream& out, std::span<const SuiteRow> rows) {
  out << "preset,seed,status,correspondences,inliers,q_error,q_gt,q_gt_median,inlier_p1,degenerate_risk\n";
  std::vector<const SuiteRow*> ok;
  std::string failed;
  std::size_t flagged = 0;
  for (const auto& r : rows) {
    out << r.preset << ',' << r.seed << ',' << r.status << ',';
    if (r.status == "ok") {
      out << r.correspondences << ',' << r.inliers << ',' << fmt(r.q_error) << ',' << fmt(r.q_gt) << ",,"
          << fmt(r.inlier_probability) << ',' << (r.degenerate_risk ? "true" : "false") << '\n';
      ok.push_back(&r);
      if (r.degenerate_risk) ++flagged;
    } else {
      out << ",,,,,,\n";
      if (!failed.empty()) failed += ';';
      failed += r.preset + "/" + std::to_string(r.seed);
    }
  }
  out << "aggregate," << rows.size() << ',' << (failed.empty() ? "ok" : "failed:" + failed) << ',';
  if (ok.empty()) {
    out << ",,,,,,0\n";
    return;
  }
  const double n = static_cast<double>(ok.size());
  double corr = 0, inl = 0, q = 0, qgt = 0, p1 = 0;
  std::vector<double> qgts;
  for (const auto* r : ok) {
    corr += static_cast<double>(r->correspondences);
    inl += static_cast<double>(r->inliers);
    q += r->q_error;
    qgt += r->q_gt;
    p1 += r->inlier_probability;
    qgts.push_back(r->q_gt);
  }
  out << fmt(corr / n) << ',' << fmt(inl / n) << ',' << fmt(q / n) << ',' << fmt(qgt / n) << ','
      << fmt(median(qgts)) << ',' << fmt(p1 / n) << ',' << flagged << '\n';
}

}  // namespace silcal
