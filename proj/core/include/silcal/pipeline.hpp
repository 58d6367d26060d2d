#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "silcal/epigeom.hpp"
#include "silcal/hull.hpp"
#include "silcal/mask.hpp"
#include "silcal/solver.hpp"
#include "silcal/trellis.hpp"

namespace silcal {

struct PipelineConfig {
  double c_pixels = 15.0;
  double sigma = 1.0;
  double sim_threshold = 0.95;
  std::uint64_t ransac_iterations = 2000;
  double inlier_threshold = 1.0;
  std::uint64_t seed = 0;
  bool exact_solver = false;
  int layer_cap = 64;
  int lm_iterations = 50;
  int ransac_partitions = 4;
  double exact_budget = 1e9;
  double tangent_resolution_deg = 2.0;

  // Throws InvalidArgument naming the offending field.
  void validate() const;
};

// Stable per-stage seed from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& stage);

// Critical points of every frame of one sequence.
std::vector<std::vector<CriticalPoint>> sequence_critical_points(const SilhouetteSequence& seq,
                                                                 double tangent_resolution);

// Vertex prior tables for every frame, K_left(t) x K_right(t).
std::vector<PriorTable> sequence_priors(const std::vector<std::vector<CriticalPoint>>& left,
                                        const std::vector<std::vector<CriticalPoint>>& right,
                                        const SilhouetteSequence& left_seq,
                                        const SilhouetteSequence& right_seq);

// Silhouettes to trellis. Errors carry the stage they came from.
TrellisGraph build_matcher_graph(const SilhouetteSequence& left, const SilhouetteSequence& right,
                                 const PipelineConfig& config);

struct CalibrationRun {
  CalibrationResult result;                    // after refinement
  std::vector<Correspondence> correspondences; // putative matches fed to RANSAC
  TwoPathSolution solution;
  bool lm_converged = false;
  double q_before_refinement = 0.0;
  // Matcher cost expressed as RANSAC iterations of this run.
  double equivalent_ransac_iterations = 0.0;
  std::vector<std::string> log;  // human-readable, includes timings
};

// silhouettes -> critical points -> priors -> trellis -> two paths ->
// correspondences -> RANSAC -> LM. Errors carry the stage they came from.
CalibrationRun calibrate(const SilhouetteSequence& left, const SilhouetteSequence& right,
                         const PipelineConfig& config);

// The reporting grid of the evaluation tables.
inline constexpr std::array<double, 6> kReportThresholds{1.0, 0.8, 0.5, 0.4, 0.3, 0.2};

struct GroundTruth {
  std::optional<FundamentalMatrix> F;
  std::vector<Correspondence> points;  // true frontier correspondences
};

struct EvaluateOptions {
  int sample_size = 7;  // minimal sample assumed by the required-samples row
  double confidence = 0.99;
  // Ground-truth model selection: every `block` RANSAC iterations keep the
  // hypothesis that, after refinement, scores best on the true points.
  bool gt_selection = false;
  std::uint64_t block = 1000;
};

struct EvaluationReport {
  std::vector<InlierRow> rows;                 // one per threshold
  std::vector<std::uint64_t> required_samples; // saturated when no inliers
  std::optional<double> q_ground_truth;        // Q(F) over the true points
  std::optional<double> q_gt_selection;        // ground-truth selection mode
};

// Throws MissingGroundTruth when gt has no F.
EvaluationReport evaluate(std::span<const Correspondence> putative, const CalibrationResult& result,
                          const GroundTruth& gt, const EvaluateOptions& options = {},
                          const PipelineConfig& config = {});

// "metric,1,0.8,..." header, then inlier_probability, required_samples and
// correspondences rows.
void write_evaluation_csv(std::ostream& out, const EvaluationReport& report);

struct SuiteRow {
  std::string preset;
  std::uint64_t seed = 0;
  std::string status;  // "ok" or the error code
  std::size_t correspondences = 0;
  std::size_t inliers = 0;
  double q_error = 0.0;
  double q_gt = 0.0;
  double inlier_probability = 0.0;  // at the 1 px threshold
  bool degenerate_risk = false;
};

struct SuiteOptions {
  int frames = 100;
  EvaluateOptions evaluate;
};

// Runs synth + calibrate + evaluate per (preset, seed). Failures become rows
// with the error code; the run continues.
std::vector<SuiteRow> run_suite(std::span<const std::string> presets, std::span<const std::uint64_t> seeds,
                                const PipelineConfig& config, const SuiteOptions& options = {},
                                std::ostream* progress = nullptr);

// Per-run rows followed by one aggregate row (means over successful runs,
// median Q against ground truth, failing runs listed).
void write_suite_csv(std::ostream& out, std::span<const SuiteRow> rows);

}  // namespace silcal
