// silcal: epipolar geometry from silhouette motion.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "silcal/barcode.hpp"
#include "silcal/error.hpp"
#include "silcal/mask_io.hpp"
#include "silcal/pipeline.hpp"
#include "silcal/serialization.hpp"
#include "silcal/synth.hpp"
#include "silcal/trellis.hpp"

namespace fs = std::filesystem;
using namespace silcal;

namespace {

void add_config_flags(CLI::App* cmd, PipelineConfig& c) {
  cmd->add_option("--c-pixels", c.c_pixels, "Separation C between the two tracks, pixels")->capture_default_str();
  cmd->add_option("--sigma", c.sigma, "Transition kernel width, pixels")->capture_default_str();
  cmd->add_option("--sim-threshold", c.sim_threshold, "Minimum barcode similarity of a kept match")
      ->capture_default_str();
  cmd->add_option("--ransac-iters", c.ransac_iterations, "RANSAC iterations")->capture_default_str();
  cmd->add_option("--inlier-thresh", c.inlier_threshold, "Inlier threshold on the symmetric epipolar distance")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Run seed")->capture_default_str();
  cmd->add_flag("--exact", c.exact_solver, "Use the exact pair DP instead of the iterative solver");
  cmd->add_option("--layer-cap", c.layer_cap, "Keep at most this many candidates per frame")
      ->capture_default_str();
}

void write_csv(const fs::path& path, const std::string& text) { write_text_file(path, text); }

std::string log_path_for(const std::string& out) { return out + ".log"; }

int run_synth(const std::string& preset, std::uint64_t seed, int frames, const std::string& scene_file,
              double noise, const std::string& format, const std::string& out_dir) {
  Scene scene = scene_file.empty() ? generate_scene(preset, seed, frames) : scene_from_json(read_text_file(scene_file));
  if (noise >= 0.0) scene.script.boundary_noise = noise;

  std::vector<Correspondence> gt;
  for (int t = 0; t < scene.script.frames; ++t) {
    auto pts = ground_truth_frontier_points(scene.script, scene.cameras, t);
    gt.insert(gt.end(), pts.begin(), pts.end());
  }
  const auto [left, right] = render_silhouettes(scene.script, scene.cameras);

  const fs::path dir(out_dir);
  write_sequence(dir / "left", left, format);
  write_sequence(dir / "right", right, format);
  write_text_file(dir / "scene.json", scene_to_json(scene));
  write_text_file(dir / "F_gt.json", fundamental_to_json(scene.cameras.fundamental()));
  std::ostringstream csv;
  write_correspondences_csv(csv, gt);
  write_csv(dir / "ground_truth.csv", csv.str());
  std::cout << "wrote " << scene.script.frames << " frames and " << gt.size() << " ground-truth points to "
            << dir.string() << '\n';
  return 0;
}

int run_calibrate(const std::string& left_dir, const std::string& right_dir, const std::string& out,
                  std::string log_file, const std::string& solution_file, const PipelineConfig& config) {
  const SilhouetteSequence left = read_sequence(left_dir);
  const SilhouetteSequence right = read_sequence(right_dir);
  const CalibrationRun run = calibrate(left, right, config);
  write_text_file(out, calibration_to_json(run.result, run.correspondences));
  if (!solution_file.empty()) write_text_file(solution_file, solution_to_json(run.solution));
  std::string log;
  for (const auto& line : run.log) log += line + "\n";
  if (log_file.empty()) log_file = log_path_for(out);
  write_text_file(log_file, log);
  std::cout << log;
  return 0;
}

int run_evaluate(const std::string& result_file, const std::string& gt_dir, const std::string& out,
                 const EvaluateOptions& options, const PipelineConfig& config) {
  std::vector<Correspondence> putative;
  const CalibrationResult result = calibration_from_json(read_text_file(result_file), &putative);
  GroundTruth gt;
  const fs::path dir(gt_dir);
  if (!fs::exists(dir / "F_gt.json")) {
    throw Error(ErrorCode::kMissingGroundTruth, "no F_gt.json in " + dir.string());
  }
  gt.F = fundamental_from_json(read_text_file(dir / "F_gt.json"));
  if (fs::exists(dir / "ground_truth.csv")) {
    std::ifstream in(dir / "ground_truth.csv");
    gt.points = read_correspondences_csv(in);
  }
  const EvaluationReport report = evaluate(putative, result, gt, options, config);
  std::ostringstream csv;
  write_evaluation_csv(csv, report);
  write_csv(out, csv.str());
  std::cout << csv.str();
  if (report.q_ground_truth) std::cout << "Q(F) on ground truth: " << *report.q_ground_truth << '\n';
  if (report.q_gt_selection) std::cout << "Q(F) with ground-truth selection: " << *report.q_gt_selection << '\n';
  return 0;
}

int run_suite_cmd(const std::vector<std::string>& presets, const std::vector<std::uint64_t>& seeds, int frames,
                  const std::string& out, const PipelineConfig& config) {
  SuiteOptions options;
  options.frames = frames;
  const auto rows = run_suite(presets, seeds, config, options, &std::cerr);
  std::ostringstream csv;
  write_suite_csv(csv, rows);
  write_csv(out, csv.str());
  std::cout << csv.str();
  return 0;
}

int run_dump(const std::string& left_dir, const std::string& right_dir, const std::string& out,
             const std::string& barcodes, int barcode_frame, const PipelineConfig& config) {
  const SilhouetteSequence left = read_sequence(left_dir);
  const SilhouetteSequence right = read_sequence(right_dir);
  const TrellisGraph graph = build_matcher_graph(left, right, config);
  std::ostringstream text;
  text.precision(17);
  write_trellis(text, graph);
  write_text_file(out, text.str());

  if (!barcodes.empty()) {
    if (barcode_frame < 0 || barcode_frame >= static_cast<int>(left.size())) {
      throw Error(ErrorCode::kInvalidArgument, "barcode frame out of range");
    }
    const double res = config.tangent_resolution_deg * 3.14159265358979323846 / 180.0;
    std::vector<Line2> lines;
    std::vector<MotionBarcode> codes;
    for (const auto* seq : {&left, &right}) {
      const SilhouetteMask& mask = (*seq)[barcode_frame];
      const auto cps = extract_critical_points(mask, extract_convex_hull(mask), barcode_frame,
                                               {kOnBoundaryTolerance, res, 1.5});
      for (const auto& cp : cps) {
        for (const auto& l : cp.tangents.lines) {
          lines.push_back(l);
          codes.push_back(motion_barcode(l, *seq));
        }
      }
    }
    std::ostringstream csv;
    write_barcodes_csv(csv, lines, codes);
    write_csv(barcodes, csv.str());
  }
  std::cout << "trellis: " << graph.frames() << " layers, " << graph.vertex_count() << " vertices, "
            << graph.edge_count() << " edges\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-view calibration from silhouette sequences"};
  app.require_subcommand(1);

  PipelineConfig config;

  std::string preset = "single-ellipsoid", scene_file, format = "pgm", synth_out;
  std::uint64_t synth_seed = 0;
  int frames = kDefaultFrames;
  double noise = -1.0;
  auto* synth = app.add_subcommand("synth", "Render a synthetic scene with ground truth");
  synth->add_option("--preset", preset, "single-ellipsoid, articulated-pair or crossing-motion")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Scene seed")->capture_default_str();
  synth->add_option("--frames", frames, "Frame count")->capture_default_str();
  synth->add_option("--scene", scene_file, "Load the scene from JSON instead of a preset");
  synth->add_option("--noise", noise, "Boundary noise in pixels (overrides the scene)");
  synth->add_option("--format", format, "Mask format")->check(CLI::IsMember({"pgm", "png"}))->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string left_dir, right_dir, out, log_file, solution_file;
  auto* cal = app.add_subcommand("calibrate", "Estimate F from two silhouette sequences");
  cal->add_option("--left", left_dir, "Left sequence directory")->required();
  cal->add_option("--right", right_dir, "Right sequence directory")->required();
  cal->add_option("--out", out, "Calibration result JSON")->required();
  cal->add_option("--log", log_file, "Run log (default: <out>.log)");
  cal->add_option("--solution", solution_file, "Also write the matcher paths as JSON");
  add_config_flags(cal, config);

  std::string result_file, gt_dir;
  EvaluateOptions eval_options;
  auto* eval = app.add_subcommand("evaluate", "Score a calibration result against ground truth");
  eval->add_option("--result", result_file, "Calibration result JSON")->required();
  eval->add_option("--gt", gt_dir, "Directory with F_gt.json and ground_truth.csv")->required();
  eval->add_option("--out", out, "Report CSV")->required();
  eval->add_option("--sample-size", eval_options.sample_size, "Minimal sample size for required samples")
      ->capture_default_str();
  eval->add_option("--confidence", eval_options.confidence, "Confidence for required samples")->capture_default_str();
  eval->add_flag("--gt-selection", eval_options.gt_selection,
                 "Also pick the best refined hypothesis per 1000 iterations using the true points");
  add_config_flags(eval, config);

  std::vector<std::string> presets;
  std::vector<std::uint64_t> seeds{0};
  int suite_frames = kDefaultFrames;
  auto* suite = app.add_subcommand("suite", "Batch synth + calibrate + evaluate");
  suite->add_option("--presets", presets, "Comma separated presets")->delimiter(',');
  suite->add_option("--seeds", seeds, "Comma separated seeds")->delimiter(',');
  suite->add_option("--frames", suite_frames, "Frames per scene")->capture_default_str();
  suite->add_option("--out", out, "Suite CSV")->required();
  add_config_flags(suite, config);

  std::string barcodes;
  int barcode_frame = 0;
  auto* dump = app.add_subcommand("dump-trellis", "Write the matcher graph in text form");
  dump->add_option("--left", left_dir, "Left sequence directory")->required();
  dump->add_option("--right", right_dir, "Right sequence directory")->required();
  dump->add_option("--out", out, "Trellis text file")->required();
  dump->add_option("--barcodes", barcodes, "Also write the barcodes of one frame's tangent lines as CSV");
  dump->add_option("--barcode-frame", barcode_frame, "Frame for --barcodes")->capture_default_str();
  add_config_flags(dump, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return run_synth(preset, synth_seed, frames, scene_file, noise, format, synth_out);
    if (*cal) return run_calibrate(left_dir, right_dir, out, log_file, solution_file, config);
    if (*eval) return run_evaluate(result_file, gt_dir, out, eval_options, config);
    if (*suite) return run_suite_cmd(presets, seeds, suite_frames, out, config);
    if (*dump) return run_dump(left_dir, right_dir, out, barcodes, barcode_frame, config);
  } catch (const Error& e) {
    std::cerr << "silcal: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "silcal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
