#include <cmath>
#include <sstream>
#include <string>

#include <doctest.h>

#include "silcal/pipeline.hpp"
#include "silcal/serialization.hpp"
#include "silcal/synth.hpp"
#include "support.hpp"

using namespace silcal;
using testing::error_of;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string c; std::getline(in, c, ',');) out.push_back(c);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

GroundTruth truth_of(const Scene& scene) {
  GroundTruth gt;
  gt.F = scene.cameras.fundamental();
  for (int t = 0; t < scene.script.frames; ++t) {
    const auto pts = ground_truth_frontier_points(scene.script, scene.cameras, t);
    gt.points.insert(gt.points.end(), pts.begin(), pts.end());
  }
  return gt;
}

}  // namespace

TEST_CASE("config defaults and validation") {
  const PipelineConfig c;
  CHECK(c.c_pixels == 15.0);
  CHECK(c.sim_threshold == 0.95);
  CHECK(c.sigma == 1.0);
  CHECK_NOTHROW(c.validate());

  auto bad = [](auto mutate) {
    PipelineConfig p;
    mutate(p);
    return error_of([&] { p.validate(); });
  };
  CHECK(bad([](PipelineConfig& p) { p.c_pixels = -1; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](PipelineConfig& p) { p.sigma = -1; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](PipelineConfig& p) { p.sim_threshold = 1.5; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](PipelineConfig& p) { p.ransac_iterations = 0; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](PipelineConfig& p) { p.inlier_threshold = 0; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](PipelineConfig& p) { p.layer_cap = 1; }) == ErrorCode::kInvalidArgument);

  PipelineConfig p;
  p.sigma = 0;
  try {
    p.validate();
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sigma") != std::string::npos);
  }
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, "ransac") == derive_seed(1, "ransac"));
  CHECK(derive_seed(1, "ransac") != derive_seed(2, "ransac"));
  CHECK(derive_seed(1, "ransac") != derive_seed(1, "matcher"));
}

TEST_CASE("calibrate preconditions carry a stage") {
  const auto scene = generate_scene("single-ellipsoid", 0, 10);
  const auto [left, right] = render_silhouettes(scene.script, scene.cameras);
  const std::vector<SilhouetteMask> shorter(right.frames().begin(), right.frames().end() - 1);
  try {
    calibrate(left, SilhouetteSequence(shorter), PipelineConfig{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLengthMismatch);
    CHECK(e.stage() == "input");
  }

  const SilhouetteSequence one({left[0]});
  CHECK(error_of([&] { calibrate(one, one, PipelineConfig{}); }) == ErrorCode::kInvalidArgument);

  std::vector<SilhouetteMask> blank(left.frames().begin(), left.frames().end());
  blank[3] = SilhouetteMask(left.width(), left.height());
  try {
    calibrate(SilhouetteSequence(blank), right, PipelineConfig{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyMask);
    CHECK(e.stage() == "silhouette");
  }
}

TEST_CASE("calibrate is deterministic and logs its overhead") {
  const auto scene = generate_scene("single-ellipsoid", 4, 24);
  const auto [left, right] = render_silhouettes(scene.script, scene.cameras);
  PipelineConfig c;
  c.layer_cap = 16;
  const auto a = calibrate(left, right, c);
  const auto b = calibrate(left, right, c);
  CHECK(a.result.F.matrix() == b.result.F.matrix());
  CHECK(a.result.inliers == b.result.inliers);
  CHECK(calibration_to_json(a.result, a.correspondences) == calibration_to_json(b.result, b.correspondences));
  CHECK(a.correspondences.size() == 48);
  CHECK(a.equivalent_ransac_iterations > 0.0);
  CHECK(a.result.q_error <= a.q_before_refinement + 1e-12);
  bool logged_risk = false;
  for (const auto& line : a.log) logged_risk |= line.find("degenerate_risk") != std::string::npos;
  CHECK(logged_risk);
}

TEST_CASE("exact and iterative solvers on a short crop") {
  // Whenever both solvers settle on the same pair of paths, everything
  // downstream must agree bit for bit.
  int agreeing = 0;
  for (const char* preset : {"single-ellipsoid", "articulated-pair"}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto scene = generate_scene(preset, seed, 8);
      const auto [left, right] = render_silhouettes(scene.script, scene.cameras);
      PipelineConfig c;
      c.layer_cap = 5;
      const auto it = calibrate(left, right, c);
      c.exact_solver = true;
      const auto ex = calibrate(left, right, c);
      CHECK(ex.solution.exact);
      CHECK(ex.solution.objective >= it.solution.objective - 1e-9);
      const bool same = (it.solution.path1 == ex.solution.path1 && it.solution.path2 == ex.solution.path2) ||
                        (it.solution.path1 == ex.solution.path2 && it.solution.path2 == ex.solution.path1);
      if (same || !it.solution.degenerate_risk) {
        CHECK(ex.result.F.matrix() == it.result.F.matrix());
        ++agreeing;
      }
    }
  }
  CHECK(agreeing > 0);
}

TEST_CASE("evaluate") {
  const auto scene = generate_scene("single-ellipsoid", 1, 20);
  const GroundTruth gt = truth_of(scene);
  CalibrationResult result;
  result.F = *gt.F;

  SUBCASE("exact correspondences") {
    const auto report = evaluate(gt.points, result, gt);
    REQUIRE(report.rows.size() == 6);
    const double grid[] = {1, 0.8, 0.5, 0.4, 0.3, 0.2};
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(report.rows[i].threshold == grid[i]);
      CHECK(report.rows[i].fraction == 1.0);
      CHECK(report.required_samples[i] == 1);
    }
    REQUIRE(report.q_ground_truth);
    CHECK(*report.q_ground_truth < 1e-12);

    std::ostringstream out;
    write_evaluation_csv(out, report);
    const auto l = lines_of(out.str());
    REQUIRE(l.size() == 4);
    CHECK(l[0] == "metric,1,0.8,0.5,0.4,0.3,0.2");
    CHECK(l[1].rfind("inlier_probability,1,", 0) == 0);
    CHECK(l[2] == "required_samples,1,1,1,1,1,1");
    CHECK(cells(l[3]).size() == 7);
  }

  SUBCASE("required samples follow the inlier rate") {
    // Shift a fixed share of points off their lines.
    auto pts = gt.points;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& c : pts) {
      if (u(rng) < 0.71) c.x_prime += Vec2(0, 40);
    }
    const auto report = evaluate(pts, result, gt);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const double p = report.rows[i].fraction;
      REQUIRE(p > 0.0);
      CHECK(report.required_samples[i] == expected_iterations(p, 7, 0.99));
    }
  }

  SUBCASE("an inlier rate of 0.29 needs about 26K seven-point samples") {
    const auto n = expected_iterations(0.29, 7, 0.99);
    CHECK(n > 25000);
    CHECK(n < 28000);
  }

  SUBCASE("missing ground truth") {
    GroundTruth none;
    CHECK(error_of([&] { evaluate(gt.points, result, none); }) == ErrorCode::kMissingGroundTruth);
    EvaluateOptions o;
    o.gt_selection = true;
    GroundTruth only_f;
    only_f.F = gt.F;
    CHECK(error_of([&] { evaluate(gt.points, result, only_f, o); }) == ErrorCode::kMissingGroundTruth);
  }

  SUBCASE("ground-truth selection never does worse than the truth allows") {
    EvaluateOptions o;
    o.gt_selection = true;
    o.block = 100;
    PipelineConfig c;
    c.ransac_iterations = 300;
    const auto report = evaluate(gt.points, result, gt, o, c);
    REQUIRE(report.q_gt_selection);
    CHECK(*report.q_gt_selection < 1e-6);
  }
}

TEST_CASE("suite") {
  PipelineConfig c;
  c.layer_cap = 16;
  SuiteOptions o;
  o.frames = 16;

  SUBCASE("ten seeds make ten rows and an aggregate") {
    const std::vector<std::string> presets{"single-ellipsoid"};
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
    const auto rows = run_suite(presets, seeds, c, o);
    REQUIRE(rows.size() == 10);
    std::ostringstream out;
    write_suite_csv(out, rows);
    const auto l = lines_of(out.str());
    REQUIRE(l.size() == 12);
    CHECK(l[0].rfind("preset,seed,status", 0) == 0);
    CHECK(l.back().rfind("aggregate,10,", 0) == 0);
    for (const auto& line : l) CHECK(cells(line).size() == cells(l[0]).size());

    std::ostringstream again;
    write_suite_csv(again, run_suite(presets, seeds, c, o));
    CHECK(again.str() == out.str());
  }

  SUBCASE("crossing motion is flagged") {
    const std::vector<std::string> presets{"crossing-motion"};
    const std::vector<std::uint64_t> seeds{0, 1, 2};
    o.frames = 100;
    bool flagged = false;
    for (const auto& r : run_suite(presets, seeds, c, o)) flagged |= r.status == "ok" && r.degenerate_risk;
    CHECK(flagged);
  }

  SUBCASE("failures become rows") {
    const std::vector<std::string> presets{"teapot", "single-ellipsoid"};
    const std::vector<std::uint64_t> seeds{0};
    const auto rows = run_suite(presets, seeds, c, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == "UnknownPreset");
    CHECK(rows[1].status == "ok");
    std::ostringstream out;
    write_suite_csv(out, rows);
    CHECK(out.str().find("failed:teapot/0") != std::string::npos);
  }

  SUBCASE("no presets") {
    const auto rows = run_suite(std::vector<std::string>{}, std::vector<std::uint64_t>{0, 1}, c, o);
    CHECK(rows.empty());
    std::ostringstream out;
    write_suite_csv(out, rows);
    CHECK(lines_of(out.str()).size() == 2);
  }
}

TEST_CASE("serialization round trips") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;

  SUBCASE("fundamental matrix") {
    Mat3 m;
    for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = n(rng);
    const auto f = FundamentalMatrix::from_matrix(m);
    // Reading re-projects onto rank 2, which may move the last bits.
    CHECK((fundamental_from_json(fundamental_to_json(f)).matrix() - f.matrix()).norm() < 1e-14);
    CHECK(error_of([] { fundamental_from_json("{\"F\": [1, 2]}"); }) == ErrorCode::kParse);
    CHECK(error_of([] { fundamental_from_json("not json"); }) == ErrorCode::kParse);
  }

  SUBCASE("calibration result") {
    CalibrationResult r;
    r.F = CameraPair::standard().fundamental();
    r.inliers = {0, 2, 3};
    r.q_error = 0.125;
    r.iterations_used = 77;
    const std::vector<Correspondence> putative{{Vec2(1.5, 2), Vec2(3, 4.25), 0, 0.9},
                                               {Vec2(5, 6), Vec2(7, 8), 1, 1.0},
                                               {Vec2(-1, 0), Vec2(0, 1e-3), 1, 0.5},
                                               {Vec2(9, 9), Vec2(9, 9), 2, 1.0}};
    std::vector<Correspondence> back;
    const auto text = calibration_to_json(r, putative);
    const auto r2 = calibration_from_json(text, &back);
    CHECK((r2.F.matrix() - r.F.matrix()).norm() < 1e-14);
    CHECK(r2.inliers == r.inliers);
    CHECK(r2.q_error == r.q_error);
    CHECK(r2.iterations_used == r.iterations_used);
    REQUIRE(back.size() == putative.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].x == putative[i].x);
      CHECK(back[i].x_prime == putative[i].x_prime);
      CHECK(back[i].t == putative[i].t);
      CHECK(back[i].weight == putative[i].weight);
    }
  }

  SUBCASE("two-path solution") {
    TwoPathSolution s;
    s.path1 = {0, 2, 1};
    s.path2 = {1, 0, 0};
    s.objective = 3.25;
    s.exact = true;
    s.degenerate_risk = true;
    const auto s2 = solution_from_json(solution_to_json(s));
    CHECK(s2.path1 == s.path1);
    CHECK(s2.path2 == s.path2);
    CHECK(s2.objective == s.objective);
    CHECK(s2.exact);
    CHECK(s2.degenerate_risk);
  }

  SUBCASE("scene") {
    const auto scene = generate_scene("articulated-pair", 5, 12);
    const auto text = scene_to_json(scene);
    const auto back = scene_from_json(text);
    CHECK(scene_to_json(back) == text);
    CHECK(render_frame(back.script, back.cameras, 0, 7) == render_frame(scene.script, scene.cameras, 0, 7));
    CHECK((back.cameras.fundamental().matrix() - scene.cameras.fundamental().matrix()).norm() < 1e-14);
  }

  SUBCASE("correspondence csv") {
    std::vector<Correspondence> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({Vec2(n(rng), n(rng)) * 100, Vec2(n(rng), n(rng)) * 100, i / 2, 1.0});
    std::ostringstream out;
    write_correspondences_csv(out, pts);
    CHECK(lines_of(out.str()).front() == "t,x,y,x',y'");
    std::istringstream in(out.str());
    const auto back = read_correspondences_csv(in);
    REQUIRE(back.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(back[i].t == pts[i].t);
      CHECK(back[i].x == pts[i].x);
      CHECK(back[i].x_prime == pts[i].x_prime);
    }
    std::istringstream broken("t,x,y,x',y'\n1,2,three,4,5\n");
    CHECK(error_of([&] { read_correspondences_csv(broken); }) == ErrorCode::kParse);
  }

  SUBCASE("files") {
    CHECK(error_of([] { read_text_file("/nonexistent/dir/file.json"); }) == ErrorCode::kIo);
  }
}
