#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "silcal/epigeom.hpp"
#include "silcal/solver.hpp"
#include "silcal/synth.hpp"

namespace silcal {

// {"paths": [[...], [...]], "objective": x, "exact": b, "degenerate_risk": b}
std::string solution_to_json(const TwoPathSolution& solution);
TwoPathSolution solution_from_json(const std::string& text);

// {"F": [9 row-major], "inliers": [...], "q_error": x, "iterations_used": n,
//  "correspondences": [[t, x, y, x', y', weight], ...]}
std::string calibration_to_json(const CalibrationResult& result, std::span<const Correspondence> putative);
CalibrationResult calibration_from_json(const std::string& text, std::vector<Correspondence>* putative = nullptr);

std::string fundamental_to_json(const FundamentalMatrix& f);
FundamentalMatrix fundamental_from_json(const std::string& text);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

// "t,x,y,x',y'" header plus one row per correspondence.
void write_correspondences_csv(std::ostream& out, std::span<const Correspondence> corrs);
std::vector<Correspondence> read_correspondences_csv(std::istream& in);

// Whole-file helpers; throw Io.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace silcal
