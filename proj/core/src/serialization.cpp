#include "silcal/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "silcal/error.hpp"

namespace silcal {

using nlohmann::json;

namespace {

json mat_to_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  }
  return a;
}

Mat3 mat_from_json(const json& a) {
  if (!a.is_array() || a.size() != 9) throw Error(ErrorCode::kParse, "expected 9 matrix entries");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = a.at(3 * r + c).get<double>();
  }
  return m;
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& a) {
  if (!a.is_array() || a.size() != 3) throw Error(ErrorCode::kParse, "expected 3 vector entries");
  return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
}

template <typename F>
auto parse(const std::string& text, const char* what, F&& body) {
  try {
    return body(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed ") + what + " JSON: " + e.what());
  }
}

}  // namespace

std::string solution_to_json(const TwoPathSolution& s) {
  json j;
  j["paths"] = json::array({s.path1, s.path2});
  j["objective"] = s.objective;
  j["exact"] = s.exact;
  j["degenerate_risk"] = s.degenerate_risk;
  return j.dump(2) + "\n";
}

TwoPathSolution solution_from_json(const std::string& text) {
  return parse(text, "solution", [](const json& j) {
    TwoPathSolution s;
    const auto& paths = j.at("paths");
    if (paths.size() != 2) throw Error(ErrorCode::kParse, "solution needs exactly two paths");
    s.path1 = paths.at(0).get<TrellisPath>();
    s.path2 = paths.at(1).get<TrellisPath>();
    s.objective = j.at("objective").get<double>();
    s.exact = j.at("exact").get<bool>();
    s.degenerate_risk = j.at("degenerate_risk").get<bool>();
    return s;
  });
}

std::string calibration_to_json(const CalibrationResult& r, std::span<const Correspondence> putative) {
  json j;
  j["F"] = mat_to_json(r.F.matrix());
  j["inliers"] = r.inliers;
  j["q_error"] = r.q_error;
  j["iterations_used"] = r.iterations_used;
  json corrs = json::array();
  for (const auto& c : putative) {
    corrs.push_back({c.t, c.x.x(), c.x.y(), c.x_prime.x(), c.x_prime.y(), c.weight});
  }
  j["correspondences"] = std::move(corrs);
  return j.dump(2) + "\n";
}

CalibrationResult calibration_from_json(const std::string& text, std::vector<Correspondence>* putative) {
  return parse(text, "calibration", [&](const json& j) {
    CalibrationResult r;
    r.F = FundamentalMatrix::from_matrix(mat_from_json(j.at("F")));
    r.inliers = j.at("inliers").get<std::vector<std::size_t>>();
    r.q_error = j.at("q_error").get<double>();
    r.iterations_used = j.at("iterations_used").get<std::uint64_t>();
    if (putative) {
      putative->clear();
      for (const auto& row : j.value("correspondences", json::array())) {
        if (row.size() != 6) throw Error(ErrorCode::kParse, "correspondence rows have 6 fields");
        putative->push_back({Vec2(row[1].get<double>(), row[2].get<double>()),
                             Vec2(row[3].get<double>(), row[4].get<double>()), row[0].get<int>(),
                             row[5].get<double>()});
      }
    }
    return r;
  });
}

std::string fundamental_to_json(const FundamentalMatrix& f) {
  json j;
  j["F"] = mat_to_json(f.matrix());
  return j.dump(2) + "\n";
}

FundamentalMatrix fundamental_from_json(const std::string& text) {
  return parse(text, "fundamental matrix",
               [](const json& j) { return FundamentalMatrix::from_matrix(mat_from_json(j.at("F"))); });
}

std::string scene_to_json(const Scene& scene) {
  const auto& s = scene.script;
  const auto& c = scene.cameras;
  json j;
  j["preset"] = s.preset;
  j["seed"] = s.seed;
  j["frames"] = s.frames;
  j["boundary_noise"] = s.boundary_noise;
  j["cameras"] = {{"K1", mat_to_json(c.K1)}, {"K2", mat_to_json(c.K2)}, {"R", mat_to_json(c.R)},
                  {"t", vec_to_json(c.t)},   {"width", c.width},        {"height", c.height}};
  json ellipsoids = json::array();
  for (const auto& e : s.ellipsoids) {
    json centers = json::array();
    json orientations = json::array();
    for (const auto& v : e.centers) centers.push_back(vec_to_json(v));
    for (const auto& m : e.orientations) orientations.push_back(mat_to_json(m));
    ellipsoids.push_back(
        {{"semi_axes", vec_to_json(e.semi_axes)}, {"centers", centers}, {"orientations", orientations}});
  }
  j["ellipsoids"] = std::move(ellipsoids);
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  return parse(text, "scene", [](const json& j) {
    Scene scene;
    auto& s = scene.script;
    s.preset = j.value("preset", std::string("custom"));
    s.seed = j.value("seed", std::uint64_t{0});
    s.frames = j.at("frames").get<int>();
    s.boundary_noise = j.value("boundary_noise", 0.0);
    if (s.frames < 1) throw Error(ErrorCode::kParse, "scene needs at least one frame");
    const auto& c = j.at("cameras");
    scene.cameras.K1 = mat_from_json(c.at("K1"));
    scene.cameras.K2 = mat_from_json(c.at("K2"));
    scene.cameras.R = mat_from_json(c.at("R"));
    scene.cameras.t = vec_from_json(c.at("t"));
    scene.cameras.width = c.at("width").get<int>();
    scene.cameras.height = c.at("height").get<int>();
    for (const auto& e : j.at("ellipsoids")) {
      EllipsoidTrack track;
      track.semi_axes = vec_from_json(e.at("semi_axes"));
      for (const auto& v : e.at("centers")) track.centers.push_back(vec_from_json(v));
      for (const auto& m : e.at("orientations")) track.orientations.push_back(mat_from_json(m));
      if (static_cast<int>(track.centers.size()) != s.frames ||
          static_cast<int>(track.orientations.size()) != s.frames) {
        throw Error(ErrorCode::kParse, "ellipsoid poses must cover every frame");
      }
      s.ellipsoids.push_back(std::move(track));
    }
    return scene;
  });
}

void write_correspondences_csv(std::ostream& out, std::span<const Correspondence> corrs) {
  out << "t,x,y,x',y'\n";
  const auto old = out.precision(17);
  for (const auto& c : corrs) {
    out << c.t << ',' << c.x.x() << ',' << c.x.y() << ',' << c.x_prime.x() << ',' << c.x_prime.y() << '\n';
  }
  out.precision(old);
}

std::vector<Correspondence> read_correspondences_csv(std::istream& in) {
  std::vector<Correspondence> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("t,", 0) == 0) continue;
    }
    std::istringstream row(line);
    Correspondence c;
    char comma = 0;
    double x, y, xp, yp;
    if (!(row >> c.t >> comma >> x >> comma >> y >> comma >> xp >> comma >> yp)) {
      throw Error(ErrorCode::kParse, "bad correspondence row '" + line + "'");
    }
    c.x = Vec2(x, y);
    c.x_prime = Vec2(xp, yp);
    out.push_back(c);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace silcal
