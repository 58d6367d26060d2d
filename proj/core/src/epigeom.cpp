#include "silcal/epigeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <Eigen/SVD>

#include "silcal/error.hpp"

namespace silcal {

namespace {

constexpr int kSampleSize = 8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Hypothesis {
  bool valid = false;
  FundamentalMatrix f;
  std::size_t count = 0;
  double error = 0.0;  // sum of inlier distances
};

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.count != b.count) return a.count > b.count;
  return a.error < b.error;
}

Hypothesis score(const FundamentalMatrix& f, std::span<const Correspondence> corrs, double threshold) {
  Hypothesis h{true, f, 0, 0.0};
  for (const auto& c : corrs) {
    const double d = symmetric_epipolar_distance(f.matrix(), c);
    if (d <= threshold) {
      ++h.count;
      h.error += d;
    }
  }
  return h;
}

std::vector<std::size_t> inlier_indices(const FundamentalMatrix& f, std::span<const Correspondence> corrs,
                                        double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (symmetric_epipolar_distance(f.matrix(), corrs[i]) <= threshold) out.push_back(i);
  }
  return out;
}

Hypothesis run_partition(std::span<const Correspondence> corrs, std::uint64_t iterations,
                         double threshold, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, corrs.size() - 1);
  Hypothesis best;
  std::array<std::size_t, kSampleSize> idx{};
  std::array<Correspondence, kSampleSize> sample;
  for (std::uint64_t it = 0; it < iterations; ++it) {
    for (int k = 0; k < kSampleSize; ++k) {
      bool fresh = false;
      while (!fresh) {
        idx[k] = pick(rng);
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) == idx.begin() + k;
      }
      sample[k] = corrs[idx[k]];
    }
    FundamentalMatrix f;
    try {
      f = eight_point(sample);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoModel) continue;
      throw;
    }
    Hypothesis h = score(f, corrs, threshold);
    if (better(h, best)) best = std::move(h);
  }
  return best;
}

}  // namespace

FundamentalMatrix FundamentalMatrix::from_matrix(const Mat3& m) {
  if (!m.allFinite() || m.norm() == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "fundamental matrix must be finite and nonzero");
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = svd.singularValues();
  s(2) = 0.0;
  Mat3 r = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  r /= r.norm();
  Eigen::Index row = 0, col = 0;
  r.cwiseAbs().maxCoeff(&row, &col);
  if (r(row, col) < 0.0) r = -r;
  FundamentalMatrix f;
  f.m_ = r;
  return f;
}

Vec3 FundamentalMatrix::left_epipole() const {
  Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullV);
  return svd.matrixV().col(2);
}

Vec3 FundamentalMatrix::right_epipole() const {
  Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullU);
  return svd.matrixU().col(2);
}

double point_line_distance(const Vec2& p, const Vec3& l) {
  const double n = std::hypot(l.x(), l.y());
  if (n == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(l.x() * p.x() + l.y() * p.y() + l.z()) / n;
}

std::pair<double, double> epipolar_distances(const Mat3& f, const Correspondence& c) {
  return {point_line_distance(c.x_prime, f * homogeneous(c.x)),
          point_line_distance(c.x, f.transpose() * homogeneous(c.x_prime))};
}

double symmetric_epipolar_distance(const Mat3& f, const Correspondence& c) {
  const auto [d1, d2] = epipolar_distances(f, c);
  return d1 * d1 + d2 * d2;
}

double symmetric_epipolar_error(const Mat3& f, std::span<const Correspondence> pts) {
  if (pts.empty()) throw Error(ErrorCode::kEmptyPointSet, "Q(F) needs at least one correspondence");
  double sum = 0.0;
  for (const auto& c : pts) sum += symmetric_epipolar_distance(f, c);
  return sum / static_cast<double>(pts.size());
}

Mat3 hartley_normalization(std::span<const Vec2> points) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double mean = 0.0;
  for (const auto& p : points) mean += (p - centroid).norm();
  mean /= static_cast<double>(points.size());
  const double s = mean > 0.0 ? std::sqrt(2.0) / mean : 1.0;
  Mat3 t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

FundamentalMatrix eight_point(std::span<const Correspondence> corrs) {
  const std::size_t n = corrs.size();
  if (n < kSampleSize) {
    throw Error(ErrorCode::kTooFewCorrespondences,
                "8-point estimate needs 8 correspondences, got " + std::to_string(n));
  }
  std::vector<Vec2> left(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    left[i] = corrs[i].x;
    right[i] = corrs[i].x_prime;
  }
  const Mat3 t1 = hartley_normalization(left);
  const Mat3 t2 = hartley_normalization(right);

  Eigen::Matrix<double, Eigen::Dynamic, 9> a(static_cast<Eigen::Index>(n), 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 x = t1 * homogeneous(left[i]);
    const Vec3 xp = t2 * homogeneous(right[i]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(static_cast<Eigen::Index>(i), 3 * r + c) = xp(r) * x(c);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 0.0) || sv(0) / sv(7) > kMaxDesignCondition) {
    throw Error(ErrorCode::kNoModel, "correspondence configuration is degenerate");
  }
  const Eigen::VectorXd v = svd.matrixV().col(8);
  Mat3 fn;
  fn << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  // Rank 2 in normalized coordinates, then back to pixels.
  fn = FundamentalMatrix::from_matrix(fn).matrix();
  return FundamentalMatrix::from_matrix(t2.transpose() * fn * t1);
}

CalibrationResult ransac_fundamental(std::span<const Correspondence> corrs, const RansacOptions& options) {
  if (corrs.size() < kSampleSize) {
    throw Error(ErrorCode::kTooFewCorrespondences,
                "RANSAC needs 8 correspondences, got " + std::to_string(corrs.size()));
  }
  const int parts = std::max(1, options.partitions);
  std::vector<Hypothesis> best(parts);
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> failures(parts);
  for (int p = 0; p < parts; ++p) {
    const std::uint64_t share = options.iterations / parts + (static_cast<std::uint64_t>(p) < options.iterations % parts ? 1 : 0);
    const std::uint64_t seed = splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(p) + 1));
    workers.emplace_back([&, p, share, seed] {
      try {
        best[p] = run_partition(corrs, share, options.inlier_threshold, seed);
      } catch (...) {
        failures[p] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  Hypothesis winner;
  for (const auto& h : best) {
    if (better(h, winner)) winner = h;  // lowest partition wins ties
  }
  if (!winner.valid) throw Error(ErrorCode::kNoModel, "every RANSAC sample was degenerate");

  CalibrationResult result;
  result.F = winner.f;
  result.inliers = inlier_indices(winner.f, corrs, options.inlier_threshold);
  if (result.inliers.size() >= kSampleSize) {
    std::vector<Correspondence> subset;
    for (auto i : result.inliers) subset.push_back(corrs[i]);
    try {
      const FundamentalMatrix refit = eight_point(subset);
      auto refit_inliers = inlier_indices(refit, corrs, options.inlier_threshold);
      if (refit_inliers.size() >= result.inliers.size()) {
        result.F = refit;
        result.inliers = std::move(refit_inliers);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoModel) throw;
    }
  }

  std::vector<Correspondence> kept;
  for (auto i : result.inliers) kept.push_back(corrs[i]);
  result.q_error = symmetric_epipolar_error(result.F, kept.empty() ? corrs : std::span<const Correspondence>(kept));
  result.iterations_used = options.iterations;
  return result;
}

std::uint64_t expected_iterations(double inlier_prob, int sample_size, double confidence) {
  if (!(inlier_prob > 0.0 && inlier_prob < 1.0)) {
    throw Error(ErrorCode::kDegenerateProbability, "inlier probability must lie in (0, 1)");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::kDegenerateProbability, "confidence must lie in (0, 1)");
  }
  if (sample_size < 1) throw Error(ErrorCode::kInvalidArgument, "sample size must be positive");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const double all_inliers = std::pow(inlier_prob, sample_size);
  if (all_inliers <= 0.0) return kMax;
  const double n = std::ceil(std::log1p(-confidence) / std::log1p(-all_inliers));
  if (!(n < 18446744073709551616.0)) return kMax;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

std::vector<InlierRow> inlier_probability_report(std::span<const Correspondence> corrs,
                                                 const FundamentalMatrix& f_gt,
                                                 std::span<const double> thresholds) {
  if (corrs.empty()) throw Error(ErrorCode::kEmptyPointSet, "no correspondences to evaluate");
  std::vector<double> d;
  d.reserve(corrs.size());
  for (const auto& c : corrs) d.push_back(symmetric_epipolar_distance(f_gt.matrix(), c));
  std::vector<InlierRow> rows;
  for (double th : thresholds) {
    const auto count = static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [&](double v) { return v <= th; }));
    rows.push_back({th, static_cast<double>(count) / static_cast<double>(corrs.size()), count});
  }
  return rows;
}

}  // namespace silcal
