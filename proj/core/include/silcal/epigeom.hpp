#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "silcal/geometry.hpp"

namespace silcal {

// Rank-2 3x3 matrix with unit Frobenius norm whose largest-magnitude entry is
// positive. x'^T F x = 0 for corresponding points.
class FundamentalMatrix {
 public:
  FundamentalMatrix() = default;

  // Projects onto rank 2 (smallest singular value zeroed) and normalizes.
  // Throws InvalidArgument for a zero or non-finite matrix.
  static FundamentalMatrix from_matrix(const Mat3& m);

  const Mat3& matrix() const noexcept { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  // Fx, the epipolar line of a left point in the right image.
  Vec3 right_line(const Vec2& x) const { return m_ * homogeneous(x); }
  // F^T x', the epipolar line of a right point in the left image.
  Vec3 left_line(const Vec2& x_prime) const { return m_.transpose() * homogeneous(x_prime); }

  // Right null vector (left epipole) and left null vector (right epipole),
  // homogeneous.
  Vec3 left_epipole() const;
  Vec3 right_epipole() const;

 private:
  Mat3 m_ = Mat3::Zero();
};

// Distance of a point to a homogeneous line; infinite for the line at infinity.
double point_line_distance(const Vec2& p, const Vec3& line);

// (d(x', Fx), d(x, F^T x')).
std::pair<double, double> epipolar_distances(const Mat3& f, const Correspondence& c);

// d(x', Fx)^2 + d(x, F^T x')^2: one correspondence's share of Q(F), in px^2.
// Also the inlier test statistic.
double symmetric_epipolar_distance(const Mat3& f, const Correspondence& c);

// Q(F): mean of d(x', Fx)^2 + d(x, F^T x')^2. Invariant to the scale of F.
// Throws EmptyPointSet.
double symmetric_epipolar_error(const Mat3& f, std::span<const Correspondence> pts);
inline double symmetric_epipolar_error(const FundamentalMatrix& f, std::span<const Correspondence> pts) {
  return symmetric_epipolar_error(f.matrix(), pts);
}

// Similarity taking points to zero centroid and mean distance sqrt(2).
Mat3 hartley_normalization(std::span<const Vec2> points);

// Samples whose normalized design matrix has sigma_1 / sigma_8 above this are
// rejected as degenerate.
inline constexpr double kMaxDesignCondition = 1e8;

// Normalized 8-point estimate from >= 8 correspondences. Throws
// TooFewCorrespondences or NoModel (ill-conditioned configuration).
FundamentalMatrix eight_point(std::span<const Correspondence> corrs);

struct RansacOptions {
  std::uint64_t iterations = 2000;
  double inlier_threshold = 1.0;  // on symmetric_epipolar_distance
  std::uint64_t seed = 0;
  int partitions = 4;             // iteration budget split, one seed each
};

struct CalibrationResult {
  FundamentalMatrix F;
  std::vector<std::size_t> inliers;  // ascending indices into the input
  double q_error = 0.0;              // Q(F) over the inliers
  std::uint64_t iterations_used = 0;
};

// Deterministic for a given seed and partition count. Throws
// TooFewCorrespondences or NoModel.
CalibrationResult ransac_fundamental(std::span<const Correspondence> corrs,
                                     const RansacOptions& options = {});

// Residual vector [d_1(F), d'_1(F), d_2(F), ...] (signed point-to-line
// distances, two per correspondence); Q(F) = |r|^2 / N.
Eigen::VectorXd epipolar_residuals(const Mat3& f, std::span<const Correspondence> pts);
// d r / d vec(F), 2N x 9, F entries in row-major order.
Eigen::MatrixXd epipolar_jacobian(const Mat3& f, std::span<const Correspondence> pts);

struct LmResult {
  FundamentalMatrix F;
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;  // Q after the start and after each accepted step
};

// Levenberg-Marquardt on Q(F) over the nine entries of F, rank-2 projection
// and unit norm after every step. A step is kept only if it lowers Q, so the
// result never scores worse than f0. Throws TooFewCorrespondences.
LmResult lm_refine(const FundamentalMatrix& f0, std::span<const Correspondence> inliers, int max_iter = 50);

// ceil(log(1 - confidence) / log(1 - p^s)), saturating at UINT64_MAX.
// Throws DegenerateProbability unless 0 < p < 1 and 0 < confidence < 1.
std::uint64_t expected_iterations(double inlier_prob, int sample_size, double confidence);

struct InlierRow {
  double threshold = 0.0;
  double fraction = 0.0;
  std::size_t count = 0;
};

// Fraction of correspondences with symmetric_epipolar_distance <= threshold
// under f_gt, per threshold. Throws EmptyPointSet.
std::vector<InlierRow> inlier_probability_report(std::span<const Correspondence> corrs,
                                                 const FundamentalMatrix& f_gt,
                                                 std::span<const double> thresholds);

}  // namespace silcal
