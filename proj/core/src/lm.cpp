#include <cmath>

#include <Eigen/Cholesky>

#include "silcal/epigeom.hpp"
#include "silcal/error.hpp"

namespace silcal {

Eigen::VectorXd epipolar_residuals(const Mat3& f, std::span<const Correspondence> pts) {
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 x = homogeneous(pts[i].x);
    const Vec3 xp = homogeneous(pts[i].x_prime);
    const Vec3 l = f * x;
    const Vec3 lp = f.transpose() * xp;
    const double e = xp.dot(l);
    r(2 * i) = e / std::hypot(l.x(), l.y());
    r(2 * i + 1) = e / std::hypot(lp.x(), lp.y());
  }
  return r;
}

Eigen::MatrixXd epipolar_jacobian(const Mat3& f, std::span<const Correspondence> pts) {
  Eigen::MatrixXd j(2 * static_cast<Eigen::Index>(pts.size()), 9);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 x = homogeneous(pts[i].x);
    const Vec3 xp = homogeneous(pts[i].x_prime);
    const Vec3 l = f * x;
    const Vec3 lp = f.transpose() * xp;
    const double e = xp.dot(l);
    const double n1 = std::hypot(l.x(), l.y());
    const double n2 = std::hypot(lp.x(), lp.y());
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double de = xp(a) * x(b);
        const double dn1 = a < 2 ? l(a) * x(b) / n1 : 0.0;
        const double dn2 = b < 2 ? lp(b) * xp(a) / n2 : 0.0;
        j(2 * i, 3 * a + b) = de / n1 - e * dn1 / (n1 * n1);
        j(2 * i + 1, 3 * a + b) = de / n2 - e * dn2 / (n2 * n2);
      }
    }
  }
  return j;
}

LmResult lm_refine(const FundamentalMatrix& f0, std::span<const Correspondence> inliers, int max_iter) {
  if (inliers.size() < 8) {
    throw Error(ErrorCode::kTooFewCorrespondences,
                "refinement needs 8 inliers, got " + std::to_string(inliers.size()));
  }
  // Work on the entries of F in Hartley-normalized coordinates, where they
  // share one scale; residuals stay in pixels.
  std::vector<Vec2> left, right;
  for (const auto& c : inliers) {
    left.push_back(c.x);
    right.push_back(c.x_prime);
  }
  const Mat3 t1 = hartley_normalization(left);
  const Mat3 t2 = hartley_normalization(right);
  const Mat3 t1_inv = t1.inverse();
  const Mat3 t2_inv = t2.inverse();

  // dF / dG for F = T2^T G T1, vectorized row-major.
  Eigen::Matrix<double, 9, 9> chain;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Mat3 unit = Mat3::Zero();
      unit(a, b) = 1.0;
      const Mat3 df = t2.transpose() * unit * t1;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) chain(3 * r + c, 3 * a + b) = df(r, c);
      }
    }
  }

  LmResult out;
  out.F = f0;
  double q = symmetric_epipolar_error(f0, inliers);
  out.history.push_back(q);
  Mat3 g = t2_inv.transpose() * f0.matrix() * t1_inv;
  g /= g.norm();

  double lambda = 1e-3;
  const double n = static_cast<double>(inliers.size());
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Mat3 f = t2.transpose() * g * t1;
    const Eigen::VectorXd r = epipolar_residuals(f, inliers);
    const Eigen::MatrixXd j = epipolar_jacobian(f, inliers) * chain;
    const Eigen::Matrix<double, 9, 9> jtj = j.transpose() * j;
    const Eigen::Matrix<double, 9, 1> grad = j.transpose() * r;
    if (q == 0.0 || grad.norm() <= 1e-14 * (1.0 + r.norm())) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    while (lambda < 1e16) {
      Eigen::Matrix<double, 9, 9> a = jtj;
      for (int k = 0; k < 9; ++k) a(k, k) += lambda * (jtj(k, k) + 1e-12);
      const Eigen::Matrix<double, 9, 1> delta = a.ldlt().solve(-grad);
      Mat3 step;
      step << delta(0), delta(1), delta(2), delta(3), delta(4), delta(5), delta(6), delta(7), delta(8);
      Mat3 trial = g + step;
      if (!trial.allFinite() || trial.norm() == 0.0) {
        lambda *= 10.0;
        continue;
      }
      trial = FundamentalMatrix::from_matrix(trial).matrix();
      const FundamentalMatrix candidate = FundamentalMatrix::from_matrix(t2.transpose() * trial * t1);
      const double q_new = symmetric_epipolar_error(candidate, inliers);
      if (q_new < q) {
        const double gain = q - q_new;
        g = trial;
        q = q_new;
        out.F = candidate;
        out.history.push_back(q);
        lambda = std::max(lambda / 10.0, 1e-12);
        stepped = true;
        if (gain <= 1e-12 * q || q * n < 1e-24) out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No descent direction left at any damping: a local minimum.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  return out;
}

}  // namespace silcal
