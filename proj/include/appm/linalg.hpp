#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "appm/core.hpp"

namespace appm {

/// Pivots whose magnitude falls below this fraction of the largest matrix
/// entry (floored at 1) make the factorization report a singular system.
inline constexpr double kSingularPivot = 1e-14;

/// Dense LU factorization with partial pivoting, computed once and reused
/// for every right-hand side.
class DenseLu {
 public:
  DenseLu() = default;

  explicit DenseLu(const Matrix& a) {
    require_square(a, "matrix");
    require_finite(a, "matrix");
    lu_.compute(a);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double pivot = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot >= kSingularPivot * scale))
      throw SingularSystemError("singular system: smallest LU pivot " + std::to_string(pivot));
  }

  Eigen::Index size() const { return lu_.rows(); }

  Vector solve(const Vector& rhs) const {
    if (rhs.size() != lu_.rows()) throw ValidationError("right-hand side has the wrong dimension");
    return lu_.solve(rhs);
  }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
};

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `tol` times the Frobenius norm of the input.
inline std::vector<double> symmetric_eigenvalues(Matrix a, double tol = 1e-12, int max_sweeps = 100) {
  require_square(a, "symmetric matrix");
  require_finite(a, "symmetric matrix");
  const Eigen::Index n = a.rows();
  const double scale = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = 0; q < n; ++q)
        if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && off_norm() > tol * scale; ++sweep) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline double min_symmetric_eigenvalue(const Matrix& a) { return symmetric_eigenvalues(a).front(); }

/// Largest singular value by power iteration on K^T K.
inline double spectral_norm(const Matrix& k, double rel_tol = 1e-10, int max_iters = 1000) {
  require_finite(k, "K");
  if (k.size() == 0) return 0.0;
  Vector v(k.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + static_cast<double>(i) / static_cast<double>(v.size());
  v.normalize();
  double sigma2 = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = k.transpose() * (k * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    const bool done = std::abs(next - sigma2) <= rel_tol * next;
    sigma2 = next;
    if (done) break;
  }
  return std::sqrt(sigma2);
}

}  // namespace appm
