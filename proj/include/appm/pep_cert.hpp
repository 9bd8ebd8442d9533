#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "appm/core.hpp"
#include "appm/linalg.hpp"
#include "appm/methods.hpp"

namespace appm {

/// Step coefficients of the accelerated method:
///   h_{i,k} = -2k / (i(i+1)) for k < i,   h_{i,i} = 2i / (i+1).
inline StepCoeffs build_h(std::size_t horizon) {
  require(horizon >= 2, "horizon must be at least 2");
  StepCoeffs h(horizon);
  for (std::size_t i = 1; i < horizon; ++i) {
    const double di = static_cast<double>(i);
    for (std::size_t k = 1; k < i; ++k) h.set(i, k, -2.0 * static_cast<double>(k) / (di * (di + 1.0)));
    h.set(i, i, 2.0 * di / (di + 1.0));
  }
  return h;
}

namespace detail {

// Canonical basis vector u_i of R^{N+1}, 1-based.
inline Vector unit(std::size_t dim, std::size_t i) {
  Vector e = Vector::Zero(static_cast<Eigen::Index>(dim));
  e(static_cast<Eigen::Index>(i - 1)) = 1.0;
  return e;
}

// u (.) v = (u v^T + v u^T) / 2
inline Matrix sym_outer(const Vector& u, const Vector& v) { return 0.5 * (u * v.transpose() + v * u.transpose()); }

// sum_{l=first}^{last} sum_{k=0}^{l} h_{l+1,k+1} u_{k+1}
inline Vector step_combination(const StepCoeffs& h, std::size_t dim, std::ptrdiff_t first, std::ptrdiff_t last) {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (std::ptrdiff_t l = first; l <= last; ++l)
    for (std::ptrdiff_t k = 0; k <= l; ++k)
      s(k) += h(static_cast<std::size_t>(l + 1), static_cast<std::size_t>(k + 1));
  return s;
}

inline void check_horizon(const StepCoeffs& h, std::size_t n) {
  require(n >= 2, "N must be at least 2");
  require(h.horizon() >= n, "step coefficients do not cover N iterations");
}

}  // namespace detail

/// A_{i,j}(h) for 1 <= i < j <= N, over the basis of R^{N+1}.
inline Matrix constraint_a(const StepCoeffs& h, std::size_t n, std::size_t i, std::size_t j) {
  detail::check_horizon(h, n);
  require(1 <= i && i < j && j <= n, "A_{i,j} needs 1 <= i < j <= N");
  const std::size_t dim = n + 1;
  const Vector d = detail::unit(dim, i) - detail::unit(dim, j);
  const Vector s = detail::step_combination(h, dim, static_cast<std::ptrdiff_t>(i) - 1, static_cast<std::ptrdiff_t>(j) - 2);
  return detail::sym_outer(d, d) - detail::sym_outer(d, s);
}

/// B_i(h) for 1 <= i <= N.
inline Matrix constraint_b(const StepCoeffs& h, std::size_t n, std::size_t i) {
  detail::check_horizon(h, n);
  require(1 <= i && i <= n, "B_i needs 1 <= i <= N");
  const std::size_t dim = n + 1;
  const Vector ui = detail::unit(dim, i);
  const Vector s = detail::step_combination(h, dim, 0, static_cast<std::ptrdiff_t>(i) - 2);
  return ui * ui.transpose() - detail::sym_outer(ui, detail::unit(dim, n + 1)) + detail::sym_outer(ui, s);
}

/// C = u_{N+1} u_{N+1}^T.
inline Matrix constraint_c(std::size_t n) {
  require(n >= 1, "N must be at least 1");
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
  c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = 1.0;
  return c;
}

struct ConstraintMatrices {
  std::size_t n = 0;
  std::map<std::pair<std::size_t, std::size_t>, Matrix> a;
  std::map<std::size_t, Matrix> b;
  Matrix c;
};

/// Full constraint set (all A_{i,j}, B_i) or, with `relaxed`, only the
/// consecutive A_{i-1,i} and B_N used by the certificate.
inline ConstraintMatrices build_constraint_matrices(const StepCoeffs& h, std::size_t n, bool relaxed = false) {
  detail::check_horizon(h, n);
  ConstraintMatrices out;
  out.n = n;
  for (std::size_t j = 2; j <= n; ++j)
    for (std::size_t i = relaxed ? j - 1 : 1; i < j; ++i) out.a.emplace(std::pair{i, j}, constraint_a(h, n, i, j));
  for (std::size_t i = relaxed ? n : 1; i <= n; ++i) out.b.emplace(i, constraint_b(h, n, i));
  out.c = constraint_c(n);
  return out;
}

/// Dual multipliers a_i = 2(i-1)i/N^2 (i = 2..N), b_N = 2/N, c = 1/N^2.
struct DualMultipliers {
  std::vector<double> a;  // a[i] for i = 2..N; a[0], a[1] unused
  double b_n = 0.0;
  double c = 0.0;
};

inline DualMultipliers certificate_multipliers(std::size_t n) {
  require(n >= 2, "N must be at least 2");
  const double nn = static_cast<double>(n);
  DualMultipliers m;
  m.a.assign(n + 1, 0.0);
  for (std::size_t i = 2; i <= n; ++i) {
    const double di = static_cast<double>(i);
    m.a[i] = 2.0 * (di - 1.0) * di / (nn * nn);
  }
  m.b_n = 2.0 / nn;
  m.c = 1.0 / (nn * nn);
  return m;
}

/// S = sum_i a_i A_{i-1,i}(h) + b_N B_N(h) + c C - u_N u_N^T with the
/// accelerated step coefficients.
inline Matrix certificate_slack(std::size_t n) {
  const StepCoeffs h = build_h(n);
  const DualMultipliers m = certificate_multipliers(n);
  Matrix s = m.b_n * constraint_b(h, n, n) + m.c * constraint_c(n);
  for (std::size_t i = 2; i <= n; ++i) s += m.a[i] * constraint_a(h, n, i - 1, i);
  const Vector un = detail::unit(n + 1, n);
  s -= un * un.transpose();
  return s;
}

struct CertificateReport {
  std::size_t n = 0;
  double max_rank1_deviation = 0.0;  // max |S - r r^T|
  double min_eigenvalue = 0.0;       // of S
  double dual_value = 0.0;           // c

  bool passes() const { return max_rank1_deviation <= 1e-12 && min_eigenvalue >= -1e-10; }
};

/// Checks S == r r^T with r = u_N - u_{N+1}/N, hence S is PSD.
inline CertificateReport verify_certificate(std::size_t n) {
  const Matrix s = certificate_slack(n);
  Vector r = detail::unit(n + 1, n);
  r(static_cast<Eigen::Index>(n)) = -1.0 / static_cast<double>(n);
  CertificateReport rep;
  rep.n = n;
  rep.max_rank1_deviation = (s - r * r.transpose()).cwiseAbs().maxCoeff();
  rep.min_eigenvalue = min_symmetric_eigenvalue(s);
  rep.dual_value = certificate_multipliers(n).c;
  return rep;
}

/// Largest coordinate gap between general_ppm(build_h(N)) and
/// accelerated_ppm, over x_i and y_{i-1} for i = 1..N.
template <class Resolvent>
double equivalence_check(const Resolvent& resolvent, const Vector& x0, std::size_t n) {
  const ResidualTrace general = general_ppm(resolvent, build_h(n), x0, n);
  const ResidualTrace accel = accelerated_ppm(resolvent, x0, n);
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dev = std::max(dev, (general[i].x - accel[i].x).cwiseAbs().maxCoeff());
    dev = std::max(dev, (general[i].y_prev - accel[i].y_prev).cwiseAbs().maxCoeff());
  }
  return dev;
}

/// Gram matrix of (g_1, ..., g_N, (y_0 - x*)/R) with g_i = (y_{i-1} - x_i)/R,
/// built from the first N records of a run.
inline Matrix gram_from_trace(const ResidualTrace& trace, std::size_t n, const Vector& x_star, double radius) {
  require(n >= 1 && n <= trace.size(), "trace is shorter than N");
  require_positive(radius, "radius");
  const Eigen::Index dim = trace[0].x.size();
  Matrix g(dim, static_cast<Eigen::Index>(n + 1));
  for (std::size_t i = 0; i < n; ++i) g.col(static_cast<Eigen::Index>(i)) = (trace[i].y_prev - trace[i].x) / radius;
  g.col(static_cast<Eigen::Index>(n)) = (trace[0].y_prev - x_star) / radius;
  return g.transpose() * g;
}

/// tr(A Z) for symmetric A.
inline double trace_product(const Matrix& a, const Matrix& z) { return a.cwiseProduct(z).sum(); }

}  // namespace appm
