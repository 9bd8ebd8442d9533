#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>

#include "appm/core.hpp"
#include "appm/linalg.hpp"

namespace appm {

/// Soft_tau(z) = max(|z| - tau, 0) * sign(z), elementwise.
inline Vector soft_threshold(const Vector& z, double tau) {
  require(tau >= 0.0, "soft-threshold level must be nonnegative");
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z(i)) - tau;
    out(i) = mag > 0.0 ? std::copysign(mag, z(i)) : 0.0;
  }
  return out;
}

struct L1Term {
  double weight;  // gamma |x|_1
};
struct QuadraticTerm {
  Matrix h;  // 1/2 |H x - b|^2
  Vector b;
};
struct LinearTerm {
  Vector a;  // a'x
};
struct ZeroTerm {};

/// A closed convex function simple enough for the splitting methods here.
class ProxDescriptor {
 public:
  using Kind = std::variant<ZeroTerm, L1Term, QuadraticTerm, LinearTerm>;

  static ProxDescriptor zero(Eigen::Index dim) { return ProxDescriptor(ZeroTerm{}, dim); }
  static ProxDescriptor l1(Eigen::Index dim, double weight) {
    require(weight >= 0.0 && std::isfinite(weight), "l1 weight must be nonnegative");
    return ProxDescriptor(L1Term{weight}, dim);
  }
  static ProxDescriptor quadratic(Matrix h, Vector b) {
    require(h.rows() == b.size(), "quadratic term: H and b disagree");
    require_finite(h, "H");
    require_finite(b, "b");
    const Eigen::Index dim = h.cols();
    return ProxDescriptor(QuadraticTerm{std::move(h), std::move(b)}, dim);
  }
  static ProxDescriptor linear(Vector a) {
    require_finite(a, "a");
    const Eigen::Index dim = a.size();
    return ProxDescriptor(LinearTerm{std::move(a)}, dim);
  }

  const Kind& kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }

  double value(const Vector& x) const {
    return std::visit(
        [&](const auto& t) -> double {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ZeroTerm>) return 0.0;
          else if constexpr (std::is_same_v<T, L1Term>) return t.weight * x.lpNorm<1>();
          else if constexpr (std::is_same_v<T, QuadraticTerm>) return 0.5 * (t.h * x - t.b).squaredNorm();
          else return t.a.dot(x);
        },
        kind_);
  }

 private:
  ProxDescriptor(Kind kind, Eigen::Index dim) : kind_(std::move(kind)), dim_(dim) {
    require(dim >= 1, "dimension must be positive");
  }

  Kind kind_;
  Eigen::Index dim_;
};

struct InnerSolverConfig {
  double tol = 1e-10;  // on the prox-gradient mapping norm, relative to max(1, |lin|)
  std::size_t max_iters = 5000;
};

/// 1/2 x'Qx + q'x with known strong convexity m and smoothness L.
struct SmoothQuadratic {
  Matrix q_mat;
  Vector q_vec;
  double strong_convexity;
  double lipschitz;
};

struct FistaResult {
  Vector x;
  std::size_t iterations = 0;
  double mapping_norm = 0.0;
};

/// Norm of the prox-gradient mapping L (x - prox_{gamma/L}(x - grad/L)).
inline double prox_gradient_mapping_norm(const SmoothQuadratic& f, double gamma, const Vector& x) {
  const Vector grad = f.q_mat * x + f.q_vec;
  return f.lipschitz * (x - soft_threshold(x - grad / f.lipschitz, gamma / f.lipschitz)).norm();
}

/// Strongly convex FISTA for 1/2 x'Qx + q'x + gamma |x|_1: step 1/L and constant
/// momentum (sqrt L - sqrt m) / (sqrt L + sqrt m). Throws InnerSolverError
/// carrying the best mapping norm seen if `max_iters` is reached.
inline FistaResult fista_strongly_convex(const SmoothQuadratic& f, double gamma, const Vector& x_init, double tol,
                                         std::size_t max_iters) {
  require(f.strong_convexity > 0.0, "strong convexity must be positive");
  require(f.lipschitz >= f.strong_convexity, "Lipschitz constant must be at least the strong convexity");
  require_positive(tol, "tol");
  require(gamma >= 0.0, "l1 weight must be nonnegative");
  require(x_init.size() == f.q_vec.size() && f.q_mat.rows() == f.q_vec.size(), "FISTA dimensions disagree");

  const double sl = std::sqrt(f.lipschitz);
  const double sm = std::sqrt(f.strong_convexity);
  const double beta = (sl - sm) / (sl + sm);
  const double step = 1.0 / f.lipschitz;

  Vector x = x_init, x_prev = x_init;
  double best = prox_gradient_mapping_norm(f, gamma, x);
  if (best <= tol) return {x, 0, best};

  for (std::size_t it = 1; it <= max_iters; ++it) {
    const Vector y = x + beta * (x - x_prev);
    Vector x_next = soft_threshold(y - step * (f.q_mat * y + f.q_vec), gamma * step);
    x_prev = std::move(x);
    x = std::move(x_next);
    // The mapping at y bounds progress cheaply; confirm at x only when it is small.
    if (f.lipschitz * (y - x).norm() <= tol) {
      const double g = prox_gradient_mapping_norm(f, gamma, x);
      best = std::min(best, g);
      if (g <= tol) return {x, it, g};
    }
  }
  best = std::min(best, prox_gradient_mapping_norm(f, gamma, x));
  throw InnerSolverError("FISTA reached " + std::to_string(max_iters) + " iterations; mapping norm " +
                             std::to_string(best),
                         best);
}

/// argmin_w phi(w) + 1/2 w'Qw + lin'w for a fixed symmetric PSD Q and
/// varying `lin`. Factorizations and spectral bounds are computed once. The
/// inner FISTA tolerance is relative to max(1, |lin|).
class QuadraticSubproblem {
 public:
  QuadraticSubproblem(ProxDescriptor phi, Matrix q, InnerSolverConfig config = {})
      : phi_(std::move(phi)), q_(std::move(q)), config_(config) {
    require_square(q_, "subproblem quadratic");
    require(q_.rows() == phi_.dim(), "subproblem dimensions disagree");
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, L1Term>) {
            gamma_ = t.weight;
            if (is_scalar_identity()) {
              mode_ = Mode::shrink;
              alpha_ = q_(0, 0);
            } else {
              mode_ = Mode::fista;
              const auto eig = symmetric_eigenvalues(q_);
              m_ = eig.front();
              l_ = eig.back();
              require(m_ > 0.0, "l1 subproblem needs a strongly convex quadratic part");
            }
          } else if constexpr (std::is_same_v<T, QuadraticTerm>) {
            shift_ = t.h.transpose() * t.b;
            lu_ = DenseLu(q_ + t.h.transpose() * t.h);
          } else if constexpr (std::is_same_v<T, LinearTerm>) {
            shift_ = -t.a;
            lu_ = DenseLu(q_);
          } else {
            shift_ = Vector::Zero(q_.rows());
            lu_ = DenseLu(q_);
          }
        },
        phi_.kind());
  }

  Vector solve(const Vector& lin, const Vector& warm_start) const {
    require(lin.size() == q_.rows(), "subproblem linear term has the wrong dimension");
    switch (mode_) {
      case Mode::shrink:
        return soft_threshold(-lin / alpha_, gamma_ / alpha_);
      case Mode::fista: {
        const double tol = config_.tol * std::max(1.0, lin.norm());
        return fista_strongly_convex({q_, lin, m_, l_}, gamma_, warm_start, tol, config_.max_iters).x;
      }
      case Mode::linear:
        break;
    }
    return lu_.solve(shift_ - lin);
  }

  const ProxDescriptor& phi() const { return phi_; }

 private:
  enum class Mode { linear, shrink, fista };

  bool is_scalar_identity() const {
    const double a = q_(0, 0);
    if (!(a > 0.0)) return false;
    for (Eigen::Index i = 0; i < q_.rows(); ++i)
      for (Eigen::Index j = 0; j < q_.cols(); ++j)
        if (q_(i, j) != (i == j ? a : 0.0)) return false;
    return true;
  }

  ProxDescriptor phi_;
  Matrix q_;
  InnerSolverConfig config_;
  Mode mode_ = Mode::linear;
  DenseLu lu_;
  Vector shift_;
  double gamma_ = 0.0;
  double alpha_ = 0.0;
  double m_ = 0.0;
  double l_ = 0.0;
};

/// prox_{t phi}(z) = argmin phi(x) + |x - z|^2 / (2t), with any
/// factorization cached for the fixed step t.
class Prox {
 public:
  Prox(ProxDescriptor phi, double step) : step_(step), sub_(make(std::move(phi), step)) {}

  Vector operator()(const Vector& z) const { return sub_.solve(-z / step_, z); }

 private:
  static QuadraticSubproblem make(ProxDescriptor phi, double step) {
    require_positive(step, "prox step");
    const Eigen::Index d = phi.dim();
    return QuadraticSubproblem(std::move(phi), Matrix::Identity(d, d) / step);
  }

  double step_;
  QuadraticSubproblem sub_;
};

}  // namespace appm
