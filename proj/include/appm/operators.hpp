#pragma once

#include <utility>

#include "appm/core.hpp"
#include "appm/linalg.hpp"

namespace appm {

inline constexpr double kMonotoneTol = 1e-10;

struct MonotonicityReport {
  bool monotone = false;
  double min_eigenvalue = 0.0;  // of the symmetric part (M + M^T)/2
};

/// M is mu-strongly monotone (plain monotone for mu = 0) iff the symmetric
/// part of M dominates mu * I.
inline MonotonicityReport check_monotone(const Matrix& m, double mu = 0.0) {
  require_square(m, "operator");
  require(mu >= 0.0, "mu must be nonnegative");
  const Matrix sym = 0.5 * (m + m.transpose());
  const double lo = min_symmetric_eigenvalue(sym);
  return {lo >= mu - kMonotoneTol, lo};
}

/// Resolvent J_{lambda M} of the affine operator x -> M x + offset.
/// (I + lambda M) is factored once at construction.
class LinearResolvent {
 public:
  LinearResolvent(Matrix m, double lambda, Vector offset = Vector())
      : m_(std::move(m)), offset_(std::move(offset)), lambda_(lambda) {
    require_square(m_, "operator");
    require_positive(lambda_, "lambda");
    if (offset_.size() == 0) offset_ = Vector::Zero(m_.rows());
    require(offset_.size() == m_.rows(), "offset dimension does not match the operator");
    require_finite(offset_, "offset");
    lu_ = DenseLu(Matrix::Identity(m_.rows(), m_.cols()) + lambda_ * m_);
  }

  Vector operator()(const Vector& y) const {
    require(y.size() == m_.rows(), "point dimension does not match the operator");
    return lu_.solve(y - lambda_ * offset_);
  }

  /// Evaluates the (single-valued) operator itself.
  Vector apply(const Vector& x) const { return m_ * x + offset_; }

  double lambda() const { return lambda_; }
  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& op() const { return m_; }
  const Vector& offset() const { return offset_; }

 private:
  Matrix m_;
  Vector offset_;
  double lambda_;
  DenseLu lu_;
};

inline Vector resolvent_linear(const Matrix& m, double lambda, const Vector& y) {
  return LinearResolvent(m, lambda)(y);
}

/// Symmetric positive definite metric P of a preconditioned proximal step.
class Preconditioner {
 public:
  explicit Preconditioner(Matrix p) : p_(std::move(p)) {
    require_square(p_, "preconditioner");
    require_finite(p_, "preconditioner");
    require((p_ - p_.transpose()).cwiseAbs().maxCoeff() <= 1e-12, "preconditioner must be symmetric");
    min_eig_ = min_symmetric_eigenvalue(0.5 * (p_ + p_.transpose()));
    require(min_eig_ > 0.0, "preconditioner must be positive definite");
  }

  const Matrix& matrix() const { return p_; }
  double min_eigenvalue() const { return min_eig_; }

  /// <P d, d>
  double weighted_norm2(const Vector& d) const { return d.dot(p_ * d); }

 private:
  Matrix p_;
  double min_eig_ = 0.0;
};

/// x = (P + lambda M)^{-1} (P y - lambda offset), i.e. the resolvent of
/// lambda M in the metric <P., .>.
class PreconditionedResolvent {
 public:
  PreconditionedResolvent(Matrix m, Preconditioner p, double lambda, Vector offset = Vector())
      : m_(std::move(m)), p_(std::move(p)), offset_(std::move(offset)), lambda_(lambda) {
    require_square(m_, "operator");
    require_positive(lambda_, "lambda");
    require(p_.matrix().rows() == m_.rows(), "preconditioner dimension does not match the operator");
    if (offset_.size() == 0) offset_ = Vector::Zero(m_.rows());
    require(offset_.size() == m_.rows(), "offset dimension does not match the operator");
    lu_ = DenseLu(p_.matrix() + lambda_ * m_);
  }

  Vector operator()(const Vector& y) const {
    require(y.size() == m_.rows(), "point dimension does not match the operator");
    return lu_.solve(p_.matrix() * y - lambda_ * offset_);
  }

  const Preconditioner& metric() const { return p_; }

 private:
  Matrix m_;
  Preconditioner p_;
  Vector offset_;
  double lambda_;
  DenseLu lu_;
};

inline Vector preconditioned_resolvent(const Matrix& m, const Matrix& p, double lambda, const Vector& y) {
  return PreconditionedResolvent(m, Preconditioner(p), lambda)(y);
}

/// phi(u, v) = 1/2 u'Q_uu u + a'u + v'K u - 1/2 v'Q_vv v - b'v,
/// convex in u and concave in v.
struct QuadraticSaddle {
  Matrix q_uu;
  Matrix k;  // d2 x d1
  Matrix q_vv;
  Vector a;
  Vector b;

  Eigen::Index dim_u() const { return q_uu.rows(); }
  Eigen::Index dim_v() const { return q_vv.rows(); }

  static QuadraticSaddle zero(Eigen::Index d1, Eigen::Index d2) {
    return {Matrix::Zero(d1, d1), Matrix::Zero(d2, d1), Matrix::Zero(d2, d2), Vector::Zero(d1), Vector::Zero(d2)};
  }

  void validate() const {
    require_square(q_uu, "Q_uu");
    require_square(q_vv, "Q_vv");
    require(k.rows() == dim_v() && k.cols() == dim_u(), "K must be d2 x d1");
    require(a.size() == dim_u() && b.size() == dim_v(), "linear terms have the wrong dimension");
    require_finite(k, "K");
    require_finite(a, "a");
    require_finite(b, "b");
    for (const Matrix* q : {&q_uu, &q_vv}) {
      require((*q - q->transpose()).cwiseAbs().maxCoeff() <= 1e-12, "quadratic blocks must be symmetric");
      require(min_symmetric_eigenvalue(*q) >= -kMonotoneTol, "quadratic blocks must be positive semidefinite");
    }
  }

  double value(const Vector& u, const Vector& v) const {
    return 0.5 * u.dot(q_uu * u) + a.dot(u) + v.dot(k * u) - 0.5 * v.dot(q_vv * v) - b.dot(v);
  }

  /// Linear part of the saddle subdifferential (d_u phi, -d_v phi):
  /// [[Q_uu, K^T], [-K, Q_vv]].
  Matrix saddle_matrix() const {
    Matrix m(dim_u() + dim_v(), dim_u() + dim_v());
    m << q_uu, k.transpose(), -k, q_vv;
    return m;
  }

  /// Constant part of the saddle subdifferential, (a, b).
  Vector saddle_offset() const { return stack(a, b); }

  /// Zero of the saddle subdifferential; requires it to be unique.
  std::pair<Vector, Vector> saddle_point() const {
    const Vector x = DenseLu(saddle_matrix()).solve(-saddle_offset());
    return {x.head(dim_u()), x.tail(dim_v())};
  }

  /// phi(u, v*) - phi(u*, v); nonnegative at any (u, v) when (u*, v*) is a saddle.
  double gap(const Vector& u, const Vector& v, const Vector& u_star, const Vector& v_star) const {
    return value(u, v_star) - value(u_star, v);
  }
};

/// Regularized saddle step
///   argmin_u max_v phi(u,v) + |u - u_hat|^2/(2 lambda) - |v - v_hat|^2/(2 lambda),
/// solved from its block optimality system
///   (I/lambda + Q_uu) u + K^T v = u_hat/lambda - a
///   -K u + (I/lambda + Q_vv) v  = v_hat/lambda - b.
class SaddleResolvent {
 public:
  SaddleResolvent(QuadraticSaddle phi, double lambda) : phi_(std::move(phi)), lambda_(lambda) {
    require_positive(lambda_, "lambda");
    phi_.validate();
    const Eigen::Index d1 = phi_.dim_u();
    const Eigen::Index d2 = phi_.dim_v();
    Matrix sys(d1 + d2, d1 + d2);
    sys.topLeftCorner(d1, d1) = Matrix::Identity(d1, d1) / lambda_ + phi_.q_uu;
    sys.topRightCorner(d1, d2) = phi_.k.transpose();
    sys.bottomLeftCorner(d2, d1) = -phi_.k;
    sys.bottomRightCorner(d2, d2) = Matrix::Identity(d2, d2) / lambda_ + phi_.q_vv;
    try {
      lu_ = DenseLu(sys);
    } catch (const SingularSystemError& e) {
      throw std::logic_error(std::string("saddle system unexpectedly singular: ") + e.what());
    }
  }

  std::pair<Vector, Vector> operator()(const Vector& u_hat, const Vector& v_hat) const {
    require(u_hat.size() == phi_.dim_u() && v_hat.size() == phi_.dim_v(), "saddle point has the wrong dimension");
    const Vector rhs = stack(u_hat / lambda_ - phi_.a, v_hat / lambda_ - phi_.b);
    const Vector x = lu_.solve(rhs);
    return {x.head(phi_.dim_u()), x.tail(phi_.dim_v())};
  }

  /// Same map on the stacked point (u, v).
  Vector operator()(const Vector& x) const {
    require(x.size() == phi_.dim_u() + phi_.dim_v(), "saddle point has the wrong dimension");
    auto [u, v] = (*this)(Vector(x.head(phi_.dim_u())), Vector(x.tail(phi_.dim_v())));
    return stack(u, v);
  }

  const QuadraticSaddle& phi() const { return phi_; }
  double lambda() const { return lambda_; }

 private:
  QuadraticSaddle phi_;
  double lambda_;
  DenseLu lu_;
};

inline std::pair<Vector, Vector> saddle_resolvent(const QuadraticSaddle& phi, double lambda, const Vector& u_hat,
                                                  const Vector& v_hat) {
  return SaddleResolvent(phi, lambda)(u_hat, v_hat);
}

/// Yosida approximation M_lambda(y) = (y - J_{lambda M}(y)) / lambda, given
/// the resolvent J_{lambda M}.
template <class Resolvent>
Vector yosida_apply(const Resolvent& resolvent, double lambda, const Vector& y) {
  require_positive(lambda, "lambda");
  return (y - resolvent(y)) / lambda;
}

/// The Yosida approximation as a lambda-cocoercive single-valued operator.
template <class Resolvent>
class Yosida {
 public:
  Yosida(Resolvent resolvent, double lambda) : resolvent_(std::move(resolvent)), lambda_(lambda) {
    require_positive(lambda_, "lambda");
  }
  Vector operator()(const Vector& y) const { return yosida_apply(resolvent_, lambda_, y); }
  double lambda() const { return lambda_; }

 private:
  Resolvent resolvent_;
  double lambda_;
};

}  // namespace appm
