#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "appm/core.hpp"
#include "appm/linalg.hpp"
#include "appm/methods.hpp"
#include "appm/operators.hpp"
#include "appm/prox.hpp"

namespace appm {

/// One iteration of a splitting method. For the saddle-type methods (u, v)
/// is x_i = (u_i, v_i). For ADMM, u = x_{i+1}, v = z_i, and the dual fields
/// hold nu_hat_i, eta_hat_{i-1} and the Douglas-Rachford variables
/// nu_i, eta_{i-1} they encode.
struct SplittingRecord {
  std::size_t iteration = 0;
  Vector u;
  Vector v;
  Vector nu_hat;
  Vector eta_hat_prev;
  Vector nu;
  Vector eta_prev;
  double residual = 0.0;
  std::optional<double> infeasibility;
  std::optional<double> gap;
  std::optional<double> bound;
  bool restart = false;
};

struct SplittingTrace {
  std::vector<SplittingRecord> records;

  std::size_t size() const { return records.size(); }
  const SplittingRecord& operator[](std::size_t i) const { return records[i]; }
  std::vector<double> residuals() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.residual);
    return out;
  }
};

/// Bound column for an un-restarted run of the given momentum, if one exists.
inline std::optional<double> residual_bound(Momentum momentum, RestartPolicy restart, std::size_t i,
                                            std::optional<double> radius) {
  if (!radius || restart.interval > 0 || restart.adaptive) return std::nullopt;
  if (momentum == Momentum::none) return ppm_bound(i, *radius);
  if (momentum == Momentum::proposed) return accelerated_bound(i, *radius);
  return std::nullopt;
}

inline Momentum momentum_of(bool accelerate) { return accelerate ? Momentum::proposed : Momentum::none; }

namespace detail {

using GapFn = std::function<double(const Vector&, const Vector&)>;

inline SplittingTrace split_trace(const ResidualTrace& trace, Eigen::Index d1, Momentum momentum,
                                  RestartPolicy restart, std::optional<double> radius, const GapFn& gap) {
  SplittingTrace out;
  out.records.reserve(trace.size());
  for (const auto& r : trace.records) {
    SplittingRecord s;
    s.iteration = r.iteration;
    s.u = r.x.head(d1);
    s.v = r.x.tail(r.x.size() - d1);
    s.residual = r.residual;
    s.restart = r.restart;
    s.bound = residual_bound(momentum, restart, r.iteration, radius);
    if (gap) s.gap = gap(s.u, s.v);
    out.records.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

struct SaddlePoint {
  Vector u;
  Vector v;
};

/// Proximal point iterations on the saddle subdifferential of a quadratic
/// convex-concave phi. With a known saddle point the trace carries the gap
/// phi(u_i, v*) - phi(u*, v_i) and, when un-restarted, the residual bound.
inline SplittingTrace accelerated_saddle_ppm(const QuadraticSaddle& phi, double lambda, const Vector& u0,
                                             const Vector& v0, std::size_t iters, Momentum momentum,
                                             RestartPolicy restart = {},
                                             const std::optional<SaddlePoint>& saddle = std::nullopt) {
  require(iters >= 1, "iters must be at least 1");
  const SaddleResolvent step(phi, lambda);
  const Vector x0 = stack(u0, v0);
  const ResidualTrace trace = iterate(step, x0, iters, momentum, restart);

  std::optional<double> radius;
  detail::GapFn gap;
  if (saddle) {
    radius = std::sqrt((u0 - saddle->u).squaredNorm() + (v0 - saddle->v).squaredNorm());
    gap = [&phi, s = *saddle](const Vector& u, const Vector& v) { return phi.gap(u, v, s.u, s.v); };
  }
  return detail::split_trace(trace, phi.dim_u(), momentum, restart, radius, gap);
}

inline SplittingTrace accelerated_saddle_ppm(const QuadraticSaddle& phi, double lambda, const Vector& u0,
                                             const Vector& v0, std::size_t iters, bool accelerate,
                                             const std::optional<SaddlePoint>& saddle = std::nullopt) {
  return accelerated_saddle_ppm(phi, lambda, u0, v0, iters, momentum_of(accelerate), {}, saddle);
}

/// One step of the proximal method of multipliers for min f(u) s.t. Au = b:
///   u+ = argmin f(u) + <v_hat, Au - b> + lambda/2 |Au - b|^2 + |u - u_hat|^2/(2 lambda)
///   v+ = v_hat + lambda (A u+ - b)
class ProxMultipliersStep {
 public:
  ProxMultipliersStep(const ProxDescriptor& f, Matrix a, Vector b, double lambda, InnerSolverConfig inner = {})
      : a_(std::move(a)), b_(std::move(b)), lambda_(lambda), sub_(make(f, a_, lambda, inner)) {
    require(b_.size() == a_.rows(), "A and b disagree");
  }

  Vector operator()(const Vector& y) const {
    const Eigen::Index d1 = a_.cols();
    require(y.size() == d1 + a_.rows(), "point has the wrong dimension");
    const Vector u_hat = y.head(d1);
    const Vector v_hat = y.tail(a_.rows());
    const Vector lin = a_.transpose() * (v_hat - lambda_ * b_) - u_hat / lambda_;
    const Vector u = sub_.solve(lin, u_hat);
    const Vector v = v_hat + lambda_ * (a_ * u - b_);
    return stack(u, v);
  }

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  static QuadraticSubproblem make(const ProxDescriptor& f, const Matrix& a, double lambda, InnerSolverConfig inner) {
    require_positive(lambda, "lambda");
    require(f.dim() == a.cols(), "f and A disagree");
    Matrix q = lambda * (a.transpose() * a);
    q.diagonal().array() += 1.0 / lambda;
    return QuadraticSubproblem(f, std::move(q), inner);
  }

  Matrix a_;
  Vector b_;
  double lambda_;
  QuadraticSubproblem sub_;
};

/// Proximal method of multipliers with the chosen momentum. The gap column,
/// given a primal-dual solution, is L(u_i, v*) - L(u*, v_i) for
/// L(u, v) = f(u) + <v, Au - b>.
inline SplittingTrace accelerated_prox_multipliers(const ProxDescriptor& f, const Matrix& a, const Vector& b,
                                                   double lambda, const Vector& u0, const Vector& v0,
                                                   std::size_t iters, InnerSolverConfig inner, Momentum momentum,
                                                   RestartPolicy restart = {},
                                                   std::optional<double> radius = std::nullopt,
                                                   const std::optional<SaddlePoint>& solution = std::nullopt) {
  require(iters >= 1, "iters must be at least 1");
  const ProxMultipliersStep step(f, a, b, lambda, inner);
  const ResidualTrace trace = iterate(step, stack(u0, v0), iters, momentum, restart);
  detail::GapFn gap;
  if (solution) {
    gap = [&](const Vector& u, const Vector& v) {
      const double at_u = f.value(u) + solution->v.dot(a * u - b);
      const double at_v = f.value(solution->u) + v.dot(a * solution->u - b);
      return at_u - at_v;
    };
  }
  return detail::split_trace(trace, a.cols(), momentum, restart, radius, gap);
}

inline SplittingTrace accelerated_prox_multipliers(const ProxDescriptor& f, const Matrix& a, const Vector& b,
                                                   double lambda, const Vector& u0, const Vector& v0,
                                                   std::size_t iters, InnerSolverConfig inner, bool accelerate) {
  return accelerated_prox_multipliers(f, a, b, lambda, u0, v0, iters, inner, momentum_of(accelerate));
}

/// P = [[I/tau, -K^T], [-K, I/sigma]]
inline Matrix pdhg_preconditioner(const Matrix& k, double tau, double sigma) {
  const Eigen::Index d1 = k.cols(), d2 = k.rows();
  Matrix p(d1 + d2, d1 + d2);
  p << Matrix::Identity(d1, d1) / tau, -k.transpose(), -k, Matrix::Identity(d2, d2) / sigma;
  return p;
}

/// <P d, d> without forming P.
class PdhgMetric {
 public:
  PdhgMetric(const Matrix& k, double tau, double sigma) : k_(&k), tau_(tau), sigma_(sigma) {}
  double operator()(const Vector& d) const {
    const Eigen::Index d1 = k_->cols();
    const auto du = d.head(d1);
    const auto dv = d.tail(k_->rows());
    return du.squaredNorm() / tau_ + dv.squaredNorm() / sigma_ - 2.0 * dv.dot(*k_ * du);
  }

 private:
  const Matrix* k_;
  double tau_;
  double sigma_;
};

/// One primal-dual hybrid gradient step from (u_hat, v_hat):
///   u+ = prox_{tau f}(u_hat - tau K^T v_hat)
///   v+ = prox_{sigma g}(v_hat + sigma K (2 u+ - u_hat))
class PdhgStep {
 public:
  PdhgStep(const ProxDescriptor& f, const ProxDescriptor& g, Matrix k, double tau, double sigma)
      : k_(std::move(k)), tau_(tau), sigma_(sigma), prox_f_(f, tau), prox_g_(g, sigma) {
    require(f.dim() == k_.cols() && g.dim() == k_.rows(), "f, g and K disagree");
    const double norm = spectral_norm(k_);
    require(tau * sigma * norm * norm < 1.0, "PDHG needs tau * sigma * |K|^2 < 1");
  }

  Vector operator()(const Vector& y) const {
    const Eigen::Index d1 = k_.cols();
    require(y.size() == d1 + k_.rows(), "point has the wrong dimension");
    const Vector u_hat = y.head(d1);
    const Vector v_hat = y.tail(k_.rows());
    const Vector u = prox_f_(u_hat - tau_ * (k_.transpose() * v_hat));
    const Vector v = prox_g_(v_hat + sigma_ * (k_ * (2.0 * u - u_hat)));
    return stack(u, v);
  }

  const Matrix& k() const { return k_; }
  PdhgMetric metric() const { return PdhgMetric(k_, tau_, sigma_); }

 private:
  Matrix k_;
  double tau_;
  double sigma_;
  Prox prox_f_;
  Prox prox_g_;
};

/// PDHG with the chosen momentum; residuals are measured in the metric P.
/// Given a fixed point x*, the bound uses R_P^2 = <P(x_0 - x*), x_0 - x*> and
/// the gap column is phi(u_i, v*) - phi(u*, v_i), phi(u, v) = f(u) + <Ku, v> - g(v).
inline SplittingTrace pdhg(const ProxDescriptor& f, const ProxDescriptor& g, const Matrix& k, double tau,
                           double sigma, const Vector& u0, const Vector& v0, std::size_t iters, Momentum momentum,
                           RestartPolicy restart = {}, const std::optional<SaddlePoint>& fixed_point = std::nullopt) {
  require(iters >= 1, "iters must be at least 1");
  require_positive(tau, "tau");
  require_positive(sigma, "sigma");
  const PdhgStep step(f, g, k, tau, sigma);
  const PdhgMetric metric = step.metric();
  const Vector x0 = stack(u0, v0);
  const ResidualTrace trace = iterate(step, x0, iters, momentum, restart, metric);

  std::optional<double> radius;
  detail::GapFn gap;
  if (fixed_point) {
    radius = std::sqrt(metric(Vector(x0 - stack(fixed_point->u, fixed_point->v))));
    gap = [&](const Vector& u, const Vector& v) {
      const auto phi = [&](const Vector& uu, const Vector& vv) { return f.value(uu) + vv.dot(k * uu) - g.value(vv); };
      return phi(u, fixed_point->v) - phi(fixed_point->u, v);
    };
  }
  return detail::split_trace(trace, k.cols(), momentum, restart, radius, gap);
}

inline SplittingTrace pdhg(const ProxDescriptor& f, const ProxDescriptor& g, const Matrix& k, double tau,
                           double sigma, const Vector& u0, const Vector& v0, std::size_t iters, bool accelerate) {
  return pdhg(f, g, k, tau, sigma, u0, v0, iters, momentum_of(accelerate));
}

/// G = J1 o (2 J2 - I) + (I - J2), with J1 = J_{rho M1}, J2 = J_{rho M2}.
template <class Resolvent1, class Resolvent2>
class DouglasRachford {
 public:
  DouglasRachford(Resolvent1 j1, Resolvent2 j2) : j1_(std::move(j1)), j2_(std::move(j2)) {}

  Vector operator()(const Vector& eta) const {
    const Vector zeta = j2_(eta);
    return j1_(Vector(2.0 * zeta - eta)) + eta - zeta;
  }

 private:
  Resolvent1 j1_;
  Resolvent2 j2_;
};

/// nu_{i+1} = G(eta_i) with the chosen eta-update; record i holds
/// (nu_i, eta_{i-1}) in the x / y_prev fields.
template <class Resolvent1, class Resolvent2>
ResidualTrace drs(const Resolvent1& j1, const Resolvent2& j2, const Vector& nu0, std::size_t iters,
                  Momentum momentum, RestartPolicy restart = {}, std::optional<double> radius = std::nullopt) {
  require(iters >= 1, "iters must be at least 1");
  const DouglasRachford<Resolvent1, Resolvent2> g(j1, j2);
  ResidualTrace trace = iterate(g, nu0, iters, momentum, restart);
  for (auto& r : trace.records) r.bound = residual_bound(momentum, restart, r.iteration, radius);
  return trace;
}

/// Douglas-Rachford on two monotone linear operators with parameter rho.
inline ResidualTrace drs(const Matrix& m1, const Matrix& m2, double rho, const Vector& nu0, std::size_t iters,
                         bool accelerate, std::optional<double> radius = std::nullopt) {
  return drs(LinearResolvent(m1, rho), LinearResolvent(m2, rho), nu0, iters, momentum_of(accelerate), {}, radius);
}

/// A x + B z = c
struct AffineConstraint {
  Matrix a;
  Matrix b;
  Vector c;

  void validate() const {
    require(a.rows() == b.rows() && a.rows() == c.size(), "constraint blocks have mismatched rows");
    require_finite(a, "A");
    require_finite(b, "B");
    require_finite(c, "c");
  }
};

struct AdmmStart {
  Vector x;
  Vector z;
  Vector nu_hat;
};

/// ADMM for min f(x) + g(z) s.t. Ax + Bz = c and its accelerated variant
/// (the Douglas-Rachford acceleration applied to the dual). Subproblem
/// factorizations are built once per solver.
class Admm {
 public:
  Admm(ProxDescriptor f, ProxDescriptor g, AffineConstraint cons, double rho, InnerSolverConfig inner = {})
      : cons_(validated(std::move(cons))),
        rho_(rho),
        x_sub_(make(std::move(f), cons_.a, rho, inner)),
        z_sub_(make(std::move(g), cons_.b, rho, inner)) {}

  double rho() const { return rho_; }
  const AffineConstraint& constraint() const { return cons_; }

  SplittingTrace run(const AdmmStart& start, std::size_t iters, bool accelerate, RestartPolicy restart = {},
                     std::optional<double> radius = std::nullopt) const {
    require(iters >= 1, "iters must be at least 1");
    const Matrix& a = cons_.a;
    const Matrix& b = cons_.b;
    const Vector& c = cons_.c;
    require(start.x.size() == a.cols() && start.z.size() == b.cols() && start.nu_hat.size() == c.size(),
            "ADMM start has the wrong dimensions");

    SplittingTrace trace;
    trace.records.reserve(iters);

    Vector z = start.z;
    Vector nu_hat = start.nu_hat, nu_hat_prev;
    Vector eta_hat_prev, eta_hat_prev2;
    Vector x_cur = start.x, x_prev;  // x_i, x_{i-1}
    std::size_t local = 0;
    bool restart_flag = false;

    for (std::size_t i = 0;; ++i) {
      // x_{i+1}
      const Vector bz_c = b * z - c;
      Vector x_next = x_sub_.solve(a.transpose() * (nu_hat + rho_ * bz_c), x_cur);
      const Vector ax_next = a * x_next;

      if (i >= 1) {
        SplittingRecord r;
        r.iteration = i;
        r.nu = nu_hat + rho_ * (ax_next - c);
        r.eta_prev = eta_hat_prev + rho_ * (a * x_cur - c);
        r.residual = (r.nu - r.eta_prev).squaredNorm();
        r.infeasibility = (ax_next + bz_c).squaredNorm();
        r.bound = residual_bound(momentum_of(accelerate), restart, i, radius);
        r.restart = restart_flag;
        r.u = x_next;
        r.v = z;
        r.nu_hat = nu_hat;
        r.eta_hat_prev = eta_hat_prev;
        const bool increased = !trace.records.empty() && !restart_flag && r.residual > trace.records.back().residual;
        restart_flag = false;
        trace.records.push_back(std::move(r));
        if (i == iters) break;
        if ((restart.interval > 0 && local == restart.interval) || (restart.adaptive && increased)) {
          local = 0;
          restart_flag = true;
        }
      }

      Vector eta_hat;
      if (!accelerate || local < 2) {
        eta_hat = nu_hat;
      } else {
        const double w = static_cast<double>(local - 1) / static_cast<double>(local + 1);
        eta_hat = nu_hat + w * (nu_hat - nu_hat_prev + rho_ * (ax_next - a * x_cur)) -
                  w * (nu_hat_prev - eta_hat_prev2 + rho_ * (a * (x_cur - x_prev)));
      }

      const Vector ax_c = ax_next - c;
      Vector z_next = z_sub_.solve(b.transpose() * (eta_hat + rho_ * ax_c), z);
      Vector nu_hat_next = eta_hat + rho_ * (ax_c + b * z_next);

      eta_hat_prev2 = std::move(eta_hat_prev);
      eta_hat_prev = std::move(eta_hat);
      nu_hat_prev = std::move(nu_hat);
      nu_hat = std::move(nu_hat_next);
      z = std::move(z_next);
      x_prev = std::move(x_cur);
      x_cur = std::move(x_next);
      ++local;
    }
    return trace;
  }

  /// Douglas-Rachford fixed point estimated by a long plain ADMM run.
  Vector fixed_point_estimate(const AdmmStart& start, std::size_t iters) const {
    return run(start, iters, false).records.back().nu;
  }

  /// Starting point nu_0 = eta_0 of the underlying Douglas-Rachford iteration.
  Vector initial_dual(const AdmmStart& start) const { return run(start, 1, false).records.front().eta_prev; }

 private:
  static AffineConstraint validated(AffineConstraint cons) {
    cons.validate();
    return cons;
  }

  static QuadraticSubproblem make(ProxDescriptor phi, const Matrix& block, double rho, InnerSolverConfig inner) {
    require_positive(rho, "rho");
    require(phi.dim() == block.cols(), "function and constraint block disagree");
    return QuadraticSubproblem(std::move(phi), rho * (block.transpose() * block), inner);
  }

  AffineConstraint cons_;
  double rho_;
  QuadraticSubproblem x_sub_;
  QuadraticSubproblem z_sub_;
};

inline SplittingTrace admm(const ProxDescriptor& f, const ProxDescriptor& g, const AffineConstraint& cons, double rho,
                           const AdmmStart& start, std::size_t iters, bool accelerate, RestartPolicy restart = {},
                           std::optional<double> radius = std::nullopt) {
  return Admm(f, g, cons, rho).run(start, iters, accelerate, restart, radius);
}

/// Forward-difference matrix D of shape (d1-1) x d1: D(i,i) = 1, D(i,i+1) = -1.
inline Matrix difference_matrix(Eigen::Index d1) {
  require(d1 >= 2, "difference matrix needs d1 >= 2");
  Matrix d = Matrix::Zero(d1 - 1, d1);
  for (Eigen::Index i = 0; i + 1 < d1; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d;
}

}  // namespace appm
