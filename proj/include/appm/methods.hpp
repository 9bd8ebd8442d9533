#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "appm/core.hpp"

namespace appm {

/// One iteration of a proximal-point-type run. `x` is produced by the
/// iteration-th resolvent call from `y_prev`, and `residual` is the (possibly
/// metric-weighted) squared norm of x - y_prev.
struct TraceRecord {
  std::size_t iteration = 0;
  Vector x;
  Vector y_prev;
  double residual = 0.0;
  std::optional<double> bound;
  bool restart = false;  // first iteration after a restart
};

struct ResidualTrace {
  std::vector<TraceRecord> records;

  std::size_t size() const { return records.size(); }
  const TraceRecord& operator[](std::size_t i) const { return records[i]; }
  const TraceRecord& at_iteration(std::size_t i) const { return records.at(i - 1); }
  std::vector<double> residuals() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.residual);
    return out;
  }
};

/// How y_{i+1} is formed from the newest resolvent output.
enum class Momentum {
  none,          // y_{i+1} = x_{i+1}
  proposed,      // inertia plus the correction term -(i/(i+2))(x_i - y_{i-1})
  guler_first,   // FISTA-type inertia
  guler_second,  // inertia plus (t_i / t_{i+1})(x_{i+1} - y_i)
};

/// interval == 0 disables fixed restarts. With `adaptive`, the run also
/// restarts whenever the residual increases between consecutive iterations.
struct RestartPolicy {
  std::size_t interval = 0;
  bool adaptive = false;
};

struct SquaredNorm {
  double operator()(const Vector& d) const { return d.squaredNorm(); }
};

/// t_{i+1} = (1 + sqrt(1 + 4 t_i^2)) / 2
inline double next_momentum_t(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

/// Runs x_{i+1} = step(y_i) with the chosen y-update for `iters` iterations,
/// starting from x_0 = y_0 = y_{-1} = x0. On restart the current x becomes the
/// new x_0 = y_0 = y_{-1} and the inner counter (and Guler's t) start over.
template <class Step, class Norm2 = SquaredNorm>
ResidualTrace iterate(const Step& step, const Vector& x0, std::size_t iters, Momentum momentum,
                      RestartPolicy restart = {}, const Norm2& norm2 = {}) {
  require_finite(x0, "x0");
  ResidualTrace trace;
  trace.records.reserve(iters);

  Vector x = x0, y = x0, y_prev = x0;
  double t = 1.0;
  std::size_t inner = 0;
  bool restart_next = false;

  for (std::size_t i = 1; i <= iters; ++i) {
    if (restart_next || (restart.interval > 0 && inner == restart.interval)) {
      y = x;
      y_prev = x;
      t = 1.0;
      inner = 0;
      restart_next = false;
    }
    const bool restarted_here = inner == 0 && i > 1;

    Vector x_next = step(y);
    const double residual = norm2(Vector(x_next - y));

    Vector y_next;
    switch (momentum) {
      case Momentum::none:
        y_next = x_next;
        break;
      case Momentum::proposed: {
        const double c = static_cast<double>(inner) / static_cast<double>(inner + 2);
        y_next = x_next + c * (x_next - x) - c * (x - y_prev);
        break;
      }
      case Momentum::guler_first: {
        const double t_next = next_momentum_t(t);
        y_next = x_next + ((t - 1.0) / t_next) * (x_next - x);
        t = t_next;
        break;
      }
      case Momentum::guler_second: {
        const double t_next = next_momentum_t(t);
        y_next = x_next + ((t - 1.0) / t_next) * (x_next - x) + (t / t_next) * (x_next - y);
        t = t_next;
        break;
      }
    }

    if (restart.adaptive && !restarted_here && inner > 0 && residual > trace.records.back().residual)
      restart_next = true;

    trace.records.push_back({i, x_next, y, residual, std::nullopt, restarted_here});
    y_prev = std::move(y);
    y = std::move(y_next);
    x = std::move(x_next);
    ++inner;
  }
  return trace;
}

/// Worst-case bound of the proximal point method, (1 - 1/i)^{i-1} R^2 / i.
inline double ppm_bound(std::size_t i, double radius) {
  const double n = static_cast<double>(i);
  return std::pow(1.0 - 1.0 / n, n - 1.0) * radius * radius / n;
}

/// Bound R^2 / i^2 of the accelerated method.
inline double accelerated_bound(std::size_t i, double radius) {
  const double n = static_cast<double>(i);
  return radius * radius / (n * n);
}

template <class BoundFn>
void attach_bounds(ResidualTrace& trace, std::optional<double> radius, BoundFn bound) {
  if (!radius) return;
  for (auto& r : trace.records) r.bound = bound(r.iteration, *radius);
}

template <class Resolvent>
ResidualTrace ppm(const Resolvent& resolvent, const Vector& x0, std::size_t iters,
                  std::optional<double> radius = std::nullopt) {
  require(iters >= 1, "iters must be at least 1");
  auto trace = iterate(resolvent, x0, iters, Momentum::none);
  attach_bounds(trace, radius, ppm_bound);
  return trace;
}

template <class Resolvent>
ResidualTrace accelerated_ppm(const Resolvent& resolvent, const Vector& x0, std::size_t iters,
                              std::optional<double> radius = std::nullopt) {
  require(iters >= 1, "iters must be at least 1");
  auto trace = iterate(resolvent, x0, iters, Momentum::proposed);
  attach_bounds(trace, radius, accelerated_bound);
  return trace;
}

enum class GulerVariant { first, second };

template <class Resolvent>
ResidualTrace guler(GulerVariant variant, const Resolvent& resolvent, const Vector& x0, std::size_t iters) {
  require(iters >= 1, "iters must be at least 1");
  return iterate(resolvent, x0, iters,
                 variant == GulerVariant::first ? Momentum::guler_first : Momentum::guler_second);
}

/// Accelerated method restarted every `policy.interval` iterations (and/or
/// adaptively); `iters` counts resolvent calls over all outer steps.
template <class Resolvent>
ResidualTrace restarted(const Resolvent& resolvent, const Vector& x0, RestartPolicy policy, std::size_t iters) {
  require(iters >= 1, "iters must be at least 1");
  require(policy.interval >= 1 || policy.adaptive, "restart interval must be at least 1");
  return iterate(resolvent, x0, iters, Momentum::proposed, policy);
}

enum class RestartMode { operator_residual, function_gap };

/// round(e / (lambda mu)) for the fixed-point residual, half that for the
/// saddle gap; never below 1.
inline std::size_t optimal_restart_interval(double lambda, double mu, RestartMode mode) {
  require_positive(lambda, "lambda");
  require_positive(mu, "mu");
  const double denom = (mode == RestartMode::operator_residual ? 1.0 : 2.0) * lambda * mu;
  const double k = std::round(std::numbers::e / denom);
  return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

/// Lower-triangular step coefficients h_{i,k}, 1 <= k <= i <= N-1, of the
/// general proximal point method.
class StepCoeffs {
 public:
  explicit StepCoeffs(std::size_t horizon) : horizon_(horizon) {
    require(horizon >= 1, "horizon must be at least 1");
    rows_.resize(horizon - 1);
    for (std::size_t i = 0; i + 1 < horizon; ++i) rows_[i].assign(i + 1, 0.0);
  }

  /// h_{i,i} = 1, the plain proximal point method.
  static StepCoeffs identity(std::size_t horizon) {
    StepCoeffs h(horizon);
    for (std::size_t i = 1; i < horizon; ++i) h.set(i, i, 1.0);
    return h;
  }

  std::size_t horizon() const { return horizon_; }

  double operator()(std::size_t i, std::size_t k) const {
    check(i, k);
    return rows_[i - 1][k - 1];
  }

  void set(std::size_t i, std::size_t k, double value) {
    check(i, k);
    require(std::isfinite(value), "step coefficient must be finite");
    rows_[i - 1][k - 1] = value;
  }

 private:
  void check(std::size_t i, std::size_t k) const {
    if (i < 1 || i >= horizon_ || k < 1 || k > i) throw ValidationError("step coefficient index out of range");
  }

  std::size_t horizon_;
  std::vector<std::vector<double>> rows_;
};

/// x_{i+1} = J(y_i), y_{i+1} = y_i + sum_{k=0}^{i} h_{i+1,k+1} (x_{k+1} - y_k).
/// Keeps every update x_{k+1} - y_k.
template <class Resolvent>
ResidualTrace general_ppm(const Resolvent& resolvent, const StepCoeffs& h, const Vector& y0, std::size_t iters) {
  require(iters >= 1, "iters must be at least 1");
  require(iters <= h.horizon(), "iters exceeds the step-coefficient horizon");
  require_finite(y0, "y0");

  ResidualTrace trace;
  std::vector<Vector> updates;
  updates.reserve(iters);
  Vector y = y0;
  for (std::size_t i = 0; i < iters; ++i) {
    Vector x = resolvent(y);
    updates.push_back(x - y);
    trace.records.push_back({i + 1, x, y, updates.back().squaredNorm(), std::nullopt, false});
    if (i + 1 < iters) {
      Vector next = y;
      for (std::size_t k = 0; k <= i; ++k) next += h(i + 1, k + 1) * updates[k];
      y = std::move(next);
    }
  }
  return trace;
}

/// y_{i+1} = y_i - beta M(y_i) for a beta-cocoercive M. Record i holds
/// x = y_i, y_prev = y_{i-1}.
template <class Operator>
ResidualTrace forward_method(const Operator& op, double beta, const Vector& y0, std::size_t iters,
                             std::optional<double> radius = std::nullopt) {
  require_positive(beta, "beta");
  require(iters >= 1, "iters must be at least 1");
  auto step = [&](const Vector& y) -> Vector { return y - beta * op(y); };
  auto trace = iterate(step, y0, iters, Momentum::none);
  attach_bounds(trace, radius, ppm_bound);
  return trace;
}

}  // namespace appm
