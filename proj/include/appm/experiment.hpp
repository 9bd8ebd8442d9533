#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "appm/core.hpp"
#include "appm/methods.hpp"
#include "appm/operators.hpp"
#include "appm/pep_cert.hpp"
#include "appm/problems.hpp"
#include "appm/splitting.hpp"

namespace appm::cli {

/// Bad experiment configuration; reported before any computation runs.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExitCode : int { ok = 0, config = 1, numerical = 2 };

enum class MethodKind { ppm, accel, guler1, guler2, restart };

struct MethodChoice {
  MethodKind kind = MethodKind::ppm;
  std::size_t interval = 0;  // restart only

  std::string name() const {
    switch (kind) {
      case MethodKind::ppm: return "ppm";
      case MethodKind::accel: return "accel";
      case MethodKind::guler1: return "guler1";
      case MethodKind::guler2: return "guler2";
      case MethodKind::restart: return "restart@" + std::to_string(interval);
    }
    return {};
  }
};

/// ppm, accel, guler1, guler2, restart@k (also restarted@k).
inline MethodChoice parse_method(const std::string& text) {
  if (text == "ppm") return {MethodKind::ppm};
  if (text == "accel") return {MethodKind::accel};
  if (text == "guler1") return {MethodKind::guler1};
  if (text == "guler2") return {MethodKind::guler2};
  for (const std::string prefix : {"restart@", "restarted@"}) {
    if (text.rfind(prefix, 0) != 0) continue;
    const std::string digits = text.substr(prefix.size());
    std::size_t k = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (digits.empty() || res.ec != std::errc() || res.ptr != digits.data() + digits.size() || k == 0)
      throw ConfigError("bad restart interval in method '" + text + "'");
    return {MethodKind::restart, k};
  }
  throw ConfigError("unknown method '" + text + "'");
}

enum class Scale { full, desk };

/// Command-line level description of a run. Unset fields take the
/// experiment's preset at the chosen scale.
struct RunConfig {
  std::string experiment;
  std::vector<std::string> methods;
  std::optional<std::size_t> iters;
  std::optional<double> lambda, mu, rho, tau, sigma, gamma;
  std::uint64_t seed = 1;
  std::optional<std::size_t> restart;
  bool adaptive_restart = false;
  std::optional<std::size_t> n, nmax;
  std::optional<long> d1, d2, p;
  Scale scale = Scale::full;
  std::string out = "-";
};

/// A RunConfig with presets filled in and every name checked.
struct ResolvedConfig {
  std::string experiment;
  std::vector<MethodChoice> methods;
  std::size_t iters = 0;
  double lambda = 1.0, mu = 0.0, rho = 0.0, tau = 0.0, sigma = 0.0, gamma = 0.0;
  std::uint64_t seed = 1;
  bool adaptive_restart = false;
  std::size_t n = 0, nmax = 0;
  long d1 = 0, d2 = 0, p = 0;
  Scale scale = Scale::full;
  std::string out;
};

inline constexpr std::size_t kOracleIters = 10000;

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4", "fig5", "cert"};
  return names;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }

inline std::vector<MethodChoice> parse_methods(const std::vector<std::string>& names) {
  std::vector<MethodChoice> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

inline void positive(const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace detail

inline ResolvedConfig resolve(const RunConfig& in) {
  ResolvedConfig c;
  c.experiment = in.experiment;
  c.seed = in.seed;
  c.adaptive_restart = in.adaptive_restart;
  c.scale = in.scale;
  c.out = in.out;
  const bool desk = in.scale == Scale::desk;

  std::vector<std::string> defaults;
  if (c.experiment == "fig1") {
    defaults = {"ppm", "guler1", "accel"};
    c.n = in.n.value_or(desk ? 20 : 100);
    c.lambda = in.lambda.value_or(1.0);
    c.iters = in.iters.value_or(c.n);
  } else if (c.experiment == "fig2") {
    defaults = {"ppm", "accel", "restart@17", "restart@34", "restart@68", "restart@136"};
    c.n = in.n.value_or(100);
    c.lambda = in.lambda.value_or(1.0);
    c.mu = in.mu.value_or(0.02);
    c.iters = in.iters.value_or(200);
  } else if (c.experiment == "fig3") {
    defaults = {"ppm", "guler1", "accel", "restart@30"};
    c.d1 = in.d1.value_or(desk ? 50 : 100);
    c.d2 = in.d2.value_or(desk ? 10 : 20);
    c.lambda = in.lambda.value_or(0.01);
    c.iters = in.iters.value_or(100);
  } else if (c.experiment == "fig4") {
    defaults = {"ppm", "guler1", "accel", "restart@10"};
    c.d1 = in.d1.value_or(desk ? 50 : 1000);
    c.d2 = in.d2.value_or(desk ? 25 : 500);
    c.iters = in.iters.value_or(100);
  } else if (c.experiment == "fig5") {
    defaults = {"ppm", "accel", "restart@20"};
    c.d1 = in.d1.value_or(desk ? 40 : 100);
    c.p = in.p.value_or(5);
    c.rho = in.rho.value_or(0.05);
    c.gamma = in.gamma.value_or(3.0);
    c.iters = in.iters.value_or(200);
  } else if (c.experiment == "cert") {
    c.nmax = in.nmax.value_or(in.n.value_or(60));
    if (c.nmax < 2) throw ConfigError("nmax must be at least 2");
  } else {
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  }

  if (c.experiment != "cert") {
    c.methods = detail::parse_methods(in.methods.empty() ? defaults : in.methods);
    if (in.restart) {
      if (*in.restart == 0) throw ConfigError("restart interval must be at least 1");
      c.methods.push_back({MethodKind::restart, *in.restart});
    }
    if (c.iters == 0) throw ConfigError("iters must be at least 1");
    if (c.experiment == "fig1" || c.experiment == "fig2") {
      if (c.n < 2) throw ConfigError("N must be at least 2");
    }
    if (c.experiment == "fig5") {
      for (const auto& m : c.methods)
        if (m.kind == MethodKind::guler1 || m.kind == MethodKind::guler2)
          throw ConfigError("method '" + m.name() + "' is not available for ADMM");
    }
  }
  detail::positive("lambda", c.lambda);
  if (c.experiment == "fig2") detail::positive("mu", c.mu);
  if (c.experiment == "fig5") {
    detail::positive("rho", c.rho);
    if (!(c.gamma >= 0.0)) throw ConfigError("gamma must be nonnegative");
    if (c.d1 < 2 || c.p < 1) throw ConfigError("TV instance needs d1 >= 2 and p >= 1");
  }
  if (c.experiment == "fig3" && (c.d1 < 2 || c.d2 < 1 || c.d2 >= c.d1))
    throw ConfigError("basis pursuit needs 1 <= d2 < d1");
  if (c.experiment == "fig4") {
    if (c.d1 < 1 || c.d2 < 1) throw ConfigError("dimensions must be positive");
    if (in.tau) detail::positive("tau", *in.tau);
    if (in.sigma) detail::positive("sigma", *in.sigma);
    c.tau = in.tau.value_or(0.0);  // 0 means 0.99 / |K|, fixed once K is drawn
    c.sigma = in.sigma.value_or(0.0);
  }
  return c;
}

namespace detail {

inline Momentum momentum_for(const MethodChoice& m) {
  switch (m.kind) {
    case MethodKind::ppm: return Momentum::none;
    case MethodKind::accel:
    case MethodKind::restart: return Momentum::proposed;
    case MethodKind::guler1: return Momentum::guler_first;
    case MethodKind::guler2: return Momentum::guler_second;
  }
  return Momentum::none;
}

inline RestartPolicy restart_for(const MethodChoice& m, bool adaptive) {
  RestartPolicy r;
  if (m.kind == MethodKind::restart) r.interval = m.interval;
  if (adaptive && (m.kind == MethodKind::accel || m.kind == MethodKind::restart)) r.adaptive = true;
  return r;
}

struct Row {
  std::size_t iteration;
  double residual;
  std::optional<double> bound, infeasibility, gap;
  bool restart;
};

inline std::string render_rows(const std::string& experiment, const std::string& method, const std::vector<Row>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += experiment + ',' + method + ',' + std::to_string(r.iteration) + ',' + fmt(r.residual) + ',' +
           fmt(r.bound) + ',' + fmt(r.infeasibility) + ',' + fmt(r.gap) + ',' + (r.restart ? '1' : '0') + '\n';
  }
  return out;
}

inline std::vector<Row> rows_of(const ResidualTrace& t) {
  std::vector<Row> rows;
  for (const auto& r : t.records) rows.push_back({r.iteration, r.residual, r.bound, std::nullopt, std::nullopt, r.restart});
  return rows;
}

inline std::vector<Row> rows_of(const SplittingTrace& t) {
  std::vector<Row> rows;
  for (const auto& r : t.records) rows.push_back({r.iteration, r.residual, r.bound, r.infeasibility, r.gap, r.restart});
  return rows;
}

// Runs one job per method concurrently and concatenates their CSV rows in
// method order.
inline std::string run_methods(const ResolvedConfig& c,
                               const std::function<std::vector<Row>(const MethodChoice&)>& job) {
  std::vector<std::future<std::vector<Row>>> futures;
  for (const auto& m : c.methods) futures.push_back(std::async(std::launch::async, job, m));
  std::vector<std::vector<Row>> results;
  for (auto& f : futures) results.push_back(f.get());
  std::string body;
  for (std::size_t i = 0; i < c.methods.size(); ++i) body += render_rows(c.experiment, c.methods[i].name(), results[i]);
  return body;
}

inline std::string method_list(const ResolvedConfig& c) {
  std::string s;
  for (std::size_t i = 0; i < c.methods.size(); ++i) s += (i ? ";" : "") + c.methods[i].name();
  return s;
}

inline std::string common_meta(const ResolvedConfig& c) {
  return "# experiment=" + c.experiment + " methods=" + method_list(c) + " iters=" + std::to_string(c.iters) +
         " seed=" + std::to_string(c.seed) + " scale=" + (c.scale == Scale::full ? "full" : "desk") +
         " adaptive_restart=" + (c.adaptive_restart ? "1" : "0");
}

inline const char* kHeader = "experiment,method,iteration,residual,bound,infeasibility,gap,restart\n";

inline std::string fig1(const ResolvedConfig& c) {
  const LinearResolvent j(rotation_worst_case(c.n, c.lambda), c.lambda);
  const Vector x0 = canonical_start();
  const std::string meta = common_meta(c) + " N=" + std::to_string(c.n) + " lambda=" + fmt(c.lambda) +
                           " radius=1 radius_source=exact\n";
  const auto body = run_methods(c, [&](const MethodChoice& m) {
    auto tr = iterate(j, x0, c.iters, momentum_for(m), restart_for(m, c.adaptive_restart));
    const auto bound = residual_bound(momentum_for(m), restart_for(m, c.adaptive_restart), 1, 1.0);
    if (bound) attach_bounds(tr, 1.0, m.kind == MethodKind::ppm ? ppm_bound : accelerated_bound);
    return rows_of(tr);
  });
  return meta + kHeader + body;
}

inline std::string fig2(const ResolvedConfig& c) {
  const QuadraticSaddle phi = strongly_monotone_toy_saddle(c.n, c.lambda, c.mu);
  const SaddlePoint sp{Vector::Zero(1), Vector::Zero(1)};
  const std::string meta = common_meta(c) + " N=" + std::to_string(c.n) + " lambda=" + fmt(c.lambda) +
                           " mu=" + fmt(c.mu) + " radius=1 radius_source=exact" +
                           " k_opt=" + std::to_string(optimal_restart_interval(c.lambda, c.mu, RestartMode::operator_residual)) +
                           " k_opt_gap=" + std::to_string(optimal_restart_interval(c.lambda, c.mu, RestartMode::function_gap)) +
                           "\n";
  const auto body = run_methods(c, [&](const MethodChoice& m) {
    Vector u0(1), v0(1);
    u0 << 1.0;
    v0 << 0.0;
    return rows_of(accelerated_saddle_ppm(phi, c.lambda, u0, v0, c.iters, momentum_for(m),
                                          restart_for(m, c.adaptive_restart), sp));
  });
  return meta + kHeader + body;
}

inline std::string fig3(const ResolvedConfig& c) {
  const auto bp = basis_pursuit_instance(c.d1, c.d2, c.seed);
  const auto f = ProxDescriptor::l1(c.d1, 1.0);
  const Vector u0 = Vector::Zero(c.d1), v0 = Vector::Zero(c.d2);
  const auto oracle = accelerated_prox_multipliers(f, bp.a, bp.b, c.lambda, u0, v0, kOracleIters, {}, Momentum::none);
  const SaddlePoint sol{oracle.records.back().u, oracle.records.back().v};
  const double radius = (stack(u0, v0) - stack(sol.u, sol.v)).norm();
  const std::string meta = common_meta(c) + " d1=" + std::to_string(c.d1) + " d2=" + std::to_string(c.d2) +
                           " lambda=" + fmt(c.lambda) + " radius=" + fmt(radius) +
                           " radius_source=estimate_plain_" + std::to_string(kOracleIters) + "\n";
  const auto body = run_methods(c, [&](const MethodChoice& m) {
    return rows_of(accelerated_prox_multipliers(f, bp.a, bp.b, c.lambda, u0, v0, c.iters, {}, momentum_for(m),
                                                restart_for(m, c.adaptive_restart), radius, sol));
  });
  return meta + kHeader + body;
}

inline std::string fig4(const ResolvedConfig& c) {
  const auto game = bilinear_game_instance(c.d1, c.d2, c.seed);
  const double norm = spectral_norm(game.k);
  const double tau = c.tau > 0.0 ? c.tau : 0.99 / norm;
  const double sigma = c.sigma > 0.0 ? c.sigma : 0.99 / norm;
  if (!(tau * sigma * norm * norm < 1.0)) throw ConfigError("tau * sigma * |K|^2 must be below 1");
  const auto f = ProxDescriptor::linear(game.a);
  const auto g = ProxDescriptor::linear(game.b);
  const Vector u0 = Vector::Constant(c.d1, 10.0), v0 = Vector::Constant(c.d2, 10.0);
  const auto oracle = pdhg(f, g, game.k, tau, sigma, u0, v0, kOracleIters, Momentum::none);
  const SaddlePoint fp{oracle.records.back().u, oracle.records.back().v};
  const double radius = std::sqrt(PdhgMetric(game.k, tau, sigma)(Vector(stack(u0, v0) - stack(fp.u, fp.v))));
  const std::string meta = common_meta(c) + " d1=" + std::to_string(c.d1) + " d2=" + std::to_string(c.d2) +
                           " tau=" + fmt(tau) + " sigma=" + fmt(sigma) + " norm_K=" + fmt(norm) +
                           " radius_P=" + fmt(radius) + " radius_source=estimate_plain_" +
                           std::to_string(kOracleIters) + "\n";
  const auto body = run_methods(c, [&](const MethodChoice& m) {
    return rows_of(pdhg(f, g, game.k, tau, sigma, u0, v0, c.iters, momentum_for(m), restart_for(m, c.adaptive_restart),
                        fp));
  });
  return meta + kHeader + body;
}

inline std::string fig5(const ResolvedConfig& c) {
  const auto tv = tv_instance(c.d1, c.p, c.seed, 0.1);
  const Eigen::Index m = c.d1 - 1;
  const AffineConstraint cons{tv.d, -Matrix::Identity(m, m), Vector::Zero(m)};
  const Admm solver(ProxDescriptor::quadratic(tv.h, tv.b), ProxDescriptor::l1(m, c.gamma), cons, c.rho);
  const AdmmStart start{Vector::Zero(c.d1), Vector::Zero(m), Vector::Zero(m)};
  const Vector nu_star = solver.fixed_point_estimate(start, kOracleIters);
  const double radius = (solver.initial_dual(start) - nu_star).norm();
  const std::string meta = common_meta(c) + " d1=" + std::to_string(c.d1) + " p=" + std::to_string(c.p) +
                           " rho=" + fmt(c.rho) + " gamma=" + fmt(c.gamma) + " noise_scale=0.1 radius=" + fmt(radius) +
                           " radius_source=estimate_plain_" + std::to_string(kOracleIters) + "\n";
  const auto body = run_methods(c, [&](const MethodChoice& choice) {
    return rows_of(solver.run(start, c.iters, choice.kind != MethodKind::ppm, restart_for(choice, c.adaptive_restart),
                              radius));
  });
  return meta + kHeader + body;
}

inline std::string cert(const ResolvedConfig& c) {
  std::string out = "# experiment=cert nmax=" + std::to_string(c.nmax) + "\nN,deviation,min_eig,dual_value\n";
  std::vector<std::future<CertificateReport>> futures;
  for (std::size_t n = 2; n <= c.nmax; ++n) futures.push_back(std::async(std::launch::async, verify_certificate, n));
  for (auto& f : futures) {
    const auto r = f.get();
    out += std::to_string(r.n) + ',' + fmt(r.max_rank1_deviation) + ',' + fmt(r.min_eigenvalue) + ',' +
           fmt(r.dual_value) + '\n';
  }
  return out;
}

}  // namespace detail

/// CSV text of an experiment. Throws ConfigError for configuration
/// problems and the library's errors for numerical failures.
inline std::string run_experiment_csv(const RunConfig& config) {
  const ResolvedConfig c = resolve(config);
  if (c.experiment == "fig1") return detail::fig1(c);
  if (c.experiment == "fig2") return detail::fig2(c);
  if (c.experiment == "fig3") return detail::fig3(c);
  if (c.experiment == "fig4") return detail::fig4(c);
  if (c.experiment == "fig5") return detail::fig5(c);
  return detail::cert(c);
}

/// Runs the experiment and writes the CSV to `config.out` ("-" for stdout).
inline ExitCode run_experiment(const RunConfig& config, std::ostream& err = std::cerr) {
  std::string csv;
  try {
    csv = run_experiment_csv(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config;
  } catch (const InnerSolverError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical;
  }
  if (config.out.empty() || config.out == "-") {
    std::cout << csv;
    std::cout.flush();
    return std::cout ? ExitCode::ok : ExitCode::numerical;
  }
  std::ofstream os(config.out, std::ios::binary);
  if (!os) {
    err << "config error: cannot open '" << config.out << "' for writing\n";
    return ExitCode::config;
  }
  os << csv;
  return os ? ExitCode::ok : ExitCode::config;
}

}  // namespace appm::cli
