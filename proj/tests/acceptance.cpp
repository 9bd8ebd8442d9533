// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "appm/appm.hpp"

using namespace appm;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 = none
  std::function<Outcome()> check;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1
Outcome ppm_exactness() {
  double worst = 0.0;
  for (std::size_t n : {2u, 10u, 100u}) {
    const auto tr = ppm(LinearResolvent(rotation_worst_case(n, 1.0), 1.0), canonical_start(), n);
    const double expect = std::pow(1.0 - 1.0 / n, n - 1.0) / n;
    worst = std::max(worst, std::abs(tr.at_iteration(n).residual - expect) / expect);
  }
  return {worst <= 1e-8, "max relative error " + sci(worst)};
}

// 2
Outcome accelerated_rate() {
  double worst = 0.0;  // max of residual i^2 / R^2
  auto scan = [&](const ResidualTrace& tr, double r2) {
    for (const auto& rec : tr.records) {
      const double i = static_cast<double>(rec.iteration);
      worst = std::max(worst, rec.residual * i * i / r2);
    }
  };
  for (std::size_t n : {2u, 10u, 100u})
    scan(accelerated_ppm(LinearResolvent(rotation_worst_case(n, 1.0), 1.0), canonical_start(), 200), 1.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(seed % 20);
    SplitMix64 rng(seed * 31 + 7);
    const double lambda = 0.1 + 2.9 * rng.uniform();
    const Vector x0 = normal_vector(dim, rng);
    scan(accelerated_ppm(LinearResolvent(random_monotone_operator(dim, seed), lambda), x0, 200), x0.squaredNorm());
  }
  return {worst <= 1.0 + 1e-9, "max residual*i^2/R^2 = " + sci(worst)};
}

// 3
Outcome certificate() {
  double dev = 0.0, eig = 0.0;
  bool dual_exact = true;
  for (std::size_t n = 2; n <= 60; ++n) {
    const auto r = verify_certificate(n);
    dev = std::max(dev, r.max_rank1_deviation);
    eig = std::min(eig, r.min_eigenvalue);
    dual_exact = dual_exact && r.dual_value == 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  }
  return {dev <= 1e-12 && eig >= -1e-10 && dual_exact,
          "max deviation " + sci(dev) + ", min eigenvalue " + sci(eig) + (dual_exact ? ", dual = 1/N^2" : ", dual mismatch")};
}

// 4
Outcome equivalence() {
  double dev = equivalence_check(LinearResolvent(rotation_worst_case(100, 1.0), 1.0), canonical_start(), 100);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SplitMix64 rng(seed + 1000);
    const Vector x0 = normal_vector(8, rng);
    dev = std::max(dev, equivalence_check(LinearResolvent(random_monotone_operator(8, seed), 1.0), x0, 100));
  }
  return {dev <= 1e-8, "max coordinate deviation " + sci(dev)};
}

// 5
Outcome strong_contraction() {
  double scalar_err = 0.0, excess = -1.0;
  for (double mu : {0.02, 0.5, 3.0}) {
    for (double lambda : {0.5, 1.0}) {
      const double q = 1.0 / ((1.0 + lambda * mu) * (1.0 + lambda * mu));
      const auto t1 = ppm(LinearResolvent(Matrix::Constant(1, 1, mu), lambda), Vector::Ones(1), 30);
      for (std::size_t i = 1; i < t1.size(); ++i) {
        if (t1[i - 1].residual < 1e-250) break;
        const double ratio = t1[i].residual / t1[i - 1].residual;
        scalar_err = std::max(scalar_err, std::abs(ratio - q));
        excess = std::max(excess, ratio - q);
      }
    }
  }
  const double mu = 0.02, lambda = 1.0, q = 1.0 / ((1.0 + lambda * mu) * (1.0 + lambda * mu));
  const auto t2 = ppm(LinearResolvent(strongly_monotone_toy(100, lambda, mu), lambda), canonical_start(), 300);
  for (std::size_t i = 1; i < t2.size(); ++i) excess = std::max(excess, t2[i].residual / t2[i - 1].residual - q);
  return {scalar_err <= 1e-12 && excess <= 1e-12,
          "1-D ratio error " + sci(scalar_err) + ", max ratio excess " + sci(excess)};
}

// 6
Outcome restart_bound() {
  const double lambda = 1.0, mu = 0.02;
  const LinearResolvent j(strongly_monotone_toy(100, lambda, mu), lambda);
  const double plain = accelerated_ppm(j, canonical_start(), 200).at_iteration(200).residual;
  double worst = 0.0;
  bool below = true;
  std::string ends;
  for (std::size_t k : {17u, 34u, 68u, 136u}) {
    const auto tr = restarted(j, canonical_start(), {k, false}, std::max<std::size_t>(200, 4 * k));
    const double factor = 1.0 / (lambda * lambda * mu * mu * static_cast<double>(k * k));
    for (std::size_t e = 2 * k; e <= tr.size(); e += k)
      worst = std::max(worst, tr.at_iteration(e).residual / (factor * tr.at_iteration(e - k).residual));
    const double at200 = tr.at_iteration(200).residual;
    below = below && at200 < plain;
    ends += " " + std::to_string(k) + ":" + sci(at200);
  }
  return {worst <= 1.0 && below,
          "max contraction ratio/bound " + sci(worst) + "; at 200 plain " + sci(plain) + " restarted" + ends};
}

// 7
Outcome divergence() {
  const LinearResolvent j(rotation_worst_case(100, 1.0), 1.0);
  const auto g = guler(GulerVariant::first, j, canonical_start(), 100);
  const double a = accelerated_ppm(j, canonical_start(), 100).at_iteration(100).residual;
  const double p = ppm(j, canonical_start(), 100).at_iteration(100).residual;
  const bool ok = g.at_iteration(100).residual > g.at_iteration(1).residual && a < p;
  return {ok, "guler1 " + sci(g.at_iteration(1).residual) + " -> " + sci(g.at_iteration(100).residual) +
                  "; accel " + sci(a) + " vs ppm " + sci(p)};
}

// 8
Outcome pdhg_bound() {
  const auto game = bilinear_game_instance(50, 25, 1);
  const double norm = spectral_norm(game.k);
  const double tau = 0.99 / norm, sigma = 0.99 / norm;
  const auto f = ProxDescriptor::linear(game.a);
  const auto g = ProxDescriptor::linear(game.b);
  const Vector u0 = Vector::Constant(50, 10.0), v0 = Vector::Constant(25, 10.0);
  const auto oracle = pdhg(f, g, game.k, tau, sigma, u0, v0, 10000, false);
  const SaddlePoint fp{oracle.records.back().u, oracle.records.back().v};
  const auto tr = pdhg(f, g, game.k, tau, sigma, u0, v0, 200, Momentum::proposed, {}, fp);
  double worst = 0.0;
  for (const auto& r : tr.records) worst = std::max(worst, r.residual / *r.bound);
  return {worst <= 1.0 + 1e-6,
          "max residual/bound " + sci(worst) + " (oracle residual " + sci(oracle.records.back().residual) + ")"};
}

// 9
Outcome admm_bounds() {
  const auto tv = tv_instance(40, 5, 1, 0.1);
  const double rho = 0.05, gamma = 3.0;
  const AffineConstraint cons{tv.d, -Matrix::Identity(39, 39), Vector::Zero(39)};
  const Admm solver(ProxDescriptor::quadratic(tv.h, tv.b), ProxDescriptor::l1(39, gamma), cons, rho);
  const AdmmStart start{Vector::Zero(40), Vector::Zero(39), Vector::Zero(39)};
  const auto oracle = solver.run(start, 100000, false);
  const Vector nu_star = oracle.records.back().nu;
  const double r2 = (solver.initial_dual(start) - nu_star).squaredNorm();
  const auto acc = solver.run(start, 200, true);
  const auto pl = solver.run(start, 200, false);
  double worst_acc = 0.0, worst_pl = 0.0;
  for (std::size_t k = 0; k < 200; ++k) {
    const double i = static_cast<double>(k + 1);
    worst_acc = std::max(worst_acc, *acc[k].infeasibility * rho * rho * i * i / r2);
    worst_pl = std::max(worst_pl, *pl[k].infeasibility * rho * rho * i / std::pow(1.0 - 1.0 / i, i - 1.0) / r2);
  }

  // Textbook ADMM on a random quadratic-l1 instance with B = -I.
  SplitMix64 rng(77);
  const Matrix h = normal_matrix(8, 6, rng);
  const Vector hb = normal_vector(8, rng);
  const Matrix a = normal_matrix(5, 6, rng);
  const Vector c = normal_vector(5, rng);
  const double rho2 = 0.7, g2 = 0.5;
  const AdmmStart s2{normal_vector(6, rng), normal_vector(5, rng), normal_vector(5, rng)};
  const auto tr = admm(ProxDescriptor::quadratic(h, hb), ProxDescriptor::l1(5, g2),
                       {a, -Matrix::Identity(5, 5), c}, rho2, s2, 200, false);
  const Eigen::LDLT<Matrix> xs(h.transpose() * h + rho2 * a.transpose() * a);
  Vector z = s2.z, nu = s2.nu_hat;
  std::vector<Vector> xh, zh{z}, nuh{nu};
  for (std::size_t i = 0; i <= 200; ++i) {
    const Vector x = xs.solve(h.transpose() * hb - a.transpose() * (nu - rho2 * (z + c)));
    z = soft_threshold(a * x - c + nu / rho2, g2 / rho2);
    nu = nu + rho2 * (a * x - z - c);
    xh.push_back(x);
    zh.push_back(z);
    nuh.push_back(nu);
  }
  double dev = 0.0;
  for (const auto& r : tr.records) {
    dev = std::max(dev, (r.u - xh[r.iteration]).cwiseAbs().maxCoeff());
    dev = std::max(dev, (r.v - zh[r.iteration]).cwiseAbs().maxCoeff());
    dev = std::max(dev, (r.nu_hat - nuh[r.iteration]).cwiseAbs().maxCoeff());
  }
  return {worst_acc <= 1.0 && worst_pl <= 1.0 && dev <= 1e-12,
          "accel max ratio " + sci(worst_acc) + ", plain max ratio " + sci(worst_pl) + ", textbook deviation " +
              sci(dev) + " (oracle residual " + sci(oracle.records.back().residual) + ")"};
}

// 10
Outcome operator_identities() {
  double yosida = 0.0, drs_fne = 0.0, res_fne = 0.0;
  SplitMix64 rng(2718);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 10);
    const Matrix m = random_monotone_operator(n, seed);
    const double lambda = 0.1 + 2.9 * rng.uniform();
    const LinearResolvent j(m, lambda);
    const Vector y = normal_vector(n, rng);
    const Vector my = yosida_apply(j, lambda, y);
    yosida = std::max(yosida, (j(y) - (y - lambda * my)).cwiseAbs().maxCoeff());
    yosida = std::max(yosida, (m * j(y) - my).cwiseAbs().maxCoeff());

    const Vector y2 = normal_vector(n, rng);
    const Vector dj = j(y) - j(y2);
    res_fne = std::min(res_fne, dj.dot(y - y2) - dj.squaredNorm());

    const DouglasRachford g(LinearResolvent(random_monotone_operator(n, seed + 500), lambda),
                            LinearResolvent(random_monotone_operator(n, seed + 900), lambda));
    const Vector dg = g(y) - g(y2);
    drs_fne = std::min(drs_fne, dg.dot(y - y2) - dg.squaredNorm());
  }
  return {yosida <= 1e-12 && drs_fne >= -1e-10 && res_fne >= -1e-10,
          "Yosida error " + sci(yosida) + ", DRS min " + sci(drs_fne) + ", resolvent min " + sci(res_fne)};
}

// 11
Outcome saddle_gap() {
  double worst = 0.0;
  std::size_t violations = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Eigen::Index d1 = 1 + static_cast<Eigen::Index>(seed % 6), d2 = 1 + static_cast<Eigen::Index>(seed % 4);
    const QuadraticSaddle phi = random_strongly_convex_concave_saddle(d1, d2, 0.05, seed);
    const auto [us, vs] = phi.saddle_point();
    SplitMix64 rng(seed + 4242);
    const Vector u0 = normal_vector(d1, rng), v0 = normal_vector(d2, rng);
    const double lambda = 0.2 + 1.8 * rng.uniform();
    const double r2 = (u0 - us).squaredNorm() + (v0 - vs).squaredNorm();
    const auto tr = accelerated_saddle_ppm(phi, lambda, u0, v0, 100, true, SaddlePoint{us, vs});
    for (const auto& r : tr.records) {
      const double ratio = *r.gap * 4.0 * lambda * static_cast<double>(r.iteration) / r2;
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + 1e-6) {
        ++violations;
        std::printf("  violation: seed %llu iteration %zu ratio %s\n", static_cast<unsigned long long>(seed),
                    r.iteration, sci(ratio).c_str());
      }
    }
  }
  return {violations == 0, "max gap*4*lambda*i/R^2 = " + sci(worst) + ", violations " + std::to_string(violations)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "PPM exactness on rotation", 1.0, ppm_exactness},
      {2, "accelerated 1/i^2 rate", 10.0, accelerated_rate},
      {3, "dual certificate, N = 2..60", 5.0, certificate},
      {4, "general PPM equivalence", 5.0, equivalence},
      {5, "strongly monotone PPM contraction", 0.0, strong_contraction},
      {6, "restart bound and restart benefit", 5.0, restart_bound},
      {7, "Guler divergence and accel below PPM", 0.0, divergence},
      {8, "PDHG preconditioned bound", 0.0, pdhg_bound},
      {9, "ADMM infeasibility bounds and textbook match", 0.0, admm_bounds},
      {10, "operator identities", 0.0, operator_identities},
      {11, "saddle gap bound", 0.0, saddle_gap},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string detail = o.detail;
    if (c.time_limit > 0.0 && secs >= c.time_limit) {
      pass = false;
      detail += "; over time limit " + sci(c.time_limit) + " s";
    }
    std::printf("%s  %2d  %s: %s (%.3f s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
