#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "appm/core.hpp"
#include "appm/operators.hpp"
#include "appm/splitting.hpp"

namespace appm {

/// SplitMix64 generator with Box-Muller normals. The stream is fully
/// specified so instances are reproducible across implementations:
///   uniform()  = ((next() >> 11) + 1) * 2^-53, in (0, 1]
///   normal()   = pairs (r cos t, r sin t), r = sqrt(-2 ln u1), t = 2 pi u2,
///                cosine branch first, sine branch cached for the next call.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Entries are drawn in row-major order.
inline Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vector normal_vector(Eigen::Index n, SplitMix64& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

/// (1 / (lambda sqrt(N-1))) [[0, 1], [-1, 0]]; PPM from x0 = (1, 0) attains
/// its worst-case residual exactly at iteration N. Zero is the solution.
inline Matrix rotation_worst_case(std::size_t n, double lambda) {
  require(n >= 2, "N must be at least 2");
  require_positive(lambda, "lambda");
  const double s = 1.0 / (lambda * std::sqrt(static_cast<double>(n - 1)));
  Matrix m(2, 2);
  m << 0.0, s, -s, 0.0;
  return m;
}

/// Rotation worst case plus mu I: the saddle subdifferential of
/// phi(u, v) = mu/2 u^2 + s uv - mu/2 v^2.
inline Matrix strongly_monotone_toy(std::size_t n, double lambda, double mu) {
  require_positive(mu, "mu");
  Matrix m = rotation_worst_case(n, lambda);
  m.diagonal().array() += mu;
  return m;
}

inline QuadraticSaddle strongly_monotone_toy_saddle(std::size_t n, double lambda, double mu) {
  const Matrix m = strongly_monotone_toy(n, lambda, mu);
  QuadraticSaddle phi = QuadraticSaddle::zero(1, 1);
  phi.q_uu(0, 0) = mu;
  phi.q_vv(0, 0) = mu;
  phi.k(0, 0) = -m(1, 0);
  return phi;
}

inline Vector canonical_start() { return Vector::Unit(2, 0); }

/// S + W with S = G G^T / dim PSD of random rank in [0, dim] and W
/// skew-symmetric, so the symmetric part is PSD.
inline Matrix random_monotone_operator(Eigen::Index dim, std::uint64_t seed) {
  require(dim >= 1, "dimension must be positive");
  SplitMix64 rng(seed);
  const auto rank = static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(dim + 1));
  const Matrix g = normal_matrix(dim, rank, rng);
  const Matrix w = normal_matrix(dim, dim, rng);
  return g * g.transpose() / static_cast<double>(dim) + 0.5 * (w - w.transpose());
}

/// Quadratic saddle with Q_uu, Q_vv >= mu I, K, a, b standard normal.
inline QuadraticSaddle random_strongly_convex_concave_saddle(Eigen::Index d1, Eigen::Index d2, double mu,
                                                             std::uint64_t seed) {
  require(d1 >= 1 && d2 >= 1, "dimensions must be positive");
  require_positive(mu, "mu");
  SplitMix64 rng(seed);
  const Matrix gu = normal_matrix(d1, d1, rng);
  const Matrix gv = normal_matrix(d2, d2, rng);
  QuadraticSaddle phi;
  phi.q_uu = gu * gu.transpose() / static_cast<double>(d1);
  phi.q_uu.diagonal().array() += mu;
  phi.q_vv = gv * gv.transpose() / static_cast<double>(d2);
  phi.q_vv.diagonal().array() += mu;
  phi.k = normal_matrix(d2, d1, rng);
  phi.a = normal_vector(d1, rng);
  phi.b = normal_vector(d2, rng);
  return phi;
}

struct BasisPursuitInstance {
  Matrix a;  // d2 x d1
  Vector b;
  Vector u_true;
  std::uint64_t seed = 0;
};

/// A standard normal; u_true standard normal with every entry whose magnitude
/// does not exceed the 90th percentile (sorted index ceil(0.9 d1) - 1) zeroed;
/// b = A u_true.
inline BasisPursuitInstance basis_pursuit_instance(Eigen::Index d1, Eigen::Index d2, std::uint64_t seed) {
  require(d1 >= 1 && d2 >= 1, "dimensions must be positive");
  require(d2 < d1, "basis pursuit needs d2 < d1");
  SplitMix64 rng(seed);
  BasisPursuitInstance inst;
  inst.seed = seed;
  inst.a = normal_matrix(d2, d1, rng);
  inst.u_true = normal_vector(d1, rng);
  std::vector<double> mags(static_cast<std::size_t>(d1));
  for (Eigen::Index i = 0; i < d1; ++i) mags[static_cast<std::size_t>(i)] = std::abs(inst.u_true(i));
  std::sort(mags.begin(), mags.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(d1))) - 1;
  const double threshold = mags[idx];
  for (Eigen::Index i = 0; i < d1; ++i)
    if (std::abs(inst.u_true(i)) <= threshold) inst.u_true(i) = 0.0;
  inst.b = inst.a * inst.u_true;
  return inst;
}

struct BilinearGameInstance {
  Matrix k;  // d2 x d1
  Vector a;
  Vector b;
  std::uint64_t seed = 0;
};

/// K standard normal; a = -K^T v_ref and b = K u_ref for standard normal
/// (u_ref, v_ref), so (u_ref, v_ref) is a saddle point of
/// a'u + <Ku, v> - b'v.
inline BilinearGameInstance bilinear_game_instance(Eigen::Index d1, Eigen::Index d2, std::uint64_t seed) {
  require(d1 >= 1 && d2 >= 1, "dimensions must be positive");
  SplitMix64 rng(seed);
  BilinearGameInstance inst;
  inst.seed = seed;
  inst.k = normal_matrix(d2, d1, rng);
  const Vector u_ref = normal_vector(d1, rng);
  const Vector v_ref = normal_vector(d2, rng);
  inst.a = -inst.k.transpose() * v_ref;
  inst.b = inst.k * u_ref;
  return inst;
}

struct TvInstance {
  Matrix h;  // p x d1
  Vector b;
  Vector x_true;
  Matrix d;  // (d1-1) x d1
  std::uint64_t seed = 0;
};

/// Piecewise-constant x_true (four breakpoints drawn uniformly from 1..d1-1,
/// duplicates merge pieces; standard normal levels), H standard normal,
/// b = H x_true + noise_scale * standard normal.
inline TvInstance tv_instance(Eigen::Index d1, Eigen::Index p, std::uint64_t seed, double noise_scale) {
  require(d1 >= 2 && p >= 1, "TV instance needs d1 >= 2 and p >= 1");
  require(noise_scale >= 0.0, "noise scale must be nonnegative");
  SplitMix64 rng(seed);
  TvInstance inst;
  inst.seed = seed;
  std::vector<Eigen::Index> breaks;
  for (int j = 0; j < 4; ++j)
    breaks.push_back(1 + static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(d1 - 1)));
  std::sort(breaks.begin(), breaks.end());
  inst.x_true.resize(d1);
  Eigen::Index start = 0;
  for (std::size_t piece = 0; piece <= breaks.size(); ++piece) {
    const Eigen::Index stop = piece < breaks.size() ? breaks[piece] : d1;
    const double level = rng.normal();
    for (Eigen::Index i = start; i < stop; ++i) inst.x_true(i) = level;
    start = std::max(start, stop);
  }
  inst.h = normal_matrix(p, d1, rng);
  inst.b = inst.h * inst.x_true;
  if (noise_scale > 0.0) inst.b += noise_scale * normal_vector(p, rng);
  inst.d = difference_matrix(d1);
  return inst;
}

/// Tagged bundle of named matrices for plain-text exchange.
struct ProblemInstance {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, Matrix>> blocks;

  const Matrix& block(const std::string& name) const {
    for (const auto& [n, m] : blocks)
      if (n == name) return m;
    throw ValidationError("problem instance has no block '" + name + "'");
  }
};

inline ProblemInstance to_problem_instance(const BasisPursuitInstance& in) {
  return {"basis_pursuit", in.seed, {{"A", in.a}, {"b", in.b}, {"u_true", in.u_true}}};
}
inline ProblemInstance to_problem_instance(const BilinearGameInstance& in) {
  return {"bilinear_game", in.seed, {{"K", in.k}, {"a", in.a}, {"b", in.b}}};
}
inline ProblemInstance to_problem_instance(const TvInstance& in) {
  return {"tv", in.seed, {{"H", in.h}, {"b", in.b}, {"x_true", in.x_true}, {"D", in.d}}};
}

namespace detail {
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
}  // namespace detail

/// Header line `kind,<kind>,dims,<name>:<rows>x<cols>;...,seed,<seed>`,
/// then `block,row,col,value` rows with shortest round-trip doubles.
inline void write_problem_instance(std::ostream& os, const ProblemInstance& inst) {
  os << "kind," << inst.kind << ",dims,";
  for (std::size_t i = 0; i < inst.blocks.size(); ++i) {
    const auto& [name, m] = inst.blocks[i];
    os << (i ? ";" : "") << name << ':' << m.rows() << 'x' << m.cols();
  }
  os << ",seed," << inst.seed << '\n';
  for (const auto& [name, m] : inst.blocks)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        os << name << ',' << r << ',' << c << ',' << detail::format_double(m(r, c)) << '\n';
}

inline ProblemInstance read_problem_instance(std::istream& is) {
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
  };
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty problem instance");
  const auto head = split(line, ',');
  if (head.size() != 6 || head[0] != "kind" || head[2] != "dims" || head[4] != "seed")
    throw ValidationError("malformed problem instance header");
  ProblemInstance inst;
  inst.kind = head[1];
  inst.seed = std::stoull(head[5]);
  for (const auto& size : split(head[3], ';')) {
    const auto colon = size.find(':');
    const auto cross = size.find('x', colon);
    if (colon == std::string::npos || cross == std::string::npos) throw ValidationError("malformed block size");
    const auto rows = std::stol(size.substr(colon + 1, cross - colon - 1));
    const auto cols = std::stol(size.substr(cross + 1));
    inst.blocks.emplace_back(size.substr(0, colon), Matrix::Zero(rows, cols));
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw ValidationError("malformed problem instance row");
    Matrix* target = nullptr;
    for (auto& [n, m] : inst.blocks)
      if (n == f[0]) target = &m;
    if (!target) throw ValidationError("unknown block '" + f[0] + "'");
    const auto r = std::stol(f[1]);
    const auto c = std::stol(f[2]);
    if (r < 0 || c < 0 || r >= target->rows() || c >= target->cols()) throw ValidationError("entry out of range");
    double v = 0.0;
    const auto res = std::from_chars(f[3].data(), f[3].data() + f[3].size(), v);
    if (res.ec != std::errc()) throw ValidationError("malformed value '" + f[3] + "'");
    (*target)(r, c) = v;
  }
  return inst;
}

}  // namespace appm
