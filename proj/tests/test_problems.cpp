#include <sstream>

#include <gtest/gtest.h>

#include "appm/operators.hpp"
#include "appm/problems.hpp"

namespace appm {
namespace {

TEST(SplitMix64, ReferenceStream) {
  // Published reference outputs for seed 1234567.
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
}

TEST(SplitMix64, UniformAndNormalMoments) {
  SplitMix64 rng(42);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(RotationWorstCase, Values) {
  Matrix m2(2, 2);
  m2 << 0, 1, -1, 0;
  EXPECT_EQ(rotation_worst_case(2, 1.0), m2);
  Matrix m5(2, 2);
  m5 << 0, 0.5, -0.5, 0;
  EXPECT_EQ(rotation_worst_case(5, 1.0), m5);
  const Vector j = resolvent_linear(m5, 1.0, canonical_start());
  EXPECT_NEAR(j(0), 0.8, 1e-15);
  EXPECT_NEAR(j(1), 0.4, 1e-15);
  for (std::size_t n : {2u, 7u, 100u}) {
    const Matrix m = rotation_worst_case(n, 0.3);
    EXPECT_EQ(Matrix(m + m.transpose()), Matrix::Zero(2, 2));
    EXPECT_TRUE(check_monotone(m, 0.0).monotone);
  }
  EXPECT_THROW(rotation_worst_case(1, 1.0), ValidationError);
}

TEST(StronglyMonotoneToy, Values) {
  const Matrix m = strongly_monotone_toy(100, 1.0, 0.02);
  EXPECT_EQ(m(0, 0), 0.02);
  EXPECT_EQ(m(1, 1), 0.02);
  EXPECT_NEAR(m(0, 1), 1.0 / std::sqrt(99.0), 1e-16);
  EXPECT_NEAR(m(1, 0), -1.0 / std::sqrt(99.0), 1e-16);
  EXPECT_TRUE(check_monotone(m, 0.02).monotone);
  const QuadraticSaddle phi = strongly_monotone_toy_saddle(100, 1.0, 0.02);
  EXPECT_EQ(phi.saddle_matrix(), m);
  // Large mu: the resolvent is close to a scaled identity.
  const Matrix big = strongly_monotone_toy(10, 1.0, 1e6);
  const Vector y = Vector::Ones(2);
  EXPECT_LE((resolvent_linear(big, 1.0, y) - y / (1 + 1e6)).norm(), 1e-12);
  EXPECT_THROW(strongly_monotone_toy(10, 1.0, 0.0), ValidationError);
}

TEST(RandomMonotoneOperator, MonotoneAndDeterministic) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Matrix m = random_monotone_operator(1 + seed % 10, seed);
    EXPECT_TRUE(check_monotone(m).monotone);
    EXPECT_EQ(m, random_monotone_operator(1 + seed % 10, seed));
  }
}

TEST(BasisPursuit, Construction) {
  const auto a = basis_pursuit_instance(100, 20, 7);
  EXPECT_EQ(a.a.rows(), 20);
  EXPECT_EQ(a.a.cols(), 100);
  EXPECT_EQ((a.b - a.a * a.u_true).cwiseAbs().maxCoeff(), 0.0);
  const auto nnz = (a.u_true.array() != 0.0).count();
  EXPECT_LE(nnz, 10);
  EXPECT_GT(nnz, 0);
  const auto b = basis_pursuit_instance(100, 20, 7);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.u_true, b.u_true);
  EXPECT_NE(a.a, basis_pursuit_instance(100, 20, 8).a);
  EXPECT_THROW(basis_pursuit_instance(20, 20, 1), ValidationError);
}

TEST(BilinearGame, Construction) {
  const auto g = bilinear_game_instance(1000, 500, 1);
  EXPECT_EQ(g.k.rows(), 500);
  EXPECT_EQ(g.k.cols(), 1000);
  const auto h = bilinear_game_instance(50, 25, 3);
  EXPECT_EQ(h.k, bilinear_game_instance(50, 25, 3).k);
  EXPECT_GT(spectral_norm(h.k), 0.0);
  // A saddle point exists: K^T v = -a and K u = b are consistent.
  const Vector v = h.k.transpose().colPivHouseholderQr().solve(-h.a);
  EXPECT_LE((h.k.transpose() * v + h.a).norm(), 1e-9 * h.a.norm());
  const Vector u = h.k.colPivHouseholderQr().solve(h.b);
  EXPECT_LE((h.k * u - h.b).norm(), 1e-9 * h.b.norm());
}

TEST(TvInstance, Construction) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto tv = tv_instance(100, 5, seed, 0.0);
    EXPECT_EQ(tv.h.rows(), 5);
    EXPECT_EQ(tv.d.rows(), 99);
    EXPECT_LE(((tv.d * tv.x_true).array() != 0.0).count(), 4);
    EXPECT_EQ(tv.b, tv.h * tv.x_true);
  }
  const auto a = tv_instance(40, 5, 3, 0.1);
  const auto b = tv_instance(40, 5, 3, 0.1);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.h, b.h);
  EXPECT_NE(a.b, a.h * a.x_true);
  EXPECT_THROW(tv_instance(1, 5, 1, 0.1), ValidationError);
  EXPECT_THROW(tv_instance(10, 0, 1, 0.1), ValidationError);
}

TEST(ProblemInstance, RoundTrip) {
  for (const auto& inst : {to_problem_instance(basis_pursuit_instance(12, 4, 2)),
                           to_problem_instance(bilinear_game_instance(6, 3, 2)),
                           to_problem_instance(tv_instance(8, 3, 2, 0.1))}) {
    std::stringstream ss;
    write_problem_instance(ss, inst);
    const std::string text = ss.str();
    const auto back = read_problem_instance(ss);
    EXPECT_EQ(back.kind, inst.kind);
    EXPECT_EQ(back.seed, 2u);
    ASSERT_EQ(back.blocks.size(), inst.blocks.size());
    for (std::size_t i = 0; i < inst.blocks.size(); ++i) {
      EXPECT_EQ(back.blocks[i].first, inst.blocks[i].first);
      EXPECT_EQ(back.blocks[i].second, inst.blocks[i].second);
    }
    std::stringstream again;
    write_problem_instance(again, back);
    EXPECT_EQ(again.str(), text);
  }
}

TEST(ProblemInstance, HeaderAndErrors) {
  std::stringstream ss;
  write_problem_instance(ss, to_problem_instance(tv_instance(4, 2, 9, 0.1)));
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "kind,tv,dims,H:2x4;b:2x1;x_true:4x1;D:3x4,seed,9");
  std::stringstream bad("kind,tv,dims,H:1x1,seed,1\nH,3,0,1.0\n");
  EXPECT_THROW(read_problem_instance(bad), ValidationError);
  std::stringstream empty;
  EXPECT_THROW(read_problem_instance(empty), ValidationError);
  EXPECT_THROW(to_problem_instance(tv_instance(4, 2, 9, 0.1)).block("Q"), ValidationError);
}

}  // namespace
}  // namespace appm
