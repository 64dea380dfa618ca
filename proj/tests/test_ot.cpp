#include <gtest/gtest.h>

#include <wbary/lp.hpp>
#include <wbary/ot.hpp>

#include "oracles.hpp"

using namespace wbary;
using wbary::testing::random_measure;
using wbary::testing::random_points;

namespace {

DiscreteMeasure dirac(double x) {
  Matrix p(1, 1);
  p(0, 0) = x;
  return make_measure(p, Vector::Ones(1));
}

}  // namespace

TEST(SolveOt, DiracToDirac) {
  for (double p : {1.0, 2.0, 3.0}) EXPECT_NEAR(wasserstein(dirac(0), dirac(1), p), 1.0, 1e-15);
}

TEST(SolveOt, IdenticalMeasuresAreFree) {
  wbary::Rng rng(4);
  auto mu = random_measure(rng, 7, 2);
  auto r = solve_ot(mu, mu, 2.0);
  EXPECT_NEAR(r.value, 0.0, 1e-15);
}

TEST(SolveOt, HalfMassMoves) {
  Matrix two(2, 1);
  two << 0, 1;
  auto mu = make_measure(two, Vector::Constant(2, 0.5));
  auto r = solve_ot(mu, dirac(0), 1.0);
  EXPECT_NEAR(r.value, 0.5, 1e-15);
}

TEST(SolveOt, MarginalsAndCertificate) {
  wbary::Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    auto mu = random_measure(rng, 1 + static_cast<Index>(rng.below(15)), 2);
    auto nu = random_measure(rng, 1 + static_cast<Index>(rng.below(15)), 2);
    auto r = solve_ot(mu, nu, 2.0);
    Matrix P = r.plan.dense();
    EXPECT_LE((P.rowwise().sum() - mu.weights).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((P.colwise().sum().transpose() - nu.weights).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(P.minCoeff(), 0.0);
    EXPECT_GE(r.min_reduced_cost, -1e-7);
    EXPECT_LE(r.plan.support_size(), static_cast<std::size_t>(mu.size() + nu.size() - 1));
    // Strong duality.
    EXPECT_NEAR(r.value, mu.weights.dot(r.u) + nu.weights.dot(r.v), 1e-10);
  }
}

TEST(SolveOt, AgreesWithLpOracle) {
  wbary::Rng rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const double p = 1.0 + static_cast<double>(rng.below(3));
    const Index D = 1 + static_cast<Index>(rng.below(3));
    auto mu = random_measure(rng, 1 + static_cast<Index>(rng.below(8)), D);
    auto nu = random_measure(rng, 1 + static_cast<Index>(rng.below(8)), D);
    auto r = solve_ot(mu, nu, p);
    const Matrix C = cost_matrix(mu.points, nu.points, p).entries;
    const LinearProgram lp = transport_lp(C, mu.weights, nu.weights);
    const double via_lp = solve_lp(lp).objective;
    EXPECT_NEAR(r.value, via_lp, 1e-8);
    EXPECT_NEAR(r.value, wbary::testing::tableau_lp_value(Matrix(lp.constraints), lp.rhs, lp.cost), 1e-8);
  }
}

TEST(SolveOt, DegenerateEqualMassesTerminate) {
  // Uniform on equal sizes: every basis is highly degenerate.
  wbary::Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix X = random_points(rng, 30, 2), Y = random_points(rng, 30, 2);
    auto mu = uniform_measure(X), nu = uniform_measure(Y);
    auto r = solve_ot(mu, nu, 2.0);
    EXPECT_NEAR(r.value, solve_assignment(X, Y, 2.0).value, 1e-9);
  }
}

TEST(SolveOt, LatticeTies) {
  // Integer points with many equal costs.
  Matrix X(6, 1), Y(6, 1);
  X << 0, 0, 1, 1, 2, 2;
  Y << 0, 1, 1, 2, 2, 3;
  auto r = solve_ot(uniform_measure(X), uniform_measure(Y), 1.0);
  EXPECT_NEAR(r.value, 0.5, 1e-12);
}

TEST(SolveOt, RejectsMassMismatch) {
  Matrix C = Matrix::Ones(2, 2);
  Vector a(2), b(2);
  a << 0.5, 0.5;
  b << 0.5, 0.6;
  EXPECT_THROW(solve_transport(C, a, b), InvalidInput);
}

TEST(Assignment, MatchesBruteForce) {
  wbary::Rng rng(5);
  for (int trial = 0; trial < 80; ++trial) {
    const Index S = 1 + static_cast<Index>(rng.below(6));
    const double p = 1.0 + static_cast<double>(rng.below(3));
    Matrix X = random_points(rng, S, 2), Y = random_points(rng, S, 2);
    auto a = solve_assignment(X, Y, p);
    EXPECT_NEAR(a.value, wbary::testing::brute_force_assignment(X, Y, p), 1e-12);
    std::vector<Index> sorted = a.permutation;
    std::sort(sorted.begin(), sorted.end());
    for (Index k = 0; k < S; ++k) EXPECT_EQ(sorted[static_cast<std::size_t>(k)], k);
  }
}

TEST(Assignment, MatchesTransportOnUniform) {
  wbary::Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Index S = 1 + static_cast<Index>(rng.below(25));
    Matrix X = random_points(rng, S, 3), Y = random_points(rng, S, 3);
    for (double p : {1.0, 2.0}) {
      auto a = solve_assignment(X, Y, p);
      auto r = solve_ot(uniform_measure(X), uniform_measure(Y), p);
      EXPECT_NEAR(a.value, r.value, 1e-9);
    }
  }
}

TEST(Assignment, IdentityOnSameSet) {
  wbary::Rng rng(7);
  Matrix X = random_points(rng, 12, 2);
  auto a = solve_assignment(X, X, 2.0);
  for (Index k = 0; k < 12; ++k) EXPECT_EQ(a.permutation[static_cast<std::size_t>(k)], k);
  EXPECT_EQ(a.value, 0.0);
}

TEST(Wasserstein, LipschitzInFirstArgument) {
  // |W_p^p(mu,nu) - W_p^p(mu',nu)| <= p diam^{p-1} W_1(mu,mu').
  wbary::Rng rng(21);
  Matrix support = random_points(rng, 8, 2);
  const double diam = diameter(support);
  auto on_support = [&] {
    Vector w(8);
    for (Index k = 0; k < 8; ++k) w[k] = rng.uniform();
    return make_measure(support, w);
  };
  for (int trial = 0; trial < 40; ++trial) {
    auto mu = on_support(), mu2 = on_support(), nu = on_support();
    for (double p : {1.0, 2.0, 3.0}) {
      const double lhs = std::abs(wasserstein_pp(mu, nu, p) - wasserstein_pp(mu2, nu, p));
      EXPECT_LE(lhs, p * std::pow(diam, p - 1) * wasserstein(mu, mu2, 1.0) + 1e-9);
    }
  }
}
