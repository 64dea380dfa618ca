#include <gtest/gtest.h>

#include <wbary/lp.hpp>
#include <wbary/ot.hpp>

#include "oracles.hpp"

#include <numeric>

using namespace wbary;
using wbary::testing::random_measure;

namespace {

LinearProgram dense_program(const Matrix& A, const Vector& b, const Vector& c) {
  LinearProgram lp;
  lp.constraints = A.sparseView();
  lp.constraints.makeCompressed();
  lp.rhs = b;
  lp.cost = c;
  return lp;
}

DiscreteMeasure dirac(double x) {
  Matrix p(1, 1);
  p(0, 0) = x;
  return make_measure(p, Vector::Ones(1));
}

/// F^p of `bary` against the inputs, through the transport solver.
double frechet_pp(const DiscreteMeasure& bary, std::span<const DiscreteMeasure> ms, double p) {
  double s = 0;
  for (const auto& m : ms) s += wasserstein_pp(bary, m, p);
  return s / static_cast<double>(ms.size());
}

}  // namespace

TEST(SolveLp, Trivial) {
  Matrix A(1, 1);
  A << 1;
  auto sol = solve_lp(dense_program(A, Vector::Ones(1), Vector::Ones(1)));
  EXPECT_NEAR(sol.x[0], 1.0, 1e-15);
  EXPECT_NEAR(sol.objective, 1.0, 1e-15);
}

TEST(SolveLp, Infeasible) {
  Matrix A(2, 1);
  A << 1, 1;
  Vector b(2);
  b << 1, 2;
  EXPECT_THROW(solve_lp(dense_program(A, b, Vector::Ones(1))), LpInfeasible);
}

TEST(SolveLp, Unbounded) {
  Matrix A(1, 2);
  A << 1, -1;
  Vector c(2);
  c << -1, 0;
  EXPECT_THROW(solve_lp(dense_program(A, Vector::Ones(1), c)), LpUnbounded);
}

TEST(SolveLp, RedundantDegenerate) {
  // x + y = 1 stated three times, plus x - y = 0 negated: redundant rows.
  Matrix A(4, 3);
  A << 1, 1, 0, 1, 1, 0, 2, 2, 0, -1, 1, 0;
  Vector b(4);
  b << 1, 1, 2, 0;
  Vector c(3);
  c << 1, 2, 0;
  auto sol = solve_lp(dense_program(A, b, c));
  EXPECT_NEAR(sol.objective, 1.5, 1e-12);
  EXPECT_LE(sol.primal_residual, 1e-9);
}

TEST(SolveLp, ForcedBlandMatchesTableau) {
  wbary::Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    // Random feasible standard-form programs with a bounded region.
    const Index m = 2 + static_cast<Index>(rng.below(5)), n = m + 2 + static_cast<Index>(rng.below(6));
    Matrix A(m + 1, n);
    for (Index r = 0; r < m; ++r)
      for (Index j = 0; j < n; ++j) A(r, j) = std::floor(rng.uniform(-3, 4));
    A.row(m).setOnes();
    Vector x0(n);
    for (Index j = 0; j < n; ++j) x0[j] = rng.uniform();
    x0 /= x0.sum();
    Vector b = A * x0;
    Vector c(n);
    for (Index j = 0; j < n; ++j) c[j] = std::floor(rng.uniform(-5, 5));
    const double oracle = wbary::testing::tableau_lp_value(A, b, c);
    EXPECT_NEAR(solve_lp(dense_program(A, b, c)).objective, oracle, 1e-8);
    LpOptions bland;
    bland.bland_after = 1;
    EXPECT_NEAR(solve_lp(dense_program(A, b, c), bland).objective, oracle, 1e-8);
    LpOptions small_refactor;
    small_refactor.refactor_interval = 1;
    EXPECT_NEAR(solve_lp(dense_program(A, b, c), small_refactor).objective, oracle, 1e-8);
  }
}

TEST(SolveLp, NonzeroCap) {
  LpOptions opts;
  opts.max_nonzeros = 3;
  Matrix A = Matrix::Ones(2, 2);
  Vector b(2);
  b << 1, 1;
  EXPECT_THROW(solve_lp(dense_program(A, b, Vector::Ones(2)), opts), SizeCapExceeded);
}

TEST(ExactBarycenter, SingleMeasureIsItself) {
  wbary::Rng rng(3);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 5, 2)};
  auto res = exact_barycenter(ms, 2.0);
  EXPECT_NEAR(res.value, 0.0, 1e-12);
  EXPECT_NEAR(wasserstein(res.barycenter, ms[0], 2.0), 0.0, 1e-7);
}

TEST(ExactBarycenter, TwoDiracs) {
  std::vector<DiscreteMeasure> ms{dirac(0), dirac(1)};
  auto res = exact_barycenter(ms, 2.0);
  ASSERT_EQ(res.barycenter.size(), 1);
  EXPECT_NEAR(res.barycenter.points(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(res.value, 0.25, 1e-15);
}

TEST(ExactBarycenter, ShapeCounts) {
  wbary::Rng rng(12);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 2, 2), random_measure(rng, 2, 2), random_measure(rng, 3, 2)};
  const CentroidSet cs = centroid_set(ms, 2.0);
  ASSERT_EQ(cs.points.rows(), 12);
  auto blp = assemble_barycenter_lp(ms, 2.0, cs.points);
  EXPECT_EQ(blp.lp.variables(), 12 + 12 * 7);
  EXPECT_EQ(blp.lp.rows(), 3 * 12 + 7);
  auto sol = solve_lp(blp.lp);
  EXPECT_NEAR(blp.weights(sol.x).sum(), 1.0, 1e-9);
}

TEST(ExactBarycenter, SparsityAndFormulationsAgree) {
  wbary::Rng rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const int N = 2 + static_cast<int>(rng.below(3));
    std::vector<DiscreteMeasure> ms;
    Index total = 0;
    for (int i = 0; i < N; ++i) {
      ms.push_back(random_measure(rng, 1 + static_cast<Index>(rng.below(4)), 2));
      total += ms.back().size();
    }
    auto res = exact_barycenter(ms, 2.0);
    EXPECT_LE(res.barycenter.size(), total - N + 1);
    BarycenterOptions mm;
    mm.formulation = BarycenterFormulation::multimarginal;
    auto res2 = exact_barycenter(ms, 2.0, mm);
    EXPECT_NEAR(res.value, res2.value, 1e-8);
    EXPECT_LE(res2.barycenter.size(), total - N + 1);
    // The reported value is the Frechet functional of the reported measure.
    EXPECT_NEAR(frechet_pp(res.barycenter, ms, 2.0), res.value, 1e-7);
  }
}

TEST(ExactBarycenter, PermutationInvariant) {
  wbary::Rng rng(42);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 3, 2), random_measure(rng, 2, 2), random_measure(rng, 4, 2)};
  const double v = exact_barycenter(ms, 2.0).value;
  std::vector<DiscreteMeasure> shuffled{ms[2], ms[0], ms[1]};
  EXPECT_NEAR(exact_barycenter(shuffled, 2.0).value, v, 1e-8);
}

TEST(ExactBarycenter, LowerBoundsRandomCandidates) {
  wbary::Rng rng(43);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 3, 2), random_measure(rng, 3, 2), random_measure(rng, 3, 2)};
  for (double p : {1.0, 2.0}) {
    const auto res = exact_barycenter(ms, p);
    const CentroidSet cs = centroid_set(ms, p);
    for (int trial = 0; trial < 20; ++trial) {
      Vector w(cs.points.rows());
      for (Index j = 0; j < w.size(); ++j) w[j] = rng.uniform();
      EXPECT_GE(frechet_pp(make_measure(cs.points, w), ms, p), res.value - 1e-9);
    }
    // Arbitrary off-support candidates too: the centroid set suffices.
    for (int trial = 0; trial < 20; ++trial) {
      auto cand = random_measure(rng, 1 + static_cast<Index>(rng.below(6)), 2);
      EXPECT_GE(frechet_pp(cand, ms, p), res.value - 1e-9);
    }
  }
}

TEST(ExactBarycenter, SizeCapMessage) {
  wbary::Rng rng(44);
  std::vector<DiscreteMeasure> ms;
  for (int i = 0; i < 4; ++i) ms.push_back(random_measure(rng, 10, 2));
  BarycenterOptions opts;
  opts.lp.max_nonzeros = 1000;
  try {
    exact_barycenter(ms, 2.0, opts);
    FAIL();
  } catch (const SizeCapExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("variables"), std::string::npos);
  }
}

TEST(LpSize, HandCount) {
  const std::uint64_t one[] = {1};
  auto est = lp_size_estimate(1, one, std::nullopt, 2.0);
  EXPECT_EQ(est.variables, 2);
  EXPECT_EQ(est.constraints, 2);
}

TEST(LpSize, MatchesAssembledProgram) {
  wbary::Rng rng(45);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 2, 1), random_measure(rng, 3, 1), random_measure(rng, 2, 1)};
  auto blp = assemble_barycenter_lp(ms, 2.0, centroid_set(ms, 2.0).points);
  const std::uint64_t sizes[] = {2, 3, 2};
  auto est = lp_size_estimate(3, sizes, std::nullopt, 2.0);
  EXPECT_EQ(est.variables, blp.lp.variables());
  EXPECT_EQ(est.constraints, blp.lp.rows());
}

TEST(LpSize, ImageScale) {
  const std::uint64_t none[] = {0};
  auto grid = lp_size_estimate(100, std::span<const std::uint64_t>(none, 0), 256, 2.0);
  EXPECT_GT(grid.variables, BigInt(1000000000000000ull));
  EXPECT_GT(grid.constraints, BigInt(10000000000ull));
  const std::uint64_t M[] = {65536};
  auto gen = lp_size_estimate(100, M, std::nullopt, 2.0);
  EXPECT_GE(decimal_exponent(gen.variables), 488u);
  EXPECT_GE(decimal_exponent(gen.constraints), 483u);
}
