#include <gtest/gtest.h>

#include <wbary/io.hpp>
#include <wbary/pipeline.hpp>

#include "oracles.hpp"

#include <sstream>

using namespace wbary;
using wbary::testing::random_measure;
using wbary::testing::random_points;

namespace {

DiscreteMeasure dirac(double x) {
  Matrix p(1, 1);
  p(0, 0) = x;
  return make_measure(p, Vector::Ones(1));
}

std::vector<DiscreteMeasure> uniform_instance(Rng& rng, int N, Index M) {
  std::vector<DiscreteMeasure> ms;
  for (int i = 0; i < N; ++i) ms.push_back(uniform_measure(random_points(rng, M, 2)));
  return ms;
}

}  // namespace

TEST(Frechet, Trivial) {
  wbary::Rng rng(1);
  auto mu = random_measure(rng, 6, 2);
  std::vector<DiscreteMeasure> same{mu, mu, mu};
  EXPECT_NEAR(frechet_value(mu, same, 2.0), 0.0, 1e-15);
  std::vector<DiscreteMeasure> ends{dirac(0), dirac(1)};
  EXPECT_DOUBLE_EQ(frechet_value(dirac(0.5), ends, 2.0), 0.25);
}

TEST(Frechet, AboveLpOptimum) {
  wbary::Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    std::vector<DiscreteMeasure> ms{random_measure(rng, 3, 2), random_measure(rng, 3, 2), random_measure(rng, 2, 2)};
    const double opt = exact_barycenter(ms, 2.0).value;
    EXPECT_GE(frechet_value(random_measure(rng, 5, 2), ms, 2.0), opt - 1e-8);
  }
}

TEST(Randomized, SingleRepeatIsThatRepeat) {
  wbary::Rng rng(3);
  auto ms = uniform_instance(rng, 3, 10);
  RandomizedConfig cfg;
  cfg.sua.sample_size = 6;
  const auto res = randomized_barycenter(ms, cfg);
  ASSERT_EQ(res.repeats.size(), 1u);
  EXPECT_EQ(res.estimate.points, res.repeats[0].points);
  EXPECT_EQ(res.estimate.size(), 6);
}

TEST(Randomized, MixtureLayoutAndConvexity) {
  wbary::Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    auto ms = uniform_instance(rng, 3, 12);
    RandomizedConfig cfg;
    cfg.sua.sample_size = 5;
    cfg.sua.repeats = 1 + static_cast<std::size_t>(rng.below(4));
    cfg.sua.seed = rng.bits();
    const auto res = randomized_barycenter(ms, cfg);
    const auto R = static_cast<Index>(cfg.sua.repeats);
    ASSERT_EQ(res.estimate.size(), 5 * R);
    for (Index k = 0; k < res.estimate.size(); ++k)
      EXPECT_NEAR(res.estimate.weights[k], 1.0 / static_cast<double>(5 * R), 1e-15);
    double mean = 0.0;
    for (const auto& r : res.repeats) mean += frechet_value(r, ms, 2.0);
    mean /= static_cast<double>(R);
    EXPECT_LE(frechet_value(res.estimate, ms, 2.0), mean + 1e-9);
  }
}

TEST(Randomized, BestOfPicksLowest) {
  wbary::Rng rng(5);
  auto ms = uniform_instance(rng, 3, 12);
  RandomizedConfig cfg;
  cfg.sua.sample_size = 4;
  cfg.sua.repeats = 4;
  cfg.combine = Combine::best_of;
  const auto res = randomized_barycenter(ms, cfg);
  ASSERT_TRUE(res.chosen.has_value());
  const double chosen = frechet_value(res.estimate, ms, 2.0);
  for (const auto& r : res.repeats) EXPECT_LE(chosen, frechet_value(r, ms, 2.0) + 1e-15);
}

TEST(Randomized, ExactSolverOnResamples) {
  wbary::Rng rng(6);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 4, 2), random_measure(rng, 4, 2)};
  RandomizedConfig cfg;
  cfg.solver = BarycenterSolver::exact;
  cfg.sua.sample_size = 3;
  cfg.sua.repeats = 2;
  const auto res = randomized_barycenter(ms, cfg);
  EXPECT_GE(frechet_value(res.estimate, ms, 2.0), exact_barycenter(ms, 2.0).value - 1e-9);
}

TEST(Randomized, ThreadCountDoesNotMatter) {
  wbary::Rng rng(7);
  auto ms = uniform_instance(rng, 4, 15);
  RandomizedConfig cfg;
  cfg.sua.sample_size = 7;
  cfg.sua.repeats = 5;
  cfg.sua.seed = 99;
  const auto a = randomized_barycenter(ms, cfg, 1);
  const auto b = randomized_barycenter(ms, cfg, 4);
  EXPECT_EQ(a.estimate.points, b.estimate.points);
}

TEST(Sweep, SingleCell) {
  wbary::Rng rng(8);
  auto ms = uniform_instance(rng, 3, 4);
  SweepConfig cfg;
  cfg.sample_sizes = {3};
  cfg.threads = 1;
  const auto res = sweep(ms, cfg);
  ASSERT_EQ(res.records.size(), 1u);
  ASSERT_TRUE(res.reference.has_value());
  EXPECT_EQ(res.reference->label, "lp");
  ASSERT_TRUE(res.records[0].rel_err.has_value());
  EXPECT_GE(*res.records[0].rel_err, -1e-7);
}

TEST(Sweep, CsvBytesIndependentOfThreads) {
  wbary::Rng rng(9);
  auto ms = uniform_instance(rng, 3, 20);
  SweepConfig cfg;
  cfg.sample_sizes = {4, 8};
  cfg.repeat_counts = {1, 2};
  cfg.repetitions = 3;
  cfg.seed = 123;
  std::string out[2];
  const std::size_t threads[2] = {1, 3};
  for (int k = 0; k < 2; ++k) {
    cfg.threads = threads[k];
    std::ostringstream os;
    const auto res = sweep(ms, cfg);
    write_records_csv(os, res.records);
    write_summary_csv(os, summarize(res.records));
    out[k] = os.str();
  }
  EXPECT_EQ(out[0], out[1]);
  EXPECT_EQ(out[0].substr(0, out[0].find('\n')), "S,R,rep,seed,frechet,rel_err,runtime_ms");
}

TEST(Summary, MeanAndSd) {
  std::vector<ExperimentRecord> recs(3);
  for (int k = 0; k < 3; ++k) {
    recs[static_cast<std::size_t>(k)].S = 5;
    recs[static_cast<std::size_t>(k)].R = 1;
    recs[static_cast<std::size_t>(k)].rel_err = 1.0 + k;
  }
  const auto rows = summarize(recs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].mean_err, 2.0);
  EXPECT_DOUBLE_EQ(rows[0].sd_err, 1.0);
}

TEST(MeasureCsv, RoundTrip) {
  wbary::Rng rng(10);
  auto mu = random_measure(rng, 20, 3);
  std::stringstream ss;
  write_measure_csv(ss, mu);
  const auto back = read_measure_csv(ss);
  EXPECT_EQ(back.points, mu.points);
  EXPECT_LE((back.weights - mu.weights).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MeasureCsv, RejectsBadHeader) {
  std::stringstream ss("a,b\n1,2\n");
  EXPECT_THROW(read_measure_csv(ss), InvalidInput);
  std::stringstream ragged("x1,x2,w\n1,2\n");
  EXPECT_THROW(read_measure_csv(ragged), InvalidInput);
}
