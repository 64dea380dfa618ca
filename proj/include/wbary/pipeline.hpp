#pragma once

// Resample, solve, average: the randomized barycenter estimator, its
// evaluation against the full data, and factorial experiment sweeps.

#include "common.hpp"
#include "lp.hpp"
#include "measures.hpp"
#include "ot.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sua.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wbary {

/// (1/N) sum_i W_p^p(mu, mu_i).
inline double frechet_value(const DiscreteMeasure& mu, std::span<const DiscreteMeasure> measures, double p,
                            std::size_t threads = 1) {
  if (measures.empty()) throw InvalidInput("Frechet functional of zero measures");
  std::vector<double> parts(measures.size());
  parallel_for(measures.size(), threads, [&](std::size_t i) {
    if (measures[i].dim() != mu.dim()) throw InvalidInput("dimension mismatch in Frechet functional");
    parts[i] = solve_ot(mu, measures[i], p).value;
  });
  double s = 0.0;
  for (double v : parts) s += v;
  return s / static_cast<double>(measures.size());
}

enum class BarycenterSolver { sua, exact };
enum class Combine { linear_average, best_of };

struct RandomizedConfig {
  SuaConfig sua;
  BarycenterSolver solver = BarycenterSolver::sua;
  Combine combine = Combine::linear_average;
  double p = 2.0;
  /// Used by the exact solver on each resampled instance.
  BarycenterOptions exact;
};

struct RandomizedResult {
  DiscreteMeasure estimate;
  std::vector<DiscreteMeasure> repeats;
  /// Solver-side value of each repeat (against its own resampled inputs).
  std::vector<double> repeat_values;
  /// Index picked under Combine::best_of.
  std::optional<std::size_t> chosen;
};

namespace detail {

inline constexpr std::uint64_t kSolverKey = ~std::uint64_t{0};

inline std::size_t effective_sample_size(std::span<const DiscreteMeasure> measures, const SuaConfig& cfg) {
  if (cfg.sample_size > 0) return cfg.sample_size;
  std::size_t s = 0;
  for (const auto& m : measures) s = std::max(s, static_cast<std::size_t>(m.size()));
  return s;
}

}  // namespace detail

/// One repeat: draw S atoms from every input with seed hash(seed, r, i), solve.
inline std::pair<DiscreteMeasure, double> randomized_repeat(std::span<const DiscreteMeasure> measures,
                                                            const RandomizedConfig& cfg, std::size_t r) {
  const std::size_t S = detail::effective_sample_size(measures, cfg.sua);
  std::vector<DiscreteMeasure> sampled;
  sampled.reserve(measures.size());
  for (std::size_t i = 0; i < measures.size(); ++i)
    sampled.push_back(sample_empirical(measures[i], S, derive_seed(cfg.sua.seed, {r, i})).measure);
  if (cfg.solver == BarycenterSolver::exact) {
    for (auto& m : sampled) m = compact(m);
    auto res = exact_barycenter(sampled, cfg.p, cfg.exact);
    return {std::move(res.barycenter), res.value};
  }
  if (cfg.p != 2.0) throw InvalidInput("the SUA solver supports p = 2 only");
  SuaConfig inner = cfg.sua;
  inner.seed = derive_seed(cfg.sua.seed, {r, detail::kSolverKey});
  auto res = sua_solve(std::span<const DiscreteMeasure>(sampled), inner);
  return {std::move(res.barycenter), res.value};
}

/// R independent repeats combined by linear averaging (an exact mixture with
/// weights 1/R per repeat) or, optionally, by keeping the repeat with the
/// lowest Frechet value against the full inputs.
inline RandomizedResult randomized_barycenter(std::span<const DiscreteMeasure> measures, const RandomizedConfig& cfg,
                                              std::size_t threads = 1) {
  cfg.sua.validate();
  if (measures.empty()) throw InvalidInput("no input measures");
  const std::size_t R = cfg.sua.repeats;
  RandomizedResult out;
  out.repeats.resize(R);
  out.repeat_values.resize(R);
  parallel_for(R, threads, [&](std::size_t r) {
    auto [mu, v] = randomized_repeat(measures, cfg, r);
    out.repeats[r] = std::move(mu);
    out.repeat_values[r] = v;
  });
  if (cfg.combine == Combine::best_of) {
    std::vector<double> f(R);
    parallel_for(R, threads, [&](std::size_t r) { f[r] = frechet_value(out.repeats[r], measures, cfg.p); });
    std::size_t best = 0;
    for (std::size_t r = 1; r < R; ++r)
      if (f[r] < f[best]) best = r;
    out.chosen = best;
    out.estimate = out.repeats[best];
  } else {
    out.estimate = mixture(out.repeats);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference values

struct ReferenceValue {
  double value = 0.0;
  /// "lp" for the exact optimum, "sua-best-of-10" for the high-effort heuristic.
  std::string label;
};

/// The exact optimum when the LP fits under the caps, else the best Frechet
/// value over 10 SUA restarts at S = M.
inline ReferenceValue reference_value(std::span<const DiscreteMeasure> measures, double p, std::uint64_t seed,
                                      const BarycenterOptions& lp_opts = {}, std::size_t threads = 1) {
  const double tuples = tuple_count(measures);
  bool lp_fits = tuples <= lp_opts.centroids.max_tuples;
  if (lp_fits)
    lp_fits = tuples * static_cast<double>(measures.size()) <= static_cast<double>(lp_opts.lp.max_nonzeros);
  if (lp_fits) {
    BarycenterOptions o = lp_opts;
    o.formulation = BarycenterFormulation::multimarginal;
    return {exact_barycenter(measures, p, o).value, "lp"};
  }
  if (p != 2.0) throw SizeCapExceeded("instance too large for the exact reference and SUA needs p = 2");
  bool uniform_equal = true;
  for (const auto& m : measures) uniform_equal &= is_uniform(m) && m.size() == measures.front().size();
  constexpr std::size_t kRestarts = 10;
  std::vector<double> f(kRestarts);
  if (uniform_equal) {
    std::vector<Matrix> Ys;
    for (const auto& m : measures) Ys.push_back(m.points);
    parallel_for(kRestarts, threads, [&](std::size_t r) {
      SuaConfig c;
      c.seed = derive_seed(seed, {r});
      f[r] = sua_solve(std::span<const Matrix>(Ys), c).value;
    });
  } else {
    // Non-uniform inputs: resample at S = max M and score on the full data.
    parallel_for(kRestarts, threads, [&](std::size_t r) {
      RandomizedConfig c;
      c.sua.seed = derive_seed(seed, {r});
      f[r] = frechet_value(randomized_repeat(measures, c, 0).first, measures, p);
    });
  }
  return {*std::min_element(f.begin(), f.end()), "sua-best-of-10"};
}

// ---------------------------------------------------------------------------
// Sweeps

struct ExperimentRecord {
  std::size_t S = 0;
  std::size_t R = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double frechet = 0.0;
  std::optional<double> rel_err;
  double runtime_ms = 0.0;
};

struct SweepConfig {
  std::vector<std::size_t> sample_sizes;
  std::vector<std::size_t> repeat_counts{1};
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  double p = 2.0;
  BarycenterSolver solver = BarycenterSolver::sua;
  Combine combine = Combine::linear_average;
  /// Template for the per-run solver settings; sample_size, repeats and seed
  /// are overwritten per cell.
  SuaConfig sua;
  BarycenterOptions exact;
  /// Supplied reference; computed when unset and `compute_reference` holds.
  std::optional<ReferenceValue> reference;
  bool compute_reference = true;
  /// Measure wall-clock time; off by default so output bytes are reproducible.
  bool timing = false;
  std::size_t threads = 0;
};

struct SweepResult {
  std::vector<ExperimentRecord> records;
  std::optional<ReferenceValue> reference;
};

inline SweepResult sweep(std::span<const DiscreteMeasure> measures, const SweepConfig& cfg) {
  if (cfg.sample_sizes.empty() || cfg.repeat_counts.empty() || cfg.repetitions == 0)
    throw InvalidInput("sweep needs at least one S, one R and one repetition");
  SweepResult out;
  out.reference = cfg.reference;
  if (!out.reference && cfg.compute_reference)
    out.reference = reference_value(measures, cfg.p, derive_seed(cfg.seed, {detail::kSolverKey}), cfg.exact,
                                    cfg.threads);
  // Canonical order (S, R, rep), fixed before dispatch.
  for (auto S : cfg.sample_sizes)
    for (auto R : cfg.repeat_counts)
      for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        ExperimentRecord rec;
        rec.S = S;
        rec.R = R;
        rec.rep = rep;
        rec.seed = derive_seed(cfg.seed, {S, R, rep});
        out.records.push_back(rec);
      }
  parallel_for(out.records.size(), cfg.threads, [&](std::size_t t) {
    ExperimentRecord& rec = out.records[t];
    const auto start = std::chrono::steady_clock::now();
    RandomizedConfig rc;
    rc.sua = cfg.sua;
    rc.sua.sample_size = rec.S;
    rc.sua.repeats = rec.R;
    rc.sua.seed = rec.seed;
    rc.sua.threads = 1;
    rc.solver = cfg.solver;
    rc.combine = cfg.combine;
    rc.p = cfg.p;
    rc.exact = cfg.exact;
    const auto res = randomized_barycenter(measures, rc);
    rec.frechet = frechet_value(res.estimate, measures, cfg.p);
    if (out.reference && out.reference->value > 0.0)
      rec.rel_err = (rec.frechet - out.reference->value) / out.reference->value;
    if (cfg.timing)
      rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });
  return out;
}

struct SummaryRow {
  std::size_t S = 0;
  std::size_t R = 0;
  double mean_err = 0.0;
  double sd_err = 0.0;
  std::size_t count = 0;
};

/// Mean and sample standard deviation of the relative error per (S, R) cell,
/// in first-appearance order. Falls back to the Frechet value when no
/// reference exists.
inline std::vector<SummaryRow> summarize(std::span<const ExperimentRecord> records) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> values;
  for (const auto& r : records) {
    std::size_t k = 0;
    while (k < rows.size() && !(rows[k].S == r.S && rows[k].R == r.R)) ++k;
    if (k == rows.size()) {
      rows.push_back({r.S, r.R, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[k].push_back(r.rel_err.value_or(r.frechet));
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& v = values[k];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    rows[k].mean_err = mean;
    rows[k].sd_err = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    rows[k].count = v.size();
  }
  return rows;
}

}  // namespace wbary
