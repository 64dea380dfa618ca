#pragma once

// Finitely supported probability measures on R^D: construction, empirical
// resampling, centroid sets and diameters.

#include "common.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace wbary {

/// Atoms are the rows of `points`; `weights` sum to one.
struct DiscreteMeasure {
  Matrix points;
  Vector weights;
  /// Weight sum seen at construction, before renormalization.
  double input_mass = 1.0;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }

  /// True when the input weights were off from one by more than 1e-6.
  bool mass_flagged() const { return std::abs(input_mass - 1.0) > 1e-6; }
};

/// Tolerance below which input weights are treated as zero (slightly negative
/// values come from upstream rounding).
inline constexpr double kNegativeWeightTolerance = 1e-12;

inline DiscreteMeasure make_measure(Matrix points, Vector weights) {
  if (points.rows() == 0 || points.cols() == 0) throw InvalidInput("empty measure");
  if (points.rows() != weights.size())
    throw InvalidInput("measure has " + std::to_string(points.rows()) + " points but " +
                       std::to_string(weights.size()) + " weights");
  if (!points.allFinite()) throw InvalidInput("non-finite coordinate");
  if (!weights.allFinite()) throw InvalidInput("non-finite weight");
  for (Index k = 0; k < weights.size(); ++k) {
    if (weights[k] < -kNegativeWeightTolerance)
      throw InvalidInput("negative weight " + std::to_string(weights[k]) + " at atom " +
                         std::to_string(k));
    weights[k] = std::max(weights[k], 0.0);
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw InvalidInput("degenerate weights: all zero");
  DiscreteMeasure mu;
  mu.points = std::move(points);
  mu.weights = weights / total;
  mu.input_mass = total;
  return mu;
}

inline DiscreteMeasure uniform_measure(Matrix points) {
  const Index m = points.rows();
  return make_measure(std::move(points), Vector::Constant(m, 1.0));
}

inline bool is_uniform(const DiscreteMeasure& mu, double tol = 1e-12) {
  const double w = 1.0 / static_cast<double>(mu.size());
  return ((mu.weights.array() - w).abs() <= tol).all();
}

/// S i.i.d. draws from a parent measure, kept as S rows (duplicates included).
struct EmpiricalMeasure {
  DiscreteMeasure measure;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
};

inline Matrix draw_atoms(const DiscreteMeasure& mu, std::size_t count, Rng& rng) {
  std::vector<double> cdf(static_cast<std::size_t>(mu.size()));
  std::partial_sum(mu.weights.data(), mu.weights.data() + mu.size(), cdf.begin());
  const double total = cdf.back();
  Matrix out(static_cast<Index>(count), mu.dim());
  for (std::size_t s = 0; s < count; ++s) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Skip zero-weight atoms sitting at the same cumulative value.
    if (it == cdf.end()) it = std::prev(cdf.end());
    auto k = static_cast<Index>(it - cdf.begin());
    while (mu.weights[k] <= 0.0 && k > 0) --k;
    out.row(static_cast<Index>(s)) = mu.points.row(k);
  }
  return out;
}

inline EmpiricalMeasure sample_empirical(const DiscreteMeasure& mu, std::size_t sample_size,
                                         std::uint64_t seed) {
  if (sample_size == 0) throw InvalidInput("sample size must be positive");
  Rng rng(seed);
  EmpiricalMeasure e;
  e.measure.points = draw_atoms(mu, sample_size, rng);
  e.measure.weights = Vector::Constant(static_cast<Index>(sample_size),
                                       1.0 / static_cast<double>(sample_size));
  e.sample_size = sample_size;
  e.seed = seed;
  return e;
}

/// Indices of the first representative for each point, merging points whose
/// coordinates all agree within `tol`. Returns (representative rows, map).
inline std::pair<std::vector<Index>, std::vector<Index>> merge_duplicate_rows(const Matrix& pts,
                                                                              double tol) {
  const Index n = pts.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return pts(a, 0) < pts(b, 0); });
  std::vector<Index> rep_of(static_cast<std::size_t>(n), -1);
  std::vector<Index> reps;
  // Sorted by the first coordinate: candidates lie in a trailing window.
  std::vector<Index> window_reps;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Index r = order[pos];
    Index found = -1;
    for (auto it = window_reps.rbegin(); it != window_reps.rend(); ++it) {
      const Index c = reps[static_cast<std::size_t>(*it)];
      if (pts(r, 0) - pts(c, 0) > tol) break;
      if (((pts.row(r) - pts.row(c)).array().abs() <= tol).all()) {
        found = *it;
        break;
      }
    }
    if (found < 0) {
      found = static_cast<Index>(reps.size());
      reps.push_back(r);
      window_reps.push_back(found);
    }
    rep_of[static_cast<std::size_t>(r)] = found;
  }
  // Renumber representatives in first-appearance order of the original rows.
  std::vector<Index> renumber(reps.size(), -1);
  std::vector<Index> first_rows;
  for (Index r = 0; r < n; ++r) {
    auto& slot = renumber[static_cast<std::size_t>(rep_of[static_cast<std::size_t>(r)])];
    if (slot < 0) {
      slot = static_cast<Index>(first_rows.size());
      first_rows.push_back(r);
    }
    rep_of[static_cast<std::size_t>(r)] = slot;
  }
  return {first_rows, rep_of};
}

/// Merges atoms closer than `tol` (max-norm), summing their weights.
inline DiscreteMeasure compact(const DiscreteMeasure& mu, double tol = 1e-10) {
  auto [reps, map] = merge_duplicate_rows(mu.points, tol);
  DiscreteMeasure out;
  out.points.resize(static_cast<Index>(reps.size()), mu.dim());
  out.weights = Vector::Zero(static_cast<Index>(reps.size()));
  for (std::size_t j = 0; j < reps.size(); ++j) out.points.row(static_cast<Index>(j)) = mu.points.row(reps[j]);
  for (Index k = 0; k < mu.size(); ++k) out.weights[map[static_cast<std::size_t>(k)]] += mu.weights[k];
  return out;
}

/// Linear average (1/R) sum_r mu_r as a mixture: supports concatenated.
inline DiscreteMeasure mixture(std::span<const DiscreteMeasure> parts) {
  if (parts.empty()) throw InvalidInput("mixture of zero measures");
  Index rows = 0;
  for (const auto& m : parts) {
    if (m.dim() != parts.front().dim()) throw InvalidInput("mixture dimension mismatch");
    rows += m.size();
  }
  DiscreteMeasure out;
  out.points.resize(rows, parts.front().dim());
  out.weights.resize(rows);
  const double share = 1.0 / static_cast<double>(parts.size());
  Index at = 0;
  for (const auto& m : parts) {
    out.points.middleRows(at, m.size()) = m.points;
    out.weights.segment(at, m.size()) = m.weights * share;
    at += m.size();
  }
  return out;
}

/// Largest pairwise Euclidean distance (exact O(M^2) scan).
inline double diameter(const Matrix& pts) {
  double best = 0.0;
  for (Index i = 0; i < pts.rows(); ++i)
    for (Index j = i + 1; j < pts.rows(); ++j) best = std::max(best, squared_distance(pts, i, pts, j));
  return std::sqrt(best);
}

inline double diameter(const DiscreteMeasure& mu) { return diameter(mu.points); }

/// Diameter of the union of the supports.
inline double joint_diameter(std::span<const DiscreteMeasure> measures) {
  Index rows = 0;
  for (const auto& m : measures) rows += m.size();
  Matrix all(rows, measures.front().dim());
  Index at = 0;
  for (const auto& m : measures) {
    all.middleRows(at, m.size()) = m.points;
    at += m.size();
  }
  return diameter(all);
}

// ---------------------------------------------------------------------------
// Centroids

/// argmin_y sum_i |x_i - y|^p over the rows of `pts`.
///
/// p = 2 is the mean. p = 1 runs Weiszfeld iterations with the coincidence
/// test (up to 2000 iterations, step below 1e-13); other p run damped Newton
/// from the mean (50 iterations, step below 1e-10).
inline Eigen::RowVectorXd centroid_of(const Matrix& pts, double p) {
  const Index n = pts.rows();
  Eigen::RowVectorXd y = pts.colwise().mean();
  if (p == 2.0 || n == 1) return y;
  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-10;
  constexpr double kCoincide = 1e-12;

  if (p == 1.0) {
    // Weiszfeld converges only linearly.
    for (int it = 0; it < 40 * kMaxIter; ++it) {
      Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(pts.cols());
      Eigen::RowVectorXd pull = Eigen::RowVectorXd::Zero(pts.cols());
      double den = 0.0;
      int coincident = 0;
      for (Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd r = pts.row(i) - y;
        const double d = r.norm();
        if (d < kCoincide) {
          ++coincident;
          continue;
        }
        num += pts.row(i) / d;
        den += 1.0 / d;
        pull += r / d;
      }
      if (coincident > 0 && pull.norm() <= static_cast<double>(coincident)) return y;
      if (den == 0.0) return y;
      Eigen::RowVectorXd next = num / den;
      if (coincident > 0) {
        // Vardi-Zhang step away from a data point that is not optimal.
        const Eigen::RowVectorXd t = next;
        const double gamma = std::min(1.0, static_cast<double>(coincident) / pull.norm());
        next = (1.0 - gamma) * t + gamma * y;
      }
      const double step = (next - y).norm();
      y = next;
      if (step < 1e-3 * kTol) break;
    }
    return y;
  }

  auto objective = [&](const Eigen::RowVectorXd& c) {
    double f = 0.0;
    for (Index i = 0; i < n; ++i) f += std::pow((pts.row(i) - c).norm(), p);
    return f;
  };
  const Index D = pts.cols();
  double f = objective(y);
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(D);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
    for (Index i = 0; i < n; ++i) {
      const Eigen::RowVectorXd r = y - pts.row(i);
      const double d = std::max(r.norm(), kCoincide);
      const double w = p * std::pow(d, p - 2.0);
      g += w * r;
      H += w * Eigen::MatrixXd::Identity(D, D) +
           w * (p - 2.0) * (r.transpose() * r) / (d * d);
    }
    if (g.norm() == 0.0) break;
    Eigen::RowVectorXd dir = -H.ldlt().solve(g.transpose()).transpose();
    if (!dir.allFinite() || dir.dot(g) >= 0.0) dir = -g;
    double t = 1.0;
    Eigen::RowVectorXd next = y + t * dir;
    double fn = objective(next);
    while (fn > f && t > 1e-12) {
      t *= 0.5;
      next = y + t * dir;
      fn = objective(next);
    }
    if (fn > f) break;
    const double step = (next - y).norm();
    y = next;
    f = fn;
    if (step < kTol) break;
  }
  return y;
}

struct CentroidOptions {
  /// Refuse when prod_i M_i exceeds this.
  double max_tuples = 1e7;
  /// Centroids closer than this (max-norm) are merged.
  double merge_tolerance = 1e-10;
};

/// The p-centroid set together with the tuple -> centroid map. Tuples are
/// enumerated with the first measure's index varying slowest.
struct CentroidSet {
  Matrix points;
  std::vector<Index> sizes;          // M_i
  std::vector<Index> tuple_to_point; // length prod M_i

  std::size_t tuple_count() const { return tuple_to_point.size(); }

  /// Decodes a tuple number into per-measure atom indices.
  void decode(std::size_t tuple, std::vector<Index>& ks) const {
    ks.resize(sizes.size());
    for (std::size_t i = sizes.size(); i-- > 0;) {
      ks[i] = static_cast<Index>(tuple % static_cast<std::size_t>(sizes[i]));
      tuple /= static_cast<std::size_t>(sizes[i]);
    }
  }
};

inline double tuple_count(std::span<const DiscreteMeasure> measures) {
  double n = 1.0;
  for (const auto& m : measures) n *= static_cast<double>(m.size());
  return n;
}

inline CentroidSet centroid_set(std::span<const DiscreteMeasure> measures, double p,
                                const CentroidOptions& opts = {}) {
  if (measures.empty()) throw InvalidInput("centroid set of zero measures");
  if (!(p >= 1.0)) throw InvalidInput("exponent p must be >= 1");
  const Index D = measures.front().dim();
  for (const auto& m : measures)
    if (m.dim() != D) throw InvalidInput("measures live in different dimensions");
  const double count = tuple_count(measures);
  if (count > opts.max_tuples)
    throw SizeCapExceeded("centroid set would enumerate " + std::to_string(count) +
                          " tuples (cap " + std::to_string(opts.max_tuples) + ")");

  CentroidSet cs;
  for (const auto& m : measures) cs.sizes.push_back(m.size());
  const auto total = static_cast<std::size_t>(count);
  const auto N = static_cast<Index>(measures.size());
  Matrix raw(static_cast<Index>(total), D);
  std::vector<Index> ks;
  Matrix tuple_pts(N, D);
  for (std::size_t t = 0; t < total; ++t) {
    cs.decode(t, ks);
    for (Index i = 0; i < N; ++i) tuple_pts.row(i) = measures[static_cast<std::size_t>(i)].points.row(ks[static_cast<std::size_t>(i)]);
    raw.row(static_cast<Index>(t)) = centroid_of(tuple_pts, p);
  }
  auto [reps, map] = merge_duplicate_rows(raw, opts.merge_tolerance);
  cs.points.resize(static_cast<Index>(reps.size()), D);
  for (std::size_t j = 0; j < reps.size(); ++j) cs.points.row(static_cast<Index>(j)) = raw.row(reps[j]);
  cs.tuple_to_point = std::move(map);
  return cs;
}

}  // namespace wbary
