#pragma once

// Explicit constants of the sampling bounds: the covering-number constant E
// for E[W_p^p(mu, mu^S)] <= diam^p E / sqrt(S), its closed Euclidean forms,
// the Frechet-gap bound obtained from it, the printed intro display for
// p = 2 on [0,1]^D, and the two-point binomial lower bound.

#include "common.hpp"
#include "measures.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace wbary {

namespace detail {

inline std::size_t greedy_cover(const Matrix& pts, double delta) {
  const Index n = pts.rows();
  if (n == 0) return 0;
  Vector dist(n);
  for (Index k = 0; k < n; ++k) dist[k] = (pts.row(k) - pts.row(0)).norm();
  std::size_t centers = 1;
  for (;;) {
    Index far = 0;
    const double worst = dist.maxCoeff(&far);
    if (worst <= delta) return centers;
    ++centers;
    for (Index k = 0; k < n; ++k) dist[k] = std::min(dist[k], (pts.row(k) - pts.row(far)).norm());
  }
}

inline std::size_t exact_cover(const Matrix& pts, double delta) {
  const auto n = static_cast<unsigned>(pts.rows());
  std::vector<std::uint32_t> reach(n, 0);
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j)
      if ((pts.row(i) - pts.row(j)).norm() <= delta) reach[i] |= 1u << j;
  const std::uint32_t all = (1u << n) - 1;
  // Smallest k for which some k-subset of centers reaches everything.
  for (unsigned k = 1; k < n; ++k) {
    std::vector<unsigned> pick(k);
    for (unsigned t = 0; t < k; ++t) pick[t] = t;
    for (;;) {
      std::uint32_t cov = 0;
      for (unsigned t : pick) cov |= reach[t];
      if (cov == all) return k;
      int t = static_cast<int>(k) - 1;
      while (t >= 0 && pick[static_cast<unsigned>(t)] == n - k + static_cast<unsigned>(t)) --t;
      if (t < 0) break;
      ++pick[static_cast<unsigned>(t)];
      for (unsigned u = static_cast<unsigned>(t) + 1; u < k; ++u) pick[u] = pick[u - 1] + 1;
    }
  }
  return n;
}

}  // namespace detail

/// Number of closed delta-balls centered at points of the set needed to cover
/// it: exact for at most 12 points, else the greedy farthest-point count
/// (an upper bound on the covering number).
inline std::size_t covering_number(const Matrix& pts, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("covering radius must be positive");
  if (pts.rows() <= 12) return detail::exact_cover(pts, delta);
  return detail::greedy_cover(pts, delta);
}

struct ConstantE {
  double value = 0.0;
  double q = 0.0;
  std::size_t lmax = 0;
};

inline const std::vector<double>& default_q_grid() {
  static const std::vector<double> grid{1.5, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return grid;
}

/// E(X, p) minimized over q in `q_grid` and l_max in 0..max_lmax. For p = 1
/// the factor (q/(q-1))^p is dropped.
inline ConstantE constant_E(const Matrix& pts, double p, std::span<const double> q_grid = default_q_grid(),
                            std::size_t max_lmax = 30) {
  if (pts.rows() == 0) throw InvalidInput("constant E of an empty set");
  const double M = static_cast<double>(pts.rows());
  const double diam = diameter(pts);
  ConstantE best;
  best.value = std::numeric_limits<double>::infinity();
  if (diam == 0.0) {
    // A single location: every empirical measure is exact.
    return {0.0, q_grid.empty() ? 2.0 : q_grid.front(), 0};
  }
  std::map<double, std::size_t> cache;
  auto cover = [&](double delta) {
    auto it = cache.find(delta);
    if (it != cache.end()) return it->second;
    return cache[delta] = covering_number(pts, delta);
  };
  const double lead = std::pow(2.0, p - 1.0);
  for (double q : q_grid) {
    if (!(q > 1.0)) throw InvalidInput("q must exceed 1");
    const double frac = p == 1.0 ? 1.0 : std::pow(q / (q - 1.0), p);
    double sum = 0.0;
    bool saturated = false;
    for (std::size_t l = 0; l <= max_lmax; ++l) {
      if (l > 0) {
        const double delta = std::pow(q, -static_cast<double>(l)) * diam;
        // Below the smallest gap every point needs its own ball.
        const double n = saturated ? M : static_cast<double>(cover(delta));
        saturated = saturated || n == M;
        sum += std::pow(q, -static_cast<double>(l) * p) * std::sqrt(n);
      }
      const double tail = std::pow(q, -static_cast<double>(l + 1) * p) * std::sqrt(M);
      const double v = lead * std::pow(q, p) * (tail + frac * sum);
      if (v < best.value) best = {v, q, l};
    }
  }
  return best;
}

/// Coefficient of S^{-1/2} in the closed Euclidean bound on E[W_p^p(mu, mu^S)]
/// for a set of M points in R^D with diameter `diam` and integer q >= 2.
inline double euclidean_bound(double p, double D, double M, double q, double diam) {
  if (q < 2.0 || q != std::floor(q)) throw InvalidInput("the Euclidean bound needs an integer q >= 2");
  const double pp = D / 2.0 - p;
  const double f = p == 1.0 ? 1.0 : std::pow(q / (q - 1.0), p);
  double branch;
  if (pp < 0.0) {
    branch = f * std::pow(q, pp) / (1.0 - std::pow(q, pp));
  } else if (pp == 0.0) {
    branch = 1.0 + f * std::log(M) / (D * std::log(q));
  } else {
    const double m = std::pow(M, 0.5 - p / D);
    branch = m + f * std::pow(q, pp) * m / (std::pow(q, pp) - 1.0);
  }
  return std::pow(D, p / 2.0) * std::pow(2.0, p - 1.0) * std::pow(diam, p) * std::pow(q, p) * branch;
}

/// (2p diam^p / N) sum_i E_i / sqrt(S_i) from per-measure constants E_i = E(supp mu_i, 1).
inline double frechet_gap_bound(double diam, std::span<const double> E, double p, std::span<const double> S) {
  if (E.size() != S.size() || E.empty()) throw InvalidInput("need one constant and one sample size per measure");
  double s = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i) s += E[i] / std::sqrt(S[i]);
  return 2.0 * p * std::pow(diam, p) * s / static_cast<double>(E.size());
}

/// Same, with E_i computed from the supports. A single entry in S applies to
/// every measure.
inline double frechet_gap_bound(std::span<const DiscreteMeasure> measures, double p, std::span<const double> S) {
  if (measures.empty()) throw InvalidInput("no measures");
  std::vector<double> E, SS;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    E.push_back(constant_E(measures[i].points, 1.0).value);
    SS.push_back(S.size() == 1 ? S[0] : S[i]);
  }
  return frechet_gap_bound(joint_diameter(measures), E, p, SS);
}

/// Frechet-gap coefficient of S^{-1/2} for measures on M points of [0,1]^D:
/// the gap bound with E(., 1) replaced by its closed form at q = 2 and
/// diam = sqrt(D). Gives 8 sqrt 2 (2 + log2 M) for D = 2 and p = 2.
inline double unit_cube_gap_coefficient(double D, double M, double p = 2.0) {
  const double E = euclidean_bound(1.0, D, M, 2.0, 1.0);
  const double one = 1.0;
  return frechet_gap_bound(std::sqrt(D), std::span<const double>(&E, 1), p, std::span<const double>(&one, 1));
}

/// The intro display for p = 2 on [0,1]^D, evaluated as printed:
/// 4 D^{3/2} S^{-1/2} times 2+sqrt2 (D=1), 2+log2 M (D=2), (3+sqrt2) M^{1/2-1/D} (D>=3).
inline double eq_p2_bound(double D, double M, double S) {
  if (D < 1.0) throw InvalidInput("dimension must be at least 1");
  double branch;
  if (D == 1.0)
    branch = 2.0 + std::numbers::sqrt2;
  else if (D == 2.0)
    branch = 2.0 + std::log2(M);
  else
    branch = (3.0 + std::numbers::sqrt2) * std::pow(M, 0.5 - 1.0 / D);
  return 4.0 * std::pow(D, 1.5) * branch / std::sqrt(S);
}

struct BinomialBound {
  /// E|K - S/2| / S for K ~ Bin(S, 1/2), which equals E[W_p^p(mu, mu^S)] for mu = (delta_0 + delta_1)/2.
  double exact = 0.0;
  /// sqrt(2) S^{-1/2} / 4.
  double closed = 0.0;
};

inline BinomialBound binomial_lower_bound(std::uint64_t S) {
  if (S == 0) throw InvalidInput("sample size must be positive");
  const double s = static_cast<double>(S);
  double e = 0.0;
  if (S <= 1000) {
    double pk = std::pow(0.5, s);
    for (std::uint64_t k = 0; k <= S; ++k) {
      if (k > 0) pk *= (s - static_cast<double>(k) + 1.0) / static_cast<double>(k);
      e += pk * std::abs(static_cast<double>(k) - s / 2.0);
    }
  } else {
    const double base = std::lgamma(s + 1.0) - s * std::numbers::ln2;
    for (std::uint64_t k = 0; k <= S; ++k) {
      const double kk = static_cast<double>(k);
      const double logp = base - std::lgamma(kk + 1.0) - std::lgamma(s - kk + 1.0);
      e += std::exp(logp) * std::abs(kk - s / 2.0);
    }
  }
  return {e / s, std::numbers::sqrt2 / (4.0 * std::sqrt(s))};
}

struct BoundReport {
  ConstantE E;
  double diameter = 0.0;
  /// diam^p E / sqrt(S).
  double empirical_upper = 0.0;
  std::optional<double> gap_bound;
  std::optional<double> eq_p2_verbatim;
  std::optional<double> composed;
  std::optional<BinomialBound> binomial;
};

}  // namespace wbary
