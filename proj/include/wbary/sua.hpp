#pragma once

// Free-support barycenter with uniform weights for p = 2.
//
// The positions X (S x D) move by subgradient steps on the Frechet functional
// restricted to uniform measures on S points. Against each input Y^i the
// optimal coupling of two uniform S-point measures is a permutation, so the
// subgradient is V_i = 2 (X - P_i) with P_i the rows of Y^i in matched order.
// A step of 1/2 lands on the average of the P_i, the Lloyd-type fixed point.

#include "common.hpp"
#include "measures.hpp"
#include "ot.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <charconv>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wbary {

/// Step sizes alpha_n: constant, or a / (b + n).
struct StepSchedule {
  enum class Kind { constant, harmonic };
  Kind kind = Kind::constant;
  double alpha = 0.5;
  double a = 1.0;
  double b = 2.0;

  static StepSchedule constant(double alpha) {
    if (!(alpha > 0.0)) throw InvalidInput("constant step must be positive");
    return {Kind::constant, alpha, 1.0, 2.0};
  }
  static StepSchedule harmonic(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("harmonic step needs a > 0 and b > 0");
    return {Kind::harmonic, 0.5, a, b};
  }

  double at(std::size_t n) const { return kind == Kind::constant ? alpha : a / (b + static_cast<double>(n)); }

  /// Parses "constant:0.5", "harmonic:1,2" or a bare number.
  static StepSchedule parse(std::string_view text) {
    auto number = [&](std::string_view s) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidInput("bad step schedule: " + std::string(text));
      return v;
    };
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) return constant(number(text));
    const auto name = text.substr(0, colon), rest = text.substr(colon + 1);
    if (name == "constant") return constant(number(rest));
    if (name == "harmonic") {
      const auto comma = rest.find(',');
      if (comma == std::string_view::npos) throw InvalidInput("harmonic schedule needs a,b");
      return harmonic(number(rest.substr(0, comma)), number(rest.substr(comma + 1)));
    }
    throw InvalidInput("unknown step schedule: " + std::string(name));
  }

  std::string describe() const {
    if (kind == Kind::constant) return "constant:" + std::to_string(alpha);
    return "harmonic:" + std::to_string(a) + "," + std::to_string(b);
  }
};

struct SuaConfig {
  /// Atoms per resampled measure; 0 means "use the input size".
  std::size_t sample_size = 0;
  std::size_t repeats = 1;
  StepSchedule schedule;
  /// Stochastic warmstart steps; unset means 2N.
  std::optional<std::size_t> warmstart_steps;
  std::size_t max_iters = 500;
  /// Stop once no row moves more than tol times the data scale.
  double tol = 1e-7;
  std::size_t max_halvings = 20;
  /// Independent starts per solve; the lowest value wins.
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  /// Workers for the N assignments inside a step.
  std::size_t threads = 1;

  void validate() const {
    if (repeats < 1) throw InvalidInput("repeats must be at least 1");
    if (restarts < 1) throw InvalidInput("restarts must be at least 1");
    if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  }
};

struct SuaState {
  Matrix X;
  std::size_t iteration = 0;
  /// (1/N) sum_i W_2^2(uniform(X), uniform(Y^i)).
  double value = std::numeric_limits<double>::infinity();
  /// Largest row movement of the last accepted step.
  double displacement = std::numeric_limits<double>::infinity();
};

struct SuaResult {
  DiscreteMeasure barycenter;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t halvings = 0;
  std::size_t best_restart = 0;
};

/// Rows of Y reordered by the optimal matching to X.
inline Matrix barycentric_projection(const Matrix& X, const Matrix& Y) {
  const Assignment a = solve_assignment(X, Y, 2.0);
  Matrix P(X.rows(), X.cols());
  for (Index k = 0; k < X.rows(); ++k) P.row(k) = Y.row(a.permutation[static_cast<std::size_t>(k)]);
  return P;
}

namespace detail {

struct Projections {
  std::vector<Matrix> P;
  double value = 0.0;
};

inline Projections project_all(const Matrix& X, std::span<const Matrix> Ys, std::size_t threads) {
  Projections out;
  out.P.resize(Ys.size());
  std::vector<double> values(Ys.size());
  parallel_for(Ys.size(), threads, [&](std::size_t i) {
    const Assignment a = solve_assignment(X, Ys[i], 2.0);
    Matrix P(X.rows(), X.cols());
    for (Index k = 0; k < X.rows(); ++k) P.row(k) = Ys[i].row(a.permutation[static_cast<std::size_t>(k)]);
    out.P[i] = std::move(P);
    values[i] = a.value;
  });
  for (double v : values) out.value += v;
  out.value /= static_cast<double>(Ys.size());
  return out;
}

inline Matrix mean_of(const std::vector<Matrix>& P) {
  Matrix m = P.front();
  for (std::size_t i = 1; i < P.size(); ++i) m += P[i];
  return m / static_cast<double>(P.size());
}

inline double max_row_shift(const Matrix& A, const Matrix& B) {
  return (A - B).rowwise().norm().maxCoeff();
}

/// Diagonal of the bounding box of all inputs; within a factor sqrt(D) of the
/// diameter and linear-time.
inline double data_scale(std::span<const Matrix> Ys) {
  Eigen::RowVectorXd lo = Ys.front().colwise().minCoeff(), hi = Ys.front().colwise().maxCoeff();
  for (const auto& Y : Ys) {
    lo = lo.cwiseMin(Y.colwise().minCoeff());
    hi = hi.cwiseMax(Y.colwise().maxCoeff());
  }
  return (hi - lo).norm();
}

inline void check_supports(std::span<const Matrix> Ys) {
  if (Ys.empty()) throw InvalidInput("no input measures");
  for (const auto& Y : Ys)
    if (Y.rows() != Ys.front().rows() || Y.cols() != Ys.front().cols())
      throw InvalidInput("all inputs need the same number of atoms and dimension (got " +
                         std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()) + " vs " +
                         std::to_string(Ys.front().rows()) + "x" + std::to_string(Ys.front().cols()) + ")");
}

}  // namespace detail

/// One full step X <- X - (alpha / N) sum_i 2 (X - P_i). The returned state
/// carries the value at the new positions.
inline SuaState sua_step(const SuaState& state, std::span<const Matrix> Ys, double alpha, std::size_t threads = 1) {
  detail::check_supports(Ys);
  const auto here = detail::project_all(state.X, Ys, threads);
  SuaState next;
  next.X = state.X + 2.0 * alpha * (detail::mean_of(here.P) - state.X);
  next.iteration = state.iteration + 1;
  next.value = detail::project_all(next.X, Ys, threads).value;
  next.displacement = detail::max_row_shift(next.X, state.X);
  return next;
}

/// Starting positions: the support of a uniformly chosen input, then `steps`
/// stochastic steps X <- X - (1/2N) V_i on single uniformly chosen inputs.
inline Matrix warmstart(std::span<const Matrix> Ys, std::size_t steps, std::uint64_t seed) {
  detail::check_supports(Ys);
  Rng rng(seed);
  Matrix X = Ys[rng.below(Ys.size())];
  const double N = static_cast<double>(Ys.size());
  for (std::size_t t = 0; t < steps; ++t) {
    const Matrix& Y = Ys[rng.below(Ys.size())];
    X += (barycentric_projection(X, Y) - X) / N;
  }
  return X;
}

namespace detail {

inline SuaResult sua_single(std::span<const Matrix> Ys, const SuaConfig& cfg, std::uint64_t seed) {
  const std::size_t W = cfg.warmstart_steps.value_or(2 * Ys.size());
  const double stop = cfg.tol * std::max(data_scale(Ys), std::numeric_limits<double>::min());
  SuaResult res;
  Matrix X = warmstart(Ys, W, seed);
  Projections cur = project_all(X, Ys, cfg.threads);
  for (std::size_t n = 0; n < cfg.max_iters; ++n) {
    const Matrix target = mean_of(cur.P);
    double alpha = cfg.schedule.at(n);
    Matrix cand;
    Projections at_cand;
    std::size_t halvings = 0;
    for (;;) {
      cand = X + 2.0 * alpha * (target - X);
      at_cand = project_all(cand, Ys, cfg.threads);
      if (at_cand.value <= cur.value + 1e-12 * std::max(1.0, cur.value)) break;
      if (halvings == cfg.max_halvings) break;
      alpha *= 0.5;
      ++halvings;
    }
    res.halvings += halvings;
    res.iterations = n + 1;
    if (at_cand.value > cur.value + 1e-12 * std::max(1.0, cur.value)) break;
    const double shift = max_row_shift(cand, X);
    X = std::move(cand);
    cur = std::move(at_cand);
    if (shift < stop) {
      res.converged = true;
      break;
    }
  }
  res.barycenter = uniform_measure(std::move(X));
  res.value = cur.value;
  return res;
}

}  // namespace detail

/// Uniform barycenter on S points of uniform inputs given as S x D arrays.
inline SuaResult sua_solve(std::span<const Matrix> Ys, const SuaConfig& cfg) {
  cfg.validate();
  detail::check_supports(Ys);
  SuaResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    SuaResult cur = detail::sua_single(Ys, cfg, derive_seed(cfg.seed, {r}));
    if (cur.value < best.value) {
      best = std::move(cur);
      best.best_restart = r;
    }
  }
  return best;
}

/// Same, for uniform DiscreteMeasures with equal support counts.
inline SuaResult sua_solve(std::span<const DiscreteMeasure> measures, const SuaConfig& cfg) {
  std::vector<Matrix> Ys;
  Ys.reserve(measures.size());
  for (const auto& m : measures) {
    if (!is_uniform(m)) throw InvalidInput("SUA needs uniform-weight inputs");
    Ys.push_back(m.points);
  }
  return sua_solve(std::span<const Matrix>(Ys), cfg);
}

}  // namespace wbary
