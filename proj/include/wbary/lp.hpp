#pragma once

// Exact linear programming at oracle scale, and the barycenter LP built on it.
//
// solve_lp is a two-phase revised simplex for  min c^T x  s.t.  A x = b, x >= 0.
// The basis is held as a sparse LU factorization plus product-form eta
// updates, refactorized every `refactor_interval` pivots. Pricing is
// block-partial Dantzig; long runs of degenerate pivots switch to Bland's rule
// until the objective moves again. Linearly dependent rows are tolerated:
// their artificials stay basic at zero.

#include "common.hpp"
#include "measures.hpp"
#include "ot.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wbary {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct LinearProgram {
  Vector cost;
  SparseMatrix constraints;  // m x n
  Vector rhs;                // m

  Index variables() const { return cost.size(); }
  Index rows() const { return rhs.size(); }
};

class LpInfeasible : public SolverError {
public:
  using SolverError::SolverError;
};

class LpUnbounded : public SolverError {
public:
  using SolverError::SolverError;
};

struct LpOptions {
  /// Oracle-scale guard on nonzeros of the constraint matrix.
  std::size_t max_nonzeros = 200000;
  std::size_t refactor_interval = 50;
  /// 0 picks max(20000, 20 (m + n)).
  std::size_t max_iterations = 0;
  double feasibility_tol = 1e-9;
  /// Entering threshold on reduced costs (scaled by max |c|).
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-9;
  /// Consecutive degenerate pivots before Bland's rule; 0 picks 10 m.
  std::size_t bland_after = 0;
};

struct LpSolution {
  Vector x;
  double objective = 0.0;
  /// Basic variable per row; indices >= n denote artificials kept at zero.
  std::vector<Index> basis;
  std::size_t iterations = 0;
  std::size_t bland_pivots = 0;
  /// max |A x - b|.
  double primal_residual = 0.0;
  /// min_j (c_j - y^T A_j) over all structural columns.
  double min_reduced_cost = 0.0;
};

namespace detail {

class RevisedSimplex {
public:
  RevisedSimplex(const LinearProgram& lp, const LpOptions& opts) : lp_(lp), opts_(opts) {
    m_ = lp.rows();
    n_ = lp.variables();
    if (lp.constraints.rows() != m_ || lp.constraints.cols() != n_)
      throw InvalidInput("LP constraint matrix has shape " + std::to_string(lp.constraints.rows()) +
                         "x" + std::to_string(lp.constraints.cols()) + ", expected " +
                         std::to_string(m_) + "x" + std::to_string(n_));
    if (!lp.rhs.allFinite() || !lp.cost.allFinite()) throw InvalidInput("LP data not finite");
    if (static_cast<std::size_t>(lp.constraints.nonZeros()) > opts.max_nonzeros)
      throw SizeCapExceeded("LP has " + std::to_string(lp.constraints.nonZeros()) +
                            " nonzeros (cap " + std::to_string(opts.max_nonzeros) + ")");
    // Flip rows so that b >= 0 and the artificial basis is feasible.
    sign_ = Vector::Ones(m_);
    for (Index r = 0; r < m_; ++r)
      if (lp.rhs[r] < 0) sign_[r] = -1.0;
    A_ = sign_.asDiagonal() * lp.constraints;
    A_.makeCompressed();
    b_ = sign_.cwiseProduct(lp.rhs);
    const double cmax = lp.cost.size() ? lp.cost.cwiseAbs().maxCoeff() : 0.0;
    dual_tol_ = opts.optimality_tol * std::max(1.0, cmax);
  }

  LpSolution solve() {
    LpSolution sol;
    if (m_ == 0) {
      // No constraints: bounded only if every cost is nonnegative.
      if (n_ > 0 && lp_.cost.minCoeff() < 0) throw LpUnbounded("LP unbounded (no constraints)");
      sol.x = Vector::Zero(n_);
      return sol;
    }
    iteration_cap_ = opts_.max_iterations ? opts_.max_iterations
                                          : std::max<std::size_t>(20000, 20 * static_cast<std::size_t>(m_ + n_));
    bland_after_ = opts_.bland_after ? opts_.bland_after : 10 * static_cast<std::size_t>(m_);

    basis_.resize(static_cast<std::size_t>(m_));
    position_.assign(static_cast<std::size_t>(n_ + m_), -1);
    for (Index r = 0; r < m_; ++r) {
      basis_[static_cast<std::size_t>(r)] = n_ + r;
      position_[static_cast<std::size_t>(n_ + r)] = r;
    }
    refactor();

    // Phase 1: minimize the sum of artificials.
    cost_ = Vector::Zero(n_ + m_);
    cost_.tail(m_).setOnes();
    phase_ = 1;
    iterate(sol);
    double infeas = 0.0;
    for (Index r = 0; r < m_; ++r)
      if (basis_[static_cast<std::size_t>(r)] >= n_) infeas += std::max(0.0, xB_[r]);
    if (infeas > opts_.feasibility_tol * std::max(1.0, b_.lpNorm<1>()))
      throw LpInfeasible("LP infeasible: phase-1 residual " + std::to_string(infeas));
    for (Index r = 0; r < m_; ++r)
      if (basis_[static_cast<std::size_t>(r)] >= n_) xB_[r] = 0.0;

    // Phase 2.
    cost_.head(n_) = lp_.cost;
    cost_.tail(m_).setZero();
    phase_ = 2;
    iterate(sol);

    sol.x = Vector::Zero(n_);
    for (Index r = 0; r < m_; ++r) {
      const Index j = basis_[static_cast<std::size_t>(r)];
      if (j < n_) sol.x[j] = std::max(0.0, xB_[r]);
    }
    sol.basis = basis_;
    sol.objective = lp_.cost.dot(sol.x);
    sol.primal_residual = (lp_.constraints * sol.x - lp_.rhs).cwiseAbs().maxCoeff();
    const Vector y = dual_prices();
    sol.min_reduced_cost = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n_; ++j) sol.min_reduced_cost = std::min(sol.min_reduced_cost, reduced_cost(j, y));
    if (n_ == 0) sol.min_reduced_cost = 0.0;
    return sol;
  }

private:
  struct Eta {
    Index row;
    Vector column;
  };

  void dense_column(Index j, Vector& out) const {
    out.setZero(m_);
    if (j >= n_) {
      out[j - n_] = 1.0;
      return;
    }
    for (SparseMatrix::InnerIterator it(A_, j); it; ++it) out[it.row()] = it.value();
  }

  void refactor() {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * m_));
    for (Index r = 0; r < m_; ++r) {
      const Index j = basis_[static_cast<std::size_t>(r)];
      if (j >= n_) {
        trip.emplace_back(static_cast<int>(j - n_), static_cast<int>(r), 1.0);
      } else {
        for (SparseMatrix::InnerIterator it(A_, j); it; ++it)
          trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(r), it.value());
      }
    }
    SparseMatrix B(m_, m_);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu_.analyzePattern(B);
    lu_.factorize(B);
    if (lu_.info() != Eigen::Success) throw SolverError("LP basis factorization failed (singular basis)");
    etas_.clear();
    xB_ = lu_.solve(b_);
    for (Index r = 0; r < m_; ++r)
      if (xB_[r] < 0 && xB_[r] > -opts_.feasibility_tol) xB_[r] = 0.0;
  }

  Vector ftran(Index j) const {
    Vector a;
    dense_column(j, a);
    Vector w = lu_.solve(a);
    for (const auto& e : etas_) {
      const double wr = w[e.row];
      if (wr == 0.0) continue;
      w += wr * e.column;
      w[e.row] = wr * e.column[e.row];
    }
    return w;
  }

  Vector dual_prices() const {
    Vector w(m_);
    for (Index r = 0; r < m_; ++r) w[r] = cost_[basis_[static_cast<std::size_t>(r)]];
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      // Only entry r of w^T E changes: (w^T E)_r = sum_i w_i eta_i.
      double s = 0.0;
      for (Index i = 0; i < m_; ++i) s += w[i] * it->column[i];
      w[it->row] = s;
    }
    return lu_.transpose().solve(w);
  }

  double reduced_cost(Index j, const Vector& y) const {
    if (j >= n_) return cost_[j] - y[j - n_];
    double d = cost_[j];
    for (SparseMatrix::InnerIterator it(A_, j); it; ++it) d -= y[it.row()] * it.value();
    return d;
  }

  // Entering structural column, or -1 at optimality.
  Index price(const Vector& y, bool bland) {
    if (bland) {
      for (Index j = 0; j < n_; ++j)
        if (position_[static_cast<std::size_t>(j)] < 0 && reduced_cost(j, y) < -dual_tol_) return j;
      return -1;
    }
    const Index block = std::max<Index>(64, static_cast<Index>(std::sqrt(static_cast<double>(n_))) * 2);
    Index best = -1, in_block = 0;
    double best_d = -dual_tol_;
    for (Index scanned = 0; scanned < n_; ++scanned) {
      const Index j = cursor_;
      cursor_ = cursor_ + 1 == n_ ? 0 : cursor_ + 1;
      if (position_[static_cast<std::size_t>(j)] < 0) {
        const double d = reduced_cost(j, y);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (++in_block == block) {
        if (best >= 0) return best;
        in_block = 0;
      }
    }
    return best;
  }

  void iterate(LpSolution& sol) {
    std::size_t degenerate_run = 0;
    cursor_ = 0;
    for (;;) {
      if (etas_.size() >= opts_.refactor_interval) refactor();
      const bool bland = degenerate_run > bland_after_;
      const Vector y = dual_prices();
      const Index q = price(y, bland);
      if (q < 0) return;
      if (sol.iterations >= iteration_cap_)
        throw SolverError("LP iteration cap " + std::to_string(iteration_cap_) + " reached");
      const Vector w = ftran(q);

      // Ratio test. Artificials still basic in phase 2 must stay at zero, so
      // any nonzero entry on their row blocks the step outright.
      Index leave = -1;
      if (phase_ == 2) {
        double best = 0.0;
        for (Index r = 0; r < m_; ++r) {
          if (basis_[static_cast<std::size_t>(r)] < n_) continue;
          if (std::abs(w[r]) > opts_.pivot_tol && std::abs(w[r]) > best) {
            best = std::abs(w[r]);
            leave = r;
          }
        }
      }
      double theta = 0.0;
      if (leave < 0) {
        // Harris two-pass: bound the step with relaxed feasibility, then take
        // the largest pivot (or lowest basic index under Bland) within it.
        double bound = std::numeric_limits<double>::infinity();
        for (Index r = 0; r < m_; ++r)
          if (w[r] > opts_.pivot_tol) bound = std::min(bound, (std::max(xB_[r], 0.0) + opts_.feasibility_tol) / w[r]);
        if (!std::isfinite(bound)) throw LpUnbounded("LP unbounded along column " + std::to_string(q));
        double best_pivot = 0.0;
        Index best_key = std::numeric_limits<Index>::max();
        for (Index r = 0; r < m_; ++r) {
          if (w[r] <= opts_.pivot_tol) continue;
          if (std::max(xB_[r], 0.0) / w[r] > bound) continue;
          const Index key = basis_[static_cast<std::size_t>(r)];
          if (bland ? key < best_key : w[r] > best_pivot) {
            best_pivot = w[r];
            best_key = key;
            leave = r;
          }
        }
        theta = std::max(0.0, xB_[leave] / w[leave]);
      }

      xB_ -= theta * w;
      xB_[leave] = theta;
      for (Index r = 0; r < m_; ++r)
        if (xB_[r] < 0 && xB_[r] > -opts_.feasibility_tol) xB_[r] = 0.0;

      Eta eta{leave, Vector(m_)};
      const double piv = w[leave];
      eta.column = -w / piv;
      eta.column[leave] = 1.0 / piv;
      etas_.push_back(std::move(eta));

      position_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = -1;
      basis_[static_cast<std::size_t>(leave)] = q;
      position_[static_cast<std::size_t>(q)] = leave;

      ++sol.iterations;
      if (bland) ++sol.bland_pivots;
      degenerate_run = theta * std::abs(reduced_cost(q, y)) <= 1e-15 ? degenerate_run + 1 : 0;
    }
  }

  const LinearProgram& lp_;
  LpOptions opts_;
  Index m_ = 0, n_ = 0;
  SparseMatrix A_;
  Vector b_, sign_, cost_, xB_;
  std::vector<Index> basis_;
  std::vector<Index> position_;
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  double dual_tol_ = 1e-10;
  std::size_t iteration_cap_ = 0, bland_after_ = 0;
  Index cursor_ = 0;
  int phase_ = 1;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts = {}) {
  detail::RevisedSimplex simplex(lp, opts);
  return simplex.solve();
}

// ---------------------------------------------------------------------------
// Barycenter LP

/// Variables: a_j for each support point j, then pi^(i)_{jk} blocks, measure
/// by measure, row-major in (j, k). Rows: for each measure i, |C| rows
/// sum_k pi^(i)_{jk} - a_j = 0 followed by M_i rows sum_j pi^(i)_{jk} = b^i_k.
struct BarycenterLp {
  LinearProgram lp;
  Matrix support;
  std::vector<Index> sizes;
  std::vector<Index> plan_offset;

  Index support_size() const { return support.rows(); }
  Index weight_var(Index j) const { return j; }
  Index plan_var(std::size_t i, Index j, Index k) const {
    return plan_offset[i] + j * sizes[i] + k;
  }
  Vector weights(const Vector& x) const { return x.head(support_size()); }
};

/// Variable and constraint counts of the explicit LP, with nonzeros.
struct BarycenterLpShape {
  double variables = 0;
  double constraints = 0;
  double nonzeros = 0;
};

inline BarycenterLpShape explicit_lp_shape(double support, std::span<const Index> sizes) {
  double sum = 0;
  for (auto m : sizes) sum += static_cast<double>(m);
  const auto N = static_cast<double>(sizes.size());
  return {support + support * sum, N * support + sum, N * support + 2.0 * support * sum};
}

inline BarycenterLp assemble_barycenter_lp(std::span<const DiscreteMeasure> measures, double p,
                                           const Matrix& support) {
  if (measures.empty()) throw InvalidInput("barycenter of zero measures");
  const Index C = support.rows();
  const auto N = measures.size();
  BarycenterLp out;
  out.support = support;
  Index vars = C, rows = 0;
  for (const auto& mu : measures) {
    if (mu.dim() != support.cols()) throw InvalidInput("support dimension differs from measures");
    out.sizes.push_back(mu.size());
    out.plan_offset.push_back(vars);
    vars += C * mu.size();
    rows += C + mu.size();
  }
  out.lp.cost = Vector::Zero(vars);
  out.lp.rhs = Vector::Zero(rows);
  std::vector<Eigen::Triplet<double>> trip;
  Index row0 = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& mu = measures[i];
    const Index M = mu.size();
    const CostMatrix cost = cost_matrix(support, mu.points, p);
    for (Index j = 0; j < C; ++j) {
      trip.emplace_back(static_cast<int>(row0 + j), static_cast<int>(out.weight_var(j)), -1.0);
      for (Index k = 0; k < M; ++k) {
        const Index v = out.plan_var(i, j, k);
        out.lp.cost[v] = cost.entries(j, k) / static_cast<double>(N);
        trip.emplace_back(static_cast<int>(row0 + j), static_cast<int>(v), 1.0);
        trip.emplace_back(static_cast<int>(row0 + C + k), static_cast<int>(v), 1.0);
      }
    }
    out.lp.rhs.segment(row0 + C, M) = mu.weights;
    row0 += C + M;
  }
  out.lp.constraints.resize(rows, vars);
  out.lp.constraints.setFromTriplets(trip.begin(), trip.end());
  out.lp.constraints.makeCompressed();
  return out;
}

enum class BarycenterFormulation {
  /// The LP over (pi^(1..N), a) with explicit weight variables.
  explicit_weights,
  /// Coupling over centroid tuples; only valid on the full centroid set.
  multimarginal,
};

struct BarycenterOptions {
  /// Support to optimize over; defaults to the p-centroid set.
  std::optional<Matrix> support;
  BarycenterFormulation formulation = BarycenterFormulation::explicit_weights;
  LpOptions lp;
  CentroidOptions centroids;
  /// Weights below this are dropped before renormalizing.
  double prune_below = 1e-9;
};

struct ExactBarycenter {
  DiscreteMeasure barycenter;
  /// Optimal F^p.
  double value = 0.0;
  BarycenterFormulation formulation = BarycenterFormulation::explicit_weights;
  Index candidate_support = 0;
  Index lp_variables = 0;
  Index lp_constraints = 0;
  std::size_t iterations = 0;
  double primal_residual = 0.0;
  double min_reduced_cost = 0.0;
};

namespace detail {

inline DiscreteMeasure pruned_measure(const Matrix& support, const Vector& a, double prune) {
  std::vector<Index> keep;
  for (Index j = 0; j < a.size(); ++j)
    if (a[j] >= prune) keep.push_back(j);
  if (keep.empty()) throw SolverError("barycenter LP returned no weight above the pruning threshold");
  Matrix pts(static_cast<Index>(keep.size()), support.cols());
  Vector w(static_cast<Index>(keep.size()));
  for (std::size_t t = 0; t < keep.size(); ++t) {
    pts.row(static_cast<Index>(t)) = support.row(keep[t]);
    w[static_cast<Index>(t)] = a[keep[t]];
  }
  return make_measure(std::move(pts), std::move(w));
}

inline std::string describe_size(double vars, double rows, double nnz, std::size_t cap) {
  return "barycenter LP would have " + std::to_string(static_cast<long long>(vars)) + " variables, " +
         std::to_string(static_cast<long long>(rows)) + " constraints and " +
         std::to_string(static_cast<long long>(nnz)) + " nonzeros (cap " + std::to_string(cap) + ")";
}

inline ExactBarycenter solve_explicit(std::span<const DiscreteMeasure> measures, double p,
                                      const Matrix& support, const BarycenterOptions& opts) {
  std::vector<Index> sizes;
  for (const auto& m : measures) sizes.push_back(m.size());
  const auto shape = explicit_lp_shape(static_cast<double>(support.rows()), sizes);
  if (shape.nonzeros > static_cast<double>(opts.lp.max_nonzeros))
    throw SizeCapExceeded(describe_size(shape.variables, shape.constraints, shape.nonzeros, opts.lp.max_nonzeros));
  const BarycenterLp blp = assemble_barycenter_lp(measures, p, support);
  const LpSolution sol = solve_lp(blp.lp, opts.lp);
  ExactBarycenter res;
  res.barycenter = pruned_measure(support, blp.weights(sol.x), opts.prune_below);
  res.value = sol.objective;
  res.formulation = BarycenterFormulation::explicit_weights;
  res.candidate_support = support.rows();
  res.lp_variables = blp.lp.variables();
  res.lp_constraints = blp.lp.rows();
  res.iterations = sol.iterations;
  res.primal_residual = sol.primal_residual;
  res.min_reduced_cost = sol.min_reduced_cost;
  return res;
}

inline ExactBarycenter solve_multimarginal(std::span<const DiscreteMeasure> measures, double p,
                                           const BarycenterOptions& opts) {
  const CentroidSet cs = centroid_set(measures, p, opts.centroids);
  const std::size_t T = cs.tuple_count();
  const auto N = measures.size();
  Index rows = 0;
  std::vector<Index> row_offset;
  for (const auto& m : measures) {
    row_offset.push_back(rows);
    rows += m.size();
  }
  const double nnz = static_cast<double>(T) * static_cast<double>(N);
  if (nnz > static_cast<double>(opts.lp.max_nonzeros))
    throw SizeCapExceeded(describe_size(static_cast<double>(T), static_cast<double>(rows), nnz, opts.lp.max_nonzeros));
  LinearProgram lp;
  lp.cost.resize(static_cast<Index>(T));
  lp.rhs.resize(rows);
  for (std::size_t i = 0; i < N; ++i) lp.rhs.segment(row_offset[i], measures[i].size()) = measures[i].weights;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(T * N);
  std::vector<Index> ks;
  for (std::size_t t = 0; t < T; ++t) {
    cs.decode(t, ks);
    const Index j = cs.tuple_to_point[t];
    double c = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      c += cost_from_squared(squared_distance(cs.points, j, measures[i].points, ks[i]), p);
      trip.emplace_back(static_cast<int>(row_offset[i] + ks[i]), static_cast<int>(t), 1.0);
    }
    lp.cost[static_cast<Index>(t)] = c / static_cast<double>(N);
  }
  lp.constraints.resize(rows, static_cast<Index>(T));
  lp.constraints.setFromTriplets(trip.begin(), trip.end());
  lp.constraints.makeCompressed();
  const LpSolution sol = solve_lp(lp, opts.lp);
  Vector a = Vector::Zero(cs.points.rows());
  for (std::size_t t = 0; t < T; ++t) a[cs.tuple_to_point[t]] += sol.x[static_cast<Index>(t)];
  ExactBarycenter res;
  res.barycenter = pruned_measure(cs.points, a, opts.prune_below);
  res.value = sol.objective;
  res.formulation = BarycenterFormulation::multimarginal;
  res.candidate_support = cs.points.rows();
  res.lp_variables = lp.variables();
  res.lp_constraints = lp.rows();
  res.iterations = sol.iterations;
  res.primal_residual = sol.primal_residual;
  res.min_reduced_cost = sol.min_reduced_cost;
  return res;
}

}  // namespace detail

/// Exact p-barycenter over `opts.support` (default: the centroid set).
inline ExactBarycenter exact_barycenter(std::span<const DiscreteMeasure> measures, double p,
                                        const BarycenterOptions& opts = {}) {
  if (measures.empty()) throw InvalidInput("barycenter of zero measures");
  if (opts.formulation == BarycenterFormulation::multimarginal) {
    if (opts.support) throw InvalidInput("the multimarginal formulation always uses the centroid set");
    return detail::solve_multimarginal(measures, p, opts);
  }
  if (opts.support) return detail::solve_explicit(measures, p, *opts.support, opts);
  const double tuples = tuple_count(measures);
  if (tuples > opts.centroids.max_tuples) {
    std::vector<Index> sizes;
    for (const auto& m : measures) sizes.push_back(m.size());
    const auto shape = explicit_lp_shape(tuples, sizes);
    throw SizeCapExceeded(detail::describe_size(shape.variables, shape.constraints, shape.nonzeros,
                                                opts.lp.max_nonzeros));
  }
  const CentroidSet cs = centroid_set(measures, p, opts.centroids);
  return detail::solve_explicit(measures, p, cs.points, opts);
}

/// The transportation problem as an explicit LP, variable (i, j) at i * n + j.
inline LinearProgram transport_lp(const Matrix& cost, const Vector& a, const Vector& b) {
  const Index m = cost.rows(), n = cost.cols();
  LinearProgram lp;
  lp.cost.resize(m * n);
  lp.rhs.resize(m + n);
  lp.rhs << a, b;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(2 * m * n));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      lp.cost[i * n + j] = cost(i, j);
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i * n + j), 1.0);
      trip.emplace_back(static_cast<int>(m + j), static_cast<int>(i * n + j), 1.0);
    }
  lp.constraints.resize(m + n, m * n);
  lp.constraints.setFromTriplets(trip.begin(), trip.end());
  lp.constraints.makeCompressed();
  return lp;
}

// ---------------------------------------------------------------------------
// Size arithmetic

using BigInt = boost::multiprecision::cpp_int;

struct LpSizeEstimate {
  BigInt centroids;
  BigInt variables;
  BigInt constraints;
};

/// Counts for the explicit barycenter LP: variables |C| sum M_i + |C|,
/// constraints sum_i (|C| + M_i). With `grid_side` s and p = 2 every measure
/// lives on the same s x s grid, M_i = s^2 and |C| = (N (s - 1) + 1)^2;
/// otherwise |C| = prod M_i.
inline LpSizeEstimate lp_size_estimate(std::size_t n_measures, std::span<const std::uint64_t> sizes,
                                       std::optional<std::uint64_t> grid_side, double p) {
  std::vector<BigInt> m;
  if (grid_side) {
    const BigInt side = *grid_side;
    m.assign(n_measures, side * side);
  } else {
    if (sizes.size() == 1) {
      m.assign(n_measures, BigInt(sizes[0]));
    } else {
      if (sizes.size() != n_measures) throw InvalidInput("need one support size per measure");
      for (auto s : sizes) m.emplace_back(s);
    }
  }
  LpSizeEstimate est;
  BigInt sum = 0;
  for (const auto& v : m) sum += v;
  if (grid_side && p == 2.0) {
    const BigInt side = *grid_side;
    const BigInt fine = BigInt(n_measures) * (side - 1) + 1;
    est.centroids = fine * fine;
  } else {
    est.centroids = 1;
    for (const auto& v : m) est.centroids *= v;
  }
  est.variables = est.centroids * sum + est.centroids;
  est.constraints = BigInt(n_measures) * est.centroids + sum;
  return est;
}

/// floor(log10(v)) for v > 0.
inline std::size_t decimal_exponent(const BigInt& v) { return v.str().size() - 1; }

}  // namespace wbary
