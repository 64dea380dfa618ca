#pragma once

// Exact discrete optimal transport.
//
// solve_transport is a primal transportation simplex on the bipartite
// spanning-tree basis: Vogel initialization, block-search pricing, and a
// Bland's-rule fallback once a run of degenerate pivots grows beyond
// 10 (M1 + M2). solve_assignment is a shortest-augmenting-path Hungarian
// method for the uniform equal-size case.

#include "common.hpp"
#include "measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace wbary {

/// c[j][k] = |x_j - y_k|^p.
struct CostMatrix {
  Matrix entries;
  double p = 2.0;
};

inline CostMatrix cost_matrix(const Matrix& X, const Matrix& Y, double p) {
  if (X.cols() != Y.cols()) throw InvalidInput("cost matrix: point dimensions differ");
  if (!(p >= 1.0)) throw InvalidInput("exponent p must be >= 1");
  CostMatrix c;
  c.p = p;
  c.entries.resize(X.rows(), Y.rows());
  for (Index j = 0; j < X.rows(); ++j)
    for (Index k = 0; k < Y.rows(); ++k) c.entries(j, k) = cost_from_squared(squared_distance(X, j, Y, k), p);
  return c;
}

struct TransportPlan {
  struct Entry {
    Index source;
    Index target;
    double mass;
  };
  /// Basic cells of the final basis; a few may carry zero mass.
  std::vector<Entry> entries;
  Vector source_marginal;
  Vector target_marginal;

  Matrix dense() const {
    Matrix out = Matrix::Zero(source_marginal.size(), target_marginal.size());
    for (const auto& e : entries) out(e.source, e.target) += e.mass;
    return out;
  }

  std::size_t support_size(double tol = 1e-9) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.mass > tol; }));
  }
};

struct OtResult {
  TransportPlan plan;
  /// sum_jk pi_jk c_jk, i.e. W_p^p when c = d^p.
  double value = 0.0;
  /// Dual potentials: c_jk - u_j - v_k >= min_reduced_cost for every cell.
  Vector u;
  Vector v;
  double min_reduced_cost = 0.0;
  std::size_t pivots = 0;
  std::size_t bland_pivots = 0;
};

struct TransportOptions {
  /// Certification threshold on reduced costs.
  double optimality_tol = 1e-7;
  /// 0 picks a size-dependent cap.
  std::size_t max_pivots = 0;
};

namespace detail {

class TransportSimplex {
public:
  TransportSimplex(const Matrix& cost, const Vector& a, const Vector& b)
      : c_(cost), a_(a), b_(b), m_(cost.rows()), n_(cost.cols()) {}

  OtResult run(const TransportOptions& opts) {
    const double cmax = c_.size() ? c_.cwiseAbs().maxCoeff() : 0.0;
    eps_ = 1e-12 * std::max(1.0, cmax);
    initial_basis();
    build_adjacency();
    const std::size_t cap =
        opts.max_pivots ? opts.max_pivots
                        : std::max<std::size_t>(100000, 50 * static_cast<std::size_t>(m_ * n_));
    const std::size_t bland_after = 10 * static_cast<std::size_t>(m_ + n_);
    std::size_t degenerate_run = 0;
    OtResult res;
    cursor_ = 0;
    for (;;) {
      compute_tree();
      const bool bland = degenerate_run > bland_after;
      Index cell = bland ? price_bland() : price_block();
      if (cell < 0) break;
      if (res.pivots >= cap)
        throw SolverError("transport simplex: pivot cap " + std::to_string(cap) +
                          " reached (cycling guard)");
      const double theta = pivot(cell / n_, cell % n_, bland);
      ++res.pivots;
      if (bland) ++res.bland_pivots;
      degenerate_run = theta <= 1e-14 ? degenerate_run + 1 : 0;
    }
    res.u = pot_.head(m_);
    res.v = pot_.tail(n_);
    res.min_reduced_cost = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m_; ++i)
      for (Index j = 0; j < n_; ++j)
        res.min_reduced_cost = std::min(res.min_reduced_cost, c_(i, j) - pot_[i] - pot_[m_ + j]);
    if (res.min_reduced_cost < -opts.optimality_tol * std::max(1.0, cmax))
      throw SolverError("transport simplex: dual certificate failed, min reduced cost " +
                        std::to_string(res.min_reduced_cost));
    res.plan.source_marginal = a_;
    res.plan.target_marginal = b_;
    res.value = 0.0;
    for (const auto& arc : arcs_) {
      res.plan.entries.push_back({arc.row, arc.col, arc.flow});
      res.value += arc.flow * c_(arc.row, arc.col);
    }
    return res;
  }

private:
  struct Arc {
    Index row;
    Index col;
    double flow;
  };

  // Vogel's approximation. Each allocation retires exactly one line (both on
  // the final one), which yields a spanning tree of m + n - 1 basic cells.
  void initial_basis() {
    std::vector<double> supply(a_.data(), a_.data() + m_);
    std::vector<double> demand(b_.data(), b_.data() + n_);
    std::vector<char> row_live(static_cast<std::size_t>(m_), 1), col_live(static_cast<std::size_t>(n_), 1);
    Index rows_left = m_, cols_left = n_;
    arcs_.clear();
    arcs_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
    const bool cheap = static_cast<double>(m_) * static_cast<double>(n_) * static_cast<double>(m_ + n_) > 4e8;
    constexpr double inf = std::numeric_limits<double>::infinity();

    auto two_smallest_row = [&](Index i, Index& arg) {
      double s1 = inf, s2 = inf;
      arg = -1;
      for (Index j = 0; j < n_; ++j) {
        if (!col_live[static_cast<std::size_t>(j)]) continue;
        const double v = c_(i, j);
        if (v < s1) {
          s2 = s1;
          s1 = v;
          arg = j;
        } else if (v < s2) {
          s2 = v;
        }
      }
      return std::pair{s1, s2};
    };
    auto two_smallest_col = [&](Index j, Index& arg) {
      double s1 = inf, s2 = inf;
      arg = -1;
      for (Index i = 0; i < m_; ++i) {
        if (!row_live[static_cast<std::size_t>(i)]) continue;
        const double v = c_(i, j);
        if (v < s1) {
          s2 = s1;
          s1 = v;
          arg = i;
        } else if (v < s2) {
          s2 = v;
        }
      }
      return std::pair{s1, s2};
    };

    Index scan_row = 0;
    while (rows_left > 0 && cols_left > 0) {
      Index bi = -1, bj = -1;
      if (cheap) {
        // Row-minimum rule for very large instances.
        while (!row_live[static_cast<std::size_t>(scan_row)]) ++scan_row;
        bi = scan_row;
        two_smallest_row(bi, bj);
      } else {
        double best_pen = -1.0;
        for (Index i = 0; i < m_; ++i) {
          if (!row_live[static_cast<std::size_t>(i)]) continue;
          Index arg;
          auto [s1, s2] = two_smallest_row(i, arg);
          const double pen = s2 == inf ? s1 : s2 - s1;
          if (pen > best_pen) {
            best_pen = pen;
            bi = i;
            bj = arg;
          }
        }
        for (Index j = 0; j < n_; ++j) {
          if (!col_live[static_cast<std::size_t>(j)]) continue;
          Index arg;
          auto [s1, s2] = two_smallest_col(j, arg);
          const double pen = s2 == inf ? s1 : s2 - s1;
          if (pen > best_pen) {
            best_pen = pen;
            bi = arg;
            bj = j;
          }
        }
      }
      auto& s = supply[static_cast<std::size_t>(bi)];
      auto& d = demand[static_cast<std::size_t>(bj)];
      if (rows_left == 1 && cols_left == 1) {
        arcs_.push_back({bi, bj, std::max(0.0, std::min(s, d))});
        row_live[static_cast<std::size_t>(bi)] = 0;
        col_live[static_cast<std::size_t>(bj)] = 0;
        --rows_left;
        --cols_left;
        break;
      }
      const bool retire_row = cols_left == 1 || (rows_left > 1 && s <= d);
      if (retire_row) {
        const double x = std::max(0.0, std::min(s, d));
        arcs_.push_back({bi, bj, x});
        d = std::max(0.0, d - x);
        row_live[static_cast<std::size_t>(bi)] = 0;
        --rows_left;
      } else {
        const double x = std::max(0.0, std::min(s, d));
        arcs_.push_back({bi, bj, x});
        s = std::max(0.0, s - x);
        col_live[static_cast<std::size_t>(bj)] = 0;
        --cols_left;
      }
    }
  }

  void build_adjacency() {
    adj_.assign(static_cast<std::size_t>(m_ + n_), {});
    for (std::size_t k = 0; k < arcs_.size(); ++k) {
      adj_[static_cast<std::size_t>(arcs_[k].row)].push_back(static_cast<int>(k));
      adj_[static_cast<std::size_t>(m_ + arcs_[k].col)].push_back(static_cast<int>(k));
    }
  }

  // Potentials, parents and depths by BFS from node 0 (row 0).
  void compute_tree() {
    const auto nodes = static_cast<std::size_t>(m_ + n_);
    pot_.resize(static_cast<Index>(nodes));
    parent_arc_.assign(nodes, -1);
    depth_.assign(nodes, -1);
    queue_.clear();
    queue_.push_back(0);
    depth_[0] = 0;
    pot_[0] = 0.0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const Index node = queue_[head];
      for (int k : adj_[static_cast<std::size_t>(node)]) {
        const Arc& arc = arcs_[static_cast<std::size_t>(k)];
        const Index other = node < m_ ? m_ + arc.col : arc.row;
        if (depth_[static_cast<std::size_t>(other)] >= 0) continue;
        depth_[static_cast<std::size_t>(other)] = depth_[static_cast<std::size_t>(node)] + 1;
        parent_arc_[static_cast<std::size_t>(other)] = k;
        pot_[other] = c_(arc.row, arc.col) - pot_[node];
        queue_.push_back(other);
      }
    }
    if (queue_.size() != nodes) throw SolverError("transport simplex: basis is not a spanning tree");
  }

  double reduced(Index i, Index j) const { return c_(i, j) - pot_[i] - pot_[m_ + j]; }

  Index price_block() {
    const Index cells = m_ * n_;
    const Index block = std::max<Index>(32, static_cast<Index>(std::sqrt(static_cast<double>(cells))));
    Index best = -1;
    double best_val = -eps_;
    Index scanned = 0, in_block = 0;
    while (scanned < cells) {
      const Index cell = cursor_;
      cursor_ = cursor_ + 1 == cells ? 0 : cursor_ + 1;
      const double r = reduced(cell / n_, cell % n_);
      if (r < best_val) {
        best_val = r;
        best = cell;
      }
      ++scanned;
      if (++in_block == block) {
        if (best >= 0) return best;
        in_block = 0;
      }
    }
    return best;
  }

  Index price_bland() const {
    for (Index cell = 0; cell < m_ * n_; ++cell)
      if (reduced(cell / n_, cell % n_) < -eps_) return cell;
    return -1;
  }

  Index other_end(int arc, Index node) const {
    const Arc& a = arcs_[static_cast<std::size_t>(arc)];
    return node < m_ ? m_ + a.col : a.row;
  }

  // Enters cell (i, j); returns the step length theta.
  double pivot(Index i, Index j, bool bland) {
    // Tree path from row node i to column node m + j.
    path_s_.clear();
    path_t_.clear();
    Index s = i, t = m_ + j;
    while (depth_[static_cast<std::size_t>(s)] > depth_[static_cast<std::size_t>(t)]) {
      const int k = parent_arc_[static_cast<std::size_t>(s)];
      path_s_.push_back(k);
      s = other_end(k, s);
    }
    while (depth_[static_cast<std::size_t>(t)] > depth_[static_cast<std::size_t>(s)]) {
      const int k = parent_arc_[static_cast<std::size_t>(t)];
      path_t_.push_back(k);
      t = other_end(k, t);
    }
    while (s != t) {
      int k = parent_arc_[static_cast<std::size_t>(s)];
      path_s_.push_back(k);
      s = other_end(k, s);
      k = parent_arc_[static_cast<std::size_t>(t)];
      path_t_.push_back(k);
      t = other_end(k, t);
    }
    cycle_.assign(path_s_.begin(), path_s_.end());
    cycle_.insert(cycle_.end(), path_t_.rbegin(), path_t_.rend());

    // Even positions lose mass, odd positions gain.
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    Index leave_key = std::numeric_limits<Index>::max();
    for (std::size_t pos = 0; pos < cycle_.size(); pos += 2) {
      const int k = cycle_[pos];
      const Arc& arc = arcs_[static_cast<std::size_t>(k)];
      const Index key = arc.row * n_ + arc.col;
      if (arc.flow < theta || (bland && arc.flow == theta && key < leave_key)) {
        theta = arc.flow;
        leave = k;
        leave_key = key;
      }
    }
    for (std::size_t pos = 0; pos < cycle_.size(); ++pos) {
      Arc& arc = arcs_[static_cast<std::size_t>(cycle_[pos])];
      arc.flow = pos % 2 == 0 ? std::max(0.0, arc.flow - theta) : arc.flow + theta;
    }
    // Replace the leaving arc's slot with the entering cell.
    Arc& out = arcs_[static_cast<std::size_t>(leave)];
    auto drop = [&](Index node) {
      auto& lst = adj_[static_cast<std::size_t>(node)];
      lst.erase(std::find(lst.begin(), lst.end(), leave));
    };
    drop(out.row);
    drop(m_ + out.col);
    out = Arc{i, j, theta};
    adj_[static_cast<std::size_t>(i)].push_back(leave);
    adj_[static_cast<std::size_t>(m_ + j)].push_back(leave);
    return theta;
  }

  const Matrix& c_;
  const Vector& a_;
  const Vector& b_;
  Index m_, n_;
  double eps_ = 1e-12;
  Index cursor_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  Vector pot_;
  std::vector<int> parent_arc_;
  std::vector<int> depth_;
  std::vector<Index> queue_;
  std::vector<int> path_s_, path_t_, cycle_;
};

}  // namespace detail

/// Optimal plan between marginals a (rows) and b (columns) for `cost`.
inline OtResult solve_transport(const Matrix& cost, const Vector& a, const Vector& b,
                                const TransportOptions& opts = {}) {
  if (cost.rows() != a.size() || cost.cols() != b.size())
    throw InvalidInput("transport: cost is " + std::to_string(cost.rows()) + "x" +
                       std::to_string(cost.cols()) + " but marginals have lengths " +
                       std::to_string(a.size()) + ", " + std::to_string(b.size()));
  if (a.size() == 0 || b.size() == 0) throw InvalidInput("transport: empty marginal");
  if (std::abs(a.sum() - b.sum()) > 1e-9 * std::max(1.0, a.sum()))
    throw InvalidInput("transport: marginals have different mass (" + std::to_string(a.sum()) +
                      " vs " + std::to_string(b.sum()) + ")");
  detail::TransportSimplex simplex(cost, a, b);
  return simplex.run(opts);
}

/// W_p^p-optimal coupling between two measures.
inline OtResult solve_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                         const TransportOptions& opts = {}) {
  const CostMatrix c = cost_matrix(mu.points, nu.points, p);
  return solve_transport(c.entries, mu.weights, nu.weights, opts);
}

/// W_p^p(mu, nu).
inline double wasserstein_pp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  return std::max(0.0, solve_ot(mu, nu, p).value);
}

/// W_p(mu, nu).
inline double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  return std::pow(wasserstein_pp(mu, nu, p), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Assignment

struct Assignment {
  /// permutation[k] is the column matched to row k.
  std::vector<Index> permutation;
  /// Mean matched cost, (1/S) sum_k c[k][permutation[k]].
  double value = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(S^3)).
inline Assignment solve_assignment(const Matrix& cost) {
  const Index n = cost.rows();
  if (n != cost.cols()) throw InvalidInput("assignment needs a square cost matrix");
  if (n == 0) throw InvalidInput("assignment of zero points");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto N = static_cast<std::size_t>(n);
  std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0), minv(N + 1);
  std::vector<Index> match(N + 1, 0), way(N + 1, 0);
  std::vector<char> used(N + 1);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      const double ui0 = u[static_cast<std::size_t>(i0)];
      const double* row = cost.data() + (i0 - 1) * n;
      for (Index j = 1; j <= n; ++j) {
        const auto J = static_cast<std::size_t>(j);
        if (used[J]) continue;
        const double cur = row[j - 1] - ui0 - v[J];
        if (cur < minv[J]) {
          minv[J] = cur;
          way[J] = j0;
        }
        if (minv[J] < delta) {
          delta = minv[J];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= N; ++j) {
        if (used[j]) {
          u[static_cast<std::size_t>(match[j])] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment res;
  res.permutation.assign(N, -1);
  for (Index j = 1; j <= n; ++j) res.permutation[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  double total = 0.0;
  for (Index k = 0; k < n; ++k) total += cost(k, res.permutation[static_cast<std::size_t>(k)]);
  res.value = total / static_cast<double>(n);
  return res;
}

/// Optimal matching between the rows of X and Y under |x - y|^p; `value` is
/// W_p^p between the uniform measures on X and Y.
inline Assignment solve_assignment(const Matrix& X, const Matrix& Y, double p) {
  if (X.rows() != Y.rows()) throw InvalidInput("assignment: row counts differ");
  return solve_assignment(cost_matrix(X, Y, p).entries);
}

}  // namespace wbary
