#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "otmedian/distances.hpp"
#include "otmedian/errors.hpp"

namespace otmedian {

namespace {

struct BasicCell {
  std::size_t row;
  std::size_t col;
  double flow;
};

// Transportation simplex (MODI method) on a strictly positive instance.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   std::vector<double> cost)
      : m_(supply.size()), n_(demand.size()), supply_(std::move(supply)),
        demand_(std::move(demand)), cost_(std::move(cost)) {}

  double run() {
    northwest_corner();
    const double max_cost = *std::max_element(cost_.begin(), cost_.end());
    const double tol = 1e-12 * std::max(1.0, max_cost);
    const std::size_t max_pivots = 50 * (m_ + n_) * (m_ + n_) + 1000;
    for (std::size_t pivot = 0; pivot < max_pivots; ++pivot) {
      compute_duals();
      std::size_t enter_row = 0, enter_col = 0;
      double best = -tol;
      bool found = false;
      for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          const double reduced = cost_[i * n_ + j] - u_[i] - v_[j];
          if (reduced < best) {
            best = reduced;
            enter_row = i;
            enter_col = j;
            found = true;
          }
        }
      if (!found) return objective();
      pivot_on(enter_row, enter_col);
    }
    throw ConvergenceError("transport simplex: pivot limit reached", 0.0);
  }

 private:
  // Nodes 0..m-1 are rows, m..m+n-1 are columns.
  void northwest_corner() {
    std::vector<double> s = supply_, d = demand_;
    std::size_t i = 0, j = 0;
    while (i < m_ && j < n_) {
      const double x = std::min(s[i], d[j]);
      basis_.push_back({i, j, x});
      const bool row_done = s[i] <= d[j];
      s[i] -= x;
      d[j] -= x;
      if (i + 1 == m_ && j + 1 == n_) break;
      if ((row_done && i + 1 < m_) || j + 1 == n_) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(m_ + n_);
    for (std::size_t e = 0; e < basis_.size(); ++e) {
      adj[basis_[e].row].push_back(e);
      adj[m_ + basis_[e].col].push_back(e);
    }
    return adj;
  }

  void compute_duals() {
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    const auto adj = adjacency();
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t e : adj[node]) {
        const auto& cell = basis_[e];
        const double c = cost_[cell.row * n_ + cell.col];
        const std::size_t row_node = cell.row, col_node = m_ + cell.col;
        if (!seen[col_node]) {
          v_[cell.col] = c - u_[cell.row];
          seen[col_node] = 1;
          stack.push_back(col_node);
        }
        if (!seen[row_node]) {
          u_[cell.row] = c - v_[cell.col];
          seen[row_node] = 1;
          stack.push_back(row_node);
        }
      }
    }
  }

  void pivot_on(std::size_t row, std::size_t col) {
    // Path in the basis tree from the entering column back to the entering row.
    const auto adj = adjacency();
    const std::size_t start = m_ + col, goal = row;
    std::vector<std::size_t> parent_edge(m_ + n_, SIZE_MAX);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> queue{start};
    seen[start] = 1;
    for (std::size_t q = 0; q < queue.size() && !seen[goal]; ++q) {
      const std::size_t node = queue[q];
      for (std::size_t e : adj[node]) {
        const std::size_t other =
            node < m_ ? m_ + basis_[e].col : basis_[e].row;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = e;
        queue.push_back(other);
      }
    }
    std::vector<std::size_t> path;  // edges ordered from start to goal
    for (std::size_t node = goal; node != start;) {
      const std::size_t e = parent_edge[node];
      path.push_back(e);
      node = node < m_ ? m_ + basis_[e].col : basis_[e].row;
    }
    std::reverse(path.begin(), path.end());

    // Edges at even positions lose flow, odd positions gain it.
    std::size_t leave = SIZE_MAX;
    double theta = 0.0;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double f = basis_[path[k]].flow;
      if (leave == SIZE_MAX || f < theta) {
        theta = f;
        leave = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k)
      basis_[path[k]].flow += (k % 2 == 0) ? -theta : theta;
    basis_[leave] = {row, col, theta};
  }

  double objective() const {
    double acc = 0.0;
    for (const auto& cell : basis_) acc += cell.flow * cost_[cell.row * n_ + cell.col];
    return acc;
  }

  std::size_t m_, n_;
  std::vector<double> supply_, demand_, cost_;
  std::vector<BasicCell> basis_;
  std::vector<double> u_, v_;
};

}  // namespace

double transport_simplex(std::span<const double> supply,
                         std::span<const double> demand,
                         std::span<const double> cost) {
  if (cost.size() != supply.size() * demand.size())
    throw InvalidInput("transport_simplex: cost matrix has the wrong size");
  std::vector<std::size_t> rows, cols;
  double total_s = 0.0, total_d = 0.0;
  for (std::size_t i = 0; i < supply.size(); ++i) {
    if (supply[i] < 0.0) throw InvalidInput("transport_simplex: negative supply");
    if (supply[i] > 0.0) rows.push_back(i);
    total_s += supply[i];
  }
  for (std::size_t j = 0; j < demand.size(); ++j) {
    if (demand[j] < 0.0) throw InvalidInput("transport_simplex: negative demand");
    if (demand[j] > 0.0) cols.push_back(j);
    total_d += demand[j];
  }
  if (rows.empty() || cols.empty())
    throw InvalidInput("transport_simplex: empty supply or demand");
  if (std::abs(total_s - total_d) > 1e-9 * std::max(1.0, total_s))
    throw InvalidInput("transport_simplex: supply and demand totals differ");

  std::vector<double> s, d, c;
  for (std::size_t i : rows) s.push_back(supply[i]);
  for (std::size_t j : cols) d.push_back(demand[j] * total_s / total_d);
  for (std::size_t i : rows)
    for (std::size_t j : cols) c.push_back(cost[i * demand.size() + j]);
  return TransportSimplex(std::move(s), std::move(d), std::move(c)).run();
}

double exact_lp_w2(const GridMeasure& a, const GridMeasure& b) {
  if (a.size() > kExactLpMaxBins || b.size() > kExactLpMaxBins)
    throw SizeGuardError("exact_lp_w2: at most " +
                         std::to_string(kExactLpMaxBins) +
                         " bins per measure, got " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  if (a.rank() != b.rank())
    throw InvalidInput("exact_lp_w2: measures have different dimensions");
  std::vector<double> cost(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a.point(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto y = b.point(j);
      double c = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) c += (x[k] - y[k]) * (x[k] - y[k]);
      cost[i * b.size() + j] = c;
    }
  }
  return std::sqrt(std::max(0.0, transport_simplex(a.mass(), b.mass(), cost)));
}

}  // namespace otmedian
