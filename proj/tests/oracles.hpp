// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

using Real = long double;
using Matrix = std::vector<std::vector<Real>>;

/// P(lo < X <= hi) for X ~ Beta(a, b), by composite Simpson on the density.
inline double beta_bin_probability(double a, double b, double lo, double hi,
                                   int panels = 4000) {
  const Real log_norm = std::lgamma((Real)a + b) - std::lgamma((Real)a) - std::lgamma((Real)b);
  auto pdf = [&](Real x) -> Real {
    if (x <= 0 || x >= 1) {
      if ((x <= 0 && a > 1) || (x >= 1 && b > 1)) return 0;
      if (x <= 0 && a == 1) return std::exp(log_norm);
      if (x >= 1 && b == 1) return std::exp(log_norm);
      return 0;
    }
    return std::exp(log_norm + (a - 1) * std::log(x) + (b - 1) * std::log1p(-x));
  };
  const Real h = ((Real)hi - lo) / panels;
  Real acc = pdf(lo) + pdf(hi);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4 : 2) * pdf(lo + i * h);
  return static_cast<double>(acc * h / 3);
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<Real> jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    Real off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-36L) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300L) continue;
        const Real theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const Real t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const Real c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Real akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Real apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<Real> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  return ev;
}

inline Matrix cholesky(const Matrix& s) {
  const std::size_t n = s.size();
  Matrix l(n, std::vector<Real>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      Real acc = s[i][j];
      for (std::size_t k = 0; k < j; ++k) acc -= l[i][k] * l[j][k];
      l[i][j] = i == j ? std::sqrt(acc) : acc / l[j][j];
    }
  return l;
}

/// W2 between centered Gaussians: tr S1 + tr S2 - 2 sum sqrt(eig(S1 S2)),
/// with eig(S1 S2) taken from the symmetric L^T S2 L, S1 = L L^T.
template <typename M>
double bures_w2(const M& s1_in, const M& s2_in) {
  const std::size_t n = static_cast<std::size_t>(s1_in.rows());
  Matrix s1(n, std::vector<Real>(n)), s2 = s1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      s1[i][j] = s1_in(i, j);
      s2[i][j] = s2_in(i, j);
    }
  const Matrix l = cholesky(s1);
  Matrix m(n, std::vector<Real>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) m[i][j] += l[a][i] * s2[a][b] * l[b][j];
  Real cross = 0, tr = 0;
  for (Real ev : jacobi_eigenvalues(m)) cross += std::sqrt(std::max<Real>(ev, 0));
  for (std::size_t i = 0; i < n; ++i) tr += s1[i][i] + s2[i][i];
  return static_cast<double>(std::sqrt(std::max<Real>(tr - 2 * cross, 0)));
}

/// 2x2 closed form: tr sqrt(M) = sqrt(tr M + 2 sqrt(det M)) for 2x2 PSD M.
inline Real bures_w2_squared_2x2(Real a1, Real b1, Real c1, Real a2, Real b2, Real c2) {
  const Real tr_prod = a1 * a2 + 2 * b1 * b2 + c1 * c2;
  const Real det = (a1 * c1 - b1 * b1) * (a2 * c2 - b2 * b2);
  const Real cross = std::sqrt(std::max<Real>(tr_prod + 2 * std::sqrt(std::max<Real>(det, 0)), 0));
  return std::max<Real>(a1 + c1 + a2 + c2 - 2 * cross, 0);
}

/// min c^T x subject to A x = b, x >= 0 (b >= 0), by two-phase tableau
/// simplex with Bland's rule.
inline Real simplex_minimum(const Matrix& a, const std::vector<Real>& b,
                            const std::vector<Real>& c) {
  const std::size_t m = a.size(), n = c.size();
  const std::size_t cols = n + m + 1;  // originals, artificials, rhs
  Matrix t(m + 1, std::vector<Real>(cols, 0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1;
    t[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  const Real eps = 1e-15L;
  auto pivot = [&](std::size_t r, std::size_t col) {
    const Real p = t[r][col];
    for (Real& v : t[r]) v /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || t[i][col] == 0) continue;
      const Real f = t[i][col];
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = col;
  };
  auto optimise = [&](std::size_t allowed) {
    for (;;) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < allowed; ++j)
        if (t[m][j] < -eps) {
          enter = j;
          break;
        }
      if (enter == cols) return;
      std::size_t leave = m;
      Real best = std::numeric_limits<Real>::infinity();
      for (std::size_t i = 0; i < m; ++i)
        if (t[i][enter] > eps) {
          const Real ratio = t[i][cols - 1] / t[i][enter];
          if (ratio < best - eps || (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      if (leave == m) throw std::runtime_error("oracle simplex: unbounded");
      pivot(leave, enter);
    }
  };
  // Phase one: minimise the sum of artificials.
  for (std::size_t j = 0; j < cols; ++j) {
    Real s = 0;
    for (std::size_t i = 0; i < m; ++i) s += t[i][j];
    t[m][j] = (j >= n && j < n + m) ? 0 : -s;
  }
  optimise(n + m);
  // Drive remaining artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(t[i][j]) > 1e-12L) {
        pivot(i, j);
        break;
      }
  }
  // Phase two objective row.
  for (std::size_t j = 0; j < cols; ++j) t[m][j] = j < n ? c[j] : 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] >= n) continue;
    const Real f = t[m][basis[i]];
    for (std::size_t j = 0; j < cols; ++j) t[m][j] -= f * t[i][j];
  }
  optimise(n);
  return -t[m][cols - 1];
}

/// Optimal transport cost between two histograms by the dense LP above.
inline double transport_lp(const std::vector<double>& supply, const std::vector<double>& demand,
                           const std::vector<double>& cost) {
  const std::size_t m = supply.size(), n = demand.size();
  Matrix a;
  std::vector<Real> b;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Real> row(m * n, 0);
    for (std::size_t j = 0; j < n; ++j) row[i * n + j] = 1;
    a.push_back(row);
    b.push_back(supply[i]);
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {  // last column constraint is implied
    std::vector<Real> row(m * n, 0);
    for (std::size_t i = 0; i < m; ++i) row[i * n + j] = 1;
    a.push_back(row);
    b.push_back(demand[j]);
  }
  std::vector<Real> c(cost.begin(), cost.end());
  return static_cast<double>(simplex_minimum(a, b, c));
}

/// Weiszfeld iteration for the weighted geometric median of vectors under
/// the norm ||x||^2 = mean(x_j^2).
inline std::vector<double> weiszfeld(const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& weights, Real tol = 1e-13L,
                                     int max_iter = 200000) {
  const std::size_t k = points.front().size(), count = points.size();
  auto dist = [&](const std::vector<Real>& x, const std::vector<double>& p) {
    Real acc = 0;
    for (std::size_t j = 0; j < k; ++j) acc += (x[j] - p[j]) * (x[j] - p[j]);
    return std::sqrt(acc / k);
  };
  std::vector<Real> x(k, 0);
  for (std::size_t n = 0; n < count; ++n)
    for (std::size_t j = 0; j < k; ++j) x[j] += weights[n] * points[n][j];
  for (int it = 0; it < max_iter; ++it) {
    std::vector<Real> next(k, 0);
    Real total = 0;
    bool on_point = false;
    for (std::size_t n = 0; n < count; ++n) {
      const Real d = dist(x, points[n]);
      if (d < 1e-300L) {
        on_point = true;
        break;
      }
      const Real w = weights[n] / d;
      total += w;
      for (std::size_t j = 0; j < k; ++j) next[j] += w * points[n][j];
    }
    if (on_point) break;
    Real change = 0;
    for (std::size_t j = 0; j < k; ++j) {
      next[j] /= total;
      change += (next[j] - x[j]) * (next[j] - x[j]);
    }
    x.swap(next);
    if (std::sqrt(change / k) < tol) break;
  }
  return {x.begin(), x.end()};
}

/// Minimiser of sum_n w_n W2([[a,b],[b,c]], S_n) over 2x2 SPD matrices by
/// successively refined grid search on (a, b, c). Returns {a, b, c}.
inline std::vector<double> gaussian_median_search(const std::vector<std::vector<Real>>& sigmas,
                                                  const std::vector<double>& weights,
                                                  std::vector<Real> start, Real half_width) {
  auto objective = [&](Real a, Real b, Real c) {
    if (a <= 0 || c <= 0 || a * c - b * b <= 0) return std::numeric_limits<Real>::infinity();
    Real acc = 0;
    for (std::size_t n = 0; n < sigmas.size(); ++n)
      acc += weights[n] * std::sqrt(bures_w2_squared_2x2(a, b, c, sigmas[n][0], sigmas[n][1],
                                                         sigmas[n][2]));
    return acc;
  };
  std::vector<Real> best = start;
  Real h = half_width;
  const int steps = 6;  // grid points per side of the centre
  while (h > 1e-9L) {
    Real best_value = objective(best[0], best[1], best[2]);
    std::vector<Real> centre = best;
    for (int i = -steps; i <= steps; ++i)
      for (int j = -steps; j <= steps; ++j)
        for (int l = -steps; l <= steps; ++l) {
          const Real a = centre[0] + h * i / steps, b = centre[1] + h * j / steps,
                     c = centre[2] + h * l / steps;
          const Real v = objective(a, b, c);
          if (v < best_value) {
            best_value = v;
            best = {a, b, c};
          }
        }
    // Keep the window when the optimum sits on its edge.
    const bool on_edge = std::abs(best[0] - centre[0]) >= h - 1e-30L ||
                         std::abs(best[1] - centre[1]) >= h - 1e-30L ||
                         std::abs(best[2] - centre[2]) >= h - 1e-30L;
    if (!on_edge) h *= 0.5L;
  }
  return {static_cast<double>(best[0]), static_cast<double>(best[1]),
          static_cast<double>(best[2])};
}

}  // namespace oracle
