#include "otmedian/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "otmedian/errors.hpp"

namespace otmedian {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> log_mass(std::span<const double> m) {
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    out[i] = m[i] > 0.0 ? std::log(m[i]) : kNegInf;
  return out;
}

// Potential update: out_i = -eps * LSE_j(log_mass_j + pot_j / eps - C_ij / eps).
void c_transform(const GibbsKernel& kernel, const std::vector<double>& log_m,
                 const std::vector<double>& pot, std::vector<double>& tmp,
                 std::vector<double>& out) {
  const double eps = kernel.epsilon();
  for (std::size_t j = 0; j < pot.size(); ++j)
    tmp[j] = log_m[j] == kNegInf ? kNegInf : log_m[j] + pot[j] / eps;
  kernel.log_apply(tmp, out);
  for (double& v : out) v *= -eps;
}

double marginal_violation(std::span<const double> mass,
                          const std::vector<double>& current,
                          const std::vector<double>& updated, double eps) {
  double worst = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    const double row = mass[i] * std::exp((current[i] - updated[i]) / eps);
    worst = std::max(worst, std::abs(row - mass[i]));
  }
  return worst;
}

double dot_on_support(std::span<const double> mass, const std::vector<double>& pot) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] > 0.0) acc += mass[i] * pot[i];
  return acc;
}

// Relaxed potential updates after a short plain phase; same fixed point.
constexpr double kOverRelaxation = 1.5;
constexpr int kWarmBudget = 500;
constexpr int kPlainIterations = 20;
// Grids up to this size fall back to Newton steps when scaling stalls.
constexpr std::size_t kNewtonMaxSize = 1024;
constexpr int kScalingBeforeNewton = 2000;
constexpr int kNewtonSteps = 100;

struct RowState {
  std::vector<double> residual;  // a - P 1
  double violation = 0.0;
  double objective = 0.0;  // <a,f> + <b,g>
};

// Newton ascent on the semi-dual f -> <a,f> + <b,g(f)>, with g the exact
// c-transform of f. Its Hessian is -(diag(P1) - P diag(1/b) P^T) / eps, a
// graph Laplacian on the support of a.
class NewtonPolish {
 public:
  NewtonPolish(const GridCost& cost, const GibbsKernel& kernel, std::span<const double> a,
               std::span<const double> b, const std::vector<double>& la)
      : cost_(cost), kernel_(kernel), a_(a), b_(b), la_(la), eps_(kernel.epsilon()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > 0.0) rows_.push_back(i);
    for (std::size_t j = 0; j < b.size(); ++j)
      if (b[j] > 0.0) cols_.push_back(j);
    plan_.resize(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(cols_.size()));
  }

  // Fills the plan for f and the matching g; returns the row state.
  RowState evaluate(const std::vector<double>& f, std::vector<double>& g) {
    std::vector<double> tmp(f.size());
    c_transform(kernel_, la_, f, tmp, g);
    RowState st;
    st.residual.resize(rows_.size());
    st.objective = dot_on_support(a_, f) + dot_on_support(b_, g);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const std::size_t i = rows_[r];
      double row = 0.0;
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        const std::size_t j = cols_[c];
        const double p = a_[i] * b_[j] * std::exp((f[i] + g[j] - cost_.cost(i, j)) / eps_);
        plan_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p;
        row += p;
      }
      st.residual[r] = a_[i] - row;
      st.violation = std::max(st.violation, std::abs(st.residual[r]));
    }
    return st;
  }

  // Damped Newton direction for the plan stored by the last evaluate().
  // Returns the Laplacian's largest diagonal entry through `scale`.
  Eigen::VectorXd direction(const RowState& st, double mu, double& scale) const {
    const auto m = static_cast<Eigen::Index>(rows_.size());
    Eigen::VectorXd inv_b(static_cast<Eigen::Index>(cols_.size()));
    for (std::size_t c = 0; c < cols_.size(); ++c) inv_b(static_cast<Eigen::Index>(c)) = 1.0 / b_[cols_[c]];
    Eigen::MatrixXd lap = -(plan_ * inv_b.asDiagonal() * plan_.transpose());
    lap.diagonal() += plan_.rowwise().sum();
    // Constant shifts of f are free; pin them with a rank-one term.
    scale = std::max(lap.diagonal().maxCoeff(), 1e-300);
    lap.array() += scale / static_cast<double>(m);
    lap.diagonal().array() += mu * scale;
    Eigen::VectorXd rhs(m);
    for (Eigen::Index r = 0; r < m; ++r) rhs(r) = eps_ * st.residual[static_cast<std::size_t>(r)];
    return lap.partialPivLu().solve(rhs);
  }

  const std::vector<std::size_t>& rows() const { return rows_; }

 private:
  const GridCost& cost_;
  const GibbsKernel& kernel_;
  std::span<const double> a_, b_;
  const std::vector<double>& la_;
  double eps_;
  std::vector<std::size_t> rows_, cols_;
  Eigen::MatrixXd plan_;
};

// Decreasing epsilon schedule used for cold starts, ending above target.
std::vector<double> annealing_schedule(double max_cost, double target) {
  std::vector<double> eps;
  for (double e = max_cost; e > target; e *= 0.5) eps.push_back(e);
  return eps;
}

}  // namespace

SinkhornSolver::SinkhornSolver(const GridMeasure& grid, SinkhornConfig cfg)
    : cost_(grid), cfg_((cfg.validate(), cfg)), kernel_(cost_, cfg_.epsilon) {}

EntropicSolve SinkhornSolver::solve(std::span<const double> a,
                                    std::span<const double> b,
                                    EntropicPotentials& state) const {
  const std::size_t n = cost_.size();
  if (a.size() != n || b.size() != n)
    throw InvalidInput("sinkhorn: mass vector does not match the grid");
  const auto la = log_mass(a);
  const auto lb = log_mass(b);
  const double eps = cfg_.epsilon;
  std::vector<double> tmp(n), f_new(n);
  EntropicSolve out;

  // Alternating updates from the current state; g is always the exact
  // c-transform of f, so only the row constraints can be violated.
  auto run = [&](int budget) {
    double best = std::numeric_limits<double>::infinity();
    bool relax = true;
    for (int it = 0; it < budget; ++it, ++out.iterations) {
      c_transform(kernel_, lb, state.g, tmp, f_new);
      out.violation = marginal_violation(a, state.f, f_new, eps);
      if (out.violation <= cfg_.tol) {
        out.value = dot_on_support(a, state.f) + dot_on_support(b, state.g);
        return true;
      }
      if (!(out.violation <= 10.0 * best)) relax = false;
      best = std::min(best, out.violation);
      const double w = relax && it >= kPlainIterations ? kOverRelaxation : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        state.f[i] = std::isfinite(state.f[i]) ? (1.0 - w) * state.f[i] + w * f_new[i] : f_new[i];
      }
      c_transform(kernel_, la, state.f, tmp, state.g);
    }
    return false;
  };

  if (state.f.size() == n && state.g.size() == n) {
    // A stale start can sit in a slow regime at small epsilon; give it a
    // bounded budget before restarting cold.
    c_transform(kernel_, la, state.f, tmp, state.g);
    if (run(std::min(cfg_.max_iter, kWarmBudget))) return out;
  }
  state.f.assign(n, 0.0);
  state.g.assign(n, 0.0);
  for (double e : annealing_schedule(cost_.max_cost(), eps)) {
    const GibbsKernel step(cost_, e);
    c_transform(step, lb, state.g, tmp, state.f);
    c_transform(step, la, state.f, tmp, state.g);
  }
  c_transform(kernel_, la, state.f, tmp, state.g);
  if (n > kNewtonMaxSize || cfg_.max_iter <= kScalingBeforeNewton) {
    if (run(cfg_.max_iter)) return out;
  } else {
    if (run(kScalingBeforeNewton)) return out;
    // Scaling crawls when the plan is a chain of tiny flows.
    NewtonPolish newton(cost_, kernel_, a, b, la);
    RowState st = newton.evaluate(state.f, state.g);
    std::vector<double> trial(n), g_trial(n);
    // Levenberg-Marquardt damping, relative to the Laplacian scale: far
    // from the optimum the weak links make the plain Newton step useless.
    double mu = 1e-3;
    for (int step = 0; step < kNewtonSteps; ++step, ++out.iterations) {
      out.violation = st.violation;
      if (st.violation <= cfg_.tol) {
        out.value = dot_on_support(a, state.f) + dot_on_support(b, state.g);
        return out;
      }
      bool accepted = false;
      for (; mu < 1e20; mu *= 4.0) {
        double scale = 0.0;
        const Eigen::VectorXd dir = newton.direction(st, mu, scale);
        trial = state.f;
        for (std::size_t r = 0; r < newton.rows().size(); ++r)
          trial[newton.rows()[r]] += dir(static_cast<Eigen::Index>(r));
        RowState next = newton.evaluate(trial, g_trial);
        // Close to the optimum the objective gain drops below rounding.
        if (next.objective > st.objective || next.violation < st.violation) {
          state.f.swap(trial);
          state.g.swap(g_trial);
          st = std::move(next);
          accepted = true;
          mu = std::max(mu / 3.0, 1e-16);
          break;
        }
      }
      if (!accepted) {
        newton.evaluate(state.f, state.g);
        break;
      }
    }
    if (run(cfg_.max_iter - kScalingBeforeNewton)) return out;
  }
  throw ConvergenceError("sinkhorn: no convergence within " +
                             std::to_string(cfg_.max_iter) + " iterations",
                         out.violation);
}

EntropicSolve SinkhornSolver::solve_self(std::span<const double> a,
                                         std::vector<double>& potential) const {
  const std::size_t n = cost_.size();
  if (a.size() != n)
    throw InvalidInput("sinkhorn: mass vector does not match the grid");
  const auto la = log_mass(a);
  const double eps = cfg_.epsilon;
  std::vector<double> tmp(n), next(n);

  if (potential.size() != n) {
    potential.assign(n, 0.0);
    for (double e : annealing_schedule(cost_.max_cost(), eps)) {
      const GibbsKernel step(cost_, e);
      c_transform(step, la, potential, tmp, next);
      for (std::size_t i = 0; i < n; ++i) potential[i] = 0.5 * (potential[i] + next[i]);
    }
  }

  EntropicSolve out;
  for (int it = 0; it < cfg_.max_iter; ++it) {
    c_transform(kernel_, la, potential, tmp, next);
    out.violation = marginal_violation(a, potential, next, eps);
    if (out.violation <= cfg_.tol) {
      out.iterations = it;
      out.value = 2.0 * dot_on_support(a, potential);
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) potential[i] = 0.5 * (potential[i] + next[i]);
  }
  throw ConvergenceError("sinkhorn (self): no convergence within " +
                             std::to_string(cfg_.max_iter) + " iterations",
                         out.violation);
}

double SinkhornSolver::divergence(std::span<const double> a,
                                  std::span<const double> b, double self_a,
                                  double self_b, EntropicPotentials& state) const {
  return solve(a, b, state).value - 0.5 * (self_a + self_b);
}

double sinkhorn_distance(const GridMeasure& a, const GridMeasure& b,
                         const SinkhornConfig& cfg) {
  if (!a.same_grid(b))
    throw InvalidInput("sinkhorn_distance: measures live on different grids");
  const SinkhornSolver solver(a, cfg);
  EntropicPotentials state;
  double value = solver.solve(a.mass(), b.mass(), state).value;
  if (cfg.debiased) {
    std::vector<double> pa, pb;
    value -= 0.5 * solver.solve_self(a.mass(), pa).value;
    value -= 0.5 * solver.solve_self(b.mass(), pb).value;
  }
  return std::sqrt(std::max(0.0, value));
}

}  // namespace otmedian
