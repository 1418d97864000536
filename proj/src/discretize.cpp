#include "vdp/discretize.hpp"

#include <cmath>
#include <string>

namespace vdp {

DiscreteProblem::DiscreteProblem(VolterraProblem problem, int steps)
    : problem_(std::move(problem)) {
  if (steps < 1) throw InputError("discretize: step count must be >= 1");
  problem_.validate();
  grid_.steps = steps;
  grid_.horizon = problem_.horizon;
  grid_.h = problem_.horizon / steps;
}

DiscreteProblem discretize(const VolterraProblem& p, int steps) {
  return DiscreteProblem(p, steps);
}

void DiscreteProblem::phi(int i, int j, const Vec& x, const Vec& u, Vec& out,
                          OpCounts* counts) const {
  if (j < 0 || j >= i || i > grid_.steps)
    throw InputError("discretize: phi requires 0 <= j < i <= N");
  problem_.kernel.eval(grid_.node(i), grid_.node(j), x, u, out);
  for (double& v : out) v *= grid_.h;
  if (counts) counts->f_evals++;
}

double DiscreteProblem::stage_cost(int i, const Vec& x, const Vec& u,
                                   OpCounts* counts) const {
  if (counts) counts->phi_evals++;
  return grid_.h * problem_.running_cost.eval(grid_.node(i), x, u);
}

double DiscreteProblem::terminal_cost(const Vec& x, OpCounts* counts) const {
  if (counts) counts->phi_evals++;
  return problem_.terminal_cost.eval(x);
}

void DiscreteProblem::x0_at(int i, Vec& out, OpCounts* counts) const {
  problem_.x0.eval(grid_.node(i), out);
  if (counts) counts->x0_evals++;
}

Trajectory forward_solve(const DiscreteProblem& dp, const DiscreteControl& c,
                         OpCounts* counts) {
  const int n_steps = dp.grid().steps;
  if (c.steps() != n_steps)
    throw InputError("discretize: control has " +
                     std::to_string(c.steps()) + " entries, expected " +
                     std::to_string(n_steps));
  Trajectory traj;
  traj.states.resize(n_steps + 1);
  Vec term(dp.problem().state_dim);
  for (int i = 0; i <= n_steps; ++i) {
    dp.x0_at(i, traj.states[i], counts);
    for (int j = 0; j < i; ++j) {
      dp.phi(i, j, traj.states[j], c.values[j], term, counts);
      for (std::size_t k = 0; k < term.size(); ++k) traj.states[i][k] += term[k];
    }
    for (double v : traj.states[i]) {
      if (!std::isfinite(v))
        throw NumericalError("discretize: non-finite state at stage " +
                             std::to_string(i));
    }
  }
  return traj;
}

double discrete_cost(const DiscreteProblem& dp, const Trajectory& traj,
                     const DiscreteControl& c, OpCounts* counts) {
  const int n_steps = dp.grid().steps;
  if (c.steps() != n_steps ||
      static_cast<int>(traj.states.size()) != n_steps + 1)
    throw InputError("discretize: trajectory/control length mismatch");
  double cost = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    cost += dp.stage_cost(i, traj.states[i], c.values[i], counts);
  }
  cost += dp.terminal_cost(traj.states[n_steps], counts);
  return cost;
}

bool check_lipschitz_admissible(const DiscreteControl& c, double lipschitz,
                                double h, double tol) {
  const double band = lipschitz * h + tol;
  for (int i = 0; i + 1 < c.steps(); ++i) {
    if (max_norm_diff(c.values[i + 1], c.values[i]) > band) return false;
  }
  return true;
}

InterpolatedControl::InterpolatedControl(DiscreteControl c, Grid grid)
    : control_(std::move(c)), grid_(grid) {}

Vec InterpolatedControl::operator()(double t) const {
  const int n_steps = control_.steps();
  const double h = grid_.h;
  if (t <= 0.0) return control_.values[0];
  // Constant on the final interval [(N-1)h, T].
  if (t >= (n_steps - 1) * h) return control_.values[n_steps - 1];
  const int i = static_cast<int>(t / h);
  const int lo = std::min(i, n_steps - 2);
  const double theta = (t - lo * h) / h;
  Vec out(control_.values[lo].size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = (1.0 - theta) * control_.values[lo][k] +
             theta * control_.values[lo + 1][k];
  }
  return out;
}

InterpolatedControl interpolate(const DiscreteControl& c, const Grid& grid,
                                double lipschitz) {
  if (c.steps() != grid.steps)
    throw InputError("discretize: control/grid length mismatch");
  if (!check_lipschitz_admissible(c, lipschitz, grid.h))
    throw InputError("discretize: control violates the Lipschitz band");
  return InterpolatedControl(c, grid);
}

}  // namespace vdp
