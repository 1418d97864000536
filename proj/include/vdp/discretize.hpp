#pragma once

#include <cstdint>
#include <vector>

#include "vdp/problem.hpp"

namespace vdp {

struct Grid {
  int steps = 1;      // N
  double h = 1.0;     // T / N
  double horizon = 1.0;

  double node(int i) const { return i * h; }
};

// Operation tallies from instrumented runs.  Counting is control-flow
// dependent only; identical inputs give identical counts.
struct OpCounts {
  std::uint64_t f_evals = 0;
  std::uint64_t x0_evals = 0;
  std::uint64_t phi_evals = 0;  // stage costs Phi plus terminal Phi0
  std::uint64_t min_comparisons = 0;

  OpCounts& operator+=(const OpCounts& o) {
    f_evals += o.f_evals;
    x0_evals += o.x0_evals;
    phi_evals += o.phi_evals;
    min_comparisons += o.min_comparisons;
    return *this;
  }
};

struct DiscreteControl {
  std::vector<Vec> values;  // u(i), i = 0..N-1

  int steps() const { return static_cast<int>(values.size()); }
};

struct Trajectory {
  std::vector<Vec> states;  // x(i), i = 0..N
};

// Euler discretization: phi(i,j,x,u) = h*f(t_i,t_j,x,u),
// Phi(i,x,u) = h*F(t_i,x,u), Phi0(x) = F0(x).
class DiscreteProblem {
 public:
  DiscreteProblem(VolterraProblem problem, int steps);

  const Grid& grid() const { return grid_; }
  const VolterraProblem& problem() const { return problem_; }

  // Requires 0 <= j < i <= N.
  void phi(int i, int j, const Vec& x, const Vec& u, Vec& out,
           OpCounts* counts = nullptr) const;
  double stage_cost(int i, const Vec& x, const Vec& u,
                    OpCounts* counts = nullptr) const;
  double terminal_cost(const Vec& x, OpCounts* counts = nullptr) const;
  void x0_at(int i, Vec& out, OpCounts* counts = nullptr) const;

 private:
  VolterraProblem problem_;
  Grid grid_;
};

DiscreteProblem discretize(const VolterraProblem& p, int steps);

// x(i) = x0(t_i) + sum_{j<i} phi(i,j,x(j),u(j)); throws NumericalError on
// non-finite states, naming the stage.
Trajectory forward_solve(const DiscreteProblem& dp, const DiscreteControl& c,
                         OpCounts* counts = nullptr);

// h * sum_i F(t_i, x(i), u(i)) + F0(x(N))
double discrete_cost(const DiscreteProblem& dp, const Trajectory& traj,
                     const DiscreteControl& c, OpCounts* counts = nullptr);

bool check_lipschitz_admissible(const DiscreteControl& c, double lipschitz,
                                double h, double tol = 1e-12);

// Piecewise-linear extension of a discrete control to [0,T]; constant on the
// final interval [(N-1)h, T].
class InterpolatedControl {
 public:
  InterpolatedControl(DiscreteControl c, Grid grid);

  Vec operator()(double t) const;
  const Grid& grid() const { return grid_; }

 private:
  DiscreteControl control_;
  Grid grid_;
};

// Rejects controls that violate the Lipschitz band.
InterpolatedControl interpolate(const DiscreteControl& c, const Grid& grid,
                                double lipschitz);

}  // namespace vdp
