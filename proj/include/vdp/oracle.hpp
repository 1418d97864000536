#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vdp/discretize.hpp"
#include "vdp/dp.hpp"
#include "vdp/problem.hpp"

namespace vdp {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

struct EnumerationResult {
  DiscreteControl control;
  double value = 0.0;
  std::uint64_t sequences = 0;  // admissible sequences evaluated
};

// Exhaustive minimum over all admissible control sequences; ties broken by
// the lexicographically smallest index sequence.  Partitions the sequence
// space across workers with a deterministic merge.
EnumerationResult enumerate_min(const DiscreteProblem& dp,
                                const Quantization& q,
                                const ConstraintBand* band, int workers = 1,
                                std::uint64_t cap = kDefaultEnumerationCap);

// Closed-form-backed reference for scalar linear kernels with constant x0:
// x(t) = e^{a t} x0c + integral_0^t e^{a(t-s)} b u(s) ds, inner integral by
// adaptive quadrature to `tol` absolute.
std::vector<double> linear_reference(double a, double b, double x0c,
                                     const std::function<double(double)>& u,
                                     const std::vector<double>& times,
                                     double tol = 1e-10);

// Continuous cost along the linear reference trajectory.
double linear_reference_cost(const VolterraProblem& p,
                             const std::function<double(double)>& u,
                             double tol = 1e-10);

// Euler solve at a much finer grid, surrogate for the continuous solution.
Trajectory fine_grid_reference(const VolterraProblem& p,
                               const std::function<Vec(double)>& u,
                               int fine_steps);

struct ConvergenceRow {
  int steps = 0;  // N
  double h = 0.0;
  double state_error = 0.0;
  double cost_error = 0.0;
  double gap = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double state_order = 0.0;
  double cost_order = 0.0;
};

struct ContinuousControl {
  std::function<Vec(double)> eval;
  double lipschitz = 0.0;
};

// Errors against the linear reference when the problem admits one, else a
// fine-grid surrogate; fits log(error) vs log(h) slopes by least squares.
// Exactly-zero error columns report the order as +infinity.
ConvergenceStudy convergence_study(const VolterraProblem& p,
                                   const ContinuousControl& u,
                                   const std::vector<int>& n_list,
                                   int fine_steps = 0);

// Per N: band-constrained solve, linear interpolation of the optimum, and
// surrogate continuous cost via the fine grid; gap is measured against the
// best value observed across the list.
std::vector<ConvergenceRow> optimality_gap_study(const VolterraProblem& p,
                                                 int points,
                                                 const std::vector<int>& n_list,
                                                 int workers = 1,
                                                 int fine_steps = 0);

// Least-squares slope of log(err) vs log(h); +infinity when all errors are
// below 1e-15.
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace vdp
