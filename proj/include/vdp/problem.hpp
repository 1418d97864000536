#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vdp/errors.hpp"

namespace vdp {

using Vec = std::vector<double>;

// Max norm on vectors; the norm convention used throughout.
double max_norm(const Vec& v);
double max_norm_diff(const Vec& a, const Vec& b);

// Dense row-major matrix, small dimensions.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  static Mat scalar(double v) {
    Mat m(1, 1);
    m.data[0] = v;
    return m;
  }

  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data[r * cols + c];
  }

  // Operator norm induced by the max norm: largest absolute row sum.
  double inf_norm() const;

  // out += A * v
  void accumulate_product(const Vec& v, Vec& out) const;
};

enum class KernelForm { Linear, MemoryDecay, LogisticMemory, Custom };

// Kernel f(t,s,x,u), evaluable for 0 <= s <= t <= T.
//  Linear:         f = a*x + b*u
//  MemoryDecay:    f = exp(-kappa*(t-s)) * (a*x + b*u)
//  LogisticMemory: scalar, f = c*exp(-kappa*(t-s))*x*(1-x) + b*u
//  Custom:         caller-supplied evaluable with declared Lipschitz constant
struct Kernel {
  KernelForm form = KernelForm::Linear;
  Mat a;              // n x n
  Mat b;              // n x m
  double kappa = 0.0;
  double c = 0.0;           // logistic coupling strength
  double b_scalar = 0.0;    // logistic control gain
  std::function<void(double, double, const Vec&, const Vec&, Vec&)> custom;
  double custom_lipschitz = 0.0;

  void eval(double t, double s, const Vec& x, const Vec& u, Vec& out) const;
};

// Initial function x0(t) = c0 + c1*t, componentwise.
struct InitialFunction {
  Vec c0;
  Vec c1;  // empty means constant

  void eval(double t, Vec& out) const;
  // sup over [0,T] of |x0(t)|_inf; attained at an endpoint since x0 is affine.
  double sup_norm(double horizon) const;
};

enum class RunningCostForm { Zero, Constant, Quadratic };

// F(t,x,u).  Quadratic: wx*|x - x_target|^2 + wu*|u - u_target|^2
// (Euclidean squares, summed over coordinates).
struct RunningCost {
  RunningCostForm form = RunningCostForm::Zero;
  double value = 0.0;
  double wx = 0.0;
  double wu = 0.0;
  Vec x_target;
  Vec u_target;

  double eval(double t, const Vec& x, const Vec& u) const;
};

enum class TerminalCostForm { Zero, Constant, Linear, Quadratic };

// F0(x).  Linear: dot(coeffs, x).  Quadratic: w*|x - target|^2.
struct TerminalCost {
  TerminalCostForm form = TerminalCostForm::Zero;
  double value = 0.0;
  Vec coeffs;
  double w = 0.0;
  Vec target;

  double eval(const Vec& x) const;
};

// Box U = prod [lo_k, hi_k].
struct ControlBox {
  Vec lo;
  Vec hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(const Vec& u, double tol = 0.0) const;
  // max over U of |u|_inf
  double max_abs() const;
  // max_k (hi_k - lo_k)
  double diameter() const;
};

struct VolterraProblem {
  std::string name;
  Kernel kernel;
  InitialFunction x0;
  RunningCost running_cost;
  TerminalCost terminal_cost;
  double horizon = 1.0;
  ControlBox control_box;
  double lipschitz_budget = 0.0;
  std::size_t state_dim = 1;
  std::size_t control_dim = 1;
  std::optional<double> user_radius;

  void validate() const;

  // f(t,s,x,u); rejects s > t or t > horizon or t,s < 0.
  Vec eval_kernel(double t, double s, const Vec& x, const Vec& u) const;

  Vec eval_x0(double t) const;
};

struct RelevantSet {
  enum class Method { Growth, Lipschitz, User };
  double radius = 0.0;
  Method method = Method::Growth;
};

// Gronwall bound under linear growth |f| <= G1|x| + G0:
// radius = (x0_sup + T*G0) * exp(G1*T)
RelevantSet relevant_radius_growth(double g0, double g1, double x0_sup,
                                   double horizon);

// Gronwall bound under Lipschitz-in-x with |f(.,.,0,.)| <= G2:
// radius = (G2*T + x0_sup) * exp(Lf1*T)
RelevantSet relevant_radius_lipschitz(double g2, double lf1, double x0_sup,
                                      double horizon);

// Radius for a problem instance: user override if set, otherwise the
// Lipschitz-form bound with constants derived from the kernel form.  For the
// logistic kernel the Lipschitz constant depends on the radius itself; a
// monotone fixed-point iteration is used and failure to converge is an
// InputError (supply user_radius in that case).
RelevantSet relevant_set(const VolterraProblem& p);

}  // namespace vdp
