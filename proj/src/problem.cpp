#include "vdp/problem.hpp"

#include <algorithm>
#include <cmath>

namespace vdp {

double max_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_norm_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double Mat::inf_norm() const {
  double m = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += std::abs((*this)(r, c));
    m = std::max(m, s);
  }
  return m;
}

void Mat::accumulate_product(const Vec& v, Vec& out) const {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += (*this)(r, c) * v[c];
    out[r] += s;
  }
}

void Kernel::eval(double t, double s, const Vec& x, const Vec& u,
                  Vec& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  switch (form) {
    case KernelForm::Linear:
      a.accumulate_product(x, out);
      b.accumulate_product(u, out);
      break;
    case KernelForm::MemoryDecay: {
      a.accumulate_product(x, out);
      b.accumulate_product(u, out);
      const double w = std::exp(-kappa * (t - s));
      for (double& v : out) v *= w;
      break;
    }
    case KernelForm::LogisticMemory:
      out[0] = c * std::exp(-kappa * (t - s)) * x[0] * (1.0 - x[0]) +
               b_scalar * u[0];
      break;
    case KernelForm::Custom:
      custom(t, s, x, u, out);
      break;
  }
}

void InitialFunction::eval(double t, Vec& out) const {
  out = c0;
  if (!c1.empty()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c1[i] * t;
  }
}

double InitialFunction::sup_norm(double horizon) const {
  double m = max_norm(c0);
  if (!c1.empty()) {
    Vec end;
    eval(horizon, end);
    m = std::max(m, max_norm(end));
  }
  return m;
}

double RunningCost::eval(double /*t*/, const Vec& x, const Vec& u) const {
  switch (form) {
    case RunningCostForm::Zero:
      return 0.0;
    case RunningCostForm::Constant:
      return value;
    case RunningCostForm::Quadratic: {
      double s = 0.0;
      if (wx != 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double d = x[i] - (x_target.empty() ? 0.0 : x_target[i]);
          s += wx * d * d;
        }
      }
      if (wu != 0.0) {
        for (std::size_t i = 0; i < u.size(); ++i) {
          const double d = u[i] - (u_target.empty() ? 0.0 : u_target[i]);
          s += wu * d * d;
        }
      }
      return s;
    }
  }
  return 0.0;
}

double TerminalCost::eval(const Vec& x) const {
  switch (form) {
    case TerminalCostForm::Zero:
      return 0.0;
    case TerminalCostForm::Constant:
      return value;
    case TerminalCostForm::Linear: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += coeffs[i] * x[i];
      return s;
    }
    case TerminalCostForm::Quadratic: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - (target.empty() ? 0.0 : target[i]);
        s += w * d * d;
      }
      return s;
    }
  }
  return 0.0;
}

bool ControlBox::contains(const Vec& u, double tol) const {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (u[k] < lo[k] - tol || u[k] > hi[k] + tol) return false;
  }
  return true;
}

double ControlBox::max_abs() const {
  double m = 0.0;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    m = std::max(m, std::max(std::abs(lo[k]), std::abs(hi[k])));
  }
  return m;
}

double ControlBox::diameter() const {
  double m = 0.0;
  for (std::size_t k = 0; k < lo.size(); ++k) m = std::max(m, hi[k] - lo[k]);
  return m;
}

void VolterraProblem::validate() const {
  if (!(horizon > 0.0)) throw InputError("problem: horizon must be > 0");
  if (state_dim < 1 || control_dim < 1)
    throw InputError("problem: dims must be >= 1");
  if (lipschitz_budget < 0.0)
    throw InputError("problem: lipschitz_budget must be >= 0");
  if (control_box.lo.size() != control_dim ||
      control_box.hi.size() != control_dim)
    throw InputError("problem: control_box size does not match control_dim");
  for (std::size_t k = 0; k < control_dim; ++k) {
    if (control_box.lo[k] > control_box.hi[k])
      throw InputError("problem: control_box has lo > hi");
  }
  if (x0.c0.size() != state_dim)
    throw InputError("problem: x0 dimension does not match state_dim");
  if (kernel.form == KernelForm::LogisticMemory &&
      (state_dim != 1 || control_dim != 1))
    throw InputError("problem: logistic_memory kernel requires n = m = 1");
  if (kernel.form == KernelForm::Linear ||
      kernel.form == KernelForm::MemoryDecay) {
    if (kernel.a.rows != state_dim || kernel.a.cols != state_dim)
      throw InputError("problem: kernel matrix a must be n x n");
    if (kernel.b.rows != state_dim || kernel.b.cols != control_dim)
      throw InputError("problem: kernel matrix b must be n x m");
  }
  if (kernel.form == KernelForm::MemoryDecay && kernel.kappa < 0.0)
    throw InputError("problem: memory_decay kappa must be >= 0");
}

Vec VolterraProblem::eval_kernel(double t, double s, const Vec& x,
                                 const Vec& u) const {
  if (s < 0.0 || s > t || t > horizon)
    throw InputError("problem: kernel arguments must satisfy 0 <= s <= t <= T");
  Vec out(state_dim);
  kernel.eval(t, s, x, u, out);
  return out;
}

Vec VolterraProblem::eval_x0(double t) const {
  Vec out;
  x0.eval(t, out);
  return out;
}

namespace {

void require_nonneg(double v, const char* name) {
  if (v < 0.0 || !std::isfinite(v))
    throw InputError(std::string("problem: ") + name +
                     " must be finite and non-negative");
}

}  // namespace

RelevantSet relevant_radius_growth(double g0, double g1, double x0_sup,
                                   double horizon) {
  require_nonneg(g0, "G0");
  require_nonneg(g1, "G1");
  require_nonneg(x0_sup, "x0_sup");
  require_nonneg(horizon, "T");
  return {(x0_sup + horizon * g0) * std::exp(g1 * horizon),
          RelevantSet::Method::Growth};
}

RelevantSet relevant_radius_lipschitz(double g2, double lf1, double x0_sup,
                                      double horizon) {
  require_nonneg(g2, "G2");
  require_nonneg(lf1, "Lf1");
  require_nonneg(x0_sup, "x0_sup");
  require_nonneg(horizon, "T");
  return {(g2 * horizon + x0_sup) * std::exp(lf1 * horizon),
          RelevantSet::Method::Lipschitz};
}

RelevantSet relevant_set(const VolterraProblem& p) {
  if (p.user_radius) {
    if (*p.user_radius < 0.0)
      throw InputError("problem: user radius must be >= 0");
    return {*p.user_radius, RelevantSet::Method::User};
  }
  const double x0_sup = p.x0.sup_norm(p.horizon);
  const double u_max = p.control_box.max_abs();
  switch (p.kernel.form) {
    case KernelForm::Linear:
    case KernelForm::MemoryDecay: {
      // exp(-kappa*(t-s)) <= 1, so the undamped constants bound both forms.
      const double lf1 = p.kernel.a.inf_norm();
      // |f(t,s,0,u)|_inf <= max_r sum_c |b_rc| * u_max
      const double g2 = p.kernel.b.inf_norm() * u_max;
      return relevant_radius_lipschitz(g2, lf1, x0_sup, p.horizon);
    }
    case KernelForm::LogisticMemory: {
      // Lipschitz constant of c*x*(1-x) on |x| <= R is c*(1+2R); iterate
      // R <- (G2*T + x0_sup)*exp(c*(1+2R)*T) to a fixed point.
      const double g2 = std::abs(p.kernel.b_scalar) * u_max;
      const double base = g2 * p.horizon + x0_sup;
      double r = base;
      for (int it = 0; it < 200; ++it) {
        const double lf1 = std::abs(p.kernel.c) * (1.0 + 2.0 * r);
        const double next = base * std::exp(lf1 * p.horizon);
        if (!std::isfinite(next) || next > 1e12) break;
        if (next - r < 1e-10) {
          return {next, RelevantSet::Method::Lipschitz};
        }
        r = next;
      }
      throw InputError(
          "problem: relevant-set iteration diverged for logistic_memory "
          "kernel; supply a user radius");
    }
    case KernelForm::Custom: {
      const double lf1 = p.kernel.custom_lipschitz;
      Vec zero(p.state_dim, 0.0), out(p.state_dim);
      // Sample |f(t,s,0,u)| at box corners of u over a coarse (t,s) grid.
      double g2 = 0.0;
      const int grid = 8;
      Vec u(p.control_dim);
      const std::size_t corners = std::size_t{1} << p.control_dim;
      for (int it = 0; it <= grid; ++it) {
        const double t = p.horizon * it / grid;
        for (int is = 0; is <= it; ++is) {
          const double s = p.horizon * is / grid;
          for (std::size_t cidx = 0; cidx < corners; ++cidx) {
            for (std::size_t k = 0; k < p.control_dim; ++k) {
              u[k] = (cidx >> k) & 1 ? p.control_box.hi[k] : p.control_box.lo[k];
            }
            p.kernel.eval(t, s, zero, u, out);
            g2 = std::max(g2, max_norm(out));
          }
        }
      }
      return relevant_radius_lipschitz(g2, lf1, x0_sup, p.horizon);
    }
  }
  throw InputError("problem: unknown kernel form");
}

}  // namespace vdp
