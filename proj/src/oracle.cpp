#include "vdp/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace vdp {

namespace {

// Lexicographic order on index sequences (stage 0 first); codes carry digit i
// at weight M^i.
bool sequence_less(std::uint64_t a, std::uint64_t b, int steps,
                   std::uint64_t m) {
  for (int i = 0; i < steps; ++i) {
    const std::uint64_t da = a % m;
    const std::uint64_t db = b % m;
    if (da != db) return da < db;
    a /= m;
    b /= m;
  }
  return false;
}

struct EnumBest {
  bool found = false;
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t code = 0;

  void offer(double v, std::uint64_t c, int steps, std::uint64_t m) {
    if (!found || v < value ||
        (v == value && sequence_less(c, code, steps, m))) {
      found = true;
      value = v;
      code = c;
    }
  }
};

DiscreteControl decode_control(std::uint64_t code, int steps,
                               const Quantization& q) {
  DiscreteControl c;
  c.values.reserve(steps);
  for (int i = 0; i < steps; ++i) {
    c.values.push_back(q.point(code % q.count));
    code /= q.count;
  }
  return c;
}

bool band_admissible_code(std::uint64_t code, int steps, const Quantization& q,
                          const std::vector<char>& adm) {
  std::uint64_t prev = code % q.count;
  code /= q.count;
  for (int i = 1; i < steps; ++i) {
    const std::uint64_t cur = code % q.count;
    if (!adm[prev * q.count + cur]) return false;
    prev = cur;
    code /= q.count;
  }
  return true;
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                              depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

bool scalar_linear_constant_x0(const VolterraProblem& p) {
  if (p.kernel.form != KernelForm::Linear) return false;
  if (p.state_dim != 1 || p.control_dim != 1) return false;
  if (!p.x0.c1.empty() && p.x0.c1[0] != 0.0) return false;
  return true;
}

double linear_reference_at(double a, double b, double x0c,
                           const std::function<double(double)>& u, double t,
                           double tol) {
  const double inhom = adaptive_simpson(
      [&](double s) { return std::exp(a * (t - s)) * b * u(s); }, 0.0, t, tol);
  return std::exp(a * t) * x0c + inhom;
}

int default_fine_steps(const std::vector<int>& n_list) {
  long long l = 1;
  for (int n : n_list) {
    l = std::lcm(l, static_cast<long long>(n));
    if (l > 1'000'000)
      throw CapacityError("oracle: fine grid for this N list is too large");
  }
  const long long target = 64LL * n_list.back();
  const long long fine = l * ((target + l - 1) / l);
  if (fine > 4'000'000)
    throw CapacityError("oracle: fine grid for this N list is too large");
  return static_cast<int>(fine);
}

void validate_n_list(const std::vector<int>& n_list, std::size_t min_len) {
  if (n_list.size() < min_len)
    throw InputError("oracle: N list needs at least " +
                     std::to_string(min_len) + " entries");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
      throw InputError("oracle: N list must be strictly increasing and >= 1");
  }
}

}  // namespace

EnumerationResult enumerate_min(const DiscreteProblem& dp,
                                const Quantization& q,
                                const ConstraintBand* band, int workers,
                                std::uint64_t cap) {
  const int steps = dp.grid().steps;
  const std::uint64_t total = pow_u64_checked(q.count, steps);
  if (total > cap)
    throw CapacityError("oracle: " + std::to_string(total) +
                        " sequences exceed the enumeration cap of " +
                        std::to_string(cap));
  std::vector<char> adm;
  if (band) {
    const double width = band->lipschitz * band->h + band->tol;
    adm.resize(q.count * q.count);
    for (std::uint64_t a = 0; a < q.count; ++a) {
      for (std::uint64_t b = 0; b < q.count; ++b) {
        adm[a * q.count + b] =
            max_norm_diff(q.point(a), q.point(b)) <= width ? 1 : 0;
      }
    }
  }

  EnumBest best;
  std::uint64_t evaluated = 0;
  bool failed = false;
  std::string message;
#pragma omp parallel num_threads(std::max(1, workers))
  {
    EnumBest local;
    std::uint64_t local_evaluated = 0;
#pragma omp for schedule(static)
    for (long long code = 0; code < static_cast<long long>(total); ++code) {
      if (failed) continue;
      const auto ucode = static_cast<std::uint64_t>(code);
      if (band && !band_admissible_code(ucode, steps, q, adm)) continue;
      try {
        const DiscreteControl c = decode_control(ucode, steps, q);
        const Trajectory traj = forward_solve(dp, c);
        local.offer(discrete_cost(dp, traj, c), ucode, steps, q.count);
        ++local_evaluated;
      } catch (const std::exception& e) {
#pragma omp critical(vdp_enum_error)
        {
          failed = true;
          message = e.what();
        }
      }
    }
#pragma omp critical(vdp_enum_merge)
    {
      evaluated += local_evaluated;
      if (local.found) best.offer(local.value, local.code, steps, q.count);
    }
  }
  if (failed) throw NumericalError(message);
  if (!best.found)
    throw InputError("oracle: no admissible control sequence exists");
  return {decode_control(best.code, steps, q), best.value, evaluated};
}

std::vector<double> linear_reference(double a, double b, double x0c,
                                     const std::function<double(double)>& u,
                                     const std::vector<double>& times,
                                     double tol) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    out.push_back(linear_reference_at(a, b, x0c, u, t, tol));
  }
  return out;
}

double linear_reference_cost(const VolterraProblem& p,
                             const std::function<double(double)>& u,
                             double tol) {
  if (!scalar_linear_constant_x0(p))
    throw InputError(
        "oracle: linear reference requires a scalar linear kernel with "
        "constant x0");
  const double a = p.kernel.a(0, 0);
  const double b = p.kernel.b(0, 0);
  const double x0c = p.x0.c0[0];
  const auto x_ref = [&](double t) {
    return linear_reference_at(a, b, x0c, u, t, tol);
  };
  const double running = adaptive_simpson(
      [&](double t) {
        return p.running_cost.eval(t, Vec{x_ref(t)}, Vec{u(t)});
      },
      0.0, p.horizon, tol);
  return running + p.terminal_cost.eval(Vec{x_ref(p.horizon)});
}

Trajectory fine_grid_reference(const VolterraProblem& p,
                               const std::function<Vec(double)>& u,
                               int fine_steps) {
  DiscreteProblem dp = discretize(p, fine_steps);
  DiscreteControl c;
  c.values.reserve(fine_steps);
  for (int i = 0; i < fine_steps; ++i) c.values.push_back(u(dp.grid().node(i)));
  return forward_solve(dp, c);
}

double fit_order(const std::vector<double>& h, const std::vector<double>& err) {
  bool any = false;
  for (double e : err) {
    if (e >= 1e-15) any = true;
  }
  if (!any) return std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (err[i] <= 0.0) continue;
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::infinity();
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

ConvergenceStudy convergence_study(const VolterraProblem& p,
                                   const ContinuousControl& u,
                                   const std::vector<int>& n_list,
                                   int fine_steps) {
  p.validate();
  validate_n_list(n_list, 3);
  const bool closed_form = scalar_linear_constant_x0(p);
  if (fine_steps == 0 && !closed_form) fine_steps = default_fine_steps(n_list);

  Trajectory fine_traj;
  double j_ref = 0.0;
  DiscreteControl fine_control;
  if (!closed_form) {
    DiscreteProblem fine_dp = discretize(p, fine_steps);
    fine_control.values.reserve(fine_steps);
    for (int i = 0; i < fine_steps; ++i)
      fine_control.values.push_back(u.eval(fine_dp.grid().node(i)));
    fine_traj = forward_solve(fine_dp, fine_control);
    j_ref = discrete_cost(fine_dp, fine_traj, fine_control);
  } else {
    j_ref = linear_reference_cost(p, [&](double t) { return u.eval(t)[0]; });
  }

  ConvergenceStudy study;
  std::vector<double> hs, state_errs, cost_errs;
  for (int n : n_list) {
    DiscreteProblem dp = discretize(p, n);
    DiscreteControl c;
    c.values.reserve(n);
    for (int i = 0; i < n; ++i) c.values.push_back(u.eval(dp.grid().node(i)));
    const Trajectory traj = forward_solve(dp, c);
    const double jh = discrete_cost(dp, traj, c);

    double state_error = 0.0;
    if (closed_form) {
      std::vector<double> times(n + 1);
      for (int i = 0; i <= n; ++i) times[i] = dp.grid().node(i);
      const std::vector<double> ref =
          linear_reference(p.kernel.a(0, 0), p.kernel.b(0, 0), p.x0.c0[0],
                           [&](double t) { return u.eval(t)[0]; }, times);
      for (int i = 0; i <= n; ++i)
        state_error = std::max(state_error, std::abs(ref[i] - traj.states[i][0]));
    } else {
      if (fine_steps % n != 0)
        throw InputError("oracle: fine grid must refine every coarse grid");
      const int stride = fine_steps / n;
      for (int i = 0; i <= n; ++i) {
        state_error = std::max(
            state_error,
            max_norm_diff(fine_traj.states[i * stride], traj.states[i]));
      }
    }
    const double cost_error = std::abs(j_ref - jh);

    study.rows.push_back({n, dp.grid().h, state_error, cost_error, 0.0});
    hs.push_back(dp.grid().h);
    state_errs.push_back(state_error);
    cost_errs.push_back(cost_error);
  }
  study.state_order = fit_order(hs, state_errs);
  study.cost_order = fit_order(hs, cost_errs);
  return study;
}

std::vector<ConvergenceRow> optimality_gap_study(const VolterraProblem& p,
                                                 int points,
                                                 const std::vector<int>& n_list,
                                                 int workers, int fine_steps) {
  p.validate();
  validate_n_list(n_list, 1);
  if (fine_steps == 0)
    fine_steps = std::max(4096, default_fine_steps(n_list));
  DiscreteProblem fine_dp = discretize(p, fine_steps);

  std::vector<ConvergenceRow> rows;
  std::vector<double> costs;
  for (int n : n_list) {
    SolveSettings settings;
    settings.steps = n;
    settings.points = points;
    settings.use_band = true;
    settings.workers = workers;
    const SolveReport report = solve(p, settings);
    const Grid coarse_grid{n, p.horizon / n, p.horizon};
    const InterpolatedControl interp =
        interpolate(report.control, coarse_grid, p.lipschitz_budget);
    DiscreteControl fine_control;
    fine_control.values.reserve(fine_steps);
    for (int i = 0; i < fine_steps; ++i)
      fine_control.values.push_back(interp(fine_dp.grid().node(i)));
    const Trajectory fine_traj = forward_solve(fine_dp, fine_control);
    const double j = discrete_cost(fine_dp, fine_traj, fine_control);
    rows.push_back({n, p.horizon / n, 0.0, 0.0, 0.0});
    costs.push_back(j);
  }
  const double j_best = *std::min_element(costs.begin(), costs.end());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].gap = costs[i] - j_best;
  return rows;
}

}  // namespace vdp
