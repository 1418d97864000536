#include "vdp/dp.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace vdp {

std::uint64_t pow_u64_checked(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
      throw CapacityError("dp: M^i overflows 64-bit arithmetic");
    r *= base;
  }
  return r;
}

Quantization quantize(const ControlBox& box, int points_per_coord) {
  const std::size_t m = box.dim();
  if (points_per_coord < 1)
    throw InputError("dp: quantization points must be >= 1");
  if (points_per_coord == 1) {
    for (std::size_t k = 0; k < m; ++k) {
      if (box.lo[k] != box.hi[k])
        throw InputError("dp: Q = 1 requires a degenerate control box");
    }
  }
  Quantization q;
  q.points_per_coord = points_per_coord;
  q.control_dim = m;
  q.count = pow_u64_checked(static_cast<std::uint64_t>(points_per_coord),
                            static_cast<int>(m));
  if (q.count > (std::uint64_t{1} << 24))
    throw CapacityError("dp: quantized control count M is too large");
  q.points.resize(q.count, Vec(m));
  for (std::uint64_t idx = 0; idx < q.count; ++idx) {
    std::uint64_t rest = idx;
    for (std::size_t k = 0; k < m; ++k) {
      const int lvl = static_cast<int>(rest % points_per_coord);
      rest /= points_per_coord;
      q.points[idx][k] =
          points_per_coord == 1
              ? box.lo[k]
              : box.lo[k] + lvl * (box.hi[k] - box.lo[k]) / (points_per_coord - 1);
    }
  }
  return q;
}

void check_capacity(int stages, std::uint64_t controls, std::uint64_t budget) {
  std::uint64_t total = 0;
  std::uint64_t mi = 1;
  for (int i = 0; i <= stages; ++i) {
    if (total > budget - std::min(budget, mi) || mi > budget) {
      throw CapacityError(
          "dp: value table needs more than the configured budget of " +
          std::to_string(budget) + " entries (N=" + std::to_string(stages) +
          ", M=" + std::to_string(controls) + ")");
    }
    total += mi;
    if (i < stages) {
      if (controls != 0 &&
          mi > std::numeric_limits<std::uint64_t>::max() / controls)
        throw CapacityError("dp: value table size overflows 64-bit arithmetic");
      mi *= controls;
    }
  }
  if (total > budget) {
    throw CapacityError(
        "dp: value table needs " + std::to_string(total) +
        " entries, budget is " + std::to_string(budget));
  }
}

Vec prefix_state(const DiscreteProblem& dp, const Quantization& q,
                 const HistoryCode& code, OpCounts* counts) {
  const int stage = code.stage;
  if (stage < 0 || stage > dp.grid().steps)
    throw InputError("dp: history stage out of range");
  if (code.code >= pow_u64_checked(q.count, stage))
    throw InputError("dp: history code out of range for its stage");
  // Forward solve of the prefix: states 0..stage under the decoded controls.
  std::vector<Vec> states(stage + 1);
  Vec term(dp.problem().state_dim);
  std::uint64_t rest = code.code;
  std::vector<std::uint64_t> digits(stage);
  for (int j = 0; j < stage; ++j) {
    digits[j] = rest % q.count;
    rest /= q.count;
  }
  for (int i = 0; i <= stage; ++i) {
    dp.x0_at(i, states[i], counts);
    for (int j = 0; j < i; ++j) {
      dp.phi(i, j, states[j], q.point(digits[j]), term, counts);
      for (std::size_t k = 0; k < term.size(); ++k) states[i][k] += term[k];
    }
  }
  for (double v : states[stage]) {
    if (!std::isfinite(v))
      throw NumericalError("dp: non-finite prefix state at stage " +
                           std::to_string(stage));
  }
  return states[stage];
}

namespace {

struct Scratch {
  Vec xj;
  Vec term;
};

// Shared machinery for the serial reference and the OpenMP sweep; both call
// the same per-entry routines so results are bit-identical.
struct SweepContext {
  const DiscreteProblem& dp;
  const Quantization& q;
  const ConstraintBand* band;
  int stages;            // N
  std::uint64_t controls;  // M
  std::size_t n;
  std::vector<std::uint64_t> mpow;      // M^i, i = 0..N
  std::vector<std::vector<double>> states;  // stage i: M^i * n doubles
  std::vector<char> admissible;         // M x M, band runs only
  Vec x0_stage;                         // x0(t_i) for the stage being built

  SweepContext(const DiscreteProblem& dp_in, const Quantization& q_in,
               const ConstraintBand* band_in)
      : dp(dp_in), q(q_in), band(band_in) {
    stages = dp.grid().steps;
    controls = q.count;
    n = dp.problem().state_dim;
    mpow.resize(stages + 1);
    mpow[0] = 1;
    for (int i = 1; i <= stages; ++i) mpow[i] = mpow[i - 1] * controls;
    states.resize(stages + 1);
    if (band) {
      const double width = band->lipschitz * band->h + band->tol;
      admissible.resize(controls * controls);
      for (std::uint64_t prev = 0; prev < controls; ++prev) {
        for (std::uint64_t xi = 0; xi < controls; ++xi) {
          admissible[prev * controls + xi] =
              max_norm_diff(q.point(xi), q.point(prev)) <= width ? 1 : 0;
        }
      }
    }
  }

  void compute_state(int stage, std::uint64_t code, Scratch& s,
                     OpCounts* counts) {
    double* out = states[stage].data() + code * n;
    std::memcpy(out, x0_stage.data(), n * sizeof(double));
    std::uint64_t rest = code;
    std::uint64_t prefix = 0;
    std::uint64_t weight = 1;
    for (int j = 0; j < stage; ++j) {
      const std::uint64_t digit = rest % controls;
      std::memcpy(s.xj.data(), states[j].data() + prefix * n,
                  n * sizeof(double));
      dp.phi(stage, j, s.xj, q.point(digit), s.term, counts);
      for (std::size_t k = 0; k < n; ++k) out[k] += s.term[k];
      prefix += digit * weight;
      weight *= controls;
      rest /= controls;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(out[k]))
        throw NumericalError("dp: non-finite state at stage " +
                             std::to_string(stage));
    }
  }

  void compute_value(int stage, std::uint64_t code,
                     const std::vector<double>& next_values, Scratch& s,
                     double& value, std::uint32_t& arg,
                     OpCounts* counts) const {
    std::memcpy(s.xj.data(), states[stage].data() + code * n,
                n * sizeof(double));
    const char* row = nullptr;
    if (band && stage >= 1) {
      const std::uint64_t prev = (code / mpow[stage - 1]) % controls;
      row = admissible.data() + prev * controls;
    }
    double best = std::numeric_limits<double>::infinity();
    std::int64_t best_arg = kArgminUnset;
    int evaluated = 0;
    for (std::uint64_t xi = 0; xi < controls; ++xi) {
      if (row && !row[xi]) continue;
      const double cand = next_values[code + xi * mpow[stage]] +
                          dp.stage_cost(stage, s.xj, q.point(xi), counts);
      if (counts && evaluated > 0) counts->min_comparisons++;
      ++evaluated;
      if (cand < best) {
        best = cand;
        best_arg = static_cast<std::int64_t>(xi);
      }
    }
    if (best_arg == kArgminUnset)
      throw std::logic_error("dp: empty admissible set in backward sweep");
    value = best;
    arg = static_cast<std::uint32_t>(best_arg);
  }

  void compute_terminal(std::uint64_t code, Scratch& s, double& value,
                        OpCounts* counts) const {
    std::memcpy(s.xj.data(), states[stages].data() + code * n,
                n * sizeof(double));
    value = dp.terminal_cost(s.xj, counts);
  }
};

// Runs fn(code, scratch, local_counts) over [0, total), either serially or
// across an OpenMP pool; counter tallies merge deterministically.
template <typename Fn>
void for_each_code(std::uint64_t total, int workers, OpCounts* counts,
                   std::size_t n, Fn&& fn) {
  if (workers <= 1) {
    Scratch s{Vec(n), Vec(n)};
    for (std::uint64_t code = 0; code < total; ++code) fn(code, s, counts);
    return;
  }
  bool failed = false;
  std::string message;
#pragma omp parallel num_threads(workers)
  {
    Scratch s{Vec(n), Vec(n)};
    OpCounts local;
    OpCounts* lc = counts ? &local : nullptr;
#pragma omp for schedule(static)
    for (long long code = 0; code < static_cast<long long>(total); ++code) {
      if (failed) continue;
      try {
        fn(static_cast<std::uint64_t>(code), s, lc);
      } catch (const std::exception& e) {
#pragma omp critical(vdp_sweep_error)
        {
          failed = true;
          message = e.what();
        }
      }
    }
    if (counts) {
#pragma omp critical(vdp_sweep_counts)
      *counts += local;
    }
  }
  if (failed) throw NumericalError(message);
}

ValueTable run_sweep(const DiscreteProblem& dp, const Quantization& q,
                     const ConstraintBand* band, int workers,
                     std::uint64_t budget, OpCounts* counts) {
  check_capacity(dp.grid().steps, q.count, budget);
  SweepContext ctx(dp, q, band);
  const int stages = ctx.stages;

  // Prefix states, built forward; stage i reuses stages < i.
  ctx.dp.x0_at(0, ctx.x0_stage, counts);
  ctx.states[0].assign(ctx.x0_stage.begin(), ctx.x0_stage.end());
  for (int i = 1; i <= stages; ++i) {
    ctx.dp.x0_at(i, ctx.x0_stage, counts);
    ctx.states[i].resize(ctx.mpow[i] * ctx.n);
    for_each_code(ctx.mpow[i], workers, counts, ctx.n,
                  [&](std::uint64_t code, Scratch& s, OpCounts* lc) {
                    ctx.compute_state(i, code, s, lc);
                  });
  }

  ValueTable table;
  table.stages = stages;
  table.controls = ctx.controls;
  table.banded = band != nullptr;
  table.values.resize(stages + 1);
  table.argmin.resize(stages);

  table.values[stages].resize(ctx.mpow[stages]);
  for_each_code(ctx.mpow[stages], workers, counts, ctx.n,
                [&](std::uint64_t code, Scratch& s, OpCounts* lc) {
                  ctx.compute_terminal(code, s, table.values[stages][code], lc);
                });
  for (int i = stages - 1; i >= 0; --i) {
    table.values[i].resize(ctx.mpow[i]);
    table.argmin[i].resize(ctx.mpow[i]);
    for_each_code(ctx.mpow[i], workers, counts, ctx.n,
                  [&](std::uint64_t code, Scratch& s, OpCounts* lc) {
                    ctx.compute_value(i, code, table.values[i + 1], s,
                                      table.values[i][code],
                                      table.argmin[i][code], lc);
                  });
  }
  return table;
}

}  // namespace

ValueTable backward_sweep_serial(const DiscreteProblem& dp,
                                 const Quantization& q,
                                 const ConstraintBand* band,
                                 std::uint64_t budget, OpCounts* counts) {
  return run_sweep(dp, q, band, 1, budget, counts);
}

ValueTable backward_sweep(const DiscreteProblem& dp, const Quantization& q,
                          const ConstraintBand* band, int workers,
                          std::uint64_t budget, OpCounts* counts) {
  if (workers < 1) throw InputError("dp: workers must be >= 1");
  return run_sweep(dp, q, band, workers, budget, counts);
}

DiscreteControl forward_reconstruct(const ValueTable& table,
                                    const DiscreteProblem& dp,
                                    const Quantization& q,
                                    const ConstraintBand* band) {
  if (table.stages != dp.grid().steps || table.controls != q.count ||
      table.banded != (band != nullptr))
    throw InputError("dp: value table does not match problem settings");
  DiscreteControl control;
  control.values.reserve(table.stages);
  std::uint64_t code = 0;
  std::uint64_t weight = 1;
  for (int i = 0; i < table.stages; ++i) {
    const std::uint32_t xi = table.argmin[i][code];
    control.values.push_back(q.point(xi));
    code += xi * weight;
    weight *= table.controls;
  }
  return control;
}

SolveReport solve(const VolterraProblem& p, const SolveSettings& settings) {
  p.validate();
  SolveReport report;
  report.settings = settings;
  DiscreteProblem dp = discretize(p, settings.steps);
  Quantization q = quantize(p.control_box, settings.points);
  ConstraintBand band{p.lipschitz_budget, dp.grid().h};
  const ConstraintBand* band_ptr = settings.use_band ? &band : nullptr;
  ValueTable table = backward_sweep(dp, q, band_ptr, settings.workers,
                                    settings.budget, &report.counts);
  report.value = table.root_value();
  report.control = forward_reconstruct(table, dp, q, band_ptr);
  report.trajectory = forward_solve(dp, report.control, &report.counts);
  report.achieved_cost =
      discrete_cost(dp, report.trajectory, report.control, &report.counts);
  const double scale = std::max(1.0, std::abs(report.value));
  if (std::abs(report.value - report.achieved_cost) > 1e-10 * scale)
    throw NumericalError(
        "dp: reconstructed control cost does not match V(0) (value=" +
        std::to_string(report.value) +
        ", cost=" + std::to_string(report.achieved_cost) + ")");
  return report;
}

void dump_value_table(const ValueTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("dp: cannot open sidecar file " + path);
  for (const auto& stage : table.values) {
    out.write(reinterpret_cast<const char*>(stage.data()),
              static_cast<std::streamsize>(stage.size() * sizeof(double)));
  }
}

}  // namespace vdp
