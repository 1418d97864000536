#include "vdp/costmodel.hpp"

#include "vdp/discretize.hpp"
#include "vdp/dp.hpp"

namespace vdp {

namespace {

BigInt big_pow(const BigInt& base, int exp) {
  BigInt r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void validate_params(const CostParams& p) {
  if (p.stages < 1) throw InputError("costmodel: N must be >= 1");
  if (p.controls < 1) throw InputError("costmodel: M must be >= 1");
  if (p.c_phi0 < 0 || p.c_phi1 < 0 || p.opt_cost < 0)
    throw InputError("costmodel: cost coefficients must be >= 0");
}

}  // namespace

RecursivePrediction predict_recursive(const CostParams& params) {
  validate_params(params);
  const int n = params.stages;
  const BigInt& m = params.controls;
  RecursivePrediction out;
  out.cost_to_go.assign(n + 1, 0);
  out.cost_to_go[n] =
      big_pow(m, n + 1) * (params.c_phi0 + n * params.c_phi1);
  for (int i = n - 1; i >= 0; --i) {
    out.cost_to_go[i] = out.cost_to_go[i + 1] +
                        big_pow(m, i + 1) * (params.c_phi0 + i * params.c_phi1) +
                        big_pow(m, i) * params.opt_cost;
  }
  out.total = 0;
  for (int i = 1; i <= n; ++i) out.total += out.cost_to_go[i];
  return out;
}

BigRat predict_closed_form(const CostParams& params) {
  validate_params(params);
  if (params.controls < 2)
    throw InputError("costmodel: closed form requires M >= 2");
  const BigInt n = params.stages;
  const BigInt& m = params.controls;
  const BigInt d = m - 1;
  const BigRat term0(
      params.c_phi0 * (n * big_pow(m, params.stages + 2) -
                       (n + 1) * big_pow(m, params.stages + 1) + m),
      d * d);
  const BigRat term1(
      params.c_phi1 *
          (n * n * big_pow(m, params.stages + 3) -
           (2 * n * n + 2 * n - 1) * big_pow(m, params.stages + 2) +
           (n + 1) * (n + 1) * big_pow(m, params.stages + 1) - m * m - m),
      d * d * d);
  const BigRat term2(
      params.opt_cost * ((n - 1) * big_pow(m, params.stages + 1) -
                         n * big_pow(m, params.stages) + m),
      d * d);
  return term0 + term1 + term2;
}

BigInt predict_phi_evals(int stages, const BigInt& controls) {
  BigInt count = big_pow(controls, stages);  // terminal Phi0, one per history
  for (int i = stages - 1; i >= 0; --i) count += big_pow(controls, i + 1);
  return count;
}

BigInt predict_f_evals(int stages, const BigInt& controls) {
  BigInt count = 0;
  for (int k = 1; k <= stages; ++k) count += k * big_pow(controls, k);
  return count;
}

BigInt predict_x0_evals(int stages) { return BigInt(stages + 1); }

BigInt predict_min_comparisons(int stages, const BigInt& controls) {
  BigInt count = 0;
  for (int i = 0; i < stages; ++i) count += big_pow(controls, i) * (controls - 1);
  return count;
}

InstrumentReport instrument_and_compare(const VolterraProblem& p, int steps,
                                        int points) {
  DiscreteProblem dp = discretize(p, steps);
  Quantization q = quantize(p.control_box, points);
  OpCounts counts;
  backward_sweep_serial(dp, q, nullptr, kDefaultTableBudget, &counts);

  InstrumentReport report;
  report.stages = steps;
  report.controls = q.count;
  const BigInt m(q.count);
  report.counters = {
      {"phi_evals", predict_phi_evals(steps, m), counts.phi_evals, false},
      {"f_evals", predict_f_evals(steps, m), counts.f_evals, false},
      {"x0_evals", predict_x0_evals(steps), counts.x0_evals, false},
      {"min_comparisons", predict_min_comparisons(steps, m),
       counts.min_comparisons, false},
  };
  report.all_match = true;
  for (auto& c : report.counters) {
    c.match = c.predicted == BigInt(c.measured);
    report.all_match = report.all_match && c.match;
  }
  return report;
}

std::vector<ClosedFormRow> closed_form_table(const std::vector<int>& n_values,
                                             const std::vector<int>& m_values,
                                             const CostParams& coefficients) {
  std::vector<ClosedFormRow> rows;
  for (int n : n_values) {
    for (int m : m_values) {
      CostParams params = coefficients;
      params.stages = n;
      params.controls = m;
      ClosedFormRow row;
      row.stages = n;
      row.controls = m;
      row.recursive_total = predict_recursive(params).total;
      row.closed_form_total = predict_closed_form(params);
      row.delta = BigRat(row.recursive_total) - row.closed_form_total;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace vdp
