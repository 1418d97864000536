#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "vdp/problem.hpp"

namespace vdp {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Cost-of-computation coefficients: Phi evaluation at stage i costs
// c_phi1*i + c_phi0, and A is the per-history optimization + interpolation
// cost.  All arithmetic is exact.
struct CostParams {
  int stages = 1;          // N
  BigInt controls = 2;     // M
  BigInt c_phi0 = 0;
  BigInt c_phi1 = 0;
  BigInt opt_cost = 0;     // A
};

struct RecursivePrediction {
  // cost_to_go[i]: cumulative cost of stages i..N, i = 0..N
  std::vector<BigInt> cost_to_go;
  BigInt total;  // sum over i = 1..N of cost_to_go[i]
};

// Backward cost recursion with terminal M^{N+1}(c_phi0 + N*c_phi1); the
// authoritative realization of the model.
RecursivePrediction predict_recursive(const CostParams& params);

// Three-term closed form; requires M >= 2.  Kept exact as a rational so any
// divisibility defect shows up instead of being rounded away.
BigRat predict_closed_form(const CostParams& params);

// Operational tallies of the actual backward sweep (unconstrained):
//   phi:  count(N) = M^N, count(i) = count(i+1) + M^{i+1}, reported at i = 0
//   f:    sum_{k=1}^{N} k*M^k under the memoized prefix-state scheme
//   x0:   N + 1
//   min:  sum_{i=0}^{N-1} M^i * (M - 1)
BigInt predict_phi_evals(int stages, const BigInt& controls);
BigInt predict_f_evals(int stages, const BigInt& controls);
BigInt predict_x0_evals(int stages);
BigInt predict_min_comparisons(int stages, const BigInt& controls);

struct CounterComparison {
  std::string name;
  BigInt predicted;
  std::uint64_t measured = 0;
  bool match = false;
};

struct InstrumentReport {
  int stages = 0;
  std::uint64_t controls = 0;
  std::vector<CounterComparison> counters;
  bool all_match = false;
};

// Runs an instrumented backward sweep (unconstrained) and compares measured
// counters against the operational predictions, integer-exact.
InstrumentReport instrument_and_compare(const VolterraProblem& p, int steps,
                                        int points);

struct ClosedFormRow {
  int stages = 0;
  BigInt controls;
  BigInt recursive_total;
  BigRat closed_form_total;
  BigRat delta;  // recursive - closed form
};

// Comparison table between the recursion and the closed form over a grid of
// (N, M); deltas are reported verbatim.
std::vector<ClosedFormRow> closed_form_table(const std::vector<int>& n_values,
                                             const std::vector<int>& m_values,
                                             const CostParams& coefficients);

}  // namespace vdp
