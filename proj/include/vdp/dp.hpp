#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vdp/discretize.hpp"
#include "vdp/problem.hpp"

namespace vdp {

inline constexpr std::uint64_t kDefaultTableBudget = std::uint64_t{1} << 31;
inline constexpr int kArgminUnset = -1;

// Uniform lattice on the control box: Q points per coordinate, M = Q^m total.
struct Quantization {
  int points_per_coord = 2;  // Q
  std::size_t control_dim = 1;
  std::uint64_t count = 2;  // M
  std::vector<Vec> points;  // index -> lattice point, index = sum q_k * Q^k

  const Vec& point(std::uint64_t idx) const { return points[idx]; }
};

Quantization quantize(const ControlBox& box, int points_per_coord);

// History prefix beta = (beta(0),...,beta(i-1)) encoded base-M with digit j
// at weight M^j, so the length-k prefix of a code is code mod M^k.
struct HistoryCode {
  int stage = 0;
  std::uint64_t code = 0;
};

std::uint64_t pow_u64_checked(std::uint64_t base, int exp);

// Lipschitz band on consecutive quantized controls: at stage i >= 1 a
// candidate xi is admissible iff |xi - beta(i-1)|_inf <= L*h + tol; at stage 0
// every lattice point is admissible.
struct ConstraintBand {
  double lipschitz = 0.0;
  double h = 0.0;
  double tol = 1e-12;

  bool admits_all(const ControlBox& box) const {
    return lipschitz * h + tol >= box.diameter();
  }
};

struct ValueTable {
  int stages = 0;            // N
  std::uint64_t controls = 0;  // M
  bool banded = false;
  // values[i] has M^i entries; argmin[i] (i < N) holds the chosen control
  // index per history, lowest-index tie-breaking.
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::uint32_t>> argmin;

  double root_value() const { return values[0][0]; }
};

// Throws CapacityError when sum_{i=0}^{N} M^i exceeds the budget.
void check_capacity(int stages, std::uint64_t controls, std::uint64_t budget);

// x(i; i, beta): stage-i state induced by the prefix alone.
Vec prefix_state(const DiscreteProblem& dp, const Quantization& q,
                 const HistoryCode& code, OpCounts* counts = nullptr);

// Backward value recursion.  band == nullptr is the unconstrained problem.
// The parallel variant partitions each stage across an OpenMP worker pool;
// results are bit-identical to the serial reference for any worker count.
ValueTable backward_sweep_serial(const DiscreteProblem& dp,
                                 const Quantization& q,
                                 const ConstraintBand* band,
                                 std::uint64_t budget = kDefaultTableBudget,
                                 OpCounts* counts = nullptr);
ValueTable backward_sweep(const DiscreteProblem& dp, const Quantization& q,
                          const ConstraintBand* band, int workers,
                          std::uint64_t budget = kDefaultTableBudget,
                          OpCounts* counts = nullptr);

// Stage-by-stage extraction of the optimal control from the value table.
DiscreteControl forward_reconstruct(const ValueTable& table,
                                    const DiscreteProblem& dp,
                                    const Quantization& q,
                                    const ConstraintBand* band);

struct SolveSettings {
  int steps = 1;       // N
  int points = 2;      // Q
  bool use_band = false;
  int workers = 1;
  std::uint64_t budget = kDefaultTableBudget;
};

struct SolveReport {
  double value = 0.0;          // V(0, empty)
  double achieved_cost = 0.0;  // forward-solved cost of the optimum
  DiscreteControl control;
  Trajectory trajectory;
  OpCounts counts;
  SolveSettings settings;
};

SolveReport solve(const VolterraProblem& p, const SolveSettings& settings);

// Raw values, stage-major, host little-endian 64-bit floats.
void dump_value_table(const ValueTable& table, const std::string& path);

}  // namespace vdp
