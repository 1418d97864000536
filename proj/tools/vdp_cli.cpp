#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "vdp/config.hpp"
#include "vdp/costmodel.hpp"
#include "vdp/discretize.hpp"
#include "vdp/dp.hpp"
#include "vdp/io.hpp"
#include "vdp/oracle.hpp"
#include "vdp/problem.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitOracleMismatch = 5;

struct OracleMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t memory_budget() {
  if (const char* env = std::getenv("VDP_MEMORY_BUDGET")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw vdp::InputError("cli: VDP_MEMORY_BUDGET must be an integer");
    }
  }
  return vdp::kDefaultTableBudget;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

void write_json(const std::string& path, nlohmann::json j) {
  j["generated_at"] = timestamp();
  std::ofstream out(path);
  if (!out) throw vdp::InputError("cli: cannot write " + path);
  out << j.dump(2) << "\n";
}

// Saturated ramp from the box floor: u_k(t) = min(lo_k + L*t, hi_k).
vdp::ContinuousControl ramp_control(const vdp::VolterraProblem& p) {
  const double rate = p.lipschitz_budget;
  vdp::ControlBox box = p.control_box;
  return {[box, rate](double t) {
            vdp::Vec u(box.dim());
            for (std::size_t k = 0; k < box.dim(); ++k)
              u[k] = std::min(box.lo[k] + rate * t, box.hi[k]);
            return u;
          },
          rate};
}

void warn_if_outside_relevant_set(const vdp::VolterraProblem& p,
                                  const vdp::Trajectory& traj) {
  try {
    const vdp::RelevantSet rel = vdp::relevant_set(p);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      if (vdp::max_norm(traj.states[i]) > rel.radius) {
        std::cerr << "warning: trajectory leaves the relevant set at stage "
                  << i << " (|x| = " << vdp::max_norm(traj.states[i])
                  << ", radius = " << rel.radius << ")\n";
        return;
      }
    }
  } catch (const vdp::InputError&) {
    // No computable radius for this instance; nothing to check.
  }
}

double tail_cost(const vdp::DiscreteProblem& dp, const vdp::Trajectory& traj,
                 const vdp::DiscreteControl& c, int from_stage) {
  double cost = 0.0;
  for (int j = from_stage; j < dp.grid().steps; ++j)
    cost += dp.stage_cost(j, traj.states[j], c.values[j]);
  return cost + dp.terminal_cost(traj.states[dp.grid().steps]);
}

struct CommonOpts {
  std::string problem_path;
  int steps = 4;
  int points = 2;
  bool band = false;
  int workers = 1;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::vector<int> n_list;
};

int run_solve(const CommonOpts& opt, const std::string& dump_table_path) {
  const vdp::VolterraProblem p = vdp::load_problem(opt.problem_path);
  vdp::SolveSettings settings{opt.steps, opt.points, opt.band, opt.workers,
                              memory_budget()};
  const vdp::SolveReport report = vdp::solve(p, settings);
  warn_if_outside_relevant_set(p, report.trajectory);

  const vdp::Grid grid{opt.steps, p.horizon / opt.steps, p.horizon};
  vdp::write_control_csv(out_path(opt.out_dir, "control.csv"), report.control,
                         grid);
  vdp::write_trajectory_csv(out_path(opt.out_dir, "trajectory.csv"),
                            report.trajectory, grid);
  write_json(out_path(opt.out_dir, "solve.json"),
             vdp::solve_report_json(report, p.name));
  if (!dump_table_path.empty()) {
    const vdp::DiscreteProblem dp = vdp::discretize(p, opt.steps);
    const vdp::Quantization q = vdp::quantize(p.control_box, opt.points);
    vdp::ConstraintBand band{p.lipschitz_budget, dp.grid().h};
    const vdp::ValueTable table = vdp::backward_sweep(
        dp, q, opt.band ? &band : nullptr, opt.workers, settings.budget);
    vdp::dump_value_table(table, dump_table_path);
  }
  std::cout << "value " << vdp::format_double(report.value) << "\n";
  return 0;
}

int run_oracle_check(const CommonOpts& opt) {
  const vdp::VolterraProblem p = vdp::load_problem(opt.problem_path);
  const vdp::DiscreteProblem dp = vdp::discretize(p, opt.steps);
  const vdp::Quantization q = vdp::quantize(p.control_box, opt.points);
  vdp::ConstraintBand band{p.lipschitz_budget, dp.grid().h};
  const vdp::ConstraintBand* band_ptr = opt.band ? &band : nullptr;
  const std::uint64_t budget = memory_budget();

  const vdp::ValueTable table =
      vdp::backward_sweep(dp, q, band_ptr, opt.workers, budget);
  const vdp::DiscreteControl control =
      vdp::forward_reconstruct(table, dp, q, band_ptr);
  const double dp_value = table.root_value();

  const vdp::EnumerationResult oracle =
      vdp::enumerate_min(dp, q, band_ptr, opt.workers);

  const double scale = std::max(1.0, std::abs(oracle.value));
  const bool value_match = std::abs(dp_value - oracle.value) <= 1e-12 * scale;
  const bool control_match = control.values == oracle.control.values;

  // Necessity spot-check: V(i, beta) lower-bounds random admissible tails.
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, q.count - 1);
  int violations = 0;
  const int trials = 100;
  const double width = p.lipschitz_budget * dp.grid().h + 1e-12;
  const auto band_ok = [&](std::uint64_t a, std::uint64_t b) {
    return !opt.band ||
           vdp::max_norm_diff(q.point(a), q.point(b)) <= width;
  };
  std::uniform_int_distribution<int> pick_stage(0, opt.steps - 1);
  for (int trial = 0; trial < trials; ++trial) {
    const int stage = pick_stage(rng);
    std::vector<std::uint64_t> digits(opt.steps);
    for (int j = 0; j < opt.steps; ++j) {
      do {
        digits[j] = pick(rng);
      } while (j > 0 && !band_ok(digits[j - 1], digits[j]));
    }
    std::uint64_t code = 0;
    std::uint64_t weight = 1;
    vdp::DiscreteControl full;
    for (int j = 0; j < opt.steps; ++j) {
      full.values.push_back(q.point(digits[j]));
      if (j < stage) {
        code += digits[j] * weight;
        weight *= q.count;
      }
    }
    const vdp::Trajectory traj = vdp::forward_solve(dp, full);
    const double j_tail = tail_cost(dp, traj, full, stage);
    if (table.values[stage][code] > j_tail + 1e-12) ++violations;
  }

  nlohmann::json summary = {
      {"dp_value", dp_value},
      {"oracle_value", oracle.value},
      {"value_match", value_match},
      {"control_match", control_match},
      {"sequences_enumerated", oracle.sequences},
      {"necessity_trials", trials},
      {"necessity_violations", violations},
      {"settings",
       {{"problem", p.name},
        {"N", opt.steps},
        {"Q", opt.points},
        {"band", opt.band},
        {"workers", opt.workers},
        {"seed", opt.seed}}}};
  write_json(out_path(opt.out_dir, "oracle_check.json"), summary);
  std::cout << "dp_value " << vdp::format_double(dp_value) << " oracle_value "
            << vdp::format_double(oracle.value) << "\n";
  if (!value_match || !control_match || violations > 0)
    throw OracleMismatch("oracle: dp solution disagrees with enumeration");
  return 0;
}

int run_converge(const CommonOpts& opt) {
  const vdp::VolterraProblem p = vdp::load_problem(opt.problem_path);
  const vdp::ConvergenceStudy study =
      vdp::convergence_study(p, ramp_control(p), opt.n_list);
  vdp::write_study_csv(out_path(opt.out_dir, "converge.csv"), study.rows);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : study.rows) {
    rows.push_back({{"N", r.steps},
                    {"h", r.h},
                    {"state_error", r.state_error},
                    {"cost_error", r.cost_error}});
  }
  write_json(out_path(opt.out_dir, "converge.json"),
             {{"rows", rows},
              {"state_order", study.state_order},
              {"cost_order", study.cost_order},
              {"settings", {{"problem", p.name}}}});
  std::cout << "state_order " << study.state_order << " cost_order "
            << study.cost_order << "\n";
  return 0;
}

int run_gap(const CommonOpts& opt) {
  const vdp::VolterraProblem p = vdp::load_problem(opt.problem_path);
  const std::vector<vdp::ConvergenceRow> rows =
      vdp::optimality_gap_study(p, opt.points, opt.n_list, opt.workers);
  vdp::write_study_csv(out_path(opt.out_dir, "gap.csv"), rows);
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rows)
    jrows.push_back({{"N", r.steps}, {"h", r.h}, {"gap", r.gap}});
  write_json(out_path(opt.out_dir, "gap.json"),
             {{"rows", jrows},
              {"settings", {{"problem", p.name}, {"Q", opt.points}}}});
  for (const auto& r : rows)
    std::cout << "N " << r.steps << " gap " << vdp::format_double(r.gap)
              << "\n";
  return 0;
}

int run_costmodel(const CommonOpts& opt, int n_max, std::vector<int> m_list,
                  std::int64_t c0, std::int64_t c1, std::int64_t a) {
  std::vector<int> n_values;
  for (int n = 1; n <= n_max; ++n) n_values.push_back(n);
  vdp::CostParams coeffs;
  coeffs.c_phi0 = c0;
  coeffs.c_phi1 = c1;
  coeffs.opt_cost = a;
  const auto table = vdp::closed_form_table(n_values, m_list, coeffs);
  vdp::write_costmodel_csv(out_path(opt.out_dir, "costmodel.csv"), table);

  nlohmann::json summary = {
      {"coefficients", {{"c_phi0", c0}, {"c_phi1", c1}, {"A", a}}},
      {"note", "A0 in the closed form is read as A; deltas are reported, "
               "the recursion is authoritative"}};
  if (!opt.problem_path.empty()) {
    const vdp::VolterraProblem p = vdp::load_problem(opt.problem_path);
    const vdp::InstrumentReport inst =
        vdp::instrument_and_compare(p, opt.steps, opt.points);
    summary["instrumented"] = vdp::instrument_report_json(inst);
    if (!inst.all_match)
      throw OracleMismatch("costmodel: measured counts disagree with model");
  }
  write_json(out_path(opt.out_dir, "costmodel.json"), summary);
  std::cout << "rows " << table.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Optimal control of Volterra integral equations by Euler "
      "discretization and history-parametrized dynamic programming"};
  app.require_subcommand(1);

  CommonOpts opt;
  std::string dump_table_path;
  int n_max = 10;
  std::vector<int> m_list = {2, 3, 4};
  std::int64_t c_phi0 = 1, c_phi1 = 1, a_cost = 1;

  const auto add_common = [&](CLI::App* sub, bool needs_problem) {
    auto* po = sub->add_option("--problem", opt.problem_path,
                               "problem configuration (JSON)");
    if (needs_problem) po->required();
    sub->add_option("--workers", opt.workers, "worker pool size")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed, "seed for randomized suites");
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve a problem instance");
  add_common(solve_cmd, true);
  solve_cmd->add_option("--N", opt.steps, "Euler steps")->required();
  solve_cmd->add_option("--Q", opt.points, "quantization points per coordinate")
      ->required();
  solve_cmd->add_flag("--band", opt.band, "enforce the Lipschitz band");
  solve_cmd->add_option("--dump-table", dump_table_path,
                        "write the value table to this binary sidecar");

  auto* oracle_cmd = app.add_subcommand(
      "oracle-check", "compare the dp solution against exhaustive enumeration");
  add_common(oracle_cmd, true);
  oracle_cmd->add_option("--N", opt.steps, "Euler steps")->required();
  oracle_cmd->add_option("--Q", opt.points, "quantization points")->required();
  oracle_cmd->add_flag("--band", opt.band, "enforce the Lipschitz band");

  auto* converge_cmd = app.add_subcommand(
      "converge", "discretization convergence study for a fixed control");
  add_common(converge_cmd, true);
  converge_cmd->add_option("--N-list", opt.n_list, "steps per study point")
      ->required()
      ->delimiter(',');

  auto* gap_cmd =
      app.add_subcommand("gap", "optimality-gap decay study (band solves)");
  add_common(gap_cmd, true);
  gap_cmd->add_option("--N-list", opt.n_list, "steps per study point")
      ->required()
      ->delimiter(',');
  gap_cmd->add_option("--Q", opt.points, "quantization points")->required();

  auto* cost_cmd = app.add_subcommand(
      "costmodel", "cost-model comparison table and count instrumentation");
  add_common(cost_cmd, false);
  cost_cmd->add_option("--N-max", n_max, "largest N in the table");
  cost_cmd->add_option("--M-list", m_list, "M values in the table")
      ->delimiter(',');
  cost_cmd->add_option("--N", opt.steps, "steps for the instrumented run");
  cost_cmd->add_option("--Q", opt.points, "points for the instrumented run");
  cost_cmd->add_option("--c-phi0", c_phi0, "stage-cost coefficient C_Phi0");
  cost_cmd->add_option("--c-phi1", c_phi1, "stage-cost coefficient C_Phi1");
  cost_cmd->add_option("--A", a_cost, "per-history optimization cost A");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(opt, dump_table_path);
    if (oracle_cmd->parsed()) return run_oracle_check(opt);
    if (converge_cmd->parsed()) return run_converge(opt);
    if (gap_cmd->parsed()) return run_gap(opt);
    if (cost_cmd->parsed())
      return run_costmodel(opt, n_max, m_list, c_phi0, c_phi1, a_cost);
  } catch (const vdp::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const vdp::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const vdp::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const OracleMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOracleMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
