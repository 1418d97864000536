#include "vdp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace vdp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("io: cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_control_csv(const std::string& path, const DiscreteControl& c,
                       const Grid& grid) {
  std::ofstream out = open_out(path);
  const std::size_t m = c.values.empty() ? 0 : c.values[0].size();
  out << "i,t";
  for (std::size_t k = 1; k <= m; ++k) out << ",u_" << k;
  out << "\n";
  for (int i = 0; i < c.steps(); ++i) {
    out << i << "," << format_double(grid.node(i));
    for (double v : c.values[i]) out << "," << format_double(v);
    out << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const Grid& grid) {
  std::ofstream out = open_out(path);
  const std::size_t n = traj.states.empty() ? 0 : traj.states[0].size();
  out << "i,t";
  for (std::size_t k = 1; k <= n; ++k) out << ",x_" << k;
  out << "\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << i << "," << format_double(grid.node(static_cast<int>(i)));
    for (double v : traj.states[i]) out << "," << format_double(v);
    out << "\n";
  }
}

DiscreteControl read_control_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("io: cannot open " + path);
  DiscreteControl c;
  std::string line;
  if (!std::getline(in, line)) throw InputError("io: empty control file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Vec row;
    int col = 0;
    while (std::getline(ss, field, ',')) {
      if (col >= 2) row.push_back(std::stod(field));
      ++col;
    }
    c.values.push_back(std::move(row));
  }
  return c;
}

void write_study_csv(const std::string& path,
                     const std::vector<ConvergenceRow>& rows) {
  std::ofstream out = open_out(path);
  out << "N,h,state_error,cost_error,gap\n";
  for (const auto& r : rows) {
    out << r.steps << "," << format_double(r.h) << ","
        << format_double(r.state_error) << "," << format_double(r.cost_error)
        << "," << format_double(r.gap) << "\n";
  }
}

void write_costmodel_csv(const std::string& path,
                         const std::vector<ClosedFormRow>& rows) {
  std::ofstream out = open_out(path);
  out << "N,M,recursive_total,closed_form_total,delta\n";
  for (const auto& r : rows) {
    out << r.stages << "," << r.controls << "," << r.recursive_total << ","
        << r.closed_form_total << "," << r.delta << "\n";
  }
}

nlohmann::json counts_json(const OpCounts& counts) {
  return {{"f_evals", counts.f_evals},
          {"x0_evals", counts.x0_evals},
          {"phi_evals", counts.phi_evals},
          {"min_comparisons", counts.min_comparisons}};
}

nlohmann::json solve_report_json(const SolveReport& report,
                                 const std::string& problem_name) {
  nlohmann::json control = nlohmann::json::array();
  for (const auto& u : report.control.values) control.push_back(u);
  nlohmann::json trajectory = nlohmann::json::array();
  for (const auto& x : report.trajectory.states) trajectory.push_back(x);
  return {{"value", report.value},
          {"achieved_cost", report.achieved_cost},
          {"control", control},
          {"trajectory", trajectory},
          {"counts", counts_json(report.counts)},
          {"settings",
           {{"problem", problem_name},
            {"N", report.settings.steps},
            {"Q", report.settings.points},
            {"band", report.settings.use_band},
            {"workers", report.settings.workers},
            {"budget", report.settings.budget}}}};
}

nlohmann::json instrument_report_json(const InstrumentReport& report) {
  nlohmann::json counters = nlohmann::json::array();
  for (const auto& c : report.counters) {
    counters.push_back({{"name", c.name},
                        {"predicted", c.predicted.str()},
                        {"measured", c.measured},
                        {"match", c.match}});
  }
  return {{"N", report.stages},
          {"M", report.controls},
          {"counters", counters},
          {"all_match", report.all_match}};
}

}  // namespace vdp
