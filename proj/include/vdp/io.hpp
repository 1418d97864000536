#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "vdp/costmodel.hpp"
#include "vdp/discretize.hpp"
#include "vdp/dp.hpp"
#include "vdp/oracle.hpp"

namespace vdp {

// 17 significant digits, round-trip exact.
std::string format_double(double v);

void write_control_csv(const std::string& path, const DiscreteControl& c,
                       const Grid& grid);
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const Grid& grid);
DiscreteControl read_control_csv(const std::string& path);

void write_study_csv(const std::string& path,
                     const std::vector<ConvergenceRow>& rows);
void write_costmodel_csv(const std::string& path,
                         const std::vector<ClosedFormRow>& rows);

nlohmann::json counts_json(const OpCounts& counts);
nlohmann::json solve_report_json(const SolveReport& report,
                                 const std::string& problem_name);
nlohmann::json instrument_report_json(const InstrumentReport& report);

}  // namespace vdp
