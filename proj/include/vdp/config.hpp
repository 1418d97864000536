#pragma once

#include <string>

#include <json.hpp>

#include "vdp/problem.hpp"

namespace vdp {

// Strict parser for the JSON problem schema (see README); unknown fields are
// rejected with an InputError naming the offending key.
VolterraProblem problem_from_json(const nlohmann::json& j);
VolterraProblem load_problem(const std::string& path);

}  // namespace vdp
