#include "vdp/config.hpp"

#include <fstream>
#include <set>

namespace vdp {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& context) {
  if (!j.is_object())
    throw InputError("config: " + context + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw InputError("config: unknown field '" + item.key() + "' in " +
                       context);
  }
}

double get_number(const json& j, const std::string& key,
                  const std::string& context) {
  if (!j.contains(key))
    throw InputError("config: missing field '" + key + "' in " + context);
  if (!j.at(key).is_number())
    throw InputError("config: field '" + key + "' in " + context +
                     " must be a number");
  return j.at(key).get<double>();
}

double get_number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

// Scalars promote to the requested length when n == 1, or broadcast.
Vec parse_vec(const json& j, std::size_t n, const std::string& context) {
  Vec v;
  if (j.is_number()) {
    v.assign(n, j.get<double>());
    return v;
  }
  if (!j.is_array())
    throw InputError("config: " + context + " must be a number or array");
  for (const auto& e : j) {
    if (!e.is_number())
      throw InputError("config: " + context + " entries must be numbers");
    v.push_back(e.get<double>());
  }
  if (v.size() != n)
    throw InputError("config: " + context + " must have " + std::to_string(n) +
                     " entries");
  return v;
}

Mat parse_mat(const json& j, std::size_t rows, std::size_t cols,
              const std::string& context) {
  if (j.is_number()) {
    if (rows != 1 || cols != 1)
      throw InputError("config: " + context +
                       " must be a nested array for dims > 1");
    return Mat::scalar(j.get<double>());
  }
  if (!j.is_array())
    throw InputError("config: " + context + " must be a number or array");
  Mat m(rows, cols);
  if (j.size() != rows)
    throw InputError("config: " + context + " must have " +
                     std::to_string(rows) + " rows");
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (!row.is_array() || row.size() != cols)
      throw InputError("config: " + context + " rows must have " +
                       std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

Kernel parse_kernel(const json& j, std::size_t n, std::size_t m) {
  expect_keys(j, {"form", "params"}, "kernel");
  if (!j.contains("form"))
    throw InputError("config: kernel requires a 'form' field");
  const std::string form = j.at("form").get<std::string>();
  const json params = j.value("params", json::object());
  Kernel k;
  if (form == "linear" || form == "memory_decay") {
    k.form = form == "linear" ? KernelForm::Linear : KernelForm::MemoryDecay;
    expect_keys(params,
                form == "linear" ? std::set<std::string>{"a", "b"}
                                 : std::set<std::string>{"a", "b", "kappa"},
                "kernel.params");
    if (!params.contains("a") || !params.contains("b"))
      throw InputError("config: kernel.params requires 'a' and 'b'");
    k.a = parse_mat(params.at("a"), n, n, "kernel.params.a");
    k.b = parse_mat(params.at("b"), n, m, "kernel.params.b");
    if (form == "memory_decay") k.kappa = get_number_or(params, "kappa", 0.0);
  } else if (form == "logistic_memory") {
    k.form = KernelForm::LogisticMemory;
    expect_keys(params, {"c", "kappa", "b"}, "kernel.params");
    k.c = get_number(params, "c", "kernel.params");
    k.kappa = get_number_or(params, "kappa", 0.0);
    k.b_scalar = get_number(params, "b", "kernel.params");
  } else {
    throw InputError("config: unknown kernel form '" + form + "'");
  }
  return k;
}

InitialFunction parse_x0(const json& j, std::size_t n) {
  expect_keys(j, {"form", "params"}, "x0");
  const std::string form = j.value("form", "constant");
  const json params = j.value("params", json::object());
  InitialFunction x0;
  if (form == "constant") {
    expect_keys(params, {"value"}, "x0.params");
    if (!params.contains("value"))
      throw InputError("config: x0.params requires 'value'");
    x0.c0 = parse_vec(params.at("value"), n, "x0.params.value");
  } else if (form == "affine") {
    expect_keys(params, {"c0", "c1"}, "x0.params");
    if (!params.contains("c0"))
      throw InputError("config: x0.params requires 'c0'");
    x0.c0 = parse_vec(params.at("c0"), n, "x0.params.c0");
    if (params.contains("c1"))
      x0.c1 = parse_vec(params.at("c1"), n, "x0.params.c1");
  } else {
    throw InputError("config: unknown x0 form '" + form + "'");
  }
  return x0;
}

RunningCost parse_running_cost(const json& j, std::size_t n, std::size_t m) {
  expect_keys(j, {"form", "params"}, "running_cost");
  const std::string form = j.value("form", "zero");
  const json params = j.value("params", json::object());
  RunningCost f;
  if (form == "zero") {
    f.form = RunningCostForm::Zero;
    expect_keys(params, {}, "running_cost.params");
  } else if (form == "constant") {
    f.form = RunningCostForm::Constant;
    expect_keys(params, {"value"}, "running_cost.params");
    f.value = get_number(params, "value", "running_cost.params");
  } else if (form == "quadratic") {
    f.form = RunningCostForm::Quadratic;
    expect_keys(params, {"wx", "wu", "x_target", "u_target"},
                "running_cost.params");
    f.wx = get_number_or(params, "wx", 0.0);
    f.wu = get_number_or(params, "wu", 0.0);
    if (params.contains("x_target"))
      f.x_target = parse_vec(params.at("x_target"), n,
                             "running_cost.params.x_target");
    if (params.contains("u_target"))
      f.u_target = parse_vec(params.at("u_target"), m,
                             "running_cost.params.u_target");
  } else {
    throw InputError("config: unknown running_cost form '" + form + "'");
  }
  return f;
}

TerminalCost parse_terminal_cost(const json& j, std::size_t n) {
  expect_keys(j, {"form", "params"}, "terminal_cost");
  const std::string form = j.value("form", "zero");
  const json params = j.value("params", json::object());
  TerminalCost f;
  if (form == "zero") {
    f.form = TerminalCostForm::Zero;
    expect_keys(params, {}, "terminal_cost.params");
  } else if (form == "constant") {
    f.form = TerminalCostForm::Constant;
    expect_keys(params, {"value"}, "terminal_cost.params");
    f.value = get_number(params, "value", "terminal_cost.params");
  } else if (form == "linear") {
    f.form = TerminalCostForm::Linear;
    expect_keys(params, {"coeffs"}, "terminal_cost.params");
    if (!params.contains("coeffs"))
      throw InputError("config: terminal_cost.params requires 'coeffs'");
    f.coeffs = parse_vec(params.at("coeffs"), n, "terminal_cost.params.coeffs");
  } else if (form == "quadratic") {
    f.form = TerminalCostForm::Quadratic;
    expect_keys(params, {"w", "target"}, "terminal_cost.params");
    f.w = get_number(params, "w", "terminal_cost.params");
    if (params.contains("target"))
      f.target = parse_vec(params.at("target"), n, "terminal_cost.params.target");
  } else {
    throw InputError("config: unknown terminal_cost form '" + form + "'");
  }
  return f;
}

}  // namespace

VolterraProblem problem_from_json(const nlohmann::json& j) {
  expect_keys(j,
              {"name", "kernel", "x0", "running_cost", "terminal_cost",
               "horizon", "control_box", "lipschitz_budget", "dims",
               "relevant_radius"},
              "problem");
  VolterraProblem p;
  p.name = j.value("name", "");
  if (!j.contains("dims"))
    throw InputError("config: problem requires a 'dims' field");
  expect_keys(j.at("dims"), {"n", "m"}, "dims");
  p.state_dim = j.at("dims").value("n", 0);
  p.control_dim = j.at("dims").value("m", 0);
  if (p.state_dim < 1 || p.control_dim < 1)
    throw InputError("config: dims.n and dims.m must be >= 1");

  if (!j.contains("kernel"))
    throw InputError("config: problem requires a 'kernel' field");
  p.kernel = parse_kernel(j.at("kernel"), p.state_dim, p.control_dim);
  if (!j.contains("x0"))
    throw InputError("config: problem requires an 'x0' field");
  p.x0 = parse_x0(j.at("x0"), p.state_dim);
  p.running_cost = parse_running_cost(j.value("running_cost", json::object()),
                                      p.state_dim, p.control_dim);
  p.terminal_cost =
      parse_terminal_cost(j.value("terminal_cost", json::object()), p.state_dim);
  p.horizon = get_number(j, "horizon", "problem");

  if (!j.contains("control_box") || !j.at("control_box").is_array() ||
      j.at("control_box").size() != p.control_dim)
    throw InputError("config: control_box must list [lo, hi] per coordinate");
  for (const auto& pair : j.at("control_box")) {
    if (!pair.is_array() || pair.size() != 2)
      throw InputError("config: control_box entries must be [lo, hi] pairs");
    p.control_box.lo.push_back(pair.at(0).get<double>());
    p.control_box.hi.push_back(pair.at(1).get<double>());
  }
  p.lipschitz_budget = get_number(j, "lipschitz_budget", "problem");
  if (j.contains("relevant_radius"))
    p.user_radius = j.at("relevant_radius").get<double>();

  p.validate();
  return p;
}

VolterraProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open problem file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config: " + path + " is not valid JSON: " + e.what());
  }
  return problem_from_json(j);
}

}  // namespace vdp
