#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "vdp/config.hpp"

using namespace vdp;
using nlohmann::json;

namespace {

json base_config() {
  return json::parse(R"({
    "name": "demo",
    "kernel": {"form": "linear", "params": {"a": 0.5, "b": 1.0}},
    "x0": {"form": "constant", "params": {"value": 1.0}},
    "running_cost": {"form": "quadratic", "params": {"wx": 1.0, "wu": 0.5}},
    "terminal_cost": {"form": "quadratic", "params": {"w": 1.0, "target": 0.25}},
    "horizon": 2.0,
    "control_box": [[0.0, 1.0]],
    "lipschitz_budget": 2.0,
    "dims": {"n": 1, "m": 1}
  })");
}

}  // namespace

TEST_CASE("full round trip") {
  auto p = problem_from_json(base_config());
  CHECK(p.name == "demo");
  CHECK(p.kernel.form == KernelForm::Linear);
  CHECK(p.kernel.a(0, 0) == 0.5);
  CHECK(p.kernel.b(0, 0) == 1.0);
  CHECK(p.x0.c0 == Vec{1.0});
  CHECK(p.running_cost.wx == 1.0);
  CHECK(p.running_cost.wu == 0.5);
  CHECK(p.terminal_cost.w == 1.0);
  CHECK(p.terminal_cost.target == Vec{0.25});
  CHECK(p.horizon == 2.0);
  CHECK(p.control_box.lo == Vec{0.0});
  CHECK(p.control_box.hi == Vec{1.0});
  CHECK(p.lipschitz_budget == 2.0);
  CHECK_FALSE(p.user_radius.has_value());
}

TEST_CASE("unknown fields are named in the error") {
  auto j = base_config();
  j["extra"] = 1;
  try {
    problem_from_json(j);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("extra") != std::string::npos);
  }
}

TEST_CASE("unknown nested fields rejected") {
  auto j = base_config();
  j["kernel"]["params"]["gamma"] = 1.0;
  CHECK_THROWS_AS(problem_from_json(j), InputError);
  j = base_config();
  j["running_cost"]["params"]["typo"] = 1.0;
  CHECK_THROWS_AS(problem_from_json(j), InputError);
}

TEST_CASE("missing required fields") {
  for (const char* key : {"kernel", "x0", "horizon", "control_box",
                          "lipschitz_budget", "dims"}) {
    auto j = base_config();
    j.erase(key);
    CHECK_THROWS_AS(problem_from_json(j), InputError);
  }
}

TEST_CASE("kernel forms") {
  auto j = base_config();
  j["kernel"] = {{"form", "memory_decay"},
                 {"params", {{"a", 1.0}, {"b", 0.5}, {"kappa", 2.0}}}};
  auto p = problem_from_json(j);
  CHECK(p.kernel.form == KernelForm::MemoryDecay);
  CHECK(p.kernel.kappa == 2.0);

  j["kernel"] = {{"form", "logistic_memory"},
                 {"params", {{"c", 0.2}, {"kappa", 1.0}, {"b", 0.1}}}};
  p = problem_from_json(j);
  CHECK(p.kernel.form == KernelForm::LogisticMemory);
  CHECK(p.kernel.c == 0.2);
  CHECK(p.kernel.b_scalar == 0.1);

  j["kernel"] = {{"form", "cauchy"}, {"params", json::object()}};
  CHECK_THROWS_AS(problem_from_json(j), InputError);
}

TEST_CASE("affine x0 and scalar broadcast") {
  auto j = base_config();
  j["x0"] = {{"form", "affine"}, {"params", {{"c0", 1.0}, {"c1", -0.5}}}};
  auto p = problem_from_json(j);
  CHECK(p.x0.c0 == Vec{1.0});
  CHECK(p.x0.c1 == Vec{-0.5});
}

TEST_CASE("multidimensional matrices") {
  auto j = base_config();
  j["dims"] = {{"n", 2}, {"m", 1}};
  j["kernel"]["params"]["a"] = {{1.0, 0.0}, {0.5, 1.0}};
  j["kernel"]["params"]["b"] = {{1.0}, {0.0}};
  j["x0"]["params"]["value"] = {1.0, 2.0};
  j["terminal_cost"]["params"]["target"] = {0.0, 0.0};
  auto p = problem_from_json(j);
  CHECK(p.state_dim == 2);
  CHECK(p.kernel.a(1, 0) == 0.5);
  CHECK(p.x0.c0 == Vec{1.0, 2.0});
  // scalar matrix shorthand invalid for n > 1
  j["kernel"]["params"]["a"] = 1.0;
  CHECK_THROWS_AS(problem_from_json(j), InputError);
}

TEST_CASE("control box shape") {
  auto j = base_config();
  j["control_box"] = {{0.0}};
  CHECK_THROWS_AS(problem_from_json(j), InputError);
  j["control_box"] = {{1.0, 0.0}};  // lo > hi caught by validation
  CHECK_THROWS_AS(problem_from_json(j), InputError);
}

TEST_CASE("relevant radius override") {
  auto j = base_config();
  j["relevant_radius"] = 3.5;
  auto p = problem_from_json(j);
  REQUIRE(p.user_radius.has_value());
  CHECK(*p.user_radius == 3.5);
}

TEST_CASE("load_problem rejects missing and malformed files") {
  CHECK_THROWS_AS(load_problem("/nonexistent/path.json"), InputError);
}
