#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vdp/oracle.hpp"

using namespace vdp;

namespace {

VolterraProblem scalar_linear(double a, double b, double x0c) {
  VolterraProblem p;
  p.kernel.form = KernelForm::Linear;
  p.kernel.a = Mat::scalar(a);
  p.kernel.b = Mat::scalar(b);
  p.x0.c0 = {x0c};
  p.horizon = 1.0;
  p.control_box.lo = {0.0};
  p.control_box.hi = {1.0};
  p.lipschitz_budget = 4.0;
  p.state_dim = 1;
  p.control_dim = 1;
  return p;
}

VolterraProblem tracking_lq() {
  auto p = scalar_linear(0.0, 1.0, 0.0);
  p.running_cost.form = RunningCostForm::Quadratic;
  p.running_cost.wu = 1.0;
  p.terminal_cost.form = TerminalCostForm::Quadratic;
  p.terminal_cost.w = 1.0;
  p.terminal_cost.target = {1.0};
  return p;
}

}  // namespace

TEST_CASE("linear reference with no dynamics") {
  auto x = linear_reference(0.0, 0.0, 3.0, [](double) { return 1.0; },
                            {0.0, 0.5, 1.0});
  for (double v : x) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("linear reference pure integrator") {
  auto x = linear_reference(0.0, 1.0, 2.0, [](double) { return 1.0; },
                            {0.0, 0.25, 1.0});
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(2.25));
  CHECK(x[2] == doctest::Approx(3.0));
}

TEST_CASE("linear reference exponential growth") {
  auto x = linear_reference(1.0, 0.0, 1.0, [](double) { return 0.0; },
                            {1.0});
  CHECK(x[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("linear reference with forcing") {
  // a = b = 1, x0 = 1, u(s) = s: x(t) = 2 e^t - 1 - t
  auto x = linear_reference(1.0, 1.0, 1.0, [](double s) { return s; },
                            {0.5, 1.0});
  CHECK(x[0] == doctest::Approx(2.0 * std::exp(0.5) - 1.5).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(2.0 * std::exp(1.0) - 2.0).epsilon(1e-9));
}

TEST_CASE("linear reference cost") {
  auto p = tracking_lq();
  // u(t) = t: running = int t^2 = 1/3, x(1) = 1/2, terminal = 1/4
  const double j = linear_reference_cost(p, [](double t) { return t; });
  CHECK(j == doctest::Approx(1.0 / 3.0 + 0.25).epsilon(1e-9));
  auto bad = p;
  bad.kernel.form = KernelForm::MemoryDecay;
  CHECK_THROWS_AS(linear_reference_cost(bad, [](double) { return 0.0; }),
                  InputError);
}

TEST_CASE("fine grid reference matches exact integrator states") {
  auto p = scalar_linear(0.0, 1.0, 0.0);
  auto traj =
      fine_grid_reference(p, [](double) { return Vec{1.0}; }, 128);
  REQUIRE(traj.states.size() == 129);
  for (int i = 0; i <= 128; ++i)
    CHECK(traj.states[i][0] == doctest::Approx(i / 128.0));
}

TEST_CASE("fine grid halving shrinks the euler error") {
  auto p = scalar_linear(1.0, 0.0, 1.0);
  const double exact = std::exp(1.0);
  auto coarse = fine_grid_reference(p, [](double) { return Vec{0.0}; }, 1024);
  auto fine = fine_grid_reference(p, [](double) { return Vec{0.0}; }, 2048);
  const double e1 = std::abs(coarse.states.back()[0] - exact);
  const double e2 = std::abs(fine.states.back()[0] - exact);
  CHECK(e2 / e1 == doctest::Approx(0.5).epsilon(0.05));  // first order
}

TEST_CASE("fit order recovers exact slopes") {
  std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> lin, quad;
  for (double v : h) {
    lin.push_back(3.0 * v);
    quad.push_back(0.7 * v * v);
  }
  CHECK(fit_order(h, lin) == doctest::Approx(1.0));
  CHECK(fit_order(h, quad) == doctest::Approx(2.0));
  CHECK(std::isinf(fit_order(h, {0.0, 0.0, 0.0, 0.0})));
}

TEST_CASE("convergence study first order on a linear problem") {
  auto p = tracking_lq();
  p.kernel.a = Mat::scalar(1.0);
  p.x0.c0 = {1.0};
  ContinuousControl u;
  u.eval = [](double t) { return Vec{std::min(t, 1.0)}; };
  u.lipschitz = 1.0;
  auto study = convergence_study(p, u, {8, 16, 32});
  CHECK(study.state_order > 0.8);
  CHECK(study.state_order < 1.5);
  for (std::size_t i = 1; i < study.rows.size(); ++i)
    CHECK(study.rows[i].state_error < study.rows[i - 1].state_error);
}

TEST_CASE("convergence study exact on the zero kernel") {
  auto p = scalar_linear(0.0, 0.0, 1.0);
  ContinuousControl u;
  u.eval = [](double) { return Vec{0.5}; };
  auto study = convergence_study(p, u, {4, 8, 16});
  for (const auto& row : study.rows) CHECK(row.state_error < 1e-14);
  CHECK(std::isinf(study.state_order));
}

TEST_CASE("convergence study validates its N list") {
  auto p = tracking_lq();
  ContinuousControl u;
  u.eval = [](double) { return Vec{0.0}; };
  CHECK_THROWS_AS(convergence_study(p, u, {4, 8}), InputError);
  CHECK_THROWS_AS(convergence_study(p, u, {8, 8, 16}), InputError);
}

TEST_CASE("enumeration agrees with the sweep") {
  auto p = tracking_lq();
  auto dp = discretize(p, 3);
  auto q = quantize(p.control_box, 3);
  ConstraintBand band{p.lipschitz_budget, dp.grid().h, 1e-12};
  for (const ConstraintBand* b : {static_cast<const ConstraintBand*>(nullptr),
                                  static_cast<const ConstraintBand*>(&band)}) {
    auto table = backward_sweep_serial(dp, q, b);
    auto best = enumerate_min(dp, q, b);
    CHECK(best.value == doctest::Approx(table.root_value()).epsilon(1e-12));
    auto c = forward_reconstruct(table, dp, q, b);
    for (int i = 0; i < 3; ++i)
      CHECK(c.values[i][0] == best.control.values[i][0]);
  }
}

TEST_CASE("enumeration counts admissible sequences") {
  auto p = tracking_lq();
  auto dp = discretize(p, 2);
  auto q = quantize(p.control_box, 3);
  auto all = enumerate_min(dp, q, nullptr);
  CHECK(all.sequences == 9);
  // L*h = 0: only the 3 constant sequences
  ConstraintBand band{0.0, dp.grid().h, 1e-12};
  auto banded = enumerate_min(dp, q, &band);
  CHECK(banded.sequences == 3);
}

TEST_CASE("enumeration is deterministic across workers") {
  auto p = tracking_lq();
  auto dp = discretize(p, 6);
  auto q = quantize(p.control_box, 3);
  auto ref = enumerate_min(dp, q, nullptr, 1);
  for (int workers : {2, 4}) {
    auto r = enumerate_min(dp, q, nullptr, workers);
    CHECK(r.value == ref.value);  // exact
    for (int i = 0; i < 6; ++i)
      CHECK(r.control.values[i][0] == ref.control.values[i][0]);
  }
}

TEST_CASE("enumeration cap") {
  auto p = tracking_lq();
  auto dp = discretize(p, 8);
  auto q = quantize(p.control_box, 3);
  CHECK_THROWS_AS(enumerate_min(dp, q, nullptr, 1, 100), CapacityError);
}

TEST_CASE("gap study reports zero gaps on a flat objective") {
  auto p = scalar_linear(0.0, 1.0, 0.0);  // zero cost everywhere
  auto rows = optimality_gap_study(p, 2, {2, 4}, 1, 64);
  for (const auto& row : rows) CHECK(row.gap == doctest::Approx(0.0));
}
