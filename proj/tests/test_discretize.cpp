#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "vdp/discretize.hpp"

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
  p.lipschitz_budget = 1.0;
  p.state_dim = 1;
  p.control_dim = 1;
  return p;
}

DiscreteControl constant_control(int steps, double v) {
  DiscreteControl c;
  c.values.assign(steps, Vec{v});
  return c;
}

// Band-admissible random walk inside [lo, hi].
DiscreteControl random_band_control(int steps, double lo, double hi, double L,
                                    double h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  DiscreteControl c;
  double v = lo + (hi - lo) * u01(rng);
  for (int i = 0; i < steps; ++i) {
    c.values.push_back({v});
    const double step = L * h;
    const double nlo = std::max(lo, v - step);
    const double nhi = std::min(hi, v + step);
    v = nlo + (nhi - nlo) * u01(rng);
  }
  return c;
}

}  // namespace

TEST_CASE("grid nodes") {
  Grid g{4, 0.25, 1.0};
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(3) == doctest::Approx(0.75));
  CHECK(g.node(4) == doctest::Approx(1.0));
}

TEST_CASE("discretize rejects N < 1") {
  auto p = scalar_linear(1.0, 0.0, 1.0);
  CHECK_THROWS_AS(discretize(p, 0), InputError);
  CHECK_THROWS_AS(discretize(p, -3), InputError);
}

TEST_CASE("phi is h times the kernel and enforces j < i") {
  auto p = scalar_linear(2.0, 0.0, 1.0);
  auto dp = discretize(p, 2);
  Vec out(1);
  dp.phi(1, 0, {1.0}, {0.0}, out);
  CHECK(out[0] == doctest::Approx(0.5 * 2.0));
  CHECK_THROWS_AS(dp.phi(1, 1, {1.0}, {0.0}, out), InputError);
  CHECK_THROWS_AS(dp.phi(0, 0, {1.0}, {0.0}, out), InputError);
  OpCounts counts;
  dp.phi(2, 0, {1.0}, {0.0}, out, &counts);
  CHECK(counts.f_evals == 1);
}

TEST_CASE("forward solve on zero kernel reproduces x0") {
  auto p = scalar_linear(0.0, 0.0, 3.0);
  p.x0.c1 = {1.0};
  auto dp = discretize(p, 4);
  auto traj = forward_solve(dp, constant_control(4, 1.0));
  REQUIRE(traj.states.size() == 5);
  for (int i = 0; i <= 4; ++i)
    CHECK(traj.states[i][0] == doctest::Approx(3.0 + 0.25 * i));
}

TEST_CASE("forward solve compound growth unroll") {
  // x' kernel f = x, x0 = 1, T = 1, N = 2:
  // x(1) = 1 + 0.5*1 = 1.5, x(2) = 1 + 0.5*(1 + 1.5) = 2.25
  auto p = scalar_linear(1.0, 0.0, 1.0);
  auto dp = discretize(p, 2);
  auto traj = forward_solve(dp, constant_control(2, 0.0));
  CHECK(traj.states[0][0] == doctest::Approx(1.0));
  CHECK(traj.states[1][0] == doctest::Approx(1.5));
  CHECK(traj.states[2][0] == doctest::Approx(2.25));
}

TEST_CASE("forward solve pure integrator") {
  // f = u, u = 1: x(i) = i*h, so x(N) = T = 1 exactly
  auto p = scalar_linear(0.0, 1.0, 0.0);
  auto dp = discretize(p, 4);
  auto traj = forward_solve(dp, constant_control(4, 1.0));
  for (int i = 0; i <= 4; ++i)
    CHECK(traj.states[i][0] == doctest::Approx(0.25 * i));
  CHECK(traj.states[4][0] == doctest::Approx(1.0));
}

TEST_CASE("forward solve rejects wrong control length") {
  auto p = scalar_linear(1.0, 0.0, 1.0);
  auto dp = discretize(p, 4);
  CHECK_THROWS_AS(forward_solve(dp, constant_control(3, 0.0)), InputError);
}

TEST_CASE("forward solve reports the diverging stage") {
  auto p = scalar_linear(1e308, 0.0, 1e308);
  auto dp = discretize(p, 4);
  CHECK_THROWS_AS(forward_solve(dp, constant_control(4, 0.0)), NumericalError);
}

TEST_CASE("discrete cost left endpoint rule") {
  auto p = scalar_linear(0.0, 0.0, 1.0);
  p.running_cost.form = RunningCostForm::Quadratic;
  p.running_cost.wu = 1.0;
  auto dp = discretize(p, 5);
  auto c = constant_control(5, 2.0);
  auto traj = forward_solve(dp, c);
  // h * sum_{i=0}^{4} 2^2 = 0.2 * 20 = 4
  CHECK(discrete_cost(dp, traj, c) == doctest::Approx(4.0));
}

TEST_CASE("discrete cost constant running plus terminal") {
  auto p = scalar_linear(0.0, 0.0, 3.0);
  p.running_cost.form = RunningCostForm::Constant;
  p.running_cost.value = 1.0;
  p.terminal_cost.form = TerminalCostForm::Linear;
  p.terminal_cost.coeffs = {2.0};
  auto dp = discretize(p, 8);
  auto c = constant_control(8, 0.0);
  auto traj = forward_solve(dp, c);
  // h * 8 * 1 + 2 * x(N) = 1 + 6 = 7
  CHECK(discrete_cost(dp, traj, c) == doctest::Approx(7.0));
}

TEST_CASE("cost splits additively across a cut stage") {
  auto p = scalar_linear(0.5, 1.0, 1.0);
  p.running_cost.form = RunningCostForm::Quadratic;
  p.running_cost.wx = 1.0;
  p.running_cost.wu = 0.5;
  p.terminal_cost.form = TerminalCostForm::Quadratic;
  p.terminal_cost.w = 1.0;
  p.terminal_cost.target = {1.0};
  const int N = 6;
  auto dp = discretize(p, N);
  std::mt19937_64 rng(11);
  auto c = random_band_control(N, 0.0, 1.0, 1.0, dp.grid().h, rng);
  auto traj = forward_solve(dp, c);
  double total = discrete_cost(dp, traj, c);
  for (int cut = 0; cut <= N; ++cut) {
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < cut; ++i)
      head += dp.stage_cost(i, traj.states[i], c.values[i]);
    for (int i = cut; i < N; ++i)
      tail += dp.stage_cost(i, traj.states[i], c.values[i]);
    tail += dp.terminal_cost(traj.states[N]);
    CHECK(head + tail == doctest::Approx(total));
  }
}

TEST_CASE("prefix stability: states up to k depend only on u(0..k-1)") {
  auto p = scalar_linear(1.0, 1.0, 1.0);
  const int N = 8;
  auto dp = discretize(p, N);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto c1 = random_band_control(N, 0.0, 1.0, 4.0, dp.grid().h, rng);
    auto c2 = c1;
    std::uniform_int_distribution<int> pick(0, N - 1);
    int k = pick(rng);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = k; i < N; ++i) c2.values[i] = {u01(rng)};
    auto t1 = forward_solve(dp, c1);
    auto t2 = forward_solve(dp, c2);
    for (int i = 0; i <= k; ++i)
      CHECK(t1.states[i][0] == t2.states[i][0]);
  }
}

TEST_CASE("lipschitz admissibility check") {
  const double h = 0.25;
  DiscreteControl c;
  c.values = {{0.0}, {0.25}, {0.5}, {0.25}};
  CHECK(check_lipschitz_admissible(c, 1.0, h));       // steps exactly L*h
  CHECK_FALSE(check_lipschitz_admissible(c, 0.5, h));  // band is L*h = 0.125
  CHECK(check_lipschitz_admissible(c, 0.0, 0.25, 0.3));  // loose tolerance
  DiscreteControl single;
  single.values = {{7.0}};
  CHECK(check_lipschitz_admissible(single, 0.0, h));
}

TEST_CASE("interpolation agrees at nodes and is constant at the tail") {
  Grid g{4, 0.25, 1.0};
  DiscreteControl c;
  c.values = {{0.0}, {0.25}, {0.5}, {0.75}};
  auto u = interpolate(c, g, 1.0);
  for (int i = 0; i < 4; ++i)
    CHECK(u(g.node(i))[0] == doctest::Approx(c.values[i][0]));
  // midpoint of [t1, t2]
  CHECK(u(0.375)[0] == doctest::Approx(0.375));
  // final interval [(N-1)h, T] holds u(N-1)
  CHECK(u(0.8)[0] == doctest::Approx(0.75));
  CHECK(u(1.0)[0] == doctest::Approx(0.75));
}

TEST_CASE("interpolate rejects band violations") {
  Grid g{2, 0.5, 1.0};
  DiscreteControl c;
  c.values = {{0.0}, {1.0}};
  CHECK_THROWS_AS(interpolate(c, g, 1.0), InputError);
  CHECK_NOTHROW(interpolate(c, g, 2.0));
}

TEST_CASE("interpolation inherits the lipschitz constant") {
  const int N = 16;
  Grid g{N, 1.0 / N, 1.0};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_band_control(N, 0.0, 1.0, 2.0, g.h, rng);
    auto u = interpolate(c, g, 2.0);
    for (int pair = 0; pair < 50; ++pair) {
      double t1 = ut(rng), t2 = ut(rng);
      CHECK(max_norm_diff(u(t1), u(t2)) <= 2.0 * std::abs(t1 - t2) + 1e-10);
    }
  }
}
