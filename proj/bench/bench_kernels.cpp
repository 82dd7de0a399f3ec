#include "sepcert/approx.hpp"
#include "sepcert/ocp.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace sepcert;

namespace {

ControlProblem pendulum() {
  ControlProblem p;
  p.n = 2;
  p.m = 1;
  p.a = 0.0;
  p.b = 2.0;
  p.x0 = make_vec({0.3, -0.2});
  p.dynamics.f = [](double, const Vec& x, const Vec& u) {
    return make_vec({x(1), -std::sin(x(0)) - 0.1 * x(1) + u(0) * std::cos(x(0))});
  };
  p.dynamics.jac_x = [](double, const Vec& x, const Vec& u) {
    Mat j(2, 2);
    j << 0.0, 1.0, -std::cos(x(0)) - u(0) * std::sin(x(0)), -0.1;
    return j;
  };
  p.terminal_cost = {[](const Vec& x) { return x.squaredNorm(); }, [](const Vec& x) { return Vec(2.0 * x); }};
  for (int k = -4; k <= 4; ++k) p.control_samples.push_back(make_vec({k / 4.0}));
  return p;
}

ExecPolicy policy_of(const benchmark::State& state) {
  return state.range(0) ? ExecPolicy::parallel : ExecPolicy::serial;
}

void BM_ReachableCone(benchmark::State& state) {
  const ControlProblem p = pendulum();
  const Process proc = integrate_state(p, ControlSignal(2000, make_vec({0.1})));
  const auto specs = default_needles(p, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_reachable_cone(p, proc, specs, policy_of(state)));
  }
}

void BM_MaximumCondition(benchmark::State& state) {
  const ControlProblem p = pendulum();
  const Process proc = integrate_state(p, ControlSignal(20000, make_vec({0.1})));
  const AdjointArc arc = integrate_adjoint(p, proc, make_vec({0.4, -0.3}), -1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_maximum_condition(p, proc, arc, 1e-6, policy_of(state)));
  }
}

void BM_DirectionalDiff(benchmark::State& state) {
  ConicMap map;
  map.m = 3;
  map.n = 3;
  map.base = Vec::Zero(3);
  map.cone = ConeV(3, {make_vec({1, 0, 0}), make_vec({0, 1, 0}), make_vec({0, 0, 1})});
  map.eval = [](const Vec& c) { return Vec(c + c.squaredNorm() * unit_vec(3, 0)); };
  DiffOptions opts;
  opts.samples_per_radius = 512;
  opts.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(check_directional_diff(map, Mat::Identity(3, 3), opts));
}

void BM_Covering(benchmark::State& state) {
  const VecFn phi = [](const Vec& x) { return Vec(x + 0.05 * make_vec({std::sin(x(0)), std::cos(x(1))})); };
  CoveringOptions opts;
  opts.target_samples = 2000;
  opts.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(near_identity_covering(phi, Vec::Zero(2), 1.0, 0.1, opts));
}

}  // namespace

// Argument 0 runs the serial reference loop, 1 the OpenMP kernel.
BENCHMARK(BM_ReachableCone)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaximumCondition)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DirectionalDiff)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Covering)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
