#include <benchmark/benchmark.h>

#include <random>

#include "ftvs/estimator.hpp"
#include "ftvs/icp.hpp"
#include "ftvs/rendezvous.hpp"
#include "ftvs/scenario.hpp"

namespace {

using namespace ftvs;

void BM_IcpRegister(benchmark::State& state) {
  const SurfaceModel model = default_mock_satellite();
  const NearestSurface ns(model);
  SensorConfig sensor;
  sensor.max_points = static_cast<int>(state.range(0));
  Pose truth;
  truth.attitude = UnitQuaternion::from_axis_angle(Vec3(0.3, 1.0, -0.2), 0.7);
  truth.position = Vec3(0.05, -0.03, 1.0);
  const PointCloud cloud = render_scan(model, truth, sensor, FaultSchedule(), 0.0, 1u);
  Pose seed = truth;
  seed.attitude = quat_product(truth.attitude, UnitQuaternion::from_axis_angle(Vec3::UnitX(), 0.08));
  seed.position += Vec3(0.01, 0.01, 0.0);
  const IcpConfig cfg = IcpConfig::defaults_for(sensor, model);
  for (auto _ : state) benchmark::DoNotOptimize(icp_register(cloud, ns, seed, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cloud.size()));
}
BENCHMARK(BM_IcpRegister)->Arg(100)->Arg(200)->Arg(800);

void BM_NearestSurface(benchmark::State& state) {
  const NearestSurface ns(default_mock_satellite());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<Vec3> queries;
  for (int i = 0; i < 1024; ++i) queries.emplace_back(u(rng), u(rng), u(rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ns.closest(queries[i++ & 1023]));
}
BENCHMARK(BM_NearestSurface);

FilterState analog_filter() {
  const ScenarioConfig sc = analog_scenario();
  FilterState fs;
  fs.xhat = sc.initial_target();
  fs.P = default_initial_covariance();
  return fs;
}

void BM_EkfPropagate(benchmark::State& state) {
  const FilterState fs = analog_filter();
  const EstimatorConfig cfg = EstimatorConfig::from_noise(analog_scenario().noise);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(fs, 0.5, cfg));
}
BENCHMARK(BM_EkfPropagate);

void BM_EkfUpdate(benchmark::State& state) {
  const FilterState fs = analog_filter();
  const EstimatorConfig cfg;
  TargetState other = fs.xhat;
  other.body.rho_o += Vec3(0.003, -0.002, 0.001);
  const Pose p = grapple_pose(other);
  Measurement z;
  z.rho_bar = p.position;
  z.eta_bar = p.attitude;
  z.healthy = true;
  for (auto _ : state) {
    const UpdateResult r = update(fs, z, cfg);
    benchmark::DoNotOptimize(adapt_R(r.state, r.residual, cfg));
  }
}
BENCHMARK(BM_EkfUpdate);

void BM_RendezvousSolve(benchmark::State& state) {
  const ScenarioConfig sc = analog_scenario();
  RendezvousProblem pb;
  pb.target = sc.initial_target();
  pb.r0 = sc.chaser_r0;
  pb.a_max = sc.a_max;
  for (auto _ : state) benchmark::DoNotOptimize(solve_rendezvous(pb));
}
BENCHMARK(BM_RendezvousSolve)->Unit(benchmark::kMillisecond);

void BM_RendezvousReplan(benchmark::State& state) {
  const ScenarioConfig sc = analog_scenario();
  RendezvousProblem pb;
  pb.target = sc.initial_target();
  pb.r0 = sc.chaser_r0;
  pb.a_max = sc.a_max;
  const RendezvousSolution first = solve_rendezvous(pb);
  RendezvousProblem later = pb;
  later.t = 1.0;
  later.target = propagate_noise_free(pb.target, 1.0);
  std::tie(later.r0, later.r0_dot) = first.state_at(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(replan(later, first, SolverConfig{}));
}
BENCHMARK(BM_RendezvousReplan)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
