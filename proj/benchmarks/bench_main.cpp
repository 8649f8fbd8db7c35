#include <benchmark/benchmark.h>

#include <random>

#include "mapvio/experiment.hpp"
#include "mapvio/fast.hpp"
#include "mapvio/imu.hpp"
#include "mapvio/msckf.hpp"
#include "mapvio/render.hpp"
#include "mapvio/sim_world.hpp"
#include "mapvio/ssim.hpp"

using namespace mapvio;

namespace {

const MapModel& bench_map() {
  static const MapModel m = build_map(ExperimentConfig{});
  return m;
}

Pose bench_camera() {
  const TruthState s = evaluate_truth(TrajectorySpec{}, 5.0);
  return camera_pose(s, default_calibration());
}

void BM_Se3ExpLog(benchmark::State& st) {
  const Twist xi = Twist::from_vector((Vec6() << 0.3, -0.2, 0.1, 0.5, 0.2, -0.4).finished());
  for (auto _ : st) benchmark::DoNotOptimize(se3_log(se3_exp(xi)));
}
BENCHMARK(BM_Se3ExpLog);

void BM_GeodesicDistance(benchmark::State& st) {
  const MetricParam a(Vec3(0.1, 0.2, 0.3));
  const Pose A = se3_exp(Twist::from_vector(Vec6::Constant(0.2)));
  const Pose B = se3_exp(Twist::from_vector(Vec6::Constant(-0.3)));
  for (auto _ : st) benchmark::DoNotOptimize(geodesic_dist_sq(A, B, a));
}
BENCHMARK(BM_GeodesicDistance);

void BM_InitForward(benchmark::State& st) {
  const MlpModel m = make_mlp(32, 32, 256, 4, 1);
  const ImagePlane img(32, 32, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(relocalize(m, img));
}
BENCHMARK(BM_InitForward);

void BM_Render(benchmark::State& st) {
  const Pose T = bench_camera();
  for (auto _ : st) benchmark::DoNotOptimize(render(bench_map(), T));
}
BENCHMARK(BM_Render)->Unit(benchmark::kMillisecond);

void BM_SsimGrid(benchmark::State& st) {
  const Pose T = bench_camera();
  const ImagePlane a = render(bench_map(), T);
  const ImagePlane b = render(bench_map(), T * Pose{Mat3::Identity(), Vec3(0.01, 0, 0)});
  for (auto _ : st) benchmark::DoNotOptimize(ssim_grid_filter(a, b));
}
BENCHMARK(BM_SsimGrid)->Unit(benchmark::kMillisecond);

void BM_FastDetect(benchmark::State& st) {
  const ImagePlane img = render(bench_map(), bench_camera());
  for (auto _ : st) benchmark::DoNotOptimize(fast_detect(img, 0.05));
}
BENCHMARK(BM_FastDetect)->Unit(benchmark::kMillisecond);

void BM_ImuPropagate(benchmark::State& st) {
  ImuState s;
  const ImuSample a{0.0, Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.0, 9.81)};
  const ImuSample b{0.005, Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.0, 9.81)};
  const Mat15 P = Mat15::Identity() * 1e-4;
  const Mat12 Q = Mat12::Identity() * 1e-6;
  for (auto _ : st) {
    const ImuState n = propagate_mean(s, a, b);
    const ErrorStateJacobians j = error_state_jacobians(s, a);
    benchmark::DoNotOptimize(propagate_covariance(P, j.F, j.G, Q, 0.005));
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_ImuPropagate);

// One captured update: 11 clones on the orbit, 40 exact table-point tracks.
void BM_CapturedUpdate(benchmark::State& st) {
  FilterState base;
  base.calib = default_calibration();
  const TrajectorySpec spec;
  for (int k = 0; k < 11; ++k) {
    const TruthState x = evaluate_truth(spec, 3.0 + 0.1 * k);
    base.clones.push_back({x.t, x.R_GtoI, x.p_I_in_G});
  }
  const TruthState last = evaluate_truth(spec, 4.0);
  base.imu.t = last.t;
  base.imu.R_GtoI = last.R_GtoI;
  base.imu.p_I_in_G = last.p_I_in_G;
  const UpdateOptions opt;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::vector<FeatureTrack> tracks;
  for (std::size_t i = 0; i < 40; ++i) {
    const Vec3 p(u(rng), u(rng), 0.0);
    FeatureTrack t;
    t.id = i;
    for (const auto& c : base.clones) t.obs.push_back({c.t, opt.camera.to_pixel(project(transform_to_camera(base, c.t, p)))});
    tracks.push_back(t);
  }
  for (auto _ : st) {
    FilterState fs = base;
    Covariance P = Covariance::Identity(fs.dim(), fs.dim()) * 1e-6;
    benchmark::DoNotOptimize(captured_update(fs, P, tracks, opt));
  }
}
BENCHMARK(BM_CapturedUpdate)->Unit(benchmark::kMillisecond);

void BM_ShortExperiment(benchmark::State& st) {
  ExperimentConfig c;
  c.scenario.trajectory.duration = 5.0;
  for (auto _ : st) benchmark::DoNotOptimize(run_experiment(c));
}
BENCHMARK(BM_ShortExperiment)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
