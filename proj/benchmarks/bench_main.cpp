#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "taskquant/bounds.hpp"
#include "taskquant/linalg.hpp"
#include "taskquant/quantizer.hpp"
#include "taskquant/rng.hpp"
#include "taskquant/scenarios.hpp"
#include "taskquant/system_design.hpp"

namespace {

void BM_SerialQuantize(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  tq::QuantizerSpec spec{32, 3.0, state.range(1) != 0, 3.0};
  tq::RngStream rng(tq::StreamId(1).with("bench-quantize"));
  Eigen::VectorXd v(n);
  rng.fill_normal(v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tq::serial_quantize(v, spec, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SerialQuantize)->Args({1024, 0})->Args({1024, 1});

void BM_WaterfillScale(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  tq::RngStream rng(tq::StreamId(2).with("bench-waterfill"));
  std::vector<double> s(p);
  for (auto& v : s) v = 0.1 + rng.uniform01();
  std::sort(s.rbegin(), s.rend());
  for (auto _ : state) {
    benchmark::DoNotOptimize(tq::solve_waterfill_scale(s, 0.3));
  }
}
BENCHMARK(BM_WaterfillScale)->Arg(4)->Arg(16)->Arg(64);

void BM_EqualDiagonalRotation(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  tq::RngStream rng(tq::StreamId(3).with("bench-rotation"));
  Eigen::VectorXd d(p);
  for (int i = 0; i < p; ++i) d[i] = rng.uniform01();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tq::equal_diagonal_rotation(d));
  }
}
BENCHMARK(BM_EqualDiagonalRotation)->Arg(2)->Arg(8)->Arg(16);

void BM_DesignOptimal(benchmark::State& state) {
  const int taps = static_cast<int>(state.range(0));
  const auto scenario = tq::build_channel_scenario(taps, 120);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tq::design_optimal(scenario.model, taps, 5 * taps, 3.0));
  }
}
BENCHMARK(BM_DesignOptimal)->Arg(2)->Arg(8);

void BM_ChannelTrial(benchmark::State& state) {
  // one Monte Carlo trial of the designed two-tap system at 10 bits
  const auto scenario = tq::build_channel_scenario(2, 120);
  const auto sys = tq::design_optimal(scenario.model, 2, 10, 3.0);
  tq::RngStream rng(tq::StreamId(4).with("bench-trial"));
  Eigen::VectorXd theta, x;
  for (auto _ : state) {
    tq::sample_channel_instance(scenario, rng, theta, x);
    const Eigen::VectorXd q = tq::serial_quantize(sys.analog * x, sys.quantizer, rng);
    benchmark::DoNotOptimize((theta - sys.digital * q).squaredNorm());
  }
}
BENCHMARK(BM_ChannelTrial);

void BM_DistortionRate(benchmark::State& state) {
  const auto scenario = tq::build_channel_scenario(2, 120);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scenario.model.sigma_x());
  const Eigen::VectorXd spec = eig.eigenvalues().reverse();
  const std::vector<double> eigs(spec.data(), spec.data() + spec.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(tq::gaussian_distortion_rate(eigs, 12.0));
  }
}
BENCHMARK(BM_DistortionRate);

void BM_QuantizedCovariance(benchmark::State& state) {
  const auto s = tq::build_eig_scenario_setup1();
  const auto plan = tq::build_covariance_plan(s.n_x, s.dim, static_cast<int>(state.range(0)));
  tq::RngStream rng(tq::StreamId(5).with("bench-cov"));
  Eigen::VectorXd theta;
  Eigen::MatrixXd samples;
  tq::sample_eig_instance(s, rng, theta, samples);
  tq::QuantizerSpec spec{32, 20.0, false, 3.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(tq::quantized_covariance(samples, plan, spec, rng));
  }
}
BENCHMARK(BM_QuantizedCovariance)->Arg(2)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
