#include <benchmark/benchmark.h>

#include <numbers>

#include "xlayer/channel.hpp"
#include "xlayer/device_admm.hpp"
#include "xlayer/layered_admm.hpp"
#include "xlayer/reference.hpp"
#include "xlayer/topology.hpp"

namespace {

xlayer::ScenarioConfig small_instance() {
  xlayer::ScenarioConfig c;
  c.num_nodes = 12;
  c.sector_angle = std::numbers::pi / 4.0;
  c.theta = std::numbers::pi / 18.0;
  c.K = 0.1;
  c.alpha = 1.0;
  c.rng_seed = 11;
  return c;
}

struct Instance {
  xlayer::NetworkTopology topology;
  xlayer::ChannelModel channel;
};

const Instance& instance() {
  static const Instance inst = [] {
    const xlayer::ScenarioConfig c = small_instance();
    xlayer::NetworkTopology t = xlayer::build_topology(c);
    xlayer::ChannelModel ch = xlayer::make_channel(t, c);
    return Instance{std::move(t), std::move(ch)};
  }();
  return inst;
}

void BM_ReferenceSolve(benchmark::State& state) {
  const Instance& in = instance();
  for (auto _ : state) benchmark::DoNotOptimize(xlayer::solve_joint(in.topology, in.channel));
}
BENCHMARK(BM_ReferenceSolve)->Unit(benchmark::kMillisecond);

void BM_LayeredIteration(benchmark::State& state) {
  const Instance& in = instance();
  for (auto _ : state) {
    state.PauseTiming();
    xlayer::LayeredAdmm admm(in.topology, in.channel);
    for (int k = 0; k < 10; ++k) admm.step();
    state.ResumeTiming();
    benchmark::DoNotOptimize(admm.step());
  }
}
BENCHMARK(BM_LayeredIteration)->Unit(benchmark::kMicrosecond);

void BM_DeviceIteration(benchmark::State& state) {
  const Instance& in = instance();
  for (auto _ : state) {
    state.PauseTiming();
    xlayer::DeviceAdmm admm(in.topology, in.channel);
    for (int k = 0; k < 10; ++k) admm.step();
    state.ResumeTiming();
    benchmark::DoNotOptimize(admm.step());
  }
}
BENCHMARK(BM_DeviceIteration)->Unit(benchmark::kMicrosecond);

void BM_LayeredRun(benchmark::State& state) {
  const Instance& in = instance();
  for (auto _ : state) benchmark::DoNotOptimize(xlayer::run_layered(in.topology, in.channel));
}
BENCHMARK(BM_LayeredRun)->Unit(benchmark::kMillisecond);

void BM_DeviceRun(benchmark::State& state) {
  const Instance& in = instance();
  for (auto _ : state) benchmark::DoNotOptimize(xlayer::run_device_admm(in.topology, in.channel));
}
BENCHMARK(BM_DeviceRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
