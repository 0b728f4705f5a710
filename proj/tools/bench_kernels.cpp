// Serial reference vs OpenMP-backed kernels on fit-sized stacks.
// Run: ./bench_kernels [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <vector>

#include "swahr/heatmap.hpp"
#include "swahr/kernels.hpp"
#include "swahr/losses.hpp"
#include "swahr/rng.hpp"
#include "swahr/synth.hpp"

namespace {

using swahr::kernels::Backend;
using swahr::kernels::BackendGuard;

swahr::SyntheticScene bench_scene() {
  swahr::SceneConfig cfg;
  cfg.seed = 7;
  cfg.n_persons = 3;
  cfg.scale_min = 1.0;
  cfg.scale_max = 2.0;
  cfg.jitter_coeff = 0.05;
  cfg.height = 128;
  cfg.width = 128;
  return swahr::generate_scene(cfg);
}

swahr::HeatmapStack bench_stack() {
  const swahr::SyntheticScene scene = bench_scene();
  return swahr::encode_gaussian(
      scene.noisy_persons, 2.0f,
      swahr::StackShape{swahr::kTemplateKeypoints, scene.height, scene.width});
}

swahr::HeatmapStack noisy_copy(const swahr::HeatmapStack& base,
                               uint64_t seed) {
  swahr::HeatmapStack out = base;
  swahr::Rng rng(seed);
  for (size_t i = 0; i < out.size(); ++i) {
    out.data()[i] += float(0.01 * rng.normal());
  }
  return out;
}

void bench_encode(benchmark::State& state, Backend backend) {
  BackendGuard guard(backend);
  const swahr::SyntheticScene scene = bench_scene();
  const swahr::StackShape shape{swahr::kTemplateKeypoints, scene.height,
                                scene.width};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        swahr::encode_gaussian(scene.noisy_persons, 2.0f, shape));
  }
}

void bench_taylor(benchmark::State& state, Backend backend) {
  BackendGuard guard(backend);
  const swahr::HeatmapStack base = bench_stack();
  swahr::AlphaField alpha(base.channels(), base.height(), base.width(), 0.1f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(swahr::sahr_taylor(base, alpha));
  }
}

void bench_l2(benchmark::State& state, Backend backend) {
  BackendGuard guard(backend);
  const swahr::HeatmapStack base = bench_stack();
  const swahr::HeatmapStack pred = noisy_copy(base, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(swahr::l2_loss(pred, base));
  }
}

void bench_weights(benchmark::State& state, Backend backend) {
  BackendGuard guard(backend);
  const swahr::HeatmapStack base = bench_stack();
  const swahr::HeatmapStack pred = noisy_copy(base, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(swahr::wahr_weights(pred, base, 0.01));
  }
}

}  // namespace

BENCHMARK_CAPTURE(bench_encode, serial, Backend::serial);
BENCHMARK_CAPTURE(bench_encode, parallel, Backend::parallel);
BENCHMARK_CAPTURE(bench_taylor, serial, Backend::serial);
BENCHMARK_CAPTURE(bench_taylor, parallel, Backend::parallel);
BENCHMARK_CAPTURE(bench_l2, serial, Backend::serial);
BENCHMARK_CAPTURE(bench_l2, parallel, Backend::parallel);
BENCHMARK_CAPTURE(bench_weights, serial, Backend::serial);
BENCHMARK_CAPTURE(bench_weights, parallel, Backend::parallel);

BENCHMARK_MAIN();
