#include <random>

#include <benchmark/benchmark.h>

#include "qkan/discriminator.hpp"
#include "qkan/generator.hpp"
#include "qkan/metrics.hpp"
#include "qkan/training.hpp"

using namespace qkan;

namespace {

GeneratorConfig bench_config(std::size_t qubits, std::size_t ancilla, std::size_t depth) {
  GeneratorConfig cfg;
  cfg.n_qubits = qubits;
  cfg.n_ancilla = ancilla;
  cfg.depth = depth;
  cfg.patch_len = std::size_t{1} << (qubits - ancilla);
  return cfg;
}

void randomise(PatchGenerator& gen, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (std::size_t p = 0; p < gen.n_patches(); ++p)
    for (auto& c : gen.patch_parameters(p)) c = u(rng);
}

void BM_ApplyRy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto s = zero_state(n);
  std::size_t q = 0;
  for (auto _ : state) {
    s.apply_ry(q, 0.1);
    q = (q + 1) % n;
    benchmark::DoNotOptimize(s.amplitudes().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.dim()));
}
BENCHMARK(BM_ApplyRy)->DenseRange(4, 16, 4);

void BM_ApplyCz(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto s = zero_state(n);
  for (auto _ : state) {
    s.apply_cz(0, n - 1);
    benchmark::DoNotOptimize(s.amplitudes().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.dim()));
}
BENCHMARK(BM_ApplyCz)->DenseRange(4, 16, 4);

// Args: qubits, ancilla, depth.
void BM_GeneratePatch(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)),
                                static_cast<std::size_t>(state.range(1)),
                                static_cast<std::size_t>(state.range(2)));
  PatchGenerator gen(cfg);
  randomise(gen, 1);
  std::mt19937_64 rng(2);
  const auto z = sample_latent(cfg.n_qubits, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gen.generate_patch(0, z));
}
BENCHMARK(BM_GeneratePatch)->Args({8, 0, 1})->Args({5, 1, 6})->Args({8, 0, 6});

// Args: qubits, ancilla, depth, mode (0 = finite difference, 1 = parameter shift).
void BM_GeneratorGradient(benchmark::State& state) {
  auto cfg = bench_config(static_cast<std::size_t>(state.range(0)),
                          static_cast<std::size_t>(state.range(1)),
                          static_cast<std::size_t>(state.range(2)));
  PatchGenerator gen(cfg);
  randomise(gen, 3);
  DiscriminatorMlp disc(cfg.image_size(), 4);
  std::mt19937_64 rng(5);
  const auto z = sample_latent(cfg.n_qubits, rng);
  const auto mode = state.range(3) ? GradientMode::ParameterShift : GradientMode::FiniteDifference;
  for (auto _ : state) benchmark::DoNotOptimize(gen_gradient(gen, disc, z, mode));
}
BENCHMARK(BM_GeneratorGradient)
    ->Args({8, 0, 1, 0})
    ->Args({8, 0, 1, 1})
    ->Args({5, 1, 6, 0})
    ->Args({5, 1, 6, 1})
    ->Unit(benchmark::kMillisecond);

void BM_DiscriminatorForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  DiscriminatorMlp disc(n, 6);
  const std::vector<double> x(n, 0.5);
  for (auto _ : state) {
    const auto fwd = disc.forward(x);
    benchmark::DoNotOptimize(disc.backward(x, fwd, 1.0));
  }
}
BENCHMARK(BM_DiscriminatorForwardBackward)->Arg(64)->Arg(256);

void BM_EvalMetrics(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageSet a(8, std::vector<double>(256)), b = a;
  for (auto& img : a)
    for (auto& v : img) v = u(rng);
  for (auto& img : b)
    for (auto& v : img) v = u(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sliced_wasserstein(a, b));
    benchmark::DoNotOptimize(kid(a, b));
  }
}
BENCHMARK(BM_EvalMetrics);

}  // namespace

BENCHMARK_MAIN();
