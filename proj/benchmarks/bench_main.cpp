#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "opd/featsel.hpp"
#include "opd/svm.hpp"
#include "opd/x86.hpp"

namespace {

opd::Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> attrs;
  for (std::size_t j = 0; j < d; ++j) attrs.push_back("a" + std::to_string(j));
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = u(gen);
    labels[i] = rows[i][0] + 0.5 * rows[i][1] + 0.3 * u(gen) > 0.9 ? 1 : 0;
  }
  return opd::Dataset(opd::LabelScheme::binary, attrs, rows, labels);
}

void BM_SmoPuk(benchmark::State& state) {
  const auto ds = random_dataset(static_cast<std::size_t>(state.range(0)), 20, 1);
  std::vector<int> y;
  for (auto l : ds.labels()) y.push_back(l == 1 ? 1 : -1);
  opd::KernelSpec k;
  k.family = opd::KernelFamily::puk;
  for (auto _ : state) benchmark::DoNotOptimize(opd::smo_train_binary(ds.rows(), y, k, {}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmoPuk)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_LinearSweep(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::vector<std::uint8_t> code(static_cast<std::size_t>(state.range(0)));
  for (auto& b : code) b = static_cast<std::uint8_t>(gen());
  const opd::x86::DecoderProfile profile;
  for (auto _ : state) {
    opd::x86::SweepCounts counts;
    opd::x86::sweep(code, profile, counts);
    benchmark::DoNotOptimize(counts.decoded_instructions);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_LinearSweep)->Arg(1 << 16)->Arg(1 << 20);

void BM_ReliefF(benchmark::State& state) {
  const auto ds = random_dataset(static_cast<std::size_t>(state.range(0)), 100, 2);
  for (auto _ : state) benchmark::DoNotOptimize(opd::relieff_eval(ds));
}
BENCHMARK(BM_ReliefF)->Arg(100)->Arg(400);

}  // namespace
BENCHMARK_MAIN();
