#include <benchmark/benchmark.h>

#include <random>

#include "tilr/declare.hpp"
#include "tilr/fuzzy.hpp"
#include "tilr/graph.hpp"
#include "tilr/ilr.hpp"
#include "tilr/perception.hpp"
#include "tilr/train.hpp"

using namespace tilr;

namespace {

FuzzyTrace RandomTrace(std::size_t n, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n * width);
  for (double& x : v) x = u(rng);
  return FuzzyTrace(n, width, std::move(v));
}

Formula Phi(std::size_t atoms) { return SampleConjunctionFormula(Alphabet::Indexed(atoms), 3).formula; }

void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Alphabet ab = Alphabet::Indexed(3);
  const Formula f = Phi(3);
  const FuzzyTrace t = RandomTrace(n, 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Evaluate(f, ab, t));
}
BENCHMARK(BM_Evaluate)->Arg(5)->Arg(10)->Arg(20);

void BM_Compile(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Alphabet ab = Alphabet::Indexed(3);
  const Formula k = KnowledgeFormula(Phi(3), "y");
  const std::vector<std::string> labels{"y"};
  for (auto _ : state) benchmark::DoNotOptimize(Compile(k, n, ab, labels).size());
}
BENCHMARK(BM_Compile)->Arg(5)->Arg(10)->Arg(20);

void BM_Refine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Alphabet ab = Alphabet::Indexed(3);
  const std::vector<std::string> labels{"y"};
  const CompiledGraph g = Compile(KnowledgeFormula(Phi(3), "y"), n, ab, labels);
  const FuzzyTrace t = RandomTrace(n, 3, 2);
  const LabelVector y = LabelVector::Zeros(labels);
  for (auto _ : state) benchmark::DoNotOptimize(IlrRefine(g, t, y).value);
}
BENCHMARK(BM_Refine)->Arg(5)->Arg(10)->Arg(20);

// Forward and backward pass of one training batch: perception, refinement, loss.
void BM_KnowledgeLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t batch = 64;
  const Alphabet ab = Alphabet::Indexed(3);
  const std::vector<std::string> labels{"y"};
  const CompiledGraph g = Compile(KnowledgeFormula(Phi(3), "y"), n, ab, labels);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  grad::Tensor obs({batch * n, kImagePixels});
  for (double& x : obs.data()) x = u(rng);
  std::vector<double> targets(batch);
  for (double& t : targets) t = static_cast<double>(rng() % 2);
  const auto model = PerceptionModel::Init(3, TraceMode::kMe, 4);
  const RefinementConfig cfg;
  std::vector<grad::Tensor> grads;
  for (auto _ : state) benchmark::DoNotOptimize(KnowledgeLoss(model, g, obs, targets, cfg, &grads));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_KnowledgeLoss)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
