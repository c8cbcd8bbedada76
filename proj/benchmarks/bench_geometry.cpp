#include <benchmark/benchmark.h>

#include <finsler/classify.hpp>

using namespace finsler;

namespace {

MetricModel randers() {
  std::vector<Expression> a, b;
  for (const char* s : {"1+0.1*x2^2", "0", "0", "0", "1", "0", "0", "0", "1+0.1*x1*x3"})
    a.push_back(Expression::parse(s, 3));
  for (const char* s : {"0.2+0.1*x2", "0.1*sin(x1)", "0.05*x1*x3"}) b.push_back(Expression::parse(s, 3));
  auto m = MetricModel::randers(3, a, b);
  m.set_name("randers");
  return m;
}

void BM_LocalGeometry(benchmark::State& state) {
  const auto m = randers();
  const auto p = sample_corpus(m, {.count = 1, .seed = 1}).front();
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    LocalGeometry geo(m, p, {.order = order});
    benchmark::DoNotOptimize(geo.berwald());
  }
}
BENCHMARK(BM_LocalGeometry)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_Curvature(benchmark::State& state) {
  const auto m = randers();
  const auto p = sample_corpus(m, {.count = 1, .seed = 1}).front();
  const LocalGeometry geo(m, p, {.order = 5});
  for (auto _ : state) benchmark::DoNotOptimize(CurvatureJets(geo));
}
BENCHMARK(BM_Curvature)->Unit(benchmark::kMillisecond);

void BM_IdentityBattery(benchmark::State& state) {
  const auto m = randers();
  const auto corpus = sample_corpus(m, {.count = static_cast<int>(state.range(0)), .seed = 1});
  for (auto _ : state) benchmark::DoNotOptimize(identity_battery(m, corpus));
}
BENCHMARK(BM_IdentityBattery)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
  const auto m = randers();
  const auto corpus = sample_corpus(m, {.count = 10, .seed = 1});
  for (auto _ : state) benchmark::DoNotOptimize(classify_special(m, corpus));
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMillisecond);

void BM_ConcircularFit(benchmark::State& state) {
  const auto m = randers();
  const auto corpus = sample_corpus(m, {.count = 10, .seed = 1});
  CandidateField c;
  c.name = "minus_x";
  for (const char* s : {"-x1", "-x2", "-x3"}) c.components.push_back(Expression::parse(s, 3));
  for (auto _ : state) benchmark::DoNotOptimize(fit_and_verify(m, c, corpus));
}
BENCHMARK(BM_ConcircularFit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
