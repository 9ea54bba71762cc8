#include <benchmark/benchmark.h>

#include <random>

#include "sonarsnoop/classifier.hpp"
#include "sonarsnoop/echo_profile.hpp"
#include "sonarsnoop/features.hpp"
#include "sonarsnoop/ofdm_signal.hpp"
#include "sonarsnoop/patterns.hpp"
#include "sonarsnoop/pipeline.hpp"
#include "sonarsnoop/sonar_sim.hpp"

using namespace sonarsnoop;

static void BM_Correlate(benchmark::State& state) {
  const FrameSpec spec;
  const Samples pulse = synthesize_pulse(spec);
  Samples trace = emit_stream(build_frame(spec), static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.01);
  for (double& v : trace) v += n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(correlate(trace, pulse));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(BM_Correlate)->Arg(182)->Arg(910);

static void BM_GaborOrientation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Matrix<std::uint8_t> patch(static_cast<std::size_t>(n), static_cast<std::size_t>(2 * n), 0);
  for (int c = 0; c < 2 * n; ++c) patch(static_cast<std::size_t>(c / 2), static_cast<std::size_t>(c)) = 1;
  const GaborBank bank;
  bank.orientation(patch);  // warm the per-shape cache
  for (auto _ : state) benchmark::DoNotOptimize(bank.orientation(patch));
}
BENCHMARK(BM_GaborOrientation)->Arg(16)->Arg(48);

static void BM_Enumerate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_android_patterns(4, 9));
}
BENCHMARK(BM_Enumerate)->Unit(benchmark::kMillisecond);

static void BM_SvmTrain(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 4.0);
  std::vector<LabeledStrokeSample> samples;
  for (int label = 1; label <= 15; ++label)
    for (int k = 0; k < 35; ++k)
      samples.push_back({label, 10.0 * label + n(rng), 3.0 * (label % 4) + n(rng) * 0.2, 170.0 - 9.0 * label + n(rng),
                         2.0 * (label % 5) + n(rng) * 0.2});
  const auto spec = ClassifierSpec::preset(state.range(0) == 0 ? "medium_gaussian_svm" : "quadratic_svm");
  for (auto _ : state) benchmark::DoNotOptimize(StrokeClassifier::train(samples, spec, MicMode::Both));
}
BENCHMARK(BM_SvmTrain)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_AnalyzePattern(benchmark::State& state) {
  const auto trace = synth_pattern_trace(UnlockPattern(3, {0, 1, 2, 4, 6, 7, 8}), DeviceGeometry::standard(),
                                         FrameSpec{}, SimConfig{});
  const Analyzer analyzer;
  for (auto _ : state) benchmark::DoNotOptimize(analyzer.analyze(&trace.bottom, &trace.top));
}
BENCHMARK(BM_AnalyzePattern)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
