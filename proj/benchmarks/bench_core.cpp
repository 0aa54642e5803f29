#include <neurotrack/attention.hpp>
#include <neurotrack/dsp.hpp>
#include <neurotrack/features.hpp>
#include <neurotrack/synthesis.hpp>
#include <neurotrack/trf.hpp>

#include <benchmark/benchmark.h>

using namespace neurotrack;

namespace {

FeatureMatrix envelope_features(Eigen::Index dims, std::uint64_t seed = 1) {
  return synthesis::gen_features(synthesis::SurrogateKind::kMultiBand, 59.0, dims, seed);
}

Matrix eeg(Eigen::Index channels, std::uint64_t seed = 2) {
  return synthesis::gen_features(synthesis::SurrogateKind::kMultiBand, 59.0, channels, seed).data;
}

std::vector<attention::LabeledTrial> session(int trials, Eigen::Index channels) {
  const trf::LagConfig cfg;
  synthesis::GroundTruth gt;
  gt.trf_att = synthesis::make_kernel(cfg, 1, channels, 10);
  gt.trf_ign = synthesis::make_kernel(cfg, 1, channels, 11);
  std::vector<attention::LabeledTrial> out;
  for (int i = 0; i < trials; ++i) {
    attention::LabeledTrial t;
    t.attended = synthesis::gen_features(synthesis::SurrogateKind::kAr1Envelope, 59.0, 1, 100 + static_cast<std::uint64_t>(i));
    t.ignored = synthesis::gen_features(synthesis::SurrogateKind::kAr1Envelope, 59.0, 1, 200 + static_cast<std::uint64_t>(i));
    gt.seed = 300 + static_cast<std::uint64_t>(i);
    t.trial = synthesis::simulate_trial(gt, t.attended, t.ignored, "t" + std::to_string(i), "A").trial;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

static void BM_LagMatrix(benchmark::State& state) {
  const FeatureMatrix f = envelope_features(state.range(0));
  const trf::LagConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(trf::lag_matrix(f, cfg).data.data());
}
BENCHMARK(BM_LagMatrix)->Arg(1)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Moments(benchmark::State& state) {
  const trf::DesignMatrix d = trf::lag_matrix(envelope_features(state.range(0)), {});
  const Matrix r = eeg(64);
  for (auto _ : state) benchmark::DoNotOptimize(trf::Moments::of(d, r).xtx.data());
}
BENCHMARK(BM_Moments)->Arg(1)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_SolveRidge(benchmark::State& state) {
  const trf::Moments m = trf::Moments::of(trf::lag_matrix(envelope_features(state.range(0)), {}), eeg(64));
  for (auto _ : state) benchmark::DoNotOptimize(trf::solve_ridge(m, 1.0).data());
}
BENCHMARK(BM_SolveRidge)->Arg(1)->Arg(3)->Arg(8)->Unit(benchmark::kMicrosecond);

static void BM_CrossValidate32Trials(benchmark::State& state) {
  const auto s = session(32, 64);
  std::vector<trf::Moments> moments;
  for (const auto& t : s) moments.push_back(trf::Moments::of(trf::lag_matrix(t.attended, {}), t.trial.eeg.data));
  for (auto _ : state) benchmark::DoNotOptimize(trf::cross_validate_moments(moments, trf::default_lambda_grid()).best_lambda);
}
BENCHMARK(BM_CrossValidate32Trials)->Unit(benchmark::kMillisecond);

static void BM_EvaluateSubject32Trials(benchmark::State& state) {
  const auto s = session(32, 64);
  const attention::DecoderConfig cfg;
  const auto moments = attention::trial_moments(s, cfg.lags);
  for (auto _ : state) benchmark::DoNotOptimize(attention::evaluate_subject_moments(moments, cfg).accuracy);
}
BENCHMARK(BM_EvaluateSubject32Trials)->Unit(benchmark::kMillisecond);

static void BM_ResampleEegRate(benchmark::State& state) {
  const Vector x = synthesis::gen_features(synthesis::SurrogateKind::kMultiBand, 59.0, 1, 5, 1000.0).data.col(0);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::resample_poly(x, 1, 10).data());
}
BENCHMARK(BM_ResampleEegRate)->Unit(benchmark::kMillisecond);

static void BM_ResampleAudio(benchmark::State& state) {
  const AudioSignal a = synthesis::speech_like_audio(10.0, 6, 44100.0);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::resample_poly(a.channels[0], 160, 441).data());
}
BENCHMARK(BM_ResampleAudio)->Unit(benchmark::kMillisecond);

static void BM_Envelope(benchmark::State& state) {
  const AudioSignal a = synthesis::speech_like_audio(59.0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(features::envelope(a, 0.3).data.data());
}
BENCHMARK(BM_Envelope)->Unit(benchmark::kMillisecond);

static void BM_Mfcc(benchmark::State& state) {
  const AudioSignal a = synthesis::speech_like_audio(59.0, 8);
  for (auto _ : state) benchmark::DoNotOptimize(features::mfcc(a).data.data());
}
BENCHMARK(BM_Mfcc)->Unit(benchmark::kMillisecond);

static void BM_Spectrogram(benchmark::State& state) {
  const AudioSignal a = synthesis::speech_like_audio(59.0, 9);
  for (auto _ : state) benchmark::DoNotOptimize(features::spectrogram(a).data.data());
}
BENCHMARK(BM_Spectrogram)->Unit(benchmark::kMillisecond);

static void BM_Pitch(benchmark::State& state) {
  const AudioSignal a = synthesis::speech_like_audio(10.0, 10);
  for (auto _ : state) benchmark::DoNotOptimize(features::pitch(a).data.data());
}
BENCHMARK(BM_Pitch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
