#include <neurotrack/error.hpp>
#include <neurotrack/features.hpp>
#include <neurotrack/synthesis.hpp>

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace neurotrack;
namespace ft = neurotrack::features;

namespace {

AudioSignal constant(double value, double seconds) {
  AudioSignal a;
  a.sample_rate = 16000.0;
  a.channels.push_back(Vector::Constant(static_cast<Eigen::Index>(seconds * 16000.0), value));
  return a;
}

// Harmonic tone with a vowel-like spectral tilt.
AudioSignal harmonic(double f0, double seconds) {
  AudioSignal a;
  a.sample_rate = 16000.0;
  const auto n = static_cast<Eigen::Index>(seconds * 16000.0);
  Vector x = Vector::Zero(n);
  for (int h = 1; h <= 10; ++h) {
    const double amp = 1.0 / h;
    for (Eigen::Index i = 0; i < n; ++i) x[i] += amp * std::sin(2.0 * std::numbers::pi * h * f0 * static_cast<double>(i) / 16000.0 + 0.3 * h);
  }
  a.channels.push_back(0.3 * x);
  return a;
}

}  // namespace

TEST(Envelope, ConstantSignal) {
  const FeatureMatrix e = ft::envelope(constant(0.5, 1.0), 1.0);
  ASSERT_EQ(e.frames(), 100);
  ASSERT_EQ(e.dims(), 1);
  EXPECT_EQ(e.frame_rate, 100.0);
  for (Eigen::Index t = 0; t < e.frames(); ++t) EXPECT_NEAR(e.data(t, 0), 0.5, 1e-15);
}

TEST(Envelope, UnitSineRms) {
  const AudioSignal s = testutil::tone(1000.0, 1.0);
  const FeatureMatrix lin = ft::envelope(s, 1.0);
  const FeatureMatrix comp = ft::envelope(s, 0.3);
  const double rms = std::sqrt(0.5);
  for (Eigen::Index t = 0; t < lin.frames(); ++t) {
    EXPECT_NEAR(lin.data(t, 0), 0.70711, 1e-3);
    EXPECT_NEAR(lin.data(t, 0), rms, 1e-12);
    EXPECT_NEAR(comp.data(t, 0), 0.90130, 1e-3);
    EXPECT_NEAR(comp.data(t, 0), std::pow(rms, 0.3), 1e-12);
  }
}

TEST(Envelope, FrameCountAndScaling) {
  AudioSignal x = testutil::white_noise(1.2345, 3);
  const FeatureMatrix e = ft::envelope(x, 0.3);
  EXPECT_EQ(e.frames(), x.length() / 160);
  EXPECT_GE(e.data.minCoeff(), 0.0);
  AudioSignal scaled = x;
  scaled.channels[0] *= 3.7;
  const FeatureMatrix es = ft::envelope(scaled, 0.3);
  const double factor = std::pow(3.7, 0.3);
  for (Eigen::Index t = 0; t < e.frames(); ++t) EXPECT_NEAR(es.data(t, 0), factor * e.data(t, 0), 1e-9 * es.data(t, 0));
}

TEST(Envelope, Errors) {
  AudioSignal empty;
  empty.sample_rate = 16000.0;
  empty.channels.push_back(Vector::Zero(10));
  EXPECT_THROW(ft::envelope(empty, 1.0), InvalidArgument);
  AudioSignal stereo = testutil::tone(100.0, 0.1);
  stereo.channels.push_back(stereo.channels[0]);
  EXPECT_THROW(ft::envelope(stereo, 1.0), InvalidArgument);
  EXPECT_THROW(ft::envelope(testutil::tone(100.0, 0.1), 0.0), InvalidArgument);
}

TEST(EnvelopeDerivative, ConstantRampAndSingleFrame) {
  FeatureMatrix env;
  env.frame_rate = 100.0;
  env.data = Matrix::Constant(20, 1, 0.4);
  EXPECT_EQ(ft::envelope_derivative(env).data.cwiseAbs().maxCoeff(), 0.0);

  env.data.col(0) = Vector::LinSpaced(20, 0.0, 0.19);
  const FeatureMatrix d = ft::envelope_derivative(env);
  EXPECT_EQ(d.data(0, 0), 0.0);
  for (Eigen::Index t = 1; t < 20; ++t) EXPECT_NEAR(d.data(t, 0), 1.0, 1e-12);

  env.data = Matrix::Ones(1, 1);
  EXPECT_THROW(ft::envelope_derivative(env), InvalidArgument);
}

TEST(Spectrogram, SilenceAndShape) {
  const FeatureMatrix s = ft::spectrogram(constant(0.0, 1.0));
  EXPECT_EQ(s.dims(), 100);
  EXPECT_EQ(s.frames(), ft::frame_count(16000, 400, 160));
  EXPECT_EQ(s.frames(), 98);
  EXPECT_EQ(s.data.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Spectrogram, ToneLandsInBand12) {
  const AudioSignal s = testutil::tone(1000.0, 1.0);
  ft::SpectrogramParams raw;
  raw.compression = 1.0;
  const FeatureMatrix m = ft::spectrogram(s, raw);
  const Matrix energy = m.data.array().square();
  Eigen::Index argmax;
  energy.colwise().sum().maxCoeff(&argmax);
  EXPECT_EQ(argmax, 12);
  const double frac = energy.col(12).sum() / energy.sum();
  EXPECT_GT(frac, 0.90);

  // Independent oracle: band averages from a direct DFT of frame 10.
  std::vector<double> frame(400);
  for (int n = 0; n < 400; ++n)
    frame[static_cast<std::size_t>(n)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / 400.0)) * s.channels[0][10 * 160 + n];
  const auto mag = oracle::dft_magnitude(frame, 512);
  std::vector<double> sum(100, 0.0), count(100, 0.0);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = static_cast<double>(k) * 16000.0 / 512.0;
    const auto b = std::min<std::size_t>(99, static_cast<std::size_t>(f / 80.0));
    sum[b] += mag[k];
    count[b] += 1.0;
  }
  for (std::size_t b = 0; b < 100; ++b) EXPECT_NEAR(m.data(10, static_cast<Eigen::Index>(b)), sum[b] / count[b], 1e-9);

  // Compression applies elementwise.
  const FeatureMatrix c = ft::spectrogram(s);
  EXPECT_LT((c.data - m.data.array().pow(0.3).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spectrogram, WhiteNoiseFillsEveryBand) {
  const FeatureMatrix m = ft::spectrogram(testutil::white_noise(10.0, 17));
  EXPECT_GT(m.data.minCoeff(), 0.0);
}

TEST(Mfcc, ShapeAndColumnOrder) {
  const FeatureMatrix m = ft::mfcc(testutil::white_noise(0.5, 4));
  EXPECT_EQ(m.dims(), 39);
  EXPECT_EQ(m.frames(), ft::frame_count(8000, 400, 160));
  EXPECT_EQ(m.names[0], "mfcc_c0");
  EXPECT_EQ(m.names[13], "mfcc_d0");
  EXPECT_EQ(m.names[26], "mfcc_dd0");
  EXPECT_EQ(m.names[38], "mfcc_dd12");
}

TEST(Mfcc, StationaryInputHasFlatDeltas) {
  // Period of 160 samples = hop, so every frame sees the same samples.
  AudioSignal a;
  a.sample_rate = 16000.0;
  Vector x(16000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * 100.0 * static_cast<double>(i) / 16000.0) + 0.5 * std::cos(2.0 * std::numbers::pi * 700.0 * static_cast<double>(i) / 16000.0);
  a.channels.push_back(x);
  const FeatureMatrix m = ft::mfcc(a);
  EXPECT_LT(m.data.middleRows(3, m.frames() - 6).rightCols(26).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Mfcc, MatchesReferenceImplementation) {
  const AudioSignal speech = synthesis::speech_like_audio(2.0, 21);
  const FeatureMatrix m = ft::mfcc(speech);
  const std::vector<double> samples(speech.channels[0].data(), speech.channels[0].data() + speech.length());
  const oracle::Mat ref = oracle::reference_mfcc(samples, {});
  ASSERT_EQ(static_cast<Eigen::Index>(ref.size()), m.frames());
  double worst = 0.0;
  for (Eigen::Index t = 0; t < m.frames(); ++t)
    for (Eigen::Index j = 0; j < 39; ++j) worst = std::max(worst, std::abs(m.data(t, j) - ref[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]));
  EXPECT_LT(worst, 1e-3);
}

TEST(Mfcc, TooShort) {
  EXPECT_THROW(ft::mfcc(constant(0.1, 0.01)), InvalidArgument);
}

TEST(Pitch, HarmonicToneAt200Hz) {
  const AudioSignal a = harmonic(200.0, 1.0);
  const FeatureMatrix p = ft::pitch(a);
  const ft::PitchTrack track = ft::pitch_track(a);
  ASSERT_EQ(p.dims(), 3);
  int voiced = 0;
  for (Eigen::Index t = 0; t < p.frames(); ++t) {
    if (!track.voiced[static_cast<std::size_t>(t)]) continue;
    ++voiced;
    EXPECT_NEAR(p.data(t, 0), 200.0, 2.0);
    EXPECT_NEAR(p.data(t, 1), 0.0, 1e-9);
    EXPECT_NEAR(p.data(t, 2), 0.0, 1e-3);
  }
  EXPECT_GT(voiced, p.frames() * 9 / 10);
}

TEST(Pitch, TracksOtherFundamentals) {
  for (double f0 : {90.0, 150.0, 310.0}) {
    const FeatureMatrix p = ft::pitch(harmonic(f0, 0.5));
    const Eigen::Index mid = p.frames() / 2;
    EXPECT_NEAR(p.data(mid, 0), f0, 0.01 * f0) << f0;
  }
}

TEST(Pitch, WhiteNoiseMostlyUnvoiced) {
  const ft::PitchTrack track = ft::pitch_track(testutil::white_noise(5.0, 8));
  const auto voiced = std::count(track.voiced.begin(), track.voiced.end(), true);
  EXPECT_LT(static_cast<double>(voiced) / static_cast<double>(track.voiced.size()), 0.2);
}

TEST(Pitch, UnvoicedIsZeroEverywhere) {
  const FeatureMatrix silent = ft::pitch(constant(0.0, 0.5));
  EXPECT_EQ(silent.data.cwiseAbs().maxCoeff(), 0.0);

  // Gliding tone: absolute column is zero exactly where unvoiced.
  AudioSignal glide = harmonic(150.0, 1.0);
  glide.channels[0].segment(6000, 4000).setZero();
  const ft::PitchTrack track = ft::pitch_track(glide);
  const FeatureMatrix p = ft::pitch(glide);
  for (Eigen::Index t = 0; t < p.frames(); ++t) {
    EXPECT_EQ(p.data(t, 0) != 0.0, static_cast<bool>(track.voiced[static_cast<std::size_t>(t)]));
  }
}

TEST(Pitch, RelativeColumnIsZScoredLogF0) {
  // Two halves with different F0s: relative pitch is +-1 over voiced frames.
  AudioSignal a = harmonic(120.0, 1.0);
  a.channels[0].tail(8000) = harmonic(240.0, 0.5).channels[0];
  const FeatureMatrix p = ft::pitch(a);
  const ft::PitchTrack track = ft::pitch_track(a);
  double sum = 0.0, sq = 0.0;
  int n = 0;
  for (Eigen::Index t = 0; t < p.frames(); ++t) {
    if (!track.voiced[static_cast<std::size_t>(t)]) continue;
    sum += p.data(t, 1);
    sq += p.data(t, 1) * p.data(t, 1);
    ++n;
  }
  EXPECT_NEAR(sum / n, 0.0, 1e-9);
  EXPECT_NEAR(sq / n, 1.0, 1e-9);
}

TEST(Alignment, TruncateAndPad) {
  FeatureMatrix m;
  m.frame_rate = 100.0;
  m.data = Matrix::Ones(10, 2);
  m.names = {"a", "b"};
  EXPECT_EQ(ft::align_frames(m, 4).data, Matrix::Ones(4, 2));
  const FeatureMatrix padded = ft::align_frames(m, 12);
  EXPECT_EQ(padded.frames(), 12);
  EXPECT_EQ(padded.data.bottomRows(2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(padded.names, m.names);
}

TEST(FeatureSets, DimensionsAndComposition) {
  EXPECT_EQ(ft::feature_set_dims(ft::feature_set("envelope")), 1);
  EXPECT_EQ(ft::feature_set_dims(ft::feature_set("envelope-all")), 3);
  EXPECT_EQ(ft::feature_set_dims(ft::feature_set("spectrogram")), 100);
  EXPECT_EQ(ft::feature_set_dims(ft::feature_set("mfcc")), 39);
  EXPECT_EQ(ft::feature_set_dims(ft::feature_set("pitch")), 3);
  EXPECT_EQ(ft::feature_set_dims(ft::feature_set("acoustic-all")), 145);
  EXPECT_THROW(ft::feature_set("phonemes"), InvalidArgument);
  EXPECT_TRUE(ft::is_builtin_feature_set("mfcc"));
  EXPECT_FALSE(ft::is_builtin_feature_set("L5"));

  const auto env_all = ft::feature_set("envelope-all");
  ASSERT_EQ(env_all.members.size(), 3u);
  EXPECT_EQ(env_all.members[0].kind, ft::FeatureKind::kEnvelope);
  EXPECT_EQ(env_all.members[0].compression, 0.3);
  EXPECT_EQ(env_all.members[1].compression, 1.0);
  EXPECT_EQ(env_all.members[2].kind, ft::FeatureKind::kEnvelopeDerivative);
  EXPECT_EQ(env_all.members[2].compression, 0.3);
}

TEST(FeatureSets, ExtractAssemblesInDeclaredOrder) {
  const AudioSignal a = synthesis::speech_like_audio(1.0, 2);
  const FeatureMatrix all = ft::extract(a, ft::feature_set("acoustic-all"), 100);
  ASSERT_EQ(all.frames(), 100);
  ASSERT_EQ(all.dims(), 145);
  ASSERT_EQ(all.names.size(), 145u);

  const FeatureMatrix env = ft::extract(a, ft::feature_set("envelope"), 100);
  EXPECT_EQ(env.dims(), 1);
  EXPECT_EQ(all.data.col(0), env.data.col(0));
  EXPECT_EQ(all.data.col(1), ft::envelope(a, 1.0).data.col(0));
  const FeatureMatrix mf = ft::align_frames(ft::mfcc(a), 100);
  EXPECT_EQ(all.data.middleCols(103, 39), mf.data);

  // Deterministic.
  EXPECT_EQ(ft::extract(a, ft::feature_set("acoustic-all"), 100).data, all.data);
}

TEST(FeatureSets, AssembleRejectsMismatchedParts) {
  FeatureMatrix a, b;
  a.frame_rate = b.frame_rate = 100.0;
  a.data = Matrix::Ones(10, 1);
  b.data = Matrix::Ones(9, 1);
  EXPECT_THROW(ft::assemble(ft::FeatureSetSpec{"x", {{ft::FeatureKind::kEnvelope, 1.0}, {ft::FeatureKind::kEnvelope, 0.3}}}, {a, b}),
               InvalidArgument);
}
