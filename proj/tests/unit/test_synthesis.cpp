#include <neurotrack/error.hpp>
#include <neurotrack/synthesis.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace neurotrack;
namespace syn = neurotrack::synthesis;

namespace {

double lag1_autocorrelation(const Vector& x) {
  const Vector d = x.array() - x.mean();
  return d.head(d.size() - 1).dot(d.tail(d.size() - 1)) / d.squaredNorm();
}

double correlation(const Vector& a, const Vector& b) {
  const Vector da = a.array() - a.mean(), db = b.array() - b.mean();
  return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

syn::GroundTruth truth(Eigen::Index channels, double snr_db, std::uint64_t seed) {
  syn::GroundTruth gt;
  gt.trf_att = syn::make_kernel(gt.lags, 1, channels, seed);
  gt.trf_ign = syn::make_kernel(gt.lags, 1, channels, seed + 100);
  gt.noise_snr_db = snr_db;
  gt.seed = seed;
  return gt;
}

}  // namespace

TEST(MakeKernel, DeterministicAndSeedSensitive) {
  const trf::LagConfig cfg;
  const Matrix a = syn::make_kernel(cfg, 2, 8, 5);
  EXPECT_EQ(a.rows(), 2 * 51);
  EXPECT_EQ(a.cols(), 8);
  EXPECT_EQ(a, syn::make_kernel(cfg, 2, 8, 5));
  EXPECT_GT((a - syn::make_kernel(cfg, 2, 8, 6)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(a.allFinite());
}

TEST(MakeKernel, PeakInWindowAndDecayed) {
  const trf::LagConfig cfg;
  const Matrix k = syn::make_kernel(cfg, 1, 64, 7);
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    Eigen::Index peak;
    const double peak_mag = k.col(c).cwiseAbs().maxCoeff(&peak);
    EXPECT_LT(std::abs(k(50, c)), 0.05 * peak_mag) << c;
    // Peak latency within roughly 50-260 ms.
    EXPECT_GE(peak, 5) << c;
    EXPECT_LE(peak, 26) << c;
  }
}

TEST(GenFeatures, LengthAutocorrelationAndPositivity) {
  const FeatureMatrix f = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 3);
  EXPECT_EQ(f.frames(), 5900);
  EXPECT_EQ(f.frame_rate, 100.0);
  EXPECT_GT(f.data.minCoeff(), 0.0);
  const double rho = lag1_autocorrelation(f.data.col(0));
  EXPECT_GE(rho, 0.7);
  EXPECT_LE(rho, 0.99);
  EXPECT_EQ(f.data, syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 3).data);
}

TEST(GenFeatures, MultiBandColumnsNearlyIndependent) {
  const FeatureMatrix f = syn::gen_features(syn::SurrogateKind::kMultiBand, 59.0, 3, 4);
  ASSERT_EQ(f.dims(), 3);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) EXPECT_LT(std::abs(correlation(f.data.col(i), f.data.col(j))), 0.5);
  EXPECT_THROW(syn::gen_features(syn::SurrogateKind::kMultiBand, 0.0, 3, 4), InvalidArgument);
}

TEST(Convolve, MatchesDesignMatrixProduct) {
  for (const trf::LagConfig cfg : {trf::LagConfig{}, trf::LagConfig{-100.0, 300.0, 100.0}}) {
    const FeatureMatrix f = syn::gen_features(syn::SurrogateKind::kMultiBand, 12.0, 2, 5);
    const Matrix k = syn::make_kernel(cfg, 2, 5, 6);
    const Matrix direct = syn::convolve(f, k, cfg);
    const Matrix via_design = trf::lag_matrix(f, cfg).data * k;
    EXPECT_LT((direct - via_design).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SimulateTrial, DeterministicAndShaped) {
  const syn::GroundTruth gt = truth(16, 0.0, 8);
  const FeatureMatrix fa = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 1);
  const FeatureMatrix fi = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 2);
  const syn::SimulatedTrial a = syn::simulate_trial(gt, fa, fi, "t1", "A");
  const syn::SimulatedTrial b = syn::simulate_trial(gt, fa, fi, "t1", "A");
  EXPECT_EQ(a.trial.eeg.data.rows(), 5900);
  EXPECT_EQ(a.trial.eeg.data.cols(), 16);
  EXPECT_EQ(a.trial.eeg.data, b.trial.eeg.data);
  EXPECT_EQ(a.trial.trial_id, "t1");
  EXPECT_EQ(a.trial.attended_stream_id, "A");
  EXPECT_LT((a.trial.eeg.data - a.clean - a.noise).cwiseAbs().maxCoeff(), 1e-12);

  FeatureMatrix shorter = fi;
  shorter.data.conservativeResize(5000, Eigen::NoChange);
  EXPECT_THROW(syn::simulate_trial(gt, fa, shorter), InvalidArgument);
  syn::GroundTruth bad = gt;
  bad.noise_snr_db = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(syn::simulate_trial(bad, fa, fi), InvalidArgument);
}

TEST(SimulateTrial, MeasuredSnrMatchesRequest) {
  const FeatureMatrix fa = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 3);
  const FeatureMatrix fi = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 4);
  for (double snr : {-10.0, 0.0, 6.0}) {
    const syn::SimulatedTrial s = syn::simulate_trial(truth(8, snr, 9), fa, fi);
    EXPECT_NEAR(s.measured_snr_db(), snr, 0.5) << snr;
  }
  const syn::SimulatedTrial clean = syn::simulate_trial(truth(8, std::numeric_limits<double>::infinity(), 9), fa, fi);
  EXPECT_EQ(clean.noise.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(std::isinf(clean.measured_snr_db()));
}

TEST(SimulateTrial, NoiselessRecoveryOfAttendedKernel) {
  syn::GroundTruth gt = truth(8, std::numeric_limits<double>::infinity(), 10);
  const FeatureMatrix fa = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 5);
  const FeatureMatrix fi = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 6);
  gt.gain_ign = 0.0;
  const syn::SimulatedTrial s = syn::simulate_trial(gt, fa, fi);
  const trf::TrfModel m = trf::fit_trf(trf::lag_matrix(fa, gt.lags), s.trial, 1e-8);
  EXPECT_GT(syn::cosine_similarity(m.weights, gt.trf_att), 0.99);
}

TEST(SimulateTrial, SilentIgnoredStreamScoresNearZero) {
  syn::GroundTruth gt = truth(8, 0.0, 11);
  gt.gain_ign = 0.0;
  std::vector<trf::DesignMatrix> designs;
  std::vector<EegTrial> eeg;
  for (int i = 0; i < 4; ++i) {
    const FeatureMatrix fa = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 20 + i);
    const FeatureMatrix fi = syn::gen_features(syn::SurrogateKind::kAr1Envelope, 59.0, 1, 40 + i);
    gt.seed = 60 + i;
    eeg.push_back(syn::simulate_trial(gt, fa, fi).trial);
    designs.push_back(trf::lag_matrix(fi, gt.lags));
  }
  // Ignored-stream model trained on three trials, scored on the fourth.
  const trf::TrfModel m = trf::fit_trf(std::span(designs).first(3), std::span(eeg).first(3), 1.0);
  const trf::BpsResult b = trf::bps(trf::predict_eeg(designs[3], m), eeg[3]);
  EXPECT_LT(std::abs(b.mean), 0.05);
}

TEST(SpeechLikeAudio, PeakAndDeterminism) {
  const AudioSignal a = syn::speech_like_audio(1.5, 3);
  EXPECT_EQ(a.sample_rate, 16000.0);
  EXPECT_EQ(a.length(), 24000);
  EXPECT_NEAR(a.channels[0].cwiseAbs().maxCoeff(), 0.9, 1e-12);
  EXPECT_EQ(a.channels[0], syn::speech_like_audio(1.5, 3).channels[0]);
}

TEST(CosineSimilarity, Basics) {
  const Matrix a = testutil::random_matrix(10, 3, 1);
  EXPECT_NEAR(syn::cosine_similarity(a, a), 1.0, 1e-15);
  EXPECT_NEAR(syn::cosine_similarity(a, Matrix(-2.0 * a)), -1.0, 1e-15);
  EXPECT_EQ(syn::cosine_similarity(a, Matrix::Zero(10, 3)), 0.0);
  EXPECT_THROW(syn::cosine_similarity(a, Matrix::Zero(3, 10)), InvalidArgument);
}
