#include <neurotrack/error.hpp>
#include <neurotrack/synthesis.hpp>
#include <neurotrack/trf.hpp>

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace neurotrack;

namespace {

oracle::Mat to_rows(const Matrix& m) {
  oracle::Mat out = oracle::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

double max_abs_diff(const Matrix& a, const oracle::Mat& b) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      worst = std::max(worst, std::abs(a(r, c) - b[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
  return worst;
}

FeatureMatrix features_of(const Matrix& data, double rate = 100.0) {
  FeatureMatrix f;
  f.data = data;
  f.frame_rate = rate;
  return f;
}

EegTrial trial_of(const Matrix& data, std::string id = "t") {
  EegTrial t;
  t.eeg.data = data;
  t.eeg.sample_rate = 100.0;
  t.eeg.channel_names = default_channel_names(static_cast<std::size_t>(data.cols()));
  t.trial_id = std::move(id);
  return t;
}

trf::LagConfig samples_lags(int lo, int hi) { return {lo * 10.0, hi * 10.0, 100.0}; }

}  // namespace

TEST(LagConfig, CountsAndValidation) {
  EXPECT_EQ(trf::LagConfig{}.lag_count(), 51);
  EXPECT_EQ(trf::LagConfig{}.min_lag(), 0);
  EXPECT_EQ((trf::LagConfig{-100.0, 400.0, 100.0}).min_lag(), -10);
  EXPECT_EQ((trf::LagConfig{-100.0, 400.0, 100.0}).lag_count(), 51);
  EXPECT_THROW((trf::LagConfig{10.0, 0.0, 100.0}).validate(), InvalidArgument);
}

TEST(LagMatrix, ToySeries) {
  Matrix s(4, 1);
  s << 1, 2, 3, 4;
  const trf::DesignMatrix d = trf::lag_matrix(features_of(s), samples_lags(0, 1));
  Matrix want(4, 2);
  want << 1, 0, 2, 1, 3, 2, 4, 3;
  EXPECT_EQ(d.data, want);
  EXPECT_EQ(d.features, 1);
}

TEST(LagMatrix, ZeroLagIsIdentity) {
  const Matrix s = testutil::random_matrix(30, 3, 1);
  EXPECT_EQ(trf::lag_matrix(features_of(s), samples_lags(0, 0)).data, s);
}

TEST(LagMatrix, ColumnOrderMatchesNaiveLoop) {
  const Matrix s = testutil::random_matrix(25, 2, 2);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(s), samples_lags(0, 2));
  ASSERT_EQ(d.data.cols(), 6);
  EXPECT_EQ(max_abs_diff(d.data, oracle::naive_design(to_rows(s), 0, 3)), 0.0);
  // Column 4 is feature 2 at lag 1.
  EXPECT_EQ(d.data(10, 4), s(9, 1));

  // Negative lags pull from the future.
  const trf::DesignMatrix neg = trf::lag_matrix(features_of(s), samples_lags(-2, 3));
  EXPECT_EQ(max_abs_diff(neg.data, oracle::naive_design(to_rows(s), -2, 6)), 0.0);
}

TEST(LagMatrix, Errors) {
  EXPECT_THROW(trf::lag_matrix(features_of(Matrix::Ones(5, 1)), samples_lags(0, 10)), InvalidArgument);
  EXPECT_THROW(trf::lag_matrix(features_of(Matrix::Ones(50, 1), 64.0), samples_lags(0, 2)), InvalidArgument);
}

TEST(FitTrf, IdentityToy) {
  const Matrix x = Matrix::Identity(4, 4);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(x), samples_lags(0, 0));
  const EegTrial t = trial_of(x);
  const trf::TrfModel m = trf::fit_trf(d, t, 0.0);
  EXPECT_LT((m.weights - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
  const Matrix pred = trf::predict_eeg(d, m);
  EXPECT_LT((pred - x).cwiseAbs().maxCoeff(), 1e-14);
  const trf::BpsResult b = trf::bps(pred, t);
  EXPECT_NEAR(b.mean, 1.0, 1e-12);
}

TEST(FitTrf, RecoversKnownWeightsNoiseless) {
  const Matrix x = testutil::random_matrix(500, 8, 3);
  const Matrix w_true = testutil::random_matrix(8, 3, 4);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(x), samples_lags(0, 0));
  const trf::TrfModel m = trf::fit_trf(d, trial_of(x * w_true), 1e-9);
  EXPECT_LT((m.weights - w_true).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FitTrf, ShrinkageLimit) {
  const Matrix x = testutil::random_matrix(500, 8, 5);
  const Matrix r = testutil::random_matrix(500, 2, 6);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(x), samples_lags(0, 0));
  const Matrix w0 = trf::fit_trf(d, trial_of(r), 0.0).weights;
  const Matrix big = trf::fit_trf(d, trial_of(r), 1e9).weights;
  EXPECT_LT(big.cwiseAbs().maxCoeff(), 1e-6 * w0.cwiseAbs().maxCoeff());
}

TEST(FitTrf, MatchesGaussianEliminationOracle) {
  const Matrix s = testutil::random_matrix(500, 4, 7);
  const Matrix r = testutil::random_matrix(500, 3, 8);
  const trf::LagConfig cfg = samples_lags(0, 10);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(s), cfg);
  for (double lambda : {0.0, 1e-3, 1.0, 100.0}) {
    const trf::TrfModel m = trf::fit_trf(d, trial_of(r), lambda);
    const oracle::Mat ref = oracle::ridge(oracle::naive_design(to_rows(s), 0, 11), to_rows(r), lambda);
    EXPECT_LT(max_abs_diff(m.weights, ref), 1e-8) << lambda;
  }
}

TEST(FitTrf, NormalEquationResidual) {
  const Matrix s = testutil::random_matrix(400, 3, 9);
  const Matrix r = testutil::random_matrix(400, 5, 10);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(s), samples_lags(0, 8));
  const double lambda = 0.01;
  const trf::TrfModel m = trf::fit_trf(d, trial_of(r), lambda);
  const Matrix xtx = d.data.transpose() * d.data;
  const Matrix xtr = d.data.transpose() * r;
  Matrix sys = xtx;
  sys.diagonal().array() += lambda * xtx.diagonal().mean();
  EXPECT_LT((sys * m.weights - xtr).cwiseAbs().maxCoeff(), 1e-8 * xtr.cwiseAbs().maxCoeff());
}

TEST(FitTrf, StacksTrials) {
  const Matrix s1 = testutil::random_matrix(200, 2, 11), s2 = testutil::random_matrix(150, 2, 12);
  const Matrix r1 = testutil::random_matrix(200, 4, 13), r2 = testutil::random_matrix(150, 4, 14);
  const trf::LagConfig cfg = samples_lags(0, 5);
  const std::vector<trf::DesignMatrix> designs = {trf::lag_matrix(features_of(s1), cfg), trf::lag_matrix(features_of(s2), cfg)};
  const std::vector<EegTrial> eeg = {trial_of(r1), trial_of(r2)};
  const trf::TrfModel m = trf::fit_trf(designs, eeg, 0.5);

  Matrix x(350, designs[0].data.cols()), r(350, 4);
  x << designs[0].data, designs[1].data;
  r << r1, r2;
  const oracle::Mat ref = oracle::ridge(to_rows(x), to_rows(r), 0.5);
  EXPECT_LT(max_abs_diff(m.weights, ref), 1e-10);
}

TEST(FitTrf, SingularAtZeroLambda) {
  Matrix s = testutil::random_matrix(100, 2, 15);
  s.col(1) = 2.0 * s.col(0);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(s), samples_lags(0, 0));
  EXPECT_THROW(trf::fit_trf(d, trial_of(testutil::random_matrix(100, 1, 16)), 0.0), NumericError);
  EXPECT_NO_THROW(trf::fit_trf(d, trial_of(testutil::random_matrix(100, 1, 16)), 1e-3));
  EXPECT_THROW(trf::fit_trf(d, trial_of(testutil::random_matrix(100, 1, 16)), -1.0), InvalidArgument);
  EXPECT_THROW(trf::fit_trf(d, trial_of(testutil::random_matrix(99, 1, 16)), 1.0), InvalidArgument);
}

TEST(PredictEeg, ZeroDesignAndNaiveMultiply) {
  const trf::LagConfig cfg = samples_lags(0, 4);
  trf::TrfModel m;
  m.lags = cfg;
  m.weights = testutil::random_matrix(10, 3, 17);
  const trf::DesignMatrix zero = trf::lag_matrix(features_of(Matrix::Zero(20, 2)), cfg);
  EXPECT_EQ(trf::predict_eeg(zero, m).cwiseAbs().maxCoeff(), 0.0);

  const Matrix s = testutil::random_matrix(60, 2, 18);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(s), cfg);
  const oracle::Mat ref = oracle::matmul(oracle::naive_design(to_rows(s), 0, 5), to_rows(m.weights));
  EXPECT_LT(max_abs_diff(trf::predict_eeg(d, m), ref), 1e-12);

  m.weights = Matrix::Zero(9, 3);
  EXPECT_THROW(trf::predict_eeg(d, m), InvalidArgument);
}

TEST(Pearson, KnownValues) {
  Vector x(4), y(4);
  x << 1, 2, 3, 4;
  y << 2, 4, 5, 4;
  // Hand formula: sum(dx*dy) = 3.5, sum(dx^2) = 5, sum(dy^2) = 4.75.
  EXPECT_NEAR(trf::pearson(x, y).r, 3.5 / std::sqrt(5.0 * 4.75), 1e-14);
  EXPECT_NEAR(trf::pearson(x, y).r, 0.7182, 1e-4);
  // The five-point textbook series extends y with 5 and gives sqrt(0.6).
  Vector x5(5), y5(5);
  x5 << 1, 2, 3, 4, 5;
  y5 << 2, 4, 5, 4, 5;
  EXPECT_NEAR(trf::pearson(x5, y5).r, 0.7746, 1e-4);
  EXPECT_NEAR(trf::pearson(x, y).r, oracle::pearson({1, 2, 3, 4}, {2, 4, 5, 4}), 1e-14);
  EXPECT_NEAR(trf::pearson(x, x).r, 1.0, 1e-15);
  EXPECT_NEAR(trf::pearson(x, Vector(-x)).r, -1.0, 1e-15);
}

TEST(Pearson, DegenerateAndErrors) {
  Vector x(4), c = Vector::Constant(4, 0.1);
  x << 1, 2, 3, 4;
  const auto r = trf::pearson(x, c);
  EXPECT_EQ(r.r, 0.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_THROW(trf::pearson(x, Vector::Ones(3)), InvalidArgument);
  EXPECT_THROW(trf::pearson(Vector::Ones(1), Vector::Ones(1)), InvalidArgument);
}

TEST(Pearson, AffineInvariance) {
  const Matrix m = testutil::random_matrix(300, 2, 19);
  const double base = trf::pearson(m.col(0), m.col(1)).r;
  for (double a : {0.01, 1.0, 37.0}) {
    for (double b : {-5.0, 0.0, 1e3}) {
      const Vector xa = (a * m.col(0)).array() + b;
      EXPECT_NEAR(trf::pearson(xa, m.col(1)).r, base, 1e-12);
    }
  }
}

TEST(Bps, PerfectAndPermutationAndDegenerate) {
  const Matrix a = testutil::random_matrix(200, 5, 20);
  const trf::BpsResult perfect = trf::bps(a, trial_of(a));
  EXPECT_NEAR(perfect.mean, 1.0, 1e-12);
  EXPECT_EQ(perfect.degenerate_count(), 0);

  const Matrix p = a + testutil::random_matrix(200, 5, 21);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.indices() << 3, 0, 4, 1, 2;
  EXPECT_NEAR(trf::bps(p, a).mean, trf::bps(Matrix(p * perm), Matrix(a * perm)).mean, 1e-15);

  Matrix q = p;
  q.col(2).setConstant(3.0);
  const trf::BpsResult deg = trf::bps(q, a);
  EXPECT_EQ(deg.per_channel[2], 0.0);
  EXPECT_TRUE(deg.degenerate[2]);
  EXPECT_EQ(deg.degenerate_count(), 1);
  EXPECT_NEAR(deg.mean, deg.per_channel.mean(), 1e-15);
  EXPECT_THROW(trf::bps(q, Matrix(a.leftCols(4))), InvalidArgument);
}

TEST(Bps, IndependentNoiseNearZero) {
  const trf::BpsResult b = trf::bps(testutil::random_matrix(5900, 64, 22), testutil::random_matrix(5900, 64, 23));
  EXPECT_LT(std::abs(b.mean), 0.05);
}

TEST(Bps, FromMomentsMatchesDirect) {
  const Matrix s = testutil::random_matrix(300, 2, 24);
  const Matrix r = testutil::random_matrix(300, 4, 25);
  const trf::DesignMatrix d = trf::lag_matrix(features_of(s), samples_lags(0, 6));
  const Matrix w = testutil::random_matrix(14, 4, 26);
  trf::TrfModel m;
  m.lags = d.lags;
  m.weights = w;
  const trf::BpsResult direct = trf::bps(trf::predict_eeg(d, m), r);
  const trf::BpsResult via = trf::bps_from_moments(trf::Moments::of(d, r), w);
  EXPECT_LT((direct.per_channel - via.per_channel).cwiseAbs().maxCoeff(), 1e-12);

  // A zero weight column predicts a constant: degenerate in both paths.
  Matrix wz = w;
  wz.col(1).setZero();
  EXPECT_TRUE(trf::bps_from_moments(trf::Moments::of(d, r), wz).degenerate[1]);
}

TEST(Moments, AddSubtractRoundTrip) {
  const trf::LagConfig cfg = samples_lags(0, 3);
  const trf::Moments a = trf::Moments::of(trf::lag_matrix(features_of(testutil::random_matrix(80, 2, 27)), cfg), testutil::random_matrix(80, 3, 28));
  const trf::Moments b = trf::Moments::of(trf::lag_matrix(features_of(testutil::random_matrix(60, 2, 29)), cfg), testutil::random_matrix(60, 3, 30));
  trf::Moments total;
  total += a;
  total += b;
  EXPECT_EQ(total.rows, 140);
  total -= b;
  EXPECT_LT((total.xtx - a.xtx).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((total.xtr - a.xtr).cwiseAbs().maxCoeff(), 1e-10);
}

namespace {

std::vector<trf::TrialData> simulated_trials(int count, double snr_db, std::uint64_t seed, double seconds = 20.0,
                                             Eigen::Index channels = 4, double gain_ign = 0.3) {
  const trf::LagConfig cfg;
  synthesis::GroundTruth gt;
  gt.lags = cfg;
  gt.trf_att = synthesis::make_kernel(cfg, 1, channels, seed);
  gt.trf_ign = synthesis::make_kernel(cfg, 1, channels, seed + 1);
  gt.noise_snr_db = snr_db;
  gt.gain_ign = gain_ign;
  std::vector<trf::TrialData> trials;
  for (int i = 0; i < count; ++i) {
    const FeatureMatrix fa = synthesis::gen_features(synthesis::SurrogateKind::kAr1Envelope, seconds, 1, synthesis::derive_seed(seed, 1, i));
    const FeatureMatrix fi = synthesis::gen_features(synthesis::SurrogateKind::kAr1Envelope, seconds, 1, synthesis::derive_seed(seed, 2, i));
    gt.seed = synthesis::derive_seed(seed, 3, i);
    trials.push_back({fa, synthesis::simulate_trial(gt, fa, fi, "t" + std::to_string(i)).trial});
  }
  return trials;
}

}  // namespace

TEST(CrossValidate, IdenticalNoiselessTrials) {
  // Single stream, no noise: the attended model explains the EEG exactly.
  auto trials = simulated_trials(1, std::numeric_limits<double>::infinity(), 40, 20.0, 4, 0.0);
  trials.push_back(trials.front());
  const trf::CrossValidation cv = trf::cross_validate(trials, trf::default_lambda_grid(), trf::LagConfig{});
  EXPECT_EQ(cv.best_lambda, 1e-6);
  ASSERT_EQ(cv.per_trial.size(), 2u);
  EXPECT_GT(cv.per_trial[0].mean, 0.99);
  EXPECT_GT(cv.per_trial[1].mean, 0.99);
}

TEST(CrossValidate, SingleValueGridAndErrors) {
  const auto trials = simulated_trials(3, 0.0, 41, 10.0);
  EXPECT_EQ(trf::cross_validate(trials, {42.0}, trf::LagConfig{}).best_lambda, 42.0);
  EXPECT_THROW(trf::cross_validate(std::span(trials).first(1), {1.0}, trf::LagConfig{}), InvalidArgument);
  EXPECT_THROW(trf::cross_validate(trials, {}, trf::LagConfig{}), InvalidArgument);
}

TEST(CrossValidate, RegularizationPathPeaksInside) {
  const auto trials = simulated_trials(32, 0.0, 42, 59.0, 8);
  const trf::CrossValidation cv = trf::cross_validate(trials, trf::default_lambda_grid(), trf::LagConfig{});
  const auto best = static_cast<std::size_t>(std::find(cv.lambdas.begin(), cv.lambdas.end(), cv.best_lambda) - cv.lambdas.begin());
  EXPECT_GT(cv.mean_bps[best], cv.mean_bps.front());
  EXPECT_GT(cv.mean_bps[best], cv.mean_bps.back());
  EXPECT_EQ(cv.per_trial.size(), 32u);
}

TEST(CrossValidate, ThreadCountDoesNotChangeResults) {
  const auto trials = simulated_trials(6, 0.0, 43, 10.0);
  const trf::CrossValidation one = trf::cross_validate(trials, trf::default_lambda_grid(), trf::LagConfig{}, 1);
  const trf::CrossValidation many = trf::cross_validate(trials, trf::default_lambda_grid(), trf::LagConfig{}, 3);
  EXPECT_EQ(one.mean_bps, many.mean_bps);
  EXPECT_EQ(one.best_lambda, many.best_lambda);
}

TEST(CrossValidate, MomentsPathMatchesExplicitRefits) {
  const auto trials = simulated_trials(4, 0.0, 44, 10.0);
  const trf::LagConfig cfg;
  const trf::CrossValidation cv = trf::cross_validate(trials, {1.0}, cfg);
  for (std::size_t k = 0; k < trials.size(); ++k) {
    std::vector<trf::DesignMatrix> designs;
    std::vector<EegTrial> eeg;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      if (i == k) continue;
      designs.push_back(trf::lag_matrix(trials[i].features, cfg));
      eeg.push_back(trials[i].trial);
    }
    const trf::TrfModel m = trf::fit_trf(designs, eeg, 1.0);
    const trf::BpsResult direct = trf::bps(trf::predict_eeg(trf::lag_matrix(trials[k].features, cfg), m), trials[k].trial);
    EXPECT_NEAR(direct.mean, cv.per_trial[k].mean, 1e-10);
  }
}

TEST(ModelIo, SaveLoadRoundTrip) {
  testutil::TempDir dir("model");
  trf::TrfModel m;
  m.lags = trf::LagConfig{-50.0, 300.0, 100.0};
  m.weights = testutil::random_matrix(2 * m.lags.lag_count(), 3, 45).cast<float>().cast<double>();
  m.lambda = 0.01;
  m.feature_names = {"env", "deriv"};
  m.channel_names = {"Cz", "Fz", "Pz"};
  trf::save_model(m, dir / "m.ntf");
  const trf::TrfModel back = trf::load_model(dir / "m.ntf");
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.lambda, 0.01);
  EXPECT_EQ(back.lags, m.lags);
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_EQ(back.channel_names, m.channel_names);
  EXPECT_EQ(back.weight(3, 1, 2), m.weights(m.lags.lag_count() + 3, 2));
}
