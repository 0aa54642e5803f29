#pragma once

#include "neurotrack/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace neurotrack::trf {

// Lag window of an encoding model. A lag of l samples pairs the response at
// time t with the stimulus at time t - l.
struct LagConfig {
  double lag_min_ms = 0.0;
  double lag_max_ms = 500.0;
  double frame_rate = 100.0;

  int min_lag() const;    // samples
  int lag_count() const;  // L = round((max - min) * rate / 1000) + 1
  void validate() const;

  friend bool operator==(const LagConfig&, const LagConfig&) = default;
};

// Time-lagged stimulus. Columns are grouped by feature, lags ascending within
// each group: column f*L + j holds feature f at lag min_lag + j.
struct DesignMatrix {
  Matrix data;
  LagConfig lags;
  Eigen::Index features = 0;
};

// Encoding weights, (F*L) x C in DesignMatrix column order. The `lambda` is
// the relative ridge parameter the model was fitted with.
struct TrfModel {
  Matrix weights;
  double lambda = 0.0;
  LagConfig lags;
  std::vector<std::string> feature_names;
  std::vector<std::string> channel_names;

  Eigen::Index features() const { return static_cast<Eigen::Index>(feature_names.size()); }
  double weight(int lag_index, Eigen::Index feature, Eigen::Index channel) const {
    return weights(feature * lags.lag_count() + lag_index, channel);
  }
};

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // one side had zero variance; r forced to 0
};

struct BpsResult {
  Vector per_channel;
  double mean = 0.0;
  std::vector<bool> degenerate;

  Eigen::Index degenerate_count() const;
};

// One training or test unit: stimulus features aligned to a trial's EEG.
struct TrialData {
  FeatureMatrix features;
  EegTrial trial;
};

DesignMatrix lag_matrix(const FeatureMatrix& features, const LagConfig& cfg);

// Sufficient statistics of one or more (design, response) pairs. Adding and
// subtracting trials is exact up to floating-point rounding, which lets
// leave-one-out folds reuse per-trial accumulations.
struct Moments {
  Matrix xtx;       // X'X
  Matrix xtr;       // X'R
  Vector x_sum;     // column sums of X
  Vector r_sum;     // column sums of R
  Vector r_sq_sum;  // column sums of R^2
  Eigen::Index rows = 0;

  static Moments of(const DesignMatrix& design, const Matrix& response);
  Moments& operator+=(const Moments& other);
  Moments& operator-=(const Moments& other);
};

// Ridge solution W = (X'X + lambda * m * I)^-1 X'R with m = mean(diag(X'X)).
// NumericError when the system is singular (lambda = 0 with rank-deficient X).
Matrix solve_ridge(const Moments& m, double lambda);

// Fits one model on the stacked trials. Every trial's design must have the
// same column layout and the same row count as its EEG.
TrfModel fit_trf(std::span<const DesignMatrix> designs, std::span<const EegTrial> eeg, double lambda,
                 std::vector<std::string> feature_names = {});
TrfModel fit_trf(const DesignMatrix& design, const EegTrial& eeg, double lambda,
                 std::vector<std::string> feature_names = {});

Matrix predict_eeg(const DesignMatrix& design, const TrfModel& model);

PearsonResult pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

BpsResult bps(const Matrix& predicted, const Matrix& actual);
BpsResult bps(const Matrix& predicted, const EegTrial& actual);

// Per-channel correlation between X*W and the held-out response, computed
// from the held-out trial's moments instead of materialising the prediction.
BpsResult bps_from_moments(const Moments& held_out, const Matrix& weights);

// Default relative ridge grid.
std::vector<double> default_lambda_grid();

struct CrossValidation {
  double best_lambda = 0.0;
  std::vector<double> lambdas;             // ascending
  std::vector<double> mean_bps;            // per lambda, averaged over held-out trials
  std::vector<BpsResult> per_trial;        // held-out scores at best_lambda
};

// Leave-one-trial-out over the grid. The winning lambda maximises mean
// held-out BPS; ties resolve toward the smaller lambda.
CrossValidation cross_validate(std::span<const TrialData> trials, std::vector<double> lambda_grid,
                               const LagConfig& cfg, int jobs = 1);

// Same procedure from precomputed per-trial moments.
CrossValidation cross_validate_moments(std::span<const Moments> trials, std::vector<double> lambda_grid,
                                       int jobs = 1);

// Weights as NTF1, metadata (lambda, lags, names) in the YAML sidecar.
void save_model(const TrfModel& model, const std::filesystem::path& path);
TrfModel load_model(const std::filesystem::path& path);

}  // namespace neurotrack::trf
