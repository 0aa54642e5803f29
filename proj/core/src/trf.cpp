#include "neurotrack/trf.hpp"

#include "neurotrack/error.hpp"
#include "neurotrack/parallel.hpp"
#include "neurotrack/signal_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace neurotrack::trf {

namespace {

// Cancellation guard for variances formed as sum(x^2) - sum(x)^2 / n.
constexpr double kRelativeVarianceFloor = 1e-12;

PearsonResult correlation_from_sums(double cross, double var_x, double var_y, double scale_x, double scale_y) {
  if (!(var_x > kRelativeVarianceFloor * scale_x) || !(var_y > kRelativeVarianceFloor * scale_y)) {
    return {0.0, true};
  }
  return {std::clamp(cross / std::sqrt(var_x * var_y), -1.0, 1.0), false};
}

void finish_mean(BpsResult& result) {
  result.mean = result.per_channel.size() > 0 ? result.per_channel.mean() : 0.0;
}

void check_same_layout(const DesignMatrix& a, const DesignMatrix& b) {
  if (a.features != b.features || !(a.lags == b.lags) || a.data.cols() != b.data.cols()) {
    throw InvalidArgument("design matrices have different column layouts");
  }
}

}  // namespace

int LagConfig::min_lag() const { return static_cast<int>(std::lround(lag_min_ms * frame_rate / 1000.0)); }

int LagConfig::lag_count() const {
  return static_cast<int>(std::lround((lag_max_ms - lag_min_ms) * frame_rate / 1000.0)) + 1;
}

void LagConfig::validate() const {
  if (!(frame_rate > 0.0)) throw InvalidArgument("lag config: frame rate must be positive");
  if (!(lag_min_ms <= lag_max_ms)) throw InvalidArgument("lag config: lag_min_ms must not exceed lag_max_ms");
  if (lag_count() < 1) throw InvalidArgument("lag config: empty lag window");
}

Eigen::Index BpsResult::degenerate_count() const {
  return static_cast<Eigen::Index>(std::count(degenerate.begin(), degenerate.end(), true));
}

DesignMatrix lag_matrix(const FeatureMatrix& features, const LagConfig& cfg) {
  cfg.validate();
  if (features.frame_rate != cfg.frame_rate) {
    throw InvalidArgument("lag_matrix: feature frame rate " + std::to_string(features.frame_rate) +
                          " Hz differs from lag config rate " + std::to_string(cfg.frame_rate) + " Hz");
  }
  const Eigen::Index t_count = features.frames();
  const Eigen::Index f_count = features.dims();
  const int lags = cfg.lag_count();
  if (lags > t_count) {
    throw InvalidArgument("lag_matrix: " + std::to_string(lags) + " lags exceed " + std::to_string(t_count) +
                          " frames");
  }
  const int first = cfg.min_lag();

  DesignMatrix design;
  design.lags = cfg;
  design.features = f_count;
  design.data = Matrix::Zero(t_count, f_count * lags);
  for (Eigen::Index f = 0; f < f_count; ++f) {
    for (int j = 0; j < lags; ++j) {
      const Eigen::Index shift = first + j;
      const Eigen::Index col = f * lags + j;
      // Row t takes feature row t - shift when that row exists.
      const Eigen::Index dst = std::max<Eigen::Index>(0, shift);
      const Eigen::Index src = std::max<Eigen::Index>(0, -shift);
      const Eigen::Index len = t_count - std::abs(shift);
      if (len > 0) design.data.col(col).segment(dst, len) = features.data.col(f).segment(src, len);
    }
  }
  return design;
}

Moments Moments::of(const DesignMatrix& design, const Matrix& response) {
  if (design.data.rows() != response.rows()) {
    throw InvalidArgument("design has " + std::to_string(design.data.rows()) + " rows but response has " +
                          std::to_string(response.rows()));
  }
  Moments m;
  m.xtx.noalias() = design.data.transpose() * design.data;
  m.xtr.noalias() = design.data.transpose() * response;
  m.x_sum = design.data.colwise().sum().transpose();
  m.r_sum = response.colwise().sum().transpose();
  m.r_sq_sum = response.array().square().colwise().sum().transpose();
  m.rows = design.data.rows();
  return m;
}

Moments& Moments::operator+=(const Moments& other) {
  if (rows == 0) return *this = other;
  if (xtx.rows() != other.xtx.rows() || xtr.cols() != other.xtr.cols()) {
    throw InvalidArgument("moments: shape mismatch");
  }
  xtx += other.xtx;
  xtr += other.xtr;
  x_sum += other.x_sum;
  r_sum += other.r_sum;
  r_sq_sum += other.r_sq_sum;
  rows += other.rows;
  return *this;
}

Moments& Moments::operator-=(const Moments& other) {
  if (xtx.rows() != other.xtx.rows() || xtr.cols() != other.xtr.cols()) {
    throw InvalidArgument("moments: shape mismatch");
  }
  xtx -= other.xtx;
  xtr -= other.xtr;
  x_sum -= other.x_sum;
  r_sum -= other.r_sum;
  r_sq_sum -= other.r_sq_sum;
  rows -= other.rows;
  return *this;
}

Matrix solve_ridge(const Moments& m, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("ridge: lambda must be finite and >= 0");
  const Eigen::Index p = m.xtx.rows();
  if (p == 0) throw InvalidArgument("ridge: empty design");
  const double diag_mean = m.xtx.diagonal().mean();
  Matrix system = m.xtx;
  system.diagonal().array() += lambda * diag_mean;
  const Eigen::LDLT<Matrix> ldlt(system);
  const double tol = static_cast<double>(p) * std::numeric_limits<double>::epsilon();
  const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  // rcond is only an estimate; an exactly dependent column shows up as a
  // vanishing pivot even when the estimate does not notice.
  const Vector pivots = ldlt.vectorD();
  const bool tiny_pivot = !(pivots.minCoeff() > tol * pivots.cwiseAbs().maxCoeff());
  if (!(diag_mean > 0.0) || !(rcond > tol) || tiny_pivot || !ldlt.isPositive()) {
    throw NumericError("ridge: singular normal equations (lambda = " + std::to_string(lambda) +
                       ", reciprocal condition " + std::to_string(rcond) + ")");
  }
  return ldlt.solve(m.xtr);
}

TrfModel fit_trf(std::span<const DesignMatrix> designs, std::span<const EegTrial> eeg, double lambda,
                 std::vector<std::string> feature_names) {
  if (designs.empty()) throw InvalidArgument("fit_trf: no training trials");
  if (designs.size() != eeg.size()) throw InvalidArgument("fit_trf: design and EEG trial counts differ");
  Moments total;
  for (std::size_t i = 0; i < designs.size(); ++i) {
    check_same_layout(designs.front(), designs[i]);
    if (eeg[i].eeg.channels() != eeg.front().eeg.channels()) {
      throw InvalidArgument("fit_trf: EEG channel counts differ across trials");
    }
    total += Moments::of(designs[i], eeg[i].eeg.data);
  }
  TrfModel model;
  model.weights = solve_ridge(total, lambda);
  model.lambda = lambda;
  model.lags = designs.front().lags;
  if (feature_names.empty()) {
    for (Eigen::Index f = 0; f < designs.front().features; ++f) feature_names.push_back("f" + std::to_string(f));
  }
  if (static_cast<Eigen::Index>(feature_names.size()) != designs.front().features) {
    throw InvalidArgument("fit_trf: feature name count does not match design");
  }
  model.feature_names = std::move(feature_names);
  model.channel_names = eeg.front().eeg.channel_names;
  return model;
}

TrfModel fit_trf(const DesignMatrix& design, const EegTrial& eeg, double lambda,
                 std::vector<std::string> feature_names) {
  return fit_trf(std::span<const DesignMatrix>(&design, 1), std::span<const EegTrial>(&eeg, 1), lambda,
                 std::move(feature_names));
}

Matrix predict_eeg(const DesignMatrix& design, const TrfModel& model) {
  if (design.data.cols() != model.weights.rows() || !(design.lags == model.lags)) {
    throw InvalidArgument("predict_eeg: design layout (" + std::to_string(design.data.cols()) +
                          " columns) does not match model (" + std::to_string(model.weights.rows()) + " rows)");
  }
  return design.data * model.weights;
}

PearsonResult pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size()) {
    throw InvalidArgument("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw InvalidArgument("pearson: need at least two samples");
  const Vector dx = x.array() - x.mean();
  const Vector dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  // Compare against the raw magnitude so rounding residue of a constant
  // series does not count as variance.
  return correlation_from_sums(dx.dot(dy), sxx, syy, x.squaredNorm() * 1e-12, y.squaredNorm() * 1e-12);
}

BpsResult bps(const Matrix& predicted, const Matrix& actual) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw InvalidArgument("bps: predicted " + std::to_string(predicted.rows()) + "x" +
                          std::to_string(predicted.cols()) + " vs actual " + std::to_string(actual.rows()) + "x" +
                          std::to_string(actual.cols()));
  }
  BpsResult result;
  result.per_channel.resize(predicted.cols());
  result.degenerate.resize(static_cast<std::size_t>(predicted.cols()));
  for (Eigen::Index c = 0; c < predicted.cols(); ++c) {
    const auto r = pearson(predicted.col(c), actual.col(c));
    result.per_channel[c] = r.r;
    result.degenerate[static_cast<std::size_t>(c)] = r.degenerate;
  }
  finish_mean(result);
  return result;
}

BpsResult bps(const Matrix& predicted, const EegTrial& actual) { return bps(predicted, actual.eeg.data); }

BpsResult bps_from_moments(const Moments& held_out, const Matrix& weights) {
  if (weights.rows() != held_out.xtx.rows() || weights.cols() != held_out.xtr.cols()) {
    throw InvalidArgument("bps_from_moments: weight shape does not match moments");
  }
  const double n = static_cast<double>(held_out.rows);
  const Matrix gw = held_out.xtx * weights;
  const Eigen::RowVectorXd pred_sum = held_out.x_sum.transpose() * weights;
  BpsResult result;
  result.per_channel.resize(weights.cols());
  result.degenerate.resize(static_cast<std::size_t>(weights.cols()));
  for (Eigen::Index c = 0; c < weights.cols(); ++c) {
    const double pp = weights.col(c).dot(gw.col(c));
    const double pr = weights.col(c).dot(held_out.xtr.col(c));
    const double ps = pred_sum[c];
    const double rs = held_out.r_sum[c];
    const double rr = held_out.r_sq_sum[c];
    const auto r = correlation_from_sums(pr - ps * rs / n, pp - ps * ps / n, rr - rs * rs / n, pp, rr);
    result.per_channel[c] = r.r;
    result.degenerate[static_cast<std::size_t>(c)] = r.degenerate;
  }
  finish_mean(result);
  return result;
}

std::vector<double> default_lambda_grid() { return {1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6}; }

CrossValidation cross_validate_moments(std::span<const Moments> trials, std::vector<double> lambda_grid, int jobs) {
  if (trials.size() < 2) throw InvalidArgument("cross_validate: need at least 2 trials, got " +
                                               std::to_string(trials.size()));
  if (lambda_grid.empty()) throw InvalidArgument("cross_validate: empty lambda grid");
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("cross_validate: lambdas must be finite and >= 0");
  }
  std::sort(lambda_grid.begin(), lambda_grid.end());
  lambda_grid.erase(std::unique(lambda_grid.begin(), lambda_grid.end()), lambda_grid.end());

  Moments total;
  for (const auto& m : trials) total += m;

  const std::size_t n = trials.size();
  const std::size_t k = lambda_grid.size();
  std::vector<std::vector<BpsResult>> scores(n, std::vector<BpsResult>(k));
  parallel_for(n, jobs, [&](std::size_t fold) {
    Moments train = total;
    train -= trials[fold];
    for (std::size_t j = 0; j < k; ++j) {
      scores[fold][j] = bps_from_moments(trials[fold], solve_ridge(train, lambda_grid[j]));
    }
  });

  CrossValidation cv;
  cv.lambdas = lambda_grid;
  cv.mean_bps.assign(k, 0.0);
  std::size_t best = 0;
  for (std::size_t j = 0; j < k; ++j) {
    double sum = 0.0;
    for (std::size_t fold = 0; fold < n; ++fold) sum += scores[fold][j].mean;
    cv.mean_bps[j] = sum / static_cast<double>(n);
    if (cv.mean_bps[j] > cv.mean_bps[best]) best = j;
  }
  cv.best_lambda = lambda_grid[best];
  cv.per_trial.reserve(n);
  for (std::size_t fold = 0; fold < n; ++fold) cv.per_trial.push_back(scores[fold][best]);
  return cv;
}

CrossValidation cross_validate(std::span<const TrialData> trials, std::vector<double> lambda_grid,
                               const LagConfig& cfg, int jobs) {
  if (trials.size() < 2) throw InvalidArgument("cross_validate: need at least 2 trials, got " +
                                               std::to_string(trials.size()));
  std::vector<Moments> moments(trials.size());
  parallel_for(trials.size(), jobs, [&](std::size_t i) {
    moments[i] = Moments::of(lag_matrix(trials[i].features, cfg), trials[i].trial.eeg.data);
  });
  for (const auto& m : moments) {
    if (m.xtx.rows() != moments.front().xtx.rows() || m.xtr.cols() != moments.front().xtr.cols()) {
      throw InvalidArgument("cross_validate: trials differ in feature or channel count");
    }
  }
  return cross_validate_moments(moments, std::move(lambda_grid), jobs);
}

void save_model(const TrfModel& model, const std::filesystem::path& path) {
  io::write_ntf(model.weights, model.lags.frame_rate, path);
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << "trf";
  out << YAML::Key << "lambda" << YAML::Value << model.lambda;
  out << YAML::Key << "lag_min_ms" << YAML::Value << model.lags.lag_min_ms;
  out << YAML::Key << "lag_max_ms" << YAML::Value << model.lags.lag_max_ms;
  out << YAML::Key << "frame_rate" << YAML::Value << model.lags.frame_rate;
  out << YAML::Key << "features" << YAML::Value << YAML::Flow << model.feature_names;
  out << YAML::Key << "channels" << YAML::Value << YAML::Flow << model.channel_names;
  out << YAML::EndMap;
  std::ofstream side(io::sidecar_path(path), std::ios::trunc);
  if (!side) throw IoError("cannot write model sidecar for '" + path.string() + "'");
  side << out.c_str() << "\n";
}

TrfModel load_model(const std::filesystem::path& path) {
  auto raw = io::read_ntf(path);
  const auto side = io::sidecar_path(path);
  TrfModel model;
  try {
    const YAML::Node meta = YAML::LoadFile(side.string());
    model.lambda = meta["lambda"].as<double>();
    model.lags.lag_min_ms = meta["lag_min_ms"].as<double>();
    model.lags.lag_max_ms = meta["lag_max_ms"].as<double>();
    model.lags.frame_rate = meta["frame_rate"].as<double>();
    model.feature_names = meta["features"].as<std::vector<std::string>>();
    model.channel_names = meta["channels"].as<std::vector<std::string>>();
  } catch (const YAML::BadFile&) {
    throw IoError("model sidecar not found: '" + side.string() + "'");
  } catch (const YAML::Exception& e) {
    throw FormatError("'" + side.string() + "': " + e.what());
  }
  if (raw.data.rows() != model.features() * model.lags.lag_count() ||
      raw.data.cols() != static_cast<Eigen::Index>(model.channel_names.size())) {
    throw FormatError("'" + path.string() + "': weight shape does not match sidecar metadata");
  }
  model.weights = std::move(raw.data);
  return model;
}

}  // namespace neurotrack::trf
