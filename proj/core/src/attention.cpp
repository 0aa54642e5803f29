#include "neurotrack/attention.hpp"

#include "neurotrack/error.hpp"
#include "neurotrack/parallel.hpp"

#include <cmath>
#include <limits>

namespace neurotrack::attention {

const char* to_string(Decision d) {
  switch (d) {
    case Decision::kAttended: return "attended";
    case Decision::kIgnored: return "ignored";
    case Decision::kUndecided: return "undecided";
  }
  return "undecided";
}

Decision decide(double bps_att_mean, double bps_ign_mean) {
  if (bps_att_mean > bps_ign_mean) return Decision::kAttended;
  if (bps_att_mean < bps_ign_mean) return Decision::kIgnored;
  return Decision::kUndecided;
}

AttentionDecision classify_trial(const EegTrial& eeg, const FeatureMatrix& feat_att, const FeatureMatrix& feat_ign,
                                 const trf::TrfModel& w_att, const trf::TrfModel& w_ign) {
  if (feat_att.frames() != eeg.eeg.samples() || feat_ign.frames() != eeg.eeg.samples()) {
    throw InvalidArgument("classify_trial: features are not aligned to the trial (" +
                          std::to_string(feat_att.frames()) + "/" + std::to_string(feat_ign.frames()) + " vs " +
                          std::to_string(eeg.eeg.samples()) + " samples)");
  }
  const Matrix pred_att = trf::predict_eeg(trf::lag_matrix(feat_att, w_att.lags), w_att);
  const Matrix pred_ign = trf::predict_eeg(trf::lag_matrix(feat_ign, w_ign.lags), w_ign);
  AttentionDecision d;
  d.trial_id = eeg.trial_id;
  d.bps_att_mean = trf::bps(pred_att, eeg).mean;
  d.bps_ign_mean = trf::bps(pred_ign, eeg).mean;
  d.decision = decide(d.bps_att_mean, d.bps_ign_mean);
  d.correct = d.decision == Decision::kAttended;
  d.lambda = w_att.lambda;
  return d;
}

std::vector<TrialMoments> trial_moments(std::span<const LabeledTrial> trials, const trf::LagConfig& lags, int jobs) {
  std::vector<TrialMoments> out(trials.size());
  parallel_for(trials.size(), jobs, [&](std::size_t i) {
    const auto& t = trials[i];
    if (t.attended.frames() != t.trial.eeg.samples() || t.ignored.frames() != t.trial.eeg.samples()) {
      throw InvalidArgument("trial '" + t.trial.trial_id + "': features not aligned to EEG");
    }
    out[i].trial_id = t.trial.trial_id;
    out[i].attended = trf::Moments::of(trf::lag_matrix(t.attended, lags), t.trial.eeg.data);
    out[i].ignored = trf::Moments::of(trf::lag_matrix(t.ignored, lags), t.trial.eeg.data);
  });
  return out;
}

FoldModels fold_models(std::span<const TrialMoments> trials, std::size_t held_out, const DecoderConfig& cfg) {
  if (held_out >= trials.size()) throw InvalidArgument("fold_models: held-out index out of range");
  std::vector<trf::Moments> att_train;
  trf::Moments att_sum, ign_sum;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (i == held_out) continue;
    att_train.push_back(trials[i].attended);
    att_sum += trials[i].attended;
    ign_sum += trials[i].ignored;
  }
  FoldModels fm;
  fm.lambda = att_train.size() >= 2 && cfg.lambda_grid.size() > 1
                  ? trf::cross_validate_moments(att_train, cfg.lambda_grid).best_lambda
                  : (cfg.lambda_grid.size() == 1 ? cfg.lambda_grid.front() : cfg.fallback_lambda);
  fm.w_att = trf::solve_ridge(att_sum, fm.lambda);
  fm.w_ign = trf::solve_ridge(ign_sum, fm.lambda);
  return fm;
}

SubjectResult evaluate_subject_moments(std::span<const TrialMoments> trials, const DecoderConfig& cfg,
                                       std::string feature_set_name) {
  if (trials.size() < 2) {
    throw InvalidArgument("evaluate_subject: need at least 2 labelled trials, got " + std::to_string(trials.size()));
  }
  SubjectResult result;
  result.feature_set = std::move(feature_set_name);
  result.decisions.resize(trials.size());
  parallel_for(trials.size(), cfg.jobs, [&](std::size_t k) {
    const FoldModels fm = fold_models(trials, k, cfg);
    AttentionDecision& d = result.decisions[k];
    d.trial_id = trials[k].trial_id;
    d.lambda = fm.lambda;
    d.bps_att_mean = trf::bps_from_moments(trials[k].attended, fm.w_att).mean;
    d.bps_ign_mean = trf::bps_from_moments(trials[k].ignored, fm.w_ign).mean;
    d.decision = decide(d.bps_att_mean, d.bps_ign_mean);
    d.correct = d.decision == Decision::kAttended;
  });
  std::size_t correct = 0;
  for (const auto& d : result.decisions) correct += d.correct ? 1 : 0;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(result.decisions.size());
  return result;
}

SubjectResult evaluate_subject(std::span<const LabeledTrial> trials, const DecoderConfig& cfg,
                               std::string feature_set_name) {
  for (const auto& t : trials) {
    if (t.trial.attended_stream_id.empty()) {
      throw InvalidArgument("evaluate_subject: trial '" + t.trial.trial_id + "' has no attended-stream label");
    }
  }
  const auto moments = trial_moments(trials, cfg.lags, cfg.jobs);
  return evaluate_subject_moments(moments, cfg, std::move(feature_set_name));
}

NormalizedBps normalized_bps(const trf::BpsResult& model, const trf::BpsResult& baseline) {
  if (model.per_channel.size() != baseline.per_channel.size()) {
    throw InvalidArgument("normalized_bps: channel sets differ");
  }
  NormalizedBps out;
  const Eigen::Index n = model.per_channel.size();
  out.per_channel = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  out.excluded.assign(static_cast<std::size_t>(n), false);
  double sum = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const bool flagged = static_cast<std::size_t>(c) < baseline.degenerate.size() &&
                         baseline.degenerate[static_cast<std::size_t>(c)];
    const double base = baseline.per_channel[c];
    if (flagged || base == 0.0) {
      out.excluded[static_cast<std::size_t>(c)] = true;
      continue;
    }
    out.per_channel[c] = model.per_channel[c] * model.per_channel[c] / (base * base);
    sum += out.per_channel[c];
    ++used;
  }
  if (used == 0) throw NumericError("normalized_bps: every baseline channel is degenerate");
  out.mean = sum / static_cast<double>(used);
  return out;
}

}  // namespace neurotrack::attention
