#pragma once

#include "neurotrack/trf.hpp"

#include <span>
#include <string>
#include <vector>

namespace neurotrack::attention {

enum class Decision { kAttended, kIgnored, kUndecided };

const char* to_string(Decision d);

struct AttentionDecision {
  std::string trial_id;
  double bps_att_mean = 0.0;
  double bps_ign_mean = 0.0;
  Decision decision = Decision::kUndecided;
  bool correct = false;  // undecided counts as incorrect
  double lambda = 0.0;   // ridge parameter both models were fitted with
};

struct SubjectResult {
  std::string feature_set;
  std::vector<AttentionDecision> decisions;
  double accuracy = 0.0;
};

// Two competing encoding models: the stream whose model predicts the EEG
// with the higher channel-mean BPS is classified as attended. Exact
// equality is undecided.
AttentionDecision classify_trial(const EegTrial& eeg, const FeatureMatrix& feat_att, const FeatureMatrix& feat_ign,
                                 const trf::TrfModel& w_att, const trf::TrfModel& w_ign);

// Decision rule applied to two channel-mean scores.
Decision decide(double bps_att_mean, double bps_ign_mean);

// Features of both streams aligned to one trial's EEG. `attended` is the
// stream the label marks as attended.
struct LabeledTrial {
  FeatureMatrix attended;
  FeatureMatrix ignored;
  EegTrial trial;
};

struct DecoderConfig {
  trf::LagConfig lags;
  std::vector<double> lambda_grid = trf::default_lambda_grid();
  // Used when fewer than two training trials remain for the inner
  // lambda search, or when the grid holds a single value.
  double fallback_lambda = 1.0;
  int jobs = 1;
};

// Per-trial moments of both streams against the trial's EEG.
struct TrialMoments {
  std::string trial_id;
  trf::Moments attended;
  trf::Moments ignored;
};

std::vector<TrialMoments> trial_moments(std::span<const LabeledTrial> trials, const trf::LagConfig& lags, int jobs = 1);

// Leave-one-trial-out attention decoding. For each held-out trial, lambda is
// chosen by leave-one-out cross-validation of the attended-stream model on
// the remaining trials only; both models are then fitted on the remaining
// trials at that lambda and the held-out trial is classified.
SubjectResult evaluate_subject(std::span<const LabeledTrial> trials, const DecoderConfig& cfg,
                               std::string feature_set_name = {});
SubjectResult evaluate_subject_moments(std::span<const TrialMoments> trials, const DecoderConfig& cfg,
                                       std::string feature_set_name = {});

// Weights the held-out trial `k` would be classified with. Exposed so tests
// can check that they never depend on trial k.
struct FoldModels {
  double lambda = 0.0;
  Matrix w_att;
  Matrix w_ign;
};
FoldModels fold_models(std::span<const TrialMoments> trials, std::size_t held_out, const DecoderConfig& cfg);

struct NormalizedBps {
  Vector per_channel;          // NaN where excluded
  std::vector<bool> excluded;  // baseline channel degenerate
  double mean = 0.0;           // over included channels
};

// Per channel model_r^2 / baseline_r^2. Channels whose baseline score is
// degenerate (flagged, or exactly zero) are excluded from the mean.
NormalizedBps normalized_bps(const trf::BpsResult& model, const trf::BpsResult& baseline);

}  // namespace neurotrack::attention
