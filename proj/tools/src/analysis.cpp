#include "common.hpp"
#include "neurotrack_cli/commands.hpp"

#include <neurotrack/attention.hpp>
#include <neurotrack/error.hpp>
#include <neurotrack/log.hpp>
#include <neurotrack/parallel.hpp>
#include <neurotrack/stats.hpp>
#include <neurotrack/trf.hpp>

#include <sstream>

namespace neurotrack::cli {

namespace {

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += '\t';
    line += fields[i];
  }
  return line + '\n';
}

void require_cv_trials(const SubjectData& data, const char* command) {
  if (data.trials.size() < 2)
    throw InvalidArgument(std::string(command) + ": subject " + data.config->id + " has " +
                          std::to_string(data.trials.size()) + " trial(s); leave-one-trial-out needs at least 2");
}

std::vector<std::string> feature_names(const std::string& set, Eigen::Index dims) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < dims; ++i) names.push_back(set + "_" + std::to_string(i));
  return names;
}

}  // namespace

void cmd_fit(const SessionConfig& cfg, std::ostream& out) {
  std::string summary = join({"subject", "feature_set", "lambda", "trials", "mean_bps", "degenerate_channels"});
  const fs::path root = cfg.out_dir;

  for (const SubjectConfig& subject : cfg.subjects) {
    const SubjectData data = load_subject(cfg, subject);
    require_cv_trials(data, "fit");
    for (const std::string& set : cfg.all_feature_sets()) {
      const std::size_t n = data.trials.size();
      std::vector<FeatureMatrix> feats(n);
      for (std::size_t k = 0; k < n; ++k) {
        const EegTrial& t = data.trials[k];
        feats[k] = load_features(cfg, subject.id, t.trial_id, t.attended_stream_id, set, t.eeg.samples());
        if (feats[k].dims() != feats[0].dims())
          throw FormatError("subject " + subject.id + ": feature set '" + set + "' changes dimension across trials");
      }
      std::vector<trf::Moments> moments(n);
      parallel_for(n, cfg.jobs, [&](std::size_t k) {
        moments[k] = trf::Moments::of(trf::lag_matrix(feats[k], cfg.lags), data.trials[k].eeg.data);
      });
      const trf::CrossValidation cv = trf::cross_validate_moments(moments, cfg.lambda_grid, cfg.jobs);

      trf::Moments total;
      for (const auto& m : moments) total += m;
      trf::TrfModel model;
      model.weights = trf::solve_ridge(total, cv.best_lambda);
      model.lambda = cv.best_lambda;
      model.lags = cfg.lags;
      model.feature_names = feature_names(set, feats[0].dims());
      model.channel_names = data.trials[0].eeg.channel_names;
      trf::save_model(model, with_parent(root / "models" / subject.id / (set + ".ntf")));

      const Eigen::Index channels = data.trials[0].eeg.channels();
      Vector channel_sum = Vector::Zero(channels);
      std::vector<int> channel_degenerate(static_cast<std::size_t>(channels), 0);
      double mean_bps = 0.0;
      Eigen::Index degenerate = 0;
      std::string trials_tsv = join({"subject", "feature_set", "trial", "lambda", "bps_mean", "degenerate_channels"});
      for (std::size_t k = 0; k < n; ++k) {
        const trf::BpsResult& b = cv.per_trial[k];
        trials_tsv += join({subject.id, set, data.trials[k].trial_id, fmt_g(cv.best_lambda), fmt(b.mean),
                            std::to_string(b.degenerate_count())});
        channel_sum += b.per_channel;
        for (Eigen::Index c = 0; c < channels; ++c) channel_degenerate[static_cast<std::size_t>(c)] += b.degenerate[static_cast<std::size_t>(c)] ? 1 : 0;
        mean_bps += b.mean / static_cast<double>(n);
        degenerate += b.degenerate_count();
      }
      std::string channels_tsv = join({"channel", "mean_r", "degenerate_trials", "trials"});
      for (Eigen::Index c = 0; c < channels; ++c)
        channels_tsv += join({model.channel_names[static_cast<std::size_t>(c)], fmt_g(channel_sum[c] / static_cast<double>(n), 12),
                              std::to_string(channel_degenerate[static_cast<std::size_t>(c)]), std::to_string(n)});
      std::string path_tsv = join({"lambda", "mean_bps"});
      for (std::size_t i = 0; i < cv.lambdas.size(); ++i) path_tsv += join({fmt_g(cv.lambdas[i]), fmt(cv.mean_bps[i])});

      const fs::path dir = root / "fit" / subject.id;
      write_text(dir / (set + ".tsv"), trials_tsv);
      write_text(dir / (set + ".channels.tsv"), channels_tsv);
      write_text(dir / (set + ".lambda.tsv"), path_tsv);
      summary += join({subject.id, set, fmt_g(cv.best_lambda), std::to_string(n), fmt(mean_bps), std::to_string(degenerate)});
      log::info("[{}/{}] lambda* = {}, mean BPS {}", subject.id, set, cv.best_lambda, mean_bps);
      out << "fit " << subject.id << ' ' << set << ": lambda=" << fmt_g(cv.best_lambda) << " mean_bps=" << fmt(mean_bps) << '\n';
    }
  }
  write_text(root / "fit_summary.tsv", summary);
}

void cmd_decode(const SessionConfig& cfg, std::ostream& out) {
  std::string summary =
      join({"subject", "feature_set", "trials", "correct", "undecided", "accuracy", "chance_low", "chance_high"});
  const fs::path root = cfg.out_dir;

  for (const SubjectConfig& subject : cfg.subjects) {
    const SubjectData data = load_subject(cfg, subject);
    require_cv_trials(data, "decode");
    for (const std::string& set : cfg.all_feature_sets()) {
      const auto trials = labeled_trials(cfg, data, set);
      const auto moments = attention::trial_moments(trials, cfg.lags, cfg.jobs);

      attention::DecoderConfig dc;
      dc.lags = cfg.lags;
      dc.lambda_grid = cfg.lambda_grid;
      dc.fallback_lambda = cfg.fallback_lambda;
      dc.jobs = cfg.jobs;
      if (cfg.decode_lambda == "fit") {
        std::vector<trf::Moments> att;
        for (const auto& m : moments) att.push_back(m.attended);
        dc.lambda_grid = {trf::cross_validate_moments(att, cfg.lambda_grid, cfg.jobs).best_lambda};
      } else if (moments.size() < 3 && dc.lambda_grid.size() > 1) {
        log::warn("[{}/{}] too few trials for inner CV; decoding at fallback lambda {}", subject.id, set,
                  dc.fallback_lambda);
      }
      const attention::SubjectResult r = attention::evaluate_subject_moments(moments, dc, set);

      std::string table = join({"subject", "feature_set", "trial", "attended", "ignored", "bps_att", "bps_ign",
                                "decision", "correct", "lambda"});
      std::size_t correct = 0, undecided = 0;
      double att_sum = 0.0, ign_sum = 0.0;
      for (std::size_t k = 0; k < r.decisions.size(); ++k) {
        const auto& d = r.decisions[k];
        table += join({subject.id, set, d.trial_id, data.trials[k].attended_stream_id, data.ignored_streams[k],
                       fmt(d.bps_att_mean), fmt(d.bps_ign_mean), attention::to_string(d.decision),
                       d.correct ? "1" : "0", fmt_g(d.lambda)});
        correct += d.correct ? 1 : 0;
        undecided += d.decision == attention::Decision::kUndecided ? 1 : 0;
        att_sum += d.bps_att_mean;
        ign_sum += d.bps_ign_mean;
      }
      const auto n = static_cast<double>(r.decisions.size());
      table += join({subject.id, set, "summary", "-", "-", fmt(att_sum / n), fmt(ign_sum / n), "accuracy",
                     fmt(r.accuracy), "-"});
      write_text(root / "decode" / subject.id / (set + ".tsv"), table);

      const stats::Interval band = stats::chance_band_95(static_cast<long>(r.decisions.size()));
      summary += join({subject.id, set, std::to_string(r.decisions.size()), std::to_string(correct),
                       std::to_string(undecided), fmt(r.accuracy), fmt(band.low), fmt(band.high)});
      log::info("[{}/{}] accuracy {}", subject.id, set, r.accuracy);
      out << "decode " << subject.id << ' ' << set << ": accuracy=" << fmt(r.accuracy) << " (" << correct << '/'
          << r.decisions.size() << ")\n";
    }
  }
  write_text(root / "decode_summary.tsv", summary);
}

}  // namespace neurotrack::cli
