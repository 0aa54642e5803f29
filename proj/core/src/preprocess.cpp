#include "neurotrack/preprocess.hpp"

#include "neurotrack/dsp.hpp"
#include "neurotrack/error.hpp"
#include "neurotrack/log.hpp"

#include <cmath>
#include <string>

namespace neurotrack::preprocess {

EegRecording rereference(const EegRecording& rec, const std::vector<std::string>& ref_channels) {
  rec.validate();
  if (ref_channels.empty()) throw InvalidArgument("rereference: no reference channels given");
  Vector ref = Vector::Zero(rec.samples());
  for (const auto& name : ref_channels) ref += rec.data.col(rec.channel_index(name));
  ref /= static_cast<double>(ref_channels.size());

  EegRecording out = rec;
  out.data.colwise() -= ref;
  return out;
}

EegRecording bandpass(const EegRecording& rec, const FilterSpec& spec) {
  rec.validate();
  const auto sos = dsp::butterworth_bandpass(spec.order, spec.low_cut_hz, spec.high_cut_hz, rec.sample_rate);
  EegRecording out = rec;
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    out.data.col(c) = dsp::sos_filtfilt(sos, rec.data.col(c));
  }
  return out;
}

EegRecording resample_eeg(const EegRecording& rec, double target_rate) {
  if (!(target_rate > 0.0)) throw InvalidArgument("resample_eeg: target rate must be positive");
  rec.validate();
  if (target_rate == rec.sample_rate) return rec;
  const auto [up, down] = dsp::rational_factors(rec.sample_rate, target_rate);
  EegRecording out;
  out.sample_rate = target_rate;
  out.channel_names = rec.channel_names;
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    Vector col = dsp::resample_poly(rec.data.col(c), up, down);
    if (c == 0) out.data.resize(col.size(), rec.channels());
    out.data.col(c) = col;
  }
  return out;
}

EegRecording zscore(const EegRecording& rec) {
  rec.validate();
  if (rec.samples() < 1) throw InvalidArgument("zscore: empty recording");
  EegRecording out = rec;
  const double n = static_cast<double>(rec.samples());
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    auto col = out.data.col(c);
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / n;
    const double scale = col.cwiseAbs().maxCoeff();
    if (!(var > 0.0) || std::sqrt(var) <= 1e-12 * std::max(scale, std::abs(mean))) {
      throw NumericError("zscore: channel '" + rec.channel_names[static_cast<std::size_t>(c)] +
                         "' is constant (degenerate channel)");
    }
    col /= std::sqrt(var);
  }
  return out;
}

EegTrial segment(const EegRecording& rec, double onset_s, double duration_s, std::string trial_id,
                 std::string attended_stream_id) {
  rec.validate();
  if (!(duration_s > 0.0) || !(onset_s >= 0.0)) {
    throw InvalidArgument("segment: onset must be >= 0 and duration > 0");
  }
  const auto start = static_cast<Eigen::Index>(std::llround(onset_s * rec.sample_rate));
  const auto length = static_cast<Eigen::Index>(std::llround(duration_s * rec.sample_rate));
  if (length < 1 || start + length > rec.samples()) {
    throw InvalidArgument("segment: window [" + std::to_string(start) + ", " + std::to_string(start + length) +
                          ") outside record of " + std::to_string(rec.samples()) + " samples");
  }
  EegTrial trial;
  trial.eeg.sample_rate = rec.sample_rate;
  trial.eeg.channel_names = rec.channel_names;
  trial.eeg.data = rec.data.middleRows(start, length);
  trial.trial_id = std::move(trial_id);
  trial.attended_stream_id = std::move(attended_stream_id);
  return trial;
}

EegRecording run_pipeline(const EegRecording& rec, const PipelineConfig& cfg) {
  EegRecording out = cfg.reference_channels.empty() ? rec : rereference(rec, cfg.reference_channels);
  out = bandpass(out, cfg.first_band);
  out = resample_eeg(out, cfg.target_rate);
  log::info("preprocess: ICA artifact removal is not performed; continuing without it");
  out = bandpass(out, cfg.second_band);
  return zscore(out);
}

}  // namespace neurotrack::preprocess
