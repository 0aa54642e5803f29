#include "common.hpp"

#include <neurotrack/error.hpp>
#include <neurotrack/features.hpp>
#include <neurotrack/log.hpp>
#include <neurotrack/preprocess.hpp>
#include <neurotrack/signal_io.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace neurotrack::cli {

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string fmt_g(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

const fs::path& with_parent(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  return path;
}

void write_text(const fs::path& path, const std::string& text) {
  with_parent(path);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, '\t')) row.push_back(field);
    t.push_back(std::move(row));
  }
  if (t.empty()) throw FormatError(path.string() + ": empty table");
  for (const auto& row : t)
    if (row.size() != t.front().size()) throw FormatError(path.string() + ": ragged row");
  return t;
}

std::size_t column(const Table& t, const std::string& name, const fs::path& source) {
  for (std::size_t i = 0; i < t.front().size(); ++i)
    if (t.front()[i] == name) return i;
  throw FormatError(source.string() + ": no column '" + name + "'");
}

SubjectData load_subject(const SessionConfig& cfg, const SubjectConfig& subject) {
  const auto labels = read_labels(subject.labels);
  for (const auto& [trial, stream] : labels) {
    bool known = false;
    for (const auto& t : subject.trials) known = known || t.id == trial;
    if (!known) throw ConfigError(subject.labels.string() + ": label for unknown trial '" + trial + "'");
  }

  SubjectData data;
  data.config = &subject;
  for (const TrialConfig& t : subject.trials) {
    const auto it = labels.find(t.id);
    if (it == labels.end()) throw ConfigError("subject " + subject.id + ": no attended label for trial '" + t.id + "'");
    const std::string& attended = it->second;
    std::string ignored;
    for (const auto& s : t.streams)
      if (s.id != attended) ignored = s.id;
    if (ignored.empty() || (t.streams[0].id != attended && t.streams[1].id != attended))
      throw ConfigError("subject " + subject.id + " trial " + t.id + ": attended stream '" + attended +
                        "' is not one of its streams");

    EegRecording rec = io::read_eeg(t.eeg);
    if (cfg.preprocess) rec = preprocess::run_pipeline(rec, cfg.pipeline);
    if (rec.sample_rate != cfg.lags.frame_rate)
      throw ConfigError(t.eeg.string() + ": EEG rate " + fmt_g(rec.sample_rate) + " Hz does not match the lag frame rate " +
                        fmt_g(cfg.lags.frame_rate) + " Hz (enable eeg.preprocess to resample)");
    const auto needed = static_cast<Eigen::Index>(std::llround(cfg.trial_duration_s * rec.sample_rate));
    EegTrial trial;
    if (!t.onset_s && rec.samples() == needed) {
      trial.eeg = std::move(rec);
      trial.trial_id = t.id;
      trial.attended_stream_id = attended;
    } else {
      trial = preprocess::segment(rec, t.onset_s.value_or(0.0), cfg.trial_duration_s, t.id, attended);
    }
    log::debug("[{}/{}] eeg {}x{}", subject.id, t.id, trial.eeg.samples(), trial.eeg.channels());
    data.trials.push_back(std::move(trial));
    data.ignored_streams.push_back(ignored);
  }
  return data;
}

FeatureMatrix load_features(const SessionConfig& cfg, const std::string& subject, const std::string& trial,
                            const std::string& stream, const std::string& set, Eigen::Index frames) {
  const fs::path path = cfg.feature_path(subject, trial, stream, set);
  if (!fs::exists(path))
    throw IoError("missing features: " + path.string() + (cfg.find_external(set) ? "" : " (run 'extract' first)"));
  FeatureMatrix m = io::read_feature_matrix(path);
  if (m.frame_rate != cfg.lags.frame_rate)
    throw FormatError(path.string() + ": frame rate " + fmt_g(m.frame_rate) + " Hz, expected " + fmt_g(cfg.lags.frame_rate));
  m = features::align_frames(m, frames);
  if (cfg.center) m.data.rowwise() -= m.data.colwise().mean();
  return m;
}

std::vector<attention::LabeledTrial> labeled_trials(const SessionConfig& cfg, const SubjectData& data,
                                                    const std::string& set) {
  std::vector<attention::LabeledTrial> out;
  out.reserve(data.trials.size());
  for (std::size_t k = 0; k < data.trials.size(); ++k) {
    const EegTrial& trial = data.trials[k];
    const Eigen::Index frames = trial.eeg.samples();
    attention::LabeledTrial lt;
    lt.attended = load_features(cfg, data.config->id, trial.trial_id, trial.attended_stream_id, set, frames);
    lt.ignored = load_features(cfg, data.config->id, trial.trial_id, data.ignored_streams[k], set, frames);
    if (lt.attended.dims() != lt.ignored.dims())
      throw FormatError("subject " + data.config->id + " trial " + trial.trial_id + ": streams of '" + set +
                        "' differ in feature count");
    lt.trial = trial;
    out.push_back(std::move(lt));
  }
  for (const auto& lt : out)
    if (lt.attended.dims() != out.front().attended.dims())
      throw FormatError("subject " + data.config->id + ": feature set '" + set + "' changes dimension across trials");
  return out;
}

}  // namespace neurotrack::cli
