#include "neurotrack_cli/session.hpp"

#include "yaml_util.hpp"

#include <neurotrack/features.hpp>

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace neurotrack::cli {

namespace {

const std::regex kSafeName(R"([A-Za-z0-9_.\-]+)");

void check_name(const std::string& what, const std::string& name) {
  if (!std::regex_match(name, kSafeName))
    throw ConfigError(what + " '" + name + "' must match [A-Za-z0-9_.-]+");
}

template <typename T>
T require(const YAML::Node& node, const char* key, const std::string& where) {
  if (!node[key]) throw ConfigError(where + ": missing '" + key + "'");
  return get<T>(node, key, T{});
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

preprocess::FilterSpec filter_spec(const YAML::Node& node, preprocess::FilterSpec spec) {
  if (!node) return spec;
  spec.low_cut_hz = get(node, "low_hz", spec.low_cut_hz);
  spec.high_cut_hz = get(node, "high_hz", spec.high_cut_hz);
  spec.order = get(node, "order", spec.order);
  return spec;
}

void parse_subjects(const YAML::Node& list, SessionConfig& cfg) {
  if (!list || !list.IsSequence() || list.size() == 0) throw ConfigError("'subjects' must be a non-empty list");
  std::set<std::string> subject_ids;
  for (const YAML::Node& s : list) {
    SubjectConfig subject;
    subject.id = require<std::string>(s, "id", "subject");
    check_name("subject id", subject.id);
    if (!subject_ids.insert(subject.id).second) throw ConfigError("duplicate subject id '" + subject.id + "'");
    const std::string where = "subject " + subject.id;
    subject.labels = resolve(cfg.base_dir, require<std::string>(s, "labels", where));
    const YAML::Node trials = s["trials"];
    if (!trials || !trials.IsSequence() || trials.size() == 0) throw ConfigError(where + ": 'trials' must be a non-empty list");
    std::set<std::string> trial_ids;
    for (const YAML::Node& t : trials) {
      TrialConfig trial;
      trial.id = require<std::string>(t, "id", where + " trial");
      check_name("trial id", trial.id);
      if (!trial_ids.insert(trial.id).second) throw ConfigError(where + ": duplicate trial id '" + trial.id + "'");
      const std::string twhere = where + " trial " + trial.id;
      trial.eeg = resolve(cfg.base_dir, require<std::string>(t, "eeg", twhere));
      if (t["onset_s"]) trial.onset_s = get<double>(t, "onset_s", 0.0);
      const YAML::Node streams = t["streams"];
      if (!streams || !streams.IsMap() || streams.size() != 2)
        throw ConfigError(twhere + ": 'streams' must map exactly two stream ids to WAV files");
      for (const auto& kv : streams) {
        StreamRef ref{kv.first.as<std::string>(), resolve(cfg.base_dir, kv.second.as<std::string>())};
        check_name("stream id", ref.id);
        trial.streams.push_back(std::move(ref));
      }
      std::sort(trial.streams.begin(), trial.streams.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
      subject.trials.push_back(std::move(trial));
    }
    cfg.subjects.push_back(std::move(subject));
  }
}

void parse_features(const YAML::Node& node, SessionConfig& cfg) {
  if (!node) throw ConfigError("missing 'features' section");
  cfg.feature_sets = get<std::vector<std::string>>(node, "sets", {});
  for (const auto& name : cfg.feature_sets)
    if (!features::is_builtin_feature_set(name)) throw ConfigError("unknown feature set '" + name + "'");
  if (const YAML::Node ext = node["external"]) {
    for (const YAML::Node& e : ext) {
      ExternalFeature f;
      f.name = require<std::string>(e, "name", "external feature");
      check_name("feature set", f.name);
      if (features::is_builtin_feature_set(f.name)) throw ConfigError("external feature '" + f.name + "' shadows a built-in set");
      f.layer = get(e, "layer", -1);
      f.path_pattern = require<std::string>(e, "path", "external feature " + f.name);
      cfg.external.push_back(std::move(f));
    }
  }
  const auto all = cfg.all_feature_sets();
  if (all.empty()) throw ConfigError("no feature sets configured");
  if (std::set<std::string>(all.begin(), all.end()).size() != all.size()) throw ConfigError("duplicate feature set names");
  cfg.frames_per_trial = get<Eigen::Index>(node, "frames_per_trial", cfg.frames_per_trial);
  if (cfg.frames_per_trial <= 0) throw ConfigError("frames_per_trial must be positive");
  cfg.center = get(node, "center", cfg.center);
}

}  // namespace

std::vector<std::string> SessionConfig::all_feature_sets() const {
  std::vector<std::string> out = feature_sets;
  for (const auto& e : external) out.push_back(e.name);
  return out;
}

const ExternalFeature* SessionConfig::find_external(const std::string& name) const {
  for (const auto& e : external)
    if (e.name == name) return &e;
  return nullptr;
}

fs::path SessionConfig::feature_path(const std::string& subject, const std::string& trial, const std::string& stream,
                                     const std::string& set) const {
  if (const ExternalFeature* e = find_external(set)) {
    std::string p = e->path_pattern;
    const std::pair<const char*, const std::string*> keys[] = {
        {"{subject}", &subject}, {"{trial}", &trial}, {"{stream}", &stream}};
    for (const auto& [key, value] : keys) {
      for (auto pos = p.find(key); pos != std::string::npos; pos = p.find(key, pos + value->size()))
        p.replace(pos, std::char_traits<char>::length(key), *value);
    }
    return resolve(base_dir, p);
  }
  return out_dir / "features" / subject / (trial + "_" + stream + "_" + set + ".ntf");
}

SessionConfig load_session(const fs::path& path, const Overrides& overrides) {
  if (!fs::exists(path)) throw IoError("config file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError(path.string() + ": top level must be a mapping");

  SessionConfig cfg;
  cfg.base_dir = fs::absolute(path).parent_path();

  const YAML::Node session = root["session"];
  cfg.seed = get<std::uint64_t>(session, "seed", 0);
  cfg.out_dir = resolve(cfg.base_dir, get<std::string>(session, "out_dir", "results"));
  cfg.jobs = get(session, "jobs", 1);

  parse_subjects(root["subjects"], cfg);
  parse_features(root["features"], cfg);

  if (const YAML::Node eeg = root["eeg"]) {
    cfg.preprocess = get(eeg, "preprocess", cfg.preprocess);
    cfg.pipeline.reference_channels = get<std::vector<std::string>>(eeg, "reference", {});
    cfg.pipeline.first_band = filter_spec(eeg["first_band"], cfg.pipeline.first_band);
    cfg.pipeline.second_band = filter_spec(eeg["second_band"], cfg.pipeline.second_band);
    cfg.pipeline.target_rate = get(eeg, "target_rate", cfg.pipeline.target_rate);
    cfg.trial_duration_s = get(eeg, "trial_duration_s", cfg.trial_duration_s);
  }
  if (cfg.trial_duration_s <= 0.0) throw ConfigError("trial_duration_s must be positive");

  if (const YAML::Node t = root["trf"]) {
    cfg.lags.lag_min_ms = get(t, "lag_min_ms", cfg.lags.lag_min_ms);
    cfg.lags.lag_max_ms = get(t, "lag_max_ms", cfg.lags.lag_max_ms);
    cfg.lambda_grid = get(t, "lambda_grid", cfg.lambda_grid);
    cfg.fallback_lambda = get(t, "fallback_lambda", cfg.fallback_lambda);
    cfg.decode_lambda = get(t, "decode_lambda", cfg.decode_lambda);
  }
  try {
    cfg.lags.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("trf: ") + e.what());
  }
  if (cfg.lambda_grid.empty()) throw ConfigError("trf.lambda_grid must not be empty");
  for (double l : cfg.lambda_grid)
    if (!(l > 0.0)) throw ConfigError("trf.lambda_grid values must be positive");
  if (!(cfg.fallback_lambda > 0.0)) throw ConfigError("trf.fallback_lambda must be positive");
  if (cfg.decode_lambda != "nested" && cfg.decode_lambda != "fit")
    throw ConfigError("trf.decode_lambda must be 'nested' or 'fit'");

  if (const YAML::Node r = root["report"]) {
    cfg.baseline = get(r, "baseline", cfg.baseline);
    if (const YAML::Node groups = r["layer_groups"]) {
      cfg.layer_groups.clear();
      for (const YAML::Node& g : groups) {
        const auto range = g.as<std::vector<int>>();
        if (range.size() != 2 || range[0] > range[1]) throw ConfigError("report.layer_groups entries must be [first, last]");
        cfg.layer_groups.emplace_back(range[0], range[1]);
      }
      if (cfg.layer_groups.size() != 2) throw ConfigError("report.layer_groups must list exactly two ranges");
    }
  }

  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.jobs) cfg.jobs = *overrides.jobs;
  if (overrides.out_dir) cfg.out_dir = fs::absolute(*overrides.out_dir);
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
  return cfg;
}

std::map<std::string, std::string> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file: " + path.string());
  std::map<std::string, std::string> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string trial, stream;
    if (!std::getline(fields, trial, '\t') || !std::getline(fields, stream, '\t') || trial.empty() || stream.empty())
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'trial<TAB>attended_stream'");
    if (lineno == 1 && trial == "trial") continue;
    if (!labels.emplace(trial, stream).second)
      throw FormatError(path.string() + ": trial '" + trial + "' labelled twice");
  }
  return labels;
}

}  // namespace neurotrack::cli
