#pragma once

#include <neurotrack/error.hpp>
#include <neurotrack/preprocess.hpp>
#include <neurotrack/trf.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace neurotrack::cli {

namespace fs = std::filesystem;

// Malformed or inconsistent session file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct StreamRef {
  std::string id;
  fs::path wav;
};

struct TrialConfig {
  std::string id;
  fs::path eeg;
  std::optional<double> onset_s;
  std::vector<StreamRef> streams;  // exactly two: attended and ignored, per the label file
};

struct SubjectConfig {
  std::string id;
  fs::path labels;
  std::vector<TrialConfig> trials;
};

// Feature matrices produced outside this tool (e.g. DNN layer activations).
// The path pattern may contain {subject}, {trial} and {stream}.
struct ExternalFeature {
  std::string name;
  int layer = -1;  // -1: not a layer
  std::string path_pattern;
};

struct SessionConfig {
  fs::path base_dir;  // relative paths in the file resolve against this
  std::uint64_t seed = 0;
  fs::path out_dir;
  int jobs = 1;

  std::vector<SubjectConfig> subjects;

  std::vector<std::string> feature_sets;
  std::vector<ExternalFeature> external;
  Eigen::Index frames_per_trial = 5900;
  bool center = true;

  bool preprocess = false;
  preprocess::PipelineConfig pipeline;
  double trial_duration_s = 59.0;

  trf::LagConfig lags;
  std::vector<double> lambda_grid = trf::default_lambda_grid();
  double fallback_lambda = 1.0;
  std::string decode_lambda = "nested";  // "nested" or "fit"

  std::string baseline = "envelope-all";
  std::vector<std::pair<int, int>> layer_groups = {{1, 5}, {6, 12}};

  // Built-in sets followed by external ones.
  std::vector<std::string> all_feature_sets() const;
  const ExternalFeature* find_external(const std::string& name) const;
  fs::path feature_path(const std::string& subject, const std::string& trial, const std::string& stream,
                        const std::string& set) const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<fs::path> out_dir;
};

SessionConfig load_session(const fs::path& path, const Overrides& overrides = {});

// trial id -> attended stream id. Tab-separated, optional "trial" header, '#' comments.
std::map<std::string, std::string> read_labels(const fs::path& path);

}  // namespace neurotrack::cli
