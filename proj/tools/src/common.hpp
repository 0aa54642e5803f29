#pragma once

#include "neurotrack_cli/session.hpp"

#include <neurotrack/attention.hpp>
#include <neurotrack/types.hpp>

#include <string>
#include <vector>

namespace neurotrack::cli {

std::string fmt(double v, int precision = 6);   // fixed
std::string fmt_g(double v, int precision = 10);  // shortest round-trippable enough for reports

// Creates parent directories; the file is replaced.
void write_text(const fs::path& path, const std::string& text);

// Returns `path` after creating its parent directory.
const fs::path& with_parent(const fs::path& path);

// Rows of tab-separated fields; the first row is the header.
using Table = std::vector<std::vector<std::string>>;
Table read_table(const fs::path& path);
std::size_t column(const Table& t, const std::string& name, const fs::path& source);

struct SubjectData {
  const SubjectConfig* config = nullptr;
  std::vector<EegTrial> trials;              // label attached
  std::vector<std::string> ignored_streams;  // per trial
};

SubjectData load_subject(const SessionConfig& cfg, const SubjectConfig& subject);

FeatureMatrix load_features(const SessionConfig& cfg, const std::string& subject, const std::string& trial,
                            const std::string& stream, const std::string& set, Eigen::Index frames);

std::vector<attention::LabeledTrial> labeled_trials(const SessionConfig& cfg, const SubjectData& data,
                                                    const std::string& set);

}  // namespace neurotrack::cli
