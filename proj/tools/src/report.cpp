#include "common.hpp"
#include "neurotrack_cli/commands.hpp"

#include <neurotrack/attention.hpp>
#include <neurotrack/error.hpp>
#include <neurotrack/stats.hpp>

#include <algorithm>
#include <map>
#include <optional>

namespace neurotrack::cli {

namespace {

using Key = std::pair<std::string, std::string>;  // subject, feature set

std::string row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i > 0 ? "\t" : "") + fields[i];
  return line + '\n';
}

double to_double(const std::string& s, const fs::path& source) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError(source.string() + ": not a number: '" + s + "'");
}

trf::BpsResult channel_scores(const fs::path& path) {
  const Table t = read_table(path);
  const std::size_t r_col = column(t, "mean_r", path), deg_col = column(t, "degenerate_trials", path),
                    n_col = column(t, "trials", path);
  trf::BpsResult b;
  b.per_channel.resize(static_cast<Eigen::Index>(t.size() - 1));
  for (std::size_t i = 1; i < t.size(); ++i) {
    b.per_channel[static_cast<Eigen::Index>(i - 1)] = to_double(t[i][r_col], path);
    b.degenerate.push_back(t[i][deg_col] == t[i][n_col]);
  }
  b.mean = b.per_channel.mean();
  return b;
}

std::map<Key, double> keyed_column(const fs::path& path, const std::string& name) {
  const Table t = read_table(path);
  const std::size_t s = column(t, "subject", path), f = column(t, "feature_set", path), v = column(t, name, path);
  std::map<Key, double> out;
  for (std::size_t i = 1; i < t.size(); ++i) out[{t[i][s], t[i][f]}] = to_double(t[i][v], path);
  return out;
}

double lookup(const std::map<Key, double>& m, const Key& k, const fs::path& source) {
  const auto it = m.find(k);
  if (it == m.end()) throw FormatError(source.string() + ": no row for subject " + k.first + ", set " + k.second + " (rerun fit/decode)");
  return it->second;
}

void paired_rows(std::string& out, const std::string& measure, const std::vector<std::string>& sets,
                 const std::string& baseline, const std::vector<std::string>& subjects,
                 const std::map<Key, double>& values, const fs::path& source) {
  std::vector<double> base;
  for (const auto& s : subjects) base.push_back(lookup(values, {s, baseline}, source));
  for (const auto& set : sets) {
    if (set == baseline) continue;
    std::vector<double> v;
    for (const auto& s : subjects) v.push_back(lookup(values, {s, set}, source));
    std::string t = "NA", p = "NA";
    try {
      const stats::TTestResult r = stats::paired_ttest(v, base);
      t = fmt(r.t, 4);
      p = fmt_g(r.p, 6);
    } catch (const NumericError&) {
      // identical per-subject values: no test possible
    }
    out += row({measure, set, baseline, std::to_string(subjects.size()), t, std::to_string(subjects.size() - 1), p});
  }
}

}  // namespace

void cmd_report(const SessionConfig& cfg, std::ostream& out) {
  const std::vector<std::string> sets = cfg.all_feature_sets();
  if (std::find(sets.begin(), sets.end(), cfg.baseline) == sets.end())
    throw ConfigError("report.baseline '" + cfg.baseline + "' is not a configured feature set");

  std::vector<std::string> subjects;
  for (const auto& s : cfg.subjects) subjects.push_back(s.id);

  const fs::path fit_summary = cfg.out_dir / "fit_summary.tsv";
  if (!fs::exists(fit_summary)) throw IoError("missing " + fit_summary.string() + " (run 'fit' first)");
  const std::map<Key, double> mean_bps = keyed_column(fit_summary, "mean_bps");

  std::map<Key, double> normalized;
  std::string text = "# normalized_bps\n" + row({"subject", "feature_set", "mean_bps", "normalized_bps", "excluded_channels"});
  for (const auto& subject : subjects) {
    const fs::path dir = cfg.out_dir / "fit" / subject;
    const trf::BpsResult base = channel_scores(dir / (cfg.baseline + ".channels.tsv"));
    for (const auto& set : sets) {
      const trf::BpsResult model = channel_scores(dir / (set + ".channels.tsv"));
      if (model.per_channel.size() != base.per_channel.size())
        throw FormatError("subject " + subject + ": channel count differs between '" + set + "' and the baseline");
      const attention::NormalizedBps n = attention::normalized_bps(model, base);
      normalized[{subject, set}] = n.mean;
      const auto excluded = std::count(n.excluded.begin(), n.excluded.end(), true);
      text += row({subject, set, fmt(lookup(mean_bps, {subject, set}, fit_summary)), fmt(n.mean), std::to_string(excluded)});
    }
  }

  text += "\n# feature_set_means\n" + row({"feature_set", "layer", "subjects", "mean_bps", "mean_normalized_bps"});
  for (const auto& set : sets) {
    double b = 0.0, nb = 0.0;
    for (const auto& s : subjects) {
      b += lookup(mean_bps, {s, set}, fit_summary);
      nb += normalized.at({s, set});
    }
    const ExternalFeature* ext = cfg.find_external(set);
    const auto count = static_cast<double>(subjects.size());
    text += row({set, ext && ext->layer >= 0 ? std::to_string(ext->layer) : "-", std::to_string(subjects.size()),
                 fmt(b / count), fmt(nb / count)});
  }

  const fs::path decode_summary = cfg.out_dir / "decode_summary.tsv";
  std::optional<std::map<Key, double>> accuracy;
  if (fs::exists(decode_summary)) {
    accuracy = keyed_column(decode_summary, "accuracy");
    text += "\n# attention_accuracy\n" + row({"feature_set", "subjects", "mean_accuracy"});
    for (const auto& set : sets) {
      double a = 0.0;
      for (const auto& s : subjects) a += lookup(*accuracy, {s, set}, decode_summary);
      text += row({set, std::to_string(subjects.size()), fmt(a / static_cast<double>(subjects.size()))});
    }
  }

  text += "\n# paired_ttest\n";
  if (subjects.size() < 2) {
    text += "# skipped: needs at least 2 subjects\n";
  } else {
    text += row({"measure", "feature_set", "baseline", "n", "t", "df", "p"});
    paired_rows(text, "bps", sets, cfg.baseline, subjects, mean_bps, fit_summary);
    if (accuracy) paired_rows(text, "accuracy", sets, cfg.baseline, subjects, *accuracy, decode_summary);
  }

  text += "\n# layer_groups\n";
  const auto& [g1, g2] = std::pair{cfg.layer_groups[0], cfg.layer_groups[1]};
  std::vector<double> group1, group2;
  for (const auto& e : cfg.external) {
    if (e.layer < 0) continue;
    for (const auto& s : subjects) {
      if (e.layer >= g1.first && e.layer <= g1.second) group1.push_back(normalized.at({s, e.name}));
      if (e.layer >= g2.first && e.layer <= g2.second) group2.push_back(normalized.at({s, e.name}));
    }
  }
  const std::string g1_name = "L" + std::to_string(g1.first) + "-" + std::to_string(g1.second);
  const std::string g2_name = "L" + std::to_string(g2.first) + "-" + std::to_string(g2.second);
  if (group1.size() < 2 || group2.size() < 2) {
    text += "# skipped: each layer group needs at least 2 values (have " + std::to_string(group1.size()) + " and " +
            std::to_string(group2.size()) + ")\n";
  } else {
    text += row({"measure", "group1", "group2", "n1", "n2", "mean1", "mean2", "F", "df_between", "df_within", "p"});
    std::string f = "NA", p = "NA";
    try {
      const stats::AnovaResult a = stats::two_group_test(group1, group2);
      f = fmt(a.f, 4);
      p = fmt_g(a.p, 6);
    } catch (const NumericError&) {
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    text += row({"normalized_bps", g1_name, g2_name, std::to_string(group1.size()), std::to_string(group2.size()),
                 fmt(mean(group1)), fmt(mean(group2)), f, "1", std::to_string(group1.size() + group2.size() - 2), p});
  }

  write_text(cfg.out_dir / "report.tsv", text);
  out << "report: " << (cfg.out_dir / "report.tsv").string() << '\n';
}

}  // namespace neurotrack::cli
