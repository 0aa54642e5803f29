#include "common.hpp"
#include "yaml_util.hpp"
#include "neurotrack_cli/commands.hpp"

#include <neurotrack/error.hpp>
#include <neurotrack/features.hpp>
#include <neurotrack/log.hpp>
#include <neurotrack/parallel.hpp>
#include <neurotrack/preprocess.hpp>
#include <neurotrack/signal_io.hpp>
#include <neurotrack/synthesis.hpp>

#include <yaml-cpp/yaml.h>

#include <array>
#include <cmath>
#include <sstream>

namespace neurotrack::cli {

namespace {

constexpr std::array<const char*, 2> kStreams = {"A", "B"};

// Stable stream-purpose tags for derive_seed.
enum SeedTag : std::uint64_t { kAudio = 1, kKernelAtt, kKernelIgn, kLabel, kNoise, kLayer };

std::string padded(const std::string& prefix, int i, int count) {
  const int width = std::max(2, static_cast<int>(std::to_string(count).size()));
  std::string n = std::to_string(i);
  return prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(n.size()))), '0') + n;
}

Vector standardized(const Vector& v) {
  const Vector d = v.array() - v.mean();
  const double sd = std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
  return sd > 0.0 ? Vector(d / sd) : d;
}

// Surrogate for a DNN layer: the stimulus envelope mixed with stimulus-specific
// noise, cleaner in early layers so the layer-group contrast has a known sign.
FeatureMatrix layer_features(const FeatureMatrix& drive, int layer, int dims, double duration_s, std::uint64_t seed) {
  const double q = std::clamp(0.9 - 0.06 * (layer - 1), 0.1, 0.95);
  const FeatureMatrix noise = synthesis::gen_features(synthesis::SurrogateKind::kAr1Envelope, duration_s, dims, seed);
  const Vector base = standardized(drive.data.col(0));
  FeatureMatrix f;
  f.frame_rate = drive.frame_rate;
  f.data.resize(drive.frames(), dims);
  for (int d = 0; d < dims; ++d) {
    f.data.col(d) = q * base + std::sqrt(1.0 - q * q) * standardized(noise.data.col(d).head(drive.frames()));
    f.names.push_back("L" + std::to_string(layer) + "_" + std::to_string(d));
  }
  return f;
}

std::string num(double v) { return fmt_g(v, 15); }

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int a = std::stoi(item.substr(0, dash)), b = std::stoi(item.substr(dash + 1));
        if (a > b) throw InvalidArgument("descending range");
        for (int i = a; i <= b; ++i) out.push_back(i);
      }
    } catch (const std::exception&) {
      throw InvalidArgument("bad integer list '" + text + "'");
    }
  }
  return out;
}

SimulateOptions load_simulate_options(const fs::path& path, SimulateOptions o) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw IoError("config file not found: " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const YAML::Node s = root["simulation"];
  if (!s) return o;
  {
    const fs::path base = fs::absolute(path).parent_path();
    if (s["out_dir"]) {
      const fs::path p = get<std::string>(s, "out_dir", "");
      o.out_dir = p.is_absolute() ? p : base / p;
    }
    o.seed = get(s, "seed", o.seed);
    o.subjects = get(s, "subjects", o.subjects);
    o.trials = get(s, "trials", o.trials);
    o.duration_s = get(s, "duration_s", o.duration_s);
    o.channels = get(s, "channels", o.channels);
    o.snr_db = get(s, "snr_db", o.snr_db);
    o.gain_att = get(s, "gain_att", o.gain_att);
    o.gain_ign = get(s, "gain_ign", o.gain_ign);
    o.kernel_offset_ms = get(s, "kernel_offset_ms", o.kernel_offset_ms);
    o.driving_set = get(s, "driving_set", o.driving_set);
    o.feature_sets = get(s, "feature_sets", o.feature_sets);
    o.layers = get(s, "layers", o.layers);
    o.layer_dims = get(s, "layer_dims", o.layer_dims);
    o.jobs = get(s, "jobs", o.jobs);
  }
  return o;
}

void cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  if (o.subjects < 1 || o.trials < 1 || o.channels < 1 || !(o.duration_s > 0.0) || o.layer_dims < 1 || o.jobs < 1)
    throw ConfigError("simulate: subjects, trials, channels, layer_dims and jobs must be >= 1 and duration > 0");
  if (std::isnan(o.snr_db)) throw ConfigError("simulate: snr_db must be a number");
  for (int l : o.layers)
    if (l < 0) throw ConfigError("simulate: layer ids must be >= 0");
  if (!features::is_builtin_feature_set(o.driving_set)) throw ConfigError("simulate: unknown driving set '" + o.driving_set + "'");
  for (const auto& s : o.feature_sets)
    if (!features::is_builtin_feature_set(s)) throw ConfigError("simulate: unknown feature set '" + s + "'");
  if (o.feature_sets.empty() && o.layers.empty()) throw ConfigError("simulate: no feature sets requested");

  const fs::path dir = o.out_dir;
  const trf::LagConfig lags;
  const auto frames = static_cast<Eigen::Index>(std::llround(o.duration_s * lags.frame_rate));
  const features::FeatureSetSpec driving = features::feature_set(o.driving_set);
  const auto n_trials = static_cast<std::size_t>(o.trials);

  std::vector<std::string> trial_ids;
  for (int i = 1; i <= o.trials; ++i) trial_ids.push_back(padded("trial", i, o.trials));

  // Stimuli are shared by all subjects, as in a listening experiment.
  std::vector<std::array<FeatureMatrix, 2>> drive(n_trials);
  parallel_for(2 * n_trials, o.jobs, [&](std::size_t job) {
    const std::size_t i = job / 2, s = job % 2;
    const std::string stem = trial_ids[i] + "_" + kStreams[s];
    const fs::path wav = dir / "stimuli" / (stem + ".wav");
    io::write_wav(synthesis::speech_like_audio(o.duration_s, synthesis::derive_seed(o.seed, kAudio, job)), with_parent(wav));
    // Drive the forward model with what `extract` will see: the quantized file.
    drive[i][s] = features::extract(io::to_mono_resampled(io::read_wav(wav), 16000.0), driving, frames);
    for (int layer : o.layers) {
      const FeatureMatrix f = layer_features(drive[i][s], layer, o.layer_dims, o.duration_s,
                                             synthesis::derive_seed(o.seed, kLayer, job * 1000 + static_cast<std::uint64_t>(layer)));
      io::write_feature_matrix(f, with_parent(dir / "layers" / (stem + "_L" + std::to_string(layer) + ".ntf")));
    }
    log::info("[{}] stimulus written", stem);
  });

  std::string manifest = "subject\ttrial\tattended\tignored\tmeasured_snr_db\n";
  std::vector<std::string> subject_ids;
  for (int j = 1; j <= o.subjects; ++j) {
    const std::string subject = padded("S", j, o.subjects);
    subject_ids.push_back(subject);
    const auto sj = static_cast<std::uint64_t>(j);
    synthesis::GroundTruth gt;
    gt.lags = lags;
    gt.gain_att = o.gain_att;
    gt.gain_ign = o.gain_ign;
    gt.noise_snr_db = o.snr_db;
    gt.trf_att = synthesis::make_kernel(lags, drive[0][0].dims(), o.channels, synthesis::derive_seed(o.seed, kKernelAtt, sj), o.kernel_offset_ms);
    gt.trf_ign = synthesis::make_kernel(lags, drive[0][0].dims(), o.channels, synthesis::derive_seed(o.seed, kKernelIgn, sj), o.kernel_offset_ms);
    io::write_ntf(gt.trf_att, lags.frame_rate, with_parent(dir / "truth" / (subject + "_att.ntf")));
    io::write_ntf(gt.trf_ign, lags.frame_rate, dir / "truth" / (subject + "_ign.ntf"));

    std::vector<std::size_t> attended(n_trials);
    std::vector<double> snr(n_trials);
    parallel_for(n_trials, o.jobs, [&](std::size_t i) {
      const std::uint64_t key = sj * 1000000 + i;
      attended[i] = synthesis::derive_seed(o.seed, kLabel, key) & 1u;
      synthesis::GroundTruth trial_gt = gt;
      trial_gt.seed = synthesis::derive_seed(o.seed, kNoise, key);
      const synthesis::SimulatedTrial sim = synthesis::simulate_trial(trial_gt, drive[i][attended[i]], drive[i][1 - attended[i]],
                                                                      trial_ids[i], kStreams[attended[i]]);
      io::write_eeg(preprocess::zscore(sim.trial.eeg), with_parent(dir / "eeg" / subject / (trial_ids[i] + ".ntf")));
      snr[i] = sim.measured_snr_db();
      log::info("[{}/{}] eeg written, SNR {:.2f} dB", subject, trial_ids[i], snr[i]);
    });

    std::string labels = "trial\tattended\n";
    for (std::size_t i = 0; i < n_trials; ++i) {
      labels += trial_ids[i] + "\t" + kStreams[attended[i]] + "\n";
      manifest += subject + "\t" + trial_ids[i] + "\t" + kStreams[attended[i]] + "\t" + kStreams[1 - attended[i]] + "\t" +
                  fmt(snr[i], 4) + "\n";
    }
    write_text(dir / "labels" / (subject + ".tsv"), labels);
  }
  write_text(dir / "simulation.tsv", manifest);

  YAML::Emitter y;
  y << YAML::BeginMap;
  y << YAML::Key << "session" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "seed" << YAML::Value << o.seed;
  y << YAML::Key << "out_dir" << YAML::Value << "results";
  y << YAML::Key << "jobs" << YAML::Value << 1;
  y << YAML::EndMap;
  y << YAML::Key << "subjects" << YAML::Value << YAML::BeginSeq;
  for (const auto& subject : subject_ids) {
    y << YAML::BeginMap;
    y << YAML::Key << "id" << YAML::Value << subject;
    y << YAML::Key << "labels" << YAML::Value << ("labels/" + subject + ".tsv");
    y << YAML::Key << "trials" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : trial_ids) {
      y << YAML::BeginMap;
      y << YAML::Key << "id" << YAML::Value << t;
      y << YAML::Key << "eeg" << YAML::Value << ("eeg/" + subject + "/" + t + ".ntf");
      y << YAML::Key << "streams" << YAML::Value << YAML::BeginMap;
      for (const char* s : kStreams) y << YAML::Key << s << YAML::Value << ("stimuli/" + t + "_" + s + ".wav");
      y << YAML::EndMap << YAML::EndMap;
    }
    y << YAML::EndSeq << YAML::EndMap;
  }
  y << YAML::EndSeq;

  y << YAML::Key << "features" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "sets" << YAML::Value << YAML::Flow << o.feature_sets;
  if (!o.layers.empty()) {
    y << YAML::Key << "external" << YAML::Value << YAML::BeginSeq;
    for (int l : o.layers) {
      const std::string name = "L" + std::to_string(l);
      y << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << name << YAML::Key << "layer"
        << YAML::Value << l << YAML::Key << "path" << YAML::Value << ("layers/{trial}_{stream}_" + name + ".ntf")
        << YAML::EndMap;
    }
    y << YAML::EndSeq;
  }
  y << YAML::Key << "frames_per_trial" << YAML::Value << frames;
  y << YAML::Key << "center" << YAML::Value << true;
  y << YAML::EndMap;

  y << YAML::Key << "eeg" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "preprocess" << YAML::Value << false;
  y << YAML::Key << "trial_duration_s" << YAML::Value << num(o.duration_s);
  y << YAML::EndMap;

  std::vector<std::string> grid;
  for (double l : trf::default_lambda_grid()) grid.push_back(num(l));
  y << YAML::Key << "trf" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "lag_min_ms" << YAML::Value << num(lags.lag_min_ms);
  y << YAML::Key << "lag_max_ms" << YAML::Value << num(lags.lag_max_ms);
  y << YAML::Key << "lambda_grid" << YAML::Value << YAML::Flow << grid;
  y << YAML::Key << "fallback_lambda" << YAML::Value << "1";
  y << YAML::Key << "decode_lambda" << YAML::Value << "nested";
  y << YAML::EndMap;

  const bool has_all = std::find(o.feature_sets.begin(), o.feature_sets.end(), "envelope-all") != o.feature_sets.end();
  y << YAML::Key << "report" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "baseline" << YAML::Value
    << (has_all || o.feature_sets.empty() ? (o.feature_sets.empty() ? "L" + std::to_string(o.layers.front()) : "envelope-all")
                                          : o.feature_sets.front());
  y << YAML::Key << "layer_groups" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  y << YAML::Flow << std::vector<int>{1, 5} << YAML::Flow << std::vector<int>{6, 12};
  y << YAML::EndSeq;
  y << YAML::EndMap;
  y << YAML::EndMap;
  write_text(dir / "session.yaml", std::string(y.c_str()) + "\n");

  out << "simulate: " << o.subjects << " subject(s) x " << o.trials << " trial(s), " << frames << "x" << o.channels
      << " EEG each -> " << (dir / "session.yaml").string() << '\n';
}

}  // namespace neurotrack::cli
