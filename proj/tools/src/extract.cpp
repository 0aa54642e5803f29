#include "common.hpp"
#include "neurotrack_cli/commands.hpp"

#include <neurotrack/error.hpp>
#include <neurotrack/features.hpp>
#include <neurotrack/log.hpp>
#include <neurotrack/parallel.hpp>
#include <neurotrack/signal_io.hpp>

#include <map>
#include <mutex>
#include <utility>

namespace neurotrack::cli {

namespace {

constexpr double kAudioRate = 16000.0;

struct Job {
  std::string subject;
  std::string trial;
  std::string stream;
  fs::path wav;
};

// Extracts every requested set from one audio file, sharing member features between sets.
std::vector<FeatureMatrix> extract_sets(const AudioSignal& audio, const std::vector<features::FeatureSetSpec>& specs,
                                        Eigen::Index frames) {
  std::map<std::pair<int, double>, FeatureMatrix> cache;
  std::vector<FeatureMatrix> out;
  for (const auto& spec : specs) {
    std::vector<FeatureMatrix> parts;
    for (const auto& m : spec.members) {
      const std::pair<int, double> key{static_cast<int>(m.kind), m.compression};
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, features::extract(audio, {spec.name, {m}}, frames)).first;
      parts.push_back(it->second);
    }
    out.push_back(features::assemble(spec, parts));
  }
  return out;
}

}  // namespace

void cmd_extract(const SessionConfig& cfg, std::ostream& out) {
  std::vector<features::FeatureSetSpec> specs;
  for (const auto& name : cfg.feature_sets) specs.push_back(features::feature_set(name));

  std::vector<Job> jobs;
  for (const auto& s : cfg.subjects)
    for (const auto& t : s.trials)
      for (const auto& st : t.streams) jobs.push_back({s.id, t.id, st.id, st.wav});

  std::vector<std::string> failures(jobs.size());
  std::mutex write_mutex;
  if (!specs.empty()) {
    parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
      const Job& job = jobs[i];
      try {
        const AudioSignal audio = io::to_mono_resampled(io::read_wav(job.wav), kAudioRate);
        const std::vector<FeatureMatrix> sets = extract_sets(audio, specs, cfg.frames_per_trial);
        std::lock_guard lock(write_mutex);
        for (std::size_t k = 0; k < specs.size(); ++k)
          io::write_feature_matrix(sets[k], with_parent(cfg.feature_path(job.subject, job.trial, job.stream, specs[k].name)));
        log::info("[{}/{}/{}] extracted {} set(s)", job.subject, job.trial, job.stream, specs.size());
      } catch (const Error& e) {
        const std::string what = e.what();
        failures[i] = what.find(job.wav.string()) == std::string::npos ? job.wav.string() + ": " + what : what;
      }
    });
  }

  std::size_t failed = 0;
  std::string first;
  for (const auto& f : failures) {
    if (f.empty()) continue;
    log::logger().error("{}", f);
    if (failed++ == 0) first = f;
  }
  if (failed > 0)
    throw IoError("extract: " + std::to_string(failed) + " of " + std::to_string(jobs.size()) +
                  " stream(s) failed; first: " + first);

  // External sets are produced elsewhere; only check they are present.
  std::size_t external_missing = 0;
  for (const auto& e : cfg.external)
    for (const auto& job : jobs)
      if (!fs::exists(cfg.feature_path(job.subject, job.trial, job.stream, e.name))) {
        log::warn("external feature file missing: {}", cfg.feature_path(job.subject, job.trial, job.stream, e.name).string());
        ++external_missing;
      }

  out << "extract: wrote " << jobs.size() * specs.size() << " feature file(s) for " << jobs.size() << " stream(s)";
  if (external_missing > 0) out << "; " << external_missing << " external file(s) missing";
  out << '\n';
}

}  // namespace neurotrack::cli
