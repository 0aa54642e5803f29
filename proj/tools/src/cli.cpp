#include "neurotrack_cli/cli.hpp"

#include "neurotrack_cli/commands.hpp"

#include <neurotrack/error.hpp>
#include <neurotrack/log.hpp>

#include <CLI11.hpp>
#include <yaml-cpp/exceptions.h>

#include <functional>
#include <limits>
#include <optional>

namespace neurotrack::cli {

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
};

void add_common(CLI::App& cmd, CommonFlags& f, bool config_required) {
  auto* c = cmd.add_option("--config", f.config, "Session YAML file");
  if (config_required) c->required();
  cmd.add_option("--seed", f.seed, "Override the session seed");
  cmd.add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--out", f.out, "Override the output directory");
}

SessionConfig session(const CommonFlags& f) {
  Overrides o;
  o.seed = f.seed;
  o.jobs = f.jobs;
  if (f.out) o.out_dir = fs::path(*f.out);
  return load_session(f.config, o);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  log::configure_from_env();

  CLI::App app{"neurotrack: speech-tracking TRF pipeline for EEG", "neurotrack"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "neurotrack 0.1.0");

  CommonFlags common;
  std::function<void()> action;
  const std::vector<std::pair<const char*, void (*)(const SessionConfig&, std::ostream&)>> session_commands = {
      {"extract", cmd_extract}, {"fit", cmd_fit}, {"decode", cmd_decode}, {"report", cmd_report}};
  const std::vector<const char*> descriptions = {
      "Extract stimulus feature sets from the session's WAV files",
      "Fit TRF encoding models with leave-one-trial-out lambda selection",
      "Classify attended stream per trial with paired TRF models",
      "Summarize normalized BPS, paired t-tests and layer-group ANOVA"};
  for (std::size_t i = 0; i < session_commands.size(); ++i) {
    const auto [name, fn] = session_commands[i];
    CLI::App* cmd = app.add_subcommand(name, descriptions[i]);
    add_common(*cmd, common, true);
    cmd->callback([&, fn = fn] { action = [&, fn] { fn(session(common), out); }; });
  }

  SimulateOptions sim;
  std::string layers;
  CLI::App* simulate = app.add_subcommand("simulate", "Write a synthetic session from the forward-model simulator");
  add_common(*simulate, common, false);
  simulate->add_option("--subjects", sim.subjects)->check(CLI::PositiveNumber);
  simulate->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);
  simulate->add_option("--duration", sim.duration_s, "Trial length in seconds");
  simulate->add_option("--channels", sim.channels)->check(CLI::PositiveNumber);
  simulate->add_option("--snr-db", sim.snr_db, "Per-channel SNR; 'inf' disables noise");
  simulate->add_option("--gain-att", sim.gain_att);
  simulate->add_option("--gain-ign", sim.gain_ign);
  simulate->add_option("--kernel-offset-ms", sim.kernel_offset_ms, "Shift true kernels to test lag mismatch");
  simulate->add_option("--sets", sim.feature_sets, "Feature sets listed in the generated session")->delimiter(',');
  simulate->add_option("--layers", layers, "Surrogate layer features to write, e.g. 1,5,8-12");
  simulate->add_option("--layer-dims", sim.layer_dims)->check(CLI::PositiveNumber);
  simulate->callback([&] {
    action = [&] {
      // Precedence: defaults < config file < flags.
      SimulateOptions o = common.config.empty() ? SimulateOptions{} : load_simulate_options(common.config, SimulateOptions{});
      for (const CLI::Option* opt : simulate->get_options()) {
        if (opt->count() == 0) continue;
        const std::string n = opt->get_name();
        if (n == "--subjects") o.subjects = sim.subjects;
        if (n == "--trials") o.trials = sim.trials;
        if (n == "--duration") o.duration_s = sim.duration_s;
        if (n == "--channels") o.channels = sim.channels;
        if (n == "--snr-db") o.snr_db = sim.snr_db;
        if (n == "--gain-att") o.gain_att = sim.gain_att;
        if (n == "--gain-ign") o.gain_ign = sim.gain_ign;
        if (n == "--kernel-offset-ms") o.kernel_offset_ms = sim.kernel_offset_ms;
        if (n == "--sets") o.feature_sets = sim.feature_sets;
        if (n == "--layers") o.layers = parse_int_list(layers);
        if (n == "--layer-dims") o.layer_dims = sim.layer_dims;
      }
      if (common.seed) o.seed = *common.seed;
      if (common.jobs) o.jobs = *common.jobs;
      if (common.out) o.out_dir = *common.out;
      cmd_simulate(o, out);
    };
  });

  std::vector<const char*> argv = {"neurotrack"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUser;
  }

  return guarded(action, err);
}

int guarded(const std::function<void()>& action, std::ostream& err) {
  try {
    action();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const YAML::Exception& e) {
    err << "error: config: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (...) {
    err << "internal error: unknown exception\n";
    return kExitInternal;
  }
}

}  // namespace neurotrack::cli
