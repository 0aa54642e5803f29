#pragma once

#include "neurotrack_cli/session.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace neurotrack::cli {

// Each command writes under cfg.out_dir and prints a one-line summary to `out`.
void cmd_extract(const SessionConfig& cfg, std::ostream& out);
void cmd_fit(const SessionConfig& cfg, std::ostream& out);
void cmd_decode(const SessionConfig& cfg, std::ostream& out);
void cmd_report(const SessionConfig& cfg, std::ostream& out);

struct SimulateOptions {
  fs::path out_dir = "sim_session";
  std::uint64_t seed = 1;
  int subjects = 1;
  int trials = 32;
  double duration_s = 59.0;
  int channels = 64;
  double snr_db = 0.0;
  double gain_att = 1.0;
  double gain_ign = 0.3;
  double kernel_offset_ms = 0.0;
  std::string driving_set = "envelope";  // features the forward model convolves
  std::vector<std::string> feature_sets = {"envelope", "envelope-all"};
  std::vector<int> layers;  // surrogate layer features to write, empty for none
  int layer_dims = 2;
  int jobs = 1;
};

// Reads the optional `simulation:` section of a YAML file on top of `base`.
SimulateOptions load_simulate_options(const fs::path& path, SimulateOptions base);

// Writes stimuli, EEG, labels, a manifest and a ready-to-run session.yaml.
void cmd_simulate(const SimulateOptions& opts, std::ostream& out);

// "1,3,6-8" -> {1,3,6,7,8}
std::vector<int> parse_int_list(const std::string& text);

}  // namespace neurotrack::cli
