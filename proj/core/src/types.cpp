#include "neurotrack/types.hpp"

#include "neurotrack/error.hpp"

#include <cstdio>

namespace neurotrack {

void AudioSignal::validate() const {
  if (!(sample_rate > 0.0)) throw InvalidArgument("audio: sample rate must be positive");
  if (channels.empty()) throw InvalidArgument("audio: no channels");
  for (const auto& ch : channels) {
    if (ch.size() != channels.front().size()) {
      throw InvalidArgument("audio: channels have unequal length");
    }
    if (!ch.allFinite()) throw InvalidArgument("audio: non-finite sample");
  }
}

void FeatureMatrix::validate() const {
  if (!(frame_rate > 0.0)) throw InvalidArgument("feature matrix: frame rate must be positive");
  if (data.rows() < 1 || data.cols() < 1) throw InvalidArgument("feature matrix: empty");
  if (!data.allFinite()) throw InvalidArgument("feature matrix: non-finite entry");
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != data.cols()) {
    throw InvalidArgument("feature matrix: " + std::to_string(names.size()) + " names for " +
                          std::to_string(data.cols()) + " columns");
  }
}

Eigen::Index EegRecording::channel_index(const std::string& name) const {
  for (std::size_t i = 0; i < channel_names.size(); ++i) {
    if (channel_names[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw InvalidArgument("unknown EEG channel '" + name + "'");
}

void EegRecording::validate() const {
  if (!(sample_rate > 0.0)) throw InvalidArgument("EEG: sample rate must be positive");
  if (data.cols() < 1) throw InvalidArgument("EEG: no channels");
  if (static_cast<Eigen::Index>(channel_names.size()) != data.cols()) {
    throw InvalidArgument("EEG: " + std::to_string(channel_names.size()) + " channel names for " +
                          std::to_string(data.cols()) + " columns");
  }
  if (!data.allFinite()) throw InvalidArgument("EEG: non-finite sample");
}

std::vector<std::string> default_channel_names(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  char buf[32];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof buf, "Ch%02zu", i + 1);
    names.emplace_back(buf);
  }
  return names;
}

}  // namespace neurotrack
