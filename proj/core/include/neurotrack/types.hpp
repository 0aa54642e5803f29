#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace neurotrack {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sampled waveform, one vector per channel.
struct AudioSignal {
  std::vector<Vector> channels;
  double sample_rate = 0.0;

  std::size_t channel_count() const { return channels.size(); }
  Eigen::Index length() const { return channels.empty() ? 0 : channels.front().size(); }

  // Throws InvalidArgument when a structural invariant is broken.
  void validate() const;
};

// Time x feature matrix at a fixed frame rate.
struct FeatureMatrix {
  Matrix data;
  double frame_rate = 0.0;
  std::vector<std::string> names;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dims() const { return data.cols(); }

  void validate() const;
};

// Time x channel EEG matrix with channel labels.
struct EegRecording {
  Matrix data;
  double sample_rate = 0.0;
  std::vector<std::string> channel_names;

  Eigen::Index samples() const { return data.rows(); }
  Eigen::Index channels() const { return data.cols(); }

  // Column index for a channel label; throws InvalidArgument if absent.
  Eigen::Index channel_index(const std::string& name) const;

  void validate() const;
};

// One segmented trial ready for encoding analysis.
struct EegTrial {
  EegRecording eeg;
  std::string trial_id;
  std::string attended_stream_id;
};

// Default channel labels ("Ch01".."ChNN") for generated data.
std::vector<std::string> default_channel_names(std::size_t count);

}  // namespace neurotrack
