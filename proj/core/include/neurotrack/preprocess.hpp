#pragma once

#include "neurotrack/types.hpp"

#include <string>
#include <vector>

namespace neurotrack::preprocess {

struct FilterSpec {
  double low_cut_hz = 1.0;
  double high_cut_hz = 10.0;
  int order = 4;  // Butterworth prototype order; forward-backward doubles it
};

// Subtracts, per sample, the mean of the named reference channels from every
// channel (the references included).
EegRecording rereference(const EegRecording& rec, const std::vector<std::string>& ref_channels);

// Zero-phase Butterworth band-pass applied to each channel. Length preserved.
EegRecording bandpass(const EegRecording& rec, const FilterSpec& spec);

EegRecording resample_eeg(const EegRecording& rec, double target_rate);

// Population z-score per channel. A constant channel raises NumericError
// naming it.
EegRecording zscore(const EegRecording& rec);

// round(duration*rate) samples starting at round(onset*rate), copied verbatim.
EegTrial segment(const EegRecording& rec, double onset_s, double duration_s, std::string trial_id = {},
                 std::string attended_stream_id = {});

struct PipelineConfig {
  std::vector<std::string> reference_channels;  // empty: skip re-referencing
  FilterSpec first_band{0.1, 10.0, 4};
  double target_rate = 100.0;
  FilterSpec second_band{1.0, 10.0, 4};
};

// rereference -> first band-pass -> resample -> (artifact removal, not
// performed) -> second band-pass -> z-score. Segmentation is left to the
// caller since it needs per-trial onsets.
EegRecording run_pipeline(const EegRecording& rec, const PipelineConfig& cfg);

}  // namespace neurotrack::preprocess
