#pragma once

#include "neurotrack/types.hpp"

#include <cstdint>
#include <filesystem>

namespace neurotrack::io {

// NTF1 binary matrix container, little-endian:
//
//   offset  size  field
//   0       4     magic "NTF1"
//   4       4     format version (u32, currently 1)
//   8       8     rows (u64)
//   16      8     cols (u64)
//   24      8     frame rate in Hz (f64)
//   32      4*r*c payload, row-major f32
//
// Values are held as doubles in memory and stored as 32-bit floats on disk.
inline constexpr char kNtfMagic[4] = {'N', 'T', 'F', '1'};
inline constexpr std::uint32_t kNtfVersion = 1;
inline constexpr std::size_t kNtfHeaderBytes = 32;

// Raw matrix plus rate, the unit the container actually stores.
struct RateMatrix {
  Matrix data;
  double rate = 0.0;
};

void write_ntf(const Matrix& data, double rate, const std::filesystem::path& path);
RateMatrix read_ntf(const std::filesystem::path& path);

// PCM (8/16/24/32-bit integer) or IEEE-float (32/64-bit) WAV, including
// WAVE_FORMAT_EXTENSIBLE headers. Samples are scaled to [-1, 1].
AudioSignal read_wav(const std::filesystem::path& path);

// 16-bit PCM output; samples are clipped to [-1, 1].
void write_wav(const AudioSignal& audio, const std::filesystem::path& path);

// Averages all channels into one, then band-limited resamples to target_rate.
AudioSignal to_mono_resampled(const AudioSignal& audio, double target_rate);

// Feature names are not part of the container. read_feature_matrix labels
// columns "f0".."fN-1"; callers that know the recipe relabel them.
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

// EEG is an NTF1 matrix plus a YAML sidecar at sidecar_path(path) holding the
// sample rate and channel names.
std::filesystem::path sidecar_path(const std::filesystem::path& path);
void write_eeg(const EegRecording& rec, const std::filesystem::path& path);
EegRecording read_eeg(const std::filesystem::path& path);

}  // namespace neurotrack::io
