#pragma once

#include "neurotrack/types.hpp"

#include <string>
#include <vector>

namespace neurotrack::features {

inline constexpr double kFrameRate = 100.0;

// Short-time analysis grid shared by the spectrogram and MFCC extractors.
// Frame t covers samples [t*hop, t*hop + window) at 16 kHz.
struct StftParams {
  int window = 400;  // 25 ms
  int hop = 160;     // 10 ms
  int nfft = 512;
};

struct SpectrogramParams {
  StftParams stft;
  int bands = 100;
  double max_hz = 8000.0;
  double compression = 0.3;
};

struct MfccParams {
  StftParams stft;
  int mel_filters = 40;
  double low_hz = 20.0;
  double high_hz = 8000.0;
  int coefficients = 13;
  int delta_half_width = 2;
  double log_floor = 1e-10;
};

struct PitchParams {
  double min_hz = 60.0;
  double max_hz = 400.0;
  double voicing_threshold = 0.45;
  int window = 640;  // 40 ms, covers two periods of min_hz
  int hop = 160;
  // Below this standard deviation of log-F0 the relative-pitch column is 0.
  double min_log_f0_spread = 1e-3;
};

// Number of analysis frames: floor((len - window) / hop) + 1, or 0 if len < window.
Eigen::Index frame_count(Eigen::Index samples, int window, int hop);

// RMS over consecutive non-overlapping 10 ms windows, raised to `compression`.
// T = floor(len / hop). Audio must be mono.
FeatureMatrix envelope(const AudioSignal& audio, double compression);

// Frame-rate-scaled first difference; row 0 is zero.
FeatureMatrix envelope_derivative(const FeatureMatrix& env);

// Hann-windowed STFT magnitudes averaged into equal-width bands over
// [0, max_hz], then compressed. Bin k lands in band floor(f_k / width),
// with f_k == max_hz folded into the last band.
FeatureMatrix spectrogram(const AudioSignal& audio, const SpectrogramParams& params = {});

// Columns [c0..c12, d0..d12, dd0..dd12]. Power spectrum, HTK-mel triangular
// filters, natural log, orthonormal DCT-II; deltas by +-2 frame regression
// with replicated edges.
FeatureMatrix mfcc(const AudioSignal& audio, const MfccParams& params = {});

struct PitchTrack {
  Vector f0_hz;                // 0 where unvoiced
  std::vector<bool> voiced;
};

// Normalized-autocorrelation F0 estimate per frame with parabolic refinement.
PitchTrack pitch_track(const AudioSignal& audio, const PitchParams& params = {});

// Columns [absolute F0 Hz, z-scored log-F0, log-F0 first difference];
// all three are 0 on unvoiced frames.
FeatureMatrix pitch(const AudioSignal& audio, const PitchParams& params = {});

// Truncate or zero-pad to exactly `frames` rows.
FeatureMatrix align_frames(const FeatureMatrix& m, Eigen::Index frames);

enum class FeatureKind { kEnvelope, kEnvelopeDerivative, kSpectrogram, kMfcc, kPitch };

struct FeatureMember {
  FeatureKind kind;
  double compression = 1.0;  // envelope and envelope-derivative only
};

struct FeatureSetSpec {
  std::string name;
  std::vector<FeatureMember> members;
};

// Built-in sets: envelope, envelope-all, spectrogram, mfcc, pitch,
// acoustic-all. Throws InvalidArgument on an unknown name.
FeatureSetSpec feature_set(const std::string& name);
std::vector<std::string> feature_set_names();
bool is_builtin_feature_set(const std::string& name);

// Column count a set produces.
Eigen::Index feature_set_dims(const FeatureSetSpec& spec);

// Column-wise concatenation of parts in declared order. One part per member.
FeatureMatrix assemble(const FeatureSetSpec& spec, const std::vector<FeatureMatrix>& parts);

struct ExtractParams {
  SpectrogramParams spectrogram;
  MfccParams mfcc;
  PitchParams pitch;
};

// Computes every member of `spec` from 16 kHz mono audio, aligns each to
// `frames` rows and assembles them.
FeatureMatrix extract(const AudioSignal& audio, const FeatureSetSpec& spec, Eigen::Index frames,
                      const ExtractParams& params = {});

}  // namespace neurotrack::features
