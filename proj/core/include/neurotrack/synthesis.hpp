#pragma once

#include "neurotrack/trf.hpp"

#include <cstdint>
#include <limits>

// Forward-model EEG simulator: known kernels convolved with two competing
// stimulus streams plus band-limited noise. Used as ground truth wherever
// real recordings are unavailable.
namespace neurotrack::synthesis {

// Stable seed mixing (splitmix64) so every generated object has its own
// reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Kernel in TrfModel weight layout: (features * lags) x channels. Each
// (feature, channel) profile is a Gaussian-damped cosine peaking 20-40% into
// the lag window (100-200 ms for 0-500 ms) and negligible at the last lag.
// offset_ms shifts every peak, for model-mismatch experiments.
Matrix make_kernel(const trf::LagConfig& cfg, Eigen::Index features, Eigen::Index channels, std::uint64_t seed,
                   double offset_ms = 0.0);

enum class SurrogateKind { kAr1Envelope, kMultiBand };

// Nonnegative, temporally correlated surrogate features: softplus of a
// unit-variance AR(1) process (coefficient 0.95; multi-band columns use
// coefficients spread over 0.90-0.97 with independent innovations).
FeatureMatrix gen_features(SurrogateKind kind, double duration_s, Eigen::Index dims, std::uint64_t seed,
                           double frame_rate = 100.0);

struct GroundTruth {
  Matrix trf_att;
  Matrix trf_ign;
  trf::LagConfig lags;
  double gain_att = 1.0;
  double gain_ign = 0.3;
  double noise_snr_db = 0.0;  // +infinity disables noise
  std::uint64_t seed = 0;     // noise stream
};

// conv(features, kernel) with the estimator's lag convention, evaluated as an
// explicit sum rather than through a design matrix.
Matrix convolve(const FeatureMatrix& features, const Matrix& kernel, const trf::LagConfig& cfg);

struct SimulatedTrial {
  EegTrial trial;  // clean + noise, not normalised
  Matrix clean;    // stimulus-driven part (both streams)
  Matrix noise;

  // 10*log10(sum of channel variances of clean / same for noise).
  double measured_snr_db() const;
};

// Noise is white Gaussian band-passed to 1-10 Hz and scaled per channel so
// each channel's signal-to-noise variance ratio equals noise_snr_db.
SimulatedTrial simulate_trial(const GroundTruth& gt, const FeatureMatrix& feat_att, const FeatureMatrix& feat_ign,
                              std::string trial_id = {}, std::string attended_stream_id = {});

// 16 kHz mono surrogate speech: Gaussian carrier amplitude-modulated by a
// slowly varying AR(1) envelope, peak-normalised to 0.9.
AudioSignal speech_like_audio(double duration_s, std::uint64_t seed, double sample_rate = 16000.0);

// Cosine similarity of two equally shaped matrices viewed as flat vectors.
double cosine_similarity(const Matrix& a, const Matrix& b);

}  // namespace neurotrack::synthesis
