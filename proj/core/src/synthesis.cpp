#include "neurotrack/synthesis.hpp"

#include "neurotrack/dsp.hpp"
#include "neurotrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace neurotrack::synthesis {

namespace {

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

// Unit-variance stationary AR(1) path.
Vector ar1(Eigen::Index n, double coeff, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double innovation = std::sqrt(1.0 - coeff * coeff);
  Vector x(n);
  double state = gauss(rng);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (t > 0) state = coeff * state + innovation * gauss(rng);
    x[t] = state;
  }
  return x;
}

double column_variance(const Eigen::Ref<const Vector>& x) {
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0xD1B54A32D192ED03ull));
}

Matrix make_kernel(const trf::LagConfig& cfg, Eigen::Index features, Eigen::Index channels, std::uint64_t seed,
                   double offset_ms) {
  cfg.validate();
  if (features < 1 || channels < 1) throw InvalidArgument("make_kernel: need features >= 1 and channels >= 1");
  const int lags = cfg.lag_count();
  const double lag_min_s = cfg.min_lag() / cfg.frame_rate;
  const double span_s = (lags - 1) / cfg.frame_rate;

  std::mt19937_64 rng(derive_seed(seed, 0x6b65726e656cull));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix kernel(features * lags, channels);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (Eigen::Index f = 0; f < features; ++f) {
      const double amplitude = (0.5 + unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
      const double peak_s = lag_min_s + (0.2 + 0.2 * unit(rng)) * span_s + offset_ms / 1000.0;
      const double width_s = (0.08 + 0.04 * unit(rng)) * span_s;
      const double cycles = (1.5 + unit(rng)) / std::max(span_s, 1e-12);
      for (int j = 0; j < lags; ++j) {
        double value = amplitude;
        if (span_s > 0.0) {
          const double d = lag_min_s + j / cfg.frame_rate - peak_s;
          value *= std::exp(-0.5 * d * d / (width_s * width_s)) * std::cos(2.0 * std::numbers::pi * cycles * d);
        }
        kernel(f * lags + j, c) = value;
      }
    }
  }
  return kernel;
}

FeatureMatrix gen_features(SurrogateKind kind, double duration_s, Eigen::Index dims, std::uint64_t seed,
                           double frame_rate) {
  if (!(duration_s > 0.0) || !(frame_rate > 0.0)) throw InvalidArgument("gen_features: duration and rate must be positive");
  if (dims < 1) throw InvalidArgument("gen_features: dims must be >= 1");
  const auto frames = static_cast<Eigen::Index>(std::llround(duration_s * frame_rate));
  if (frames < 1) throw InvalidArgument("gen_features: duration shorter than one frame");

  std::mt19937_64 rng(derive_seed(seed, 0x66656174ull, static_cast<std::uint64_t>(kind)));
  FeatureMatrix out;
  out.frame_rate = frame_rate;
  out.data.resize(frames, dims);
  for (Eigen::Index d = 0; d < dims; ++d) {
    double coeff = 0.95;
    if (kind == SurrogateKind::kMultiBand && dims > 1) coeff = 0.90 + 0.07 * static_cast<double>(d) / (dims - 1);
    out.data.col(d) = ar1(frames, coeff, rng).unaryExpr(&softplus);
    out.names.push_back((kind == SurrogateKind::kAr1Envelope ? "ar1_" : "band_") + std::to_string(d));
  }
  return out;
}

Matrix convolve(const FeatureMatrix& features, const Matrix& kernel, const trf::LagConfig& cfg) {
  const int lags = cfg.lag_count();
  const int first = cfg.min_lag();
  const Eigen::Index t_count = features.frames();
  if (kernel.rows() != features.dims() * lags) {
    throw InvalidArgument("convolve: kernel has " + std::to_string(kernel.rows()) + " rows, expected " +
                          std::to_string(features.dims() * lags));
  }
  Matrix out = Matrix::Zero(t_count, kernel.cols());
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    for (Eigen::Index t = 0; t < t_count; ++t) {
      double acc = 0.0;
      for (Eigen::Index f = 0; f < features.dims(); ++f) {
        for (int j = 0; j < lags; ++j) {
          const Eigen::Index src = t - (first + j);
          if (src >= 0 && src < t_count) acc += features.data(src, f) * kernel(f * lags + j, c);
        }
      }
      out(t, c) = acc;
    }
  }
  return out;
}

double SimulatedTrial::measured_snr_db() const {
  double signal = 0.0, noise_power = 0.0;
  for (Eigen::Index c = 0; c < clean.cols(); ++c) {
    signal += column_variance(clean.col(c));
    noise_power += column_variance(noise.col(c));
  }
  if (noise_power == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise_power);
}

SimulatedTrial simulate_trial(const GroundTruth& gt, const FeatureMatrix& feat_att, const FeatureMatrix& feat_ign,
                              std::string trial_id, std::string attended_stream_id) {
  if (feat_att.frames() != feat_ign.frames()) {
    throw InvalidArgument("simulate_trial: stream lengths differ (" + std::to_string(feat_att.frames()) + " vs " +
                          std::to_string(feat_ign.frames()) + ")");
  }
  if (gt.trf_att.cols() != gt.trf_ign.cols()) throw InvalidArgument("simulate_trial: kernels differ in channel count");
  const Eigen::Index t_count = feat_att.frames();
  const Eigen::Index channels = gt.trf_att.cols();

  SimulatedTrial sim;
  sim.clean = gt.gain_att * convolve(feat_att, gt.trf_att, gt.lags);
  if (gt.gain_ign != 0.0) sim.clean += gt.gain_ign * convolve(feat_ign, gt.trf_ign, gt.lags);
  sim.noise = Matrix::Zero(t_count, channels);

  if (std::isnan(gt.noise_snr_db) || gt.noise_snr_db == -std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("simulate_trial: SNR must be finite or +infinity");
  }
  if (std::isfinite(gt.noise_snr_db)) {
    std::mt19937_64 rng(derive_seed(gt.seed, 0x6e6f697365ull));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto band = dsp::butterworth_bandpass(4, 1.0, 10.0, feat_att.frame_rate);
    const double ratio = std::pow(10.0, gt.noise_snr_db / 10.0);
    double mean_signal_var = 0.0;
    for (Eigen::Index c = 0; c < channels; ++c) mean_signal_var += column_variance(sim.clean.col(c));
    mean_signal_var /= static_cast<double>(channels);
    for (Eigen::Index c = 0; c < channels; ++c) {
      Vector white(t_count);
      for (Eigen::Index t = 0; t < t_count; ++t) white[t] = gauss(rng);
      Vector coloured = dsp::sos_filtfilt(band, white);
      coloured.array() -= coloured.mean();
      double target = column_variance(sim.clean.col(c));
      if (!(target > 0.0)) target = mean_signal_var > 0.0 ? mean_signal_var : ratio;
      const double have = column_variance(coloured);
      sim.noise.col(c) = have > 0.0 ? Vector(coloured * std::sqrt(target / ratio / have)) : coloured;
    }
  }

  sim.trial.eeg.data = sim.clean + sim.noise;
  sim.trial.eeg.sample_rate = feat_att.frame_rate;
  sim.trial.eeg.channel_names = default_channel_names(static_cast<std::size_t>(channels));
  sim.trial.trial_id = std::move(trial_id);
  sim.trial.attended_stream_id = std::move(attended_stream_id);
  return sim;
}

AudioSignal speech_like_audio(double duration_s, std::uint64_t seed, double sample_rate) {
  if (!(duration_s > 0.0) || !(sample_rate > 0.0)) throw InvalidArgument("speech_like_audio: bad duration or rate");
  const auto n = static_cast<Eigen::Index>(std::llround(duration_s * sample_rate));
  // Syllable-rate envelope at 100 Hz, linearly interpolated to audio rate.
  const FeatureMatrix env = gen_features(SurrogateKind::kAr1Envelope, duration_s + 0.02, 1, derive_seed(seed, 1));
  std::mt19937_64 rng(derive_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(n);
  const double step = env.frame_rate / sample_rate;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto k = static_cast<Eigen::Index>(pos);
    const double frac = pos - static_cast<double>(k);
    const Eigen::Index k1 = std::min(k + 1, env.frames() - 1);
    const double e = (1.0 - frac) * env.data(std::min(k, env.frames() - 1), 0) + frac * env.data(k1, 0);
    x[i] = e * gauss(rng);
  }
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak > 0.0) x *= 0.9 / peak;
  AudioSignal audio;
  audio.sample_rate = sample_rate;
  audio.channels.push_back(std::move(x));
  return audio;
}

double cosine_similarity(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("cosine_similarity: shape mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.cwiseProduct(b).sum() / (na * nb);
}

}  // namespace neurotrack::synthesis
