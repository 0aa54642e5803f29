#include "neurotrack/features.hpp"

#include "neurotrack/dsp.hpp"
#include "neurotrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace neurotrack::features {

namespace {

const Vector& mono_samples(const AudioSignal& audio, const char* who) {
  audio.validate();
  if (audio.channel_count() != 1) {
    throw InvalidArgument(std::string(who) + ": expected mono audio, got " +
                          std::to_string(audio.channel_count()) + " channels");
  }
  return audio.channels.front();
}

std::string indexed(const char* prefix, int i, int width = 0) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

std::string compression_label(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", c);
  return buf;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular mel filters over bins 0..nfft/2, one row per filter.
Matrix mel_filterbank(const MfccParams& p, double sample_rate) {
  const int bins = p.stft.nfft / 2 + 1;
  Matrix bank = Matrix::Zero(p.mel_filters, bins);
  const double mel_lo = hz_to_mel(p.low_hz);
  const double mel_hi = hz_to_mel(p.high_hz);
  std::vector<double> edges(static_cast<std::size_t>(p.mel_filters + 2));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (p.mel_filters + 1));
  }
  for (int m = 0; m < p.mel_filters; ++m) {
    const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * sample_rate / p.stft.nfft;
      const double w = std::min((f - left) / (centre - left), (right - f) / (right - centre));
      if (w > 0.0) bank(m, k) = w;
    }
  }
  return bank;
}

// Regression deltas over +-half_width frames, edges replicated.
Matrix deltas(const Matrix& x, int half_width) {
  const Eigen::Index t_count = x.rows();
  double denom = 0.0;
  for (int n = 1; n <= half_width; ++n) denom += 2.0 * n * n;
  Matrix d = Matrix::Zero(t_count, x.cols());
  for (Eigen::Index t = 0; t < t_count; ++t) {
    for (int n = 1; n <= half_width; ++n) {
      const Eigen::Index ahead = std::min(t + n, t_count - 1);
      const Eigen::Index behind = std::max<Eigen::Index>(t - n, 0);
      d.row(t) += n * (x.row(ahead) - x.row(behind));
    }
  }
  return d / denom;
}

void check_stft(const StftParams& p) {
  if (p.window < 2 || p.hop < 1 || p.nfft < p.window) {
    throw InvalidArgument("STFT: need window >= 2, hop >= 1, nfft >= window");
  }
}

// Magnitude spectra of every analysis frame, frames x bins.
Matrix stft_magnitudes(const Vector& x, const StftParams& p, const char* who) {
  check_stft(p);
  const Eigen::Index frames = frame_count(x.size(), p.window, p.hop);
  if (frames < 1) {
    throw InvalidArgument(std::string(who) + ": audio shorter than one " + std::to_string(p.window) +
                          "-sample analysis window");
  }
  const Vector window = dsp::hann(static_cast<std::size_t>(p.window));
  dsp::MagnitudeSpectrum spectrum(static_cast<std::size_t>(p.nfft));
  Matrix mags(frames, static_cast<Eigen::Index>(spectrum.bins()));
  Vector frame(p.window), mag;
  for (Eigen::Index t = 0; t < frames; ++t) {
    frame = x.segment(t * p.hop, p.window).cwiseProduct(window);
    spectrum.compute(frame, mag);
    mags.row(t) = mag.transpose();
  }
  return mags;
}

}  // namespace

Eigen::Index frame_count(Eigen::Index samples, int window, int hop) {
  if (samples < window) return 0;
  return (samples - window) / hop + 1;
}

FeatureMatrix envelope(const AudioSignal& audio, double compression) {
  if (!(compression > 0.0 && compression <= 1.0)) {
    throw InvalidArgument("envelope: compression exponent must be in (0, 1]");
  }
  const Vector& x = mono_samples(audio, "envelope");
  const double hop_real = audio.sample_rate / kFrameRate;
  const auto hop = static_cast<Eigen::Index>(std::llround(hop_real));
  if (hop < 1 || std::abs(hop_real - static_cast<double>(hop)) > 1e-9) {
    throw InvalidArgument("envelope: sample rate must be a multiple of 100 Hz");
  }
  const Eigen::Index frames = x.size() / hop;
  if (frames < 1) throw InvalidArgument("envelope: empty audio");

  FeatureMatrix out;
  out.frame_rate = kFrameRate;
  out.names = {"envelope_c" + compression_label(compression)};
  out.data.resize(frames, 1);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double rms = std::sqrt(x.segment(t * hop, hop).squaredNorm() / static_cast<double>(hop));
    out.data(t, 0) = compression == 1.0 ? rms : std::pow(rms, compression);
  }
  return out;
}

FeatureMatrix envelope_derivative(const FeatureMatrix& env) {
  if (env.dims() != 1) throw InvalidArgument("envelope_derivative: expected a single-column envelope");
  if (env.frames() < 2) throw InvalidArgument("envelope_derivative: need at least two frames");
  FeatureMatrix out;
  out.frame_rate = env.frame_rate;
  out.names = {(env.names.empty() ? std::string("envelope") : env.names.front()) + "_deriv"};
  out.data = Matrix::Zero(env.frames(), 1);
  for (Eigen::Index t = 1; t < env.frames(); ++t) {
    out.data(t, 0) = (env.data(t, 0) - env.data(t - 1, 0)) * env.frame_rate;
  }
  return out;
}

FeatureMatrix spectrogram(const AudioSignal& audio, const SpectrogramParams& params) {
  const Vector& x = mono_samples(audio, "spectrogram");
  if (params.bands < 1 || !(params.max_hz > 0.0) || params.max_hz > audio.sample_rate / 2.0) {
    throw InvalidArgument("spectrogram: need bands >= 1 and 0 < max_hz <= Nyquist");
  }
  const Matrix mags = stft_magnitudes(x, params.stft, "spectrogram");
  const double band_width = params.max_hz / params.bands;

  std::vector<int> band_of(static_cast<std::size_t>(mags.cols()), -1);
  std::vector<int> members(static_cast<std::size_t>(params.bands), 0);
  for (Eigen::Index k = 0; k < mags.cols(); ++k) {
    const double f = static_cast<double>(k) * audio.sample_rate / params.stft.nfft;
    if (f > params.max_hz) break;
    const int b = std::min(params.bands - 1, static_cast<int>(std::floor(f / band_width)));
    band_of[static_cast<std::size_t>(k)] = b;
    ++members[static_cast<std::size_t>(b)];
  }
  for (int b = 0; b < params.bands; ++b) {
    if (members[static_cast<std::size_t>(b)] == 0) {
      throw InvalidArgument("spectrogram: FFT too coarse, band " + std::to_string(b) + " holds no bins");
    }
  }

  FeatureMatrix out;
  out.frame_rate = audio.sample_rate / params.stft.hop;
  out.data = Matrix::Zero(mags.rows(), params.bands);
  for (Eigen::Index k = 0; k < mags.cols(); ++k) {
    const int b = band_of[static_cast<std::size_t>(k)];
    if (b >= 0) out.data.col(b) += mags.col(k);
  }
  for (int b = 0; b < params.bands; ++b) {
    out.data.col(b) /= members[static_cast<std::size_t>(b)];
    out.names.push_back(indexed("spec_", b, 3));
  }
  out.data = out.data.array().pow(params.compression);
  return out;
}

FeatureMatrix mfcc(const AudioSignal& audio, const MfccParams& params) {
  const Vector& x = mono_samples(audio, "mfcc");
  if (params.coefficients < 1 || params.coefficients > params.mel_filters) {
    throw InvalidArgument("mfcc: need 1 <= coefficients <= mel filters");
  }
  if (!(params.low_hz >= 0.0 && params.low_hz < params.high_hz && params.high_hz <= audio.sample_rate / 2.0)) {
    throw InvalidArgument("mfcc: need 0 <= low_hz < high_hz <= Nyquist");
  }
  const Matrix mags = stft_magnitudes(x, params.stft, "mfcc");
  const Matrix bank = mel_filterbank(params, audio.sample_rate);
  Matrix log_mel = (mags.array().square().matrix() * bank.transpose()).array().max(params.log_floor).log();

  const int n = params.mel_filters;
  Matrix dct(n, params.coefficients);
  for (int i = 0; i < params.coefficients; ++i) {
    const double scale = std::sqrt((i == 0 ? 1.0 : 2.0) / n);
    for (int m = 0; m < n; ++m) dct(m, i) = scale * std::cos(std::numbers::pi * i * (m + 0.5) / n);
  }
  const Matrix ceps = log_mel * dct;
  const Matrix d1 = deltas(ceps, params.delta_half_width);
  const Matrix d2 = deltas(d1, params.delta_half_width);

  const int c = params.coefficients;
  FeatureMatrix out;
  out.frame_rate = audio.sample_rate / params.stft.hop;
  out.data.resize(ceps.rows(), 3 * c);
  out.data << ceps, d1, d2;
  for (int i = 0; i < c; ++i) out.names.push_back(indexed("mfcc_c", i));
  for (int i = 0; i < c; ++i) out.names.push_back(indexed("mfcc_d", i));
  for (int i = 0; i < c; ++i) out.names.push_back(indexed("mfcc_dd", i));
  return out;
}

PitchTrack pitch_track(const AudioSignal& audio, const PitchParams& params) {
  const Vector& x = mono_samples(audio, "pitch");
  const double sr = audio.sample_rate;
  if (!(params.min_hz > 0.0 && params.min_hz < params.max_hz && params.max_hz < sr / 2.0)) {
    throw InvalidArgument("pitch: need 0 < min_hz < max_hz < Nyquist");
  }
  const int lag_lo = std::max(2, static_cast<int>(std::floor(sr / params.max_hz)));
  const int lag_hi = static_cast<int>(std::ceil(sr / params.min_hz));
  if (params.window <= lag_hi + 1 || params.hop < 1) {
    throw InvalidArgument("pitch: analysis window must exceed the longest lag");
  }

  const Eigen::Index frames = frame_count(x.size(), params.window, params.hop);
  PitchTrack track;
  track.f0_hz = Vector::Zero(frames);
  track.voiced.assign(static_cast<std::size_t>(frames), false);

  const int w = params.window;
  Vector frame(w);
  std::vector<double> prefix(static_cast<std::size_t>(w + 1));
  std::vector<double> r(static_cast<std::size_t>(lag_hi + 2), 0.0);
  for (Eigen::Index t = 0; t < frames; ++t) {
    frame = x.segment(t * params.hop, w);
    frame.array() -= frame.mean();
    prefix[0] = 0.0;
    for (int i = 0; i < w; ++i) prefix[i + 1] = prefix[i] + frame[i] * frame[i];
    if (prefix[w] <= 1e-10 * w) continue;  // silence

    for (int lag = lag_lo - 1; lag <= lag_hi + 1; ++lag) {
      const int len = w - lag;
      const double dot = frame.head(len).dot(frame.segment(lag, len));
      const double e0 = prefix[len];
      const double e1 = prefix[w] - prefix[lag];
      r[lag] = (e0 > 0.0 && e1 > 0.0) ? dot / std::sqrt(e0 * e1) : 0.0;
    }
    double best = -1.0;
    for (int lag = lag_lo; lag <= lag_hi; ++lag) best = std::max(best, r[lag]);
    if (best < params.voicing_threshold) continue;

    // Shortest-lag local peak close to the global one avoids octave-down errors.
    int chosen = -1;
    for (int lag = lag_lo; lag <= lag_hi; ++lag) {
      if (r[lag] >= 0.9 * best && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
        chosen = lag;
        break;
      }
    }
    if (chosen < 0) continue;
    const double left = r[chosen - 1], mid = r[chosen], right = r[chosen + 1];
    const double curvature = left - 2.0 * mid + right;
    double offset = curvature < 0.0 ? 0.5 * (left - right) / curvature : 0.0;
    offset = std::clamp(offset, -0.5, 0.5);
    track.f0_hz[t] = sr / (chosen + offset);
    track.voiced[static_cast<std::size_t>(t)] = true;
  }
  return track;
}

FeatureMatrix pitch(const AudioSignal& audio, const PitchParams& params) {
  const PitchTrack track = pitch_track(audio, params);
  const Eigen::Index frames = track.f0_hz.size();
  FeatureMatrix out;
  out.frame_rate = audio.sample_rate / params.hop;
  out.names = {"pitch_abs", "pitch_rel", "pitch_change"};
  out.data = Matrix::Zero(frames, 3);
  if (frames < 1) throw InvalidArgument("pitch: audio shorter than one analysis window");

  double sum = 0.0, sum_sq = 0.0;
  Eigen::Index voiced = 0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    if (!track.voiced[static_cast<std::size_t>(t)]) continue;
    const double lf = std::log(track.f0_hz[t]);
    sum += lf;
    sum_sq += lf * lf;
    ++voiced;
  }
  const double mean = voiced > 0 ? sum / voiced : 0.0;
  const double spread = voiced > 1 ? std::sqrt(std::max(0.0, sum_sq / voiced - mean * mean)) : 0.0;

  for (Eigen::Index t = 0; t < frames; ++t) {
    if (!track.voiced[static_cast<std::size_t>(t)]) continue;
    const double lf = std::log(track.f0_hz[t]);
    out.data(t, 0) = track.f0_hz[t];
    out.data(t, 1) = spread >= params.min_log_f0_spread ? (lf - mean) / spread : 0.0;
    if (t > 0 && track.voiced[static_cast<std::size_t>(t - 1)]) {
      out.data(t, 2) = lf - std::log(track.f0_hz[t - 1]);
    }
  }
  return out;
}

FeatureMatrix align_frames(const FeatureMatrix& m, Eigen::Index frames) {
  if (frames < 1) throw InvalidArgument("align_frames: target frame count must be positive");
  FeatureMatrix out;
  out.frame_rate = m.frame_rate;
  out.names = m.names;
  out.data = Matrix::Zero(frames, m.dims());
  const Eigen::Index keep = std::min(frames, m.frames());
  out.data.topRows(keep) = m.data.topRows(keep);
  return out;
}

FeatureSetSpec feature_set(const std::string& name) {
  using K = FeatureKind;
  const FeatureMember env03{K::kEnvelope, 0.3};
  const FeatureMember env1{K::kEnvelope, 1.0};
  const FeatureMember deriv{K::kEnvelopeDerivative, 0.3};
  if (name == "envelope") return {name, {env03}};
  if (name == "envelope-all") return {name, {env03, env1, deriv}};
  if (name == "spectrogram") return {name, {{K::kSpectrogram}}};
  if (name == "mfcc") return {name, {{K::kMfcc}}};
  if (name == "pitch") return {name, {{K::kPitch}}};
  if (name == "acoustic-all") return {name, {env03, env1, deriv, {K::kSpectrogram}, {K::kMfcc}, {K::kPitch}}};
  throw InvalidArgument("unknown feature set '" + name + "'");
}

std::vector<std::string> feature_set_names() {
  return {"envelope", "envelope-all", "spectrogram", "mfcc", "pitch", "acoustic-all"};
}

bool is_builtin_feature_set(const std::string& name) {
  const auto names = feature_set_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::Index feature_set_dims(const FeatureSetSpec& spec) {
  Eigen::Index dims = 0;
  for (const auto& m : spec.members) {
    switch (m.kind) {
      case FeatureKind::kEnvelope:
      case FeatureKind::kEnvelopeDerivative: dims += 1; break;
      case FeatureKind::kSpectrogram: dims += SpectrogramParams{}.bands; break;
      case FeatureKind::kMfcc: dims += 3 * MfccParams{}.coefficients; break;
      case FeatureKind::kPitch: dims += 3; break;
    }
  }
  return dims;
}

FeatureMatrix assemble(const FeatureSetSpec& spec, const std::vector<FeatureMatrix>& parts) {
  if (spec.members.empty()) throw InvalidArgument("assemble: feature set '" + spec.name + "' has no members");
  if (parts.size() != spec.members.size()) {
    throw InvalidArgument("assemble: feature set '" + spec.name + "' expects " +
                          std::to_string(spec.members.size()) + " parts, got " + std::to_string(parts.size()));
  }
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.frames() != parts.front().frames()) {
      throw InvalidArgument("assemble: frame count mismatch (" + std::to_string(p.frames()) + " vs " +
                            std::to_string(parts.front().frames()) + ")");
    }
    if (p.frame_rate != parts.front().frame_rate) throw InvalidArgument("assemble: frame rate mismatch");
    cols += p.dims();
  }
  FeatureMatrix out;
  out.frame_rate = parts.front().frame_rate;
  out.data.resize(parts.front().frames(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.data.middleCols(at, p.dims()) = p.data;
    for (Eigen::Index c = 0; c < p.dims(); ++c) {
      out.names.push_back(static_cast<std::size_t>(c) < p.names.size() ? p.names[static_cast<std::size_t>(c)]
                                                                      : "f" + std::to_string(at + c));
    }
    at += p.dims();
  }
  return out;
}

FeatureMatrix extract(const AudioSignal& audio, const FeatureSetSpec& spec, Eigen::Index frames,
                      const ExtractParams& params) {
  std::vector<FeatureMatrix> parts;
  parts.reserve(spec.members.size());
  for (const auto& m : spec.members) {
    FeatureMatrix part;
    switch (m.kind) {
      case FeatureKind::kEnvelope: part = envelope(audio, m.compression); break;
      case FeatureKind::kEnvelopeDerivative: part = envelope_derivative(envelope(audio, m.compression)); break;
      case FeatureKind::kSpectrogram: part = spectrogram(audio, params.spectrogram); break;
      case FeatureKind::kMfcc: part = mfcc(audio, params.mfcc); break;
      case FeatureKind::kPitch: part = pitch(audio, params.pitch); break;
    }
    parts.push_back(frames > 0 ? align_frames(part, frames) : std::move(part));
  }
  return assemble(spec, parts);
}

}  // namespace neurotrack::features
