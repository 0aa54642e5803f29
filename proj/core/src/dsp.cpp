#include "neurotrack/dsp.hpp"

#include "neurotrack/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace neurotrack::dsp {

namespace {

using cplx = std::complex<double>;

// Steady-state DF2T state of one section for a unit step input.
std::array<double, 2> step_state(const Biquad& s) {
  const double b0 = s.b[0];
  const double rhs0 = s.b[1] - s.a[1] * b0;
  const double rhs1 = s.b[2] - s.a[2] * b0;
  const double z0 = (rhs0 + rhs1) / (1.0 + s.a[1] + s.a[2]);
  return {z0, rhs1 - s.a[2] * z0};
}

std::vector<std::array<double, 2>> cascade_step_state(const Sos& sos) {
  std::vector<std::array<double, 2>> zi(sos.size());
  double scale = 1.0;
  for (std::size_t i = 0; i < sos.size(); ++i) {
    const auto z = step_state(sos[i]);
    zi[i] = {scale * z[0], scale * z[1]};
    const auto& s = sos[i];
    scale *= (s.b[0] + s.b[1] + s.b[2]) / (s.a[0] + s.a[1] + s.a[2]);
  }
  return zi;
}

void run_cascade(const Sos& sos, std::vector<double>& x, std::vector<std::array<double, 2>> state) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& q = sos[s];
    double z1 = state[s][0];
    double z2 = state[s][1];
    for (double& v : x) {
      const double in = v;
      const double out = q.b[0] * in + z1;
      z1 = q.b[1] * in - q.a[1] * out + z2;
      z2 = q.b[2] * in - q.a[2] * out;
      v = out;
    }
  }
}

}  // namespace

Sos butterworth_bandpass(int order, double low_hz, double high_hz, double sample_rate) {
  if (order < 1) throw InvalidArgument("butterworth_bandpass: order must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(sample_rate > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < nyquist)) {
    throw InvalidArgument("butterworth_bandpass: need 0 < low < high < Nyquist (" +
                          std::to_string(nyquist) + " Hz), got " + std::to_string(low_hz) +
                          "-" + std::to_string(high_hz) + " Hz");
  }
  const double fs2 = 2.0 * sample_rate;
  const double w_lo = fs2 * std::tan(std::numbers::pi * low_hz / sample_rate);
  const double w_hi = fs2 * std::tan(std::numbers::pi * high_hz / sample_rate);
  const double bw = w_hi - w_lo;
  const double w0sq = w_lo * w_hi;

  // Analog prototype poles in the upper half plane (plus the real pole for odd
  // orders), each mapped to a band-pass pole pair and then to the z-plane.
  std::vector<cplx> complex_poles;
  std::vector<double> real_poles;
  const auto bilinear = [fs2](cplx s) { return (fs2 + s) / (fs2 - s); };
  for (int k = 0; k < order; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order));
    if (p.imag() < -1e-12) continue;  // conjugate of one already handled
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0sq);
    for (const cplx s : {half + root, half - root}) {
      const cplx z = bilinear(s);
      if (std::abs(z.imag()) < 1e-14) {
        real_poles.push_back(z.real());
      } else if (p.imag() > 1e-12) {
        complex_poles.push_back(z);  // conjugate implied
      } else {
        // Real prototype pole giving a complex pair: keep one member.
        if (z.imag() > 0.0) complex_poles.push_back(z);
      }
    }
  }

  Sos sos;
  for (const cplx& z : complex_poles) {
    Biquad q;
    q.b = {1.0, 0.0, -1.0};
    q.a = {1.0, -2.0 * z.real(), std::norm(z)};
    sos.push_back(q);
  }
  std::sort(real_poles.begin(), real_poles.end());
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    Biquad q;
    q.b = {1.0, 0.0, -1.0};
    q.a = {1.0, -(real_poles[i] + real_poles[i + 1]), real_poles[i] * real_poles[i + 1]};
    sos.push_back(q);
  }
  if (static_cast<int>(sos.size()) != order) {
    throw NumericError("butterworth_bandpass: pole pairing failed");
  }

  // Unit gain at the band centre.
  const double centre_hz = sample_rate / std::numbers::pi * std::atan(std::sqrt(w0sq) / fs2);
  const double gain = std::abs(frequency_response(sos, centre_hz, sample_rate));
  for (double& c : sos.front().b) c /= gain;
  return sos;
}

std::complex<double> frequency_response(const Sos& sos, double f_hz, double sample_rate) {
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / sample_rate);
  cplx h{1.0, 0.0};
  for (const auto& q : sos) {
    const cplx num = q.b[0] + zinv * (q.b[1] + zinv * q.b[2]);
    const cplx den = q.a[0] + zinv * (q.a[1] + zinv * q.a[2]);
    h *= num / den;
  }
  return h;
}

Vector sos_filter(const Sos& sos, const Vector& x) {
  std::vector<double> buf(x.data(), x.data() + x.size());
  run_cascade(sos, buf, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
  return Eigen::Map<const Vector>(buf.data(), static_cast<Eigen::Index>(buf.size()));
}

Vector sos_filtfilt(const Sos& sos, const Vector& x, int pad_len) {
  const Eigen::Index n = x.size();
  if (n == 0) return x;
  Eigen::Index pad = pad_len < 0 ? static_cast<Eigen::Index>(6 * sos.size()) : pad_len;
  pad = std::min<Eigen::Index>(pad, n - 1);

  std::vector<double> ext(static_cast<std::size_t>(n + 2 * pad));
  for (Eigen::Index i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  for (Eigen::Index i = 0; i < n; ++i) ext[pad + i] = x[i];
  for (Eigen::Index i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  const auto zi = cascade_step_state(sos);
  auto scaled = [&zi](double v) {
    auto s = zi;
    for (auto& z : s) z = {z[0] * v, z[1] * v};
    return s;
  };
  run_cascade(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  run_cascade(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());

  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = ext[pad + i];
  return y;
}

std::pair<int, int> rational_factors(double from_rate, double to_rate) {
  if (!(from_rate > 0.0) || !(to_rate > 0.0)) {
    throw InvalidArgument("resample: rates must be positive");
  }
  const double from_mhz = std::round(from_rate * 1000.0);
  const double to_mhz = std::round(to_rate * 1000.0);
  if (std::abs(from_mhz - from_rate * 1000.0) > 1e-6 * from_mhz ||
      std::abs(to_mhz - to_rate * 1000.0) > 1e-6 * to_mhz || from_mhz > 2e12 || to_mhz > 2e12) {
    throw InvalidArgument("resample: rates must be integral in millihertz");
  }
  const auto a = static_cast<long long>(from_mhz);
  const auto b = static_cast<long long>(to_mhz);
  const long long g = std::gcd(a, b);
  const long long up = b / g;
  const long long down = a / g;
  if (up > 1'000'000 || down > 1'000'000) {
    throw InvalidArgument("resample: rate ratio too irregular for polyphase resampling");
  }
  return {static_cast<int>(up), static_cast<int>(down)};
}

Vector resample_poly(const Vector& x, int up, int down, double kaiser_beta) {
  if (up < 1 || down < 1) throw InvalidArgument("resample_poly: factors must be positive");
  const int g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return x;

  const long long n_in = x.size();
  const long long n_out = (n_in * up + down - 1) / down;
  const int max_rate = std::max(up, down);
  const long long half_len = 10LL * max_rate;
  const long long taps = 2 * half_len + 1;

  // Low-pass at the lower of the two Nyquist frequencies, gain `up`.
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double cutoff = 1.0 / max_rate;
  const double i0_beta = std::cyl_bessel_i(0.0, kaiser_beta);
  double sum = 0.0;
  for (long long m = 0; m < taps; ++m) {
    const double t = static_cast<double>(m - half_len);
    const double arg = std::numbers::pi * cutoff * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(arg) / arg;
    const double r = 2.0 * static_cast<double>(m) / static_cast<double>(taps - 1) - 1.0;
    const double w = std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[static_cast<std::size_t>(m)] = cutoff * sinc * w;
    sum += h[static_cast<std::size_t>(m)];
  }
  for (double& v : h) v *= static_cast<double>(up) / sum;

  Vector y = Vector::Zero(n_out);
  for (long long j = 0; j < n_out; ++j) {
    const long long t = j * down;
    const long long first = t - half_len;
    const long long k_lo = first > 0 ? (first + up - 1) / up : 0;
    const long long k_hi = std::min(n_in - 1, (t + half_len) / up);
    double acc = 0.0;
    for (long long k = k_lo; k <= k_hi; ++k) {
      acc += x[k] * h[static_cast<std::size_t>(t - k * up + half_len)];
    }
    y[j] = acc;
  }
  return y;
}

Vector resample(const Vector& x, double from_rate, double to_rate) {
  const auto [up, down] = rational_factors(from_rate, to_rate);
  return resample_poly(x, up, down);
}

Vector hann(std::size_t n) {
  Vector w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    w[static_cast<Eigen::Index>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

MagnitudeSpectrum::MagnitudeSpectrum(std::size_t nfft) : nfft_(nfft), in_(nfft), out_(nfft) {
  if (nfft < 2) throw InvalidArgument("MagnitudeSpectrum: nfft must be >= 2");
}

void MagnitudeSpectrum::compute(const Vector& frame, Vector& magnitude) {
  if (static_cast<std::size_t>(frame.size()) > nfft_) {
    throw InvalidArgument("MagnitudeSpectrum: frame longer than nfft");
  }
  std::fill(in_.begin(), in_.end(), 0.0);
  std::copy(frame.data(), frame.data() + frame.size(), in_.begin());
  Eigen::FFT<double> fft;
  fft.fwd(out_, in_);
  magnitude.resize(static_cast<Eigen::Index>(bins()));
  for (std::size_t k = 0; k < bins(); ++k) magnitude[static_cast<Eigen::Index>(k)] = std::abs(out_[k]);
}

}  // namespace neurotrack::dsp
