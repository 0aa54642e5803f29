#pragma once

#include "neurotrack/types.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

// Signal-processing primitives shared by preprocessing, feature extraction and
// the simulator.
namespace neurotrack::dsp {

// One biquad, coefficients normalised so a0 == 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

using Sos = std::vector<Biquad>;

// Digital Butterworth band-pass of the given prototype order (the cascade has
// order 2*order), designed via the bilinear transform with pre-warped edges.
// Requires 0 < low_hz < high_hz < sample_rate/2.
Sos butterworth_bandpass(int order, double low_hz, double high_hz, double sample_rate);

// Complex frequency response of the cascade at f_hz.
std::complex<double> frequency_response(const Sos& sos, double f_hz, double sample_rate);

// Single forward pass, zero initial state.
Vector sos_filter(const Sos& sos, const Vector& x);

// Zero-phase forward-backward filtering. The signal is odd-reflected by
// pad_len samples at each end and each pass starts from the step
// steady-state, scaled by the first sample of the pass. pad_len < 0 selects
// the default of 3 * (2 * sections + 1), clamped to x.size() - 1.
Vector sos_filtfilt(const Sos& sos, const Vector& x, int pad_len = -1);

// Kaiser-windowed sinc polyphase resampler by the rational factor up/down.
// Output length is ceil(n * up / down). Zero-padded at the edges.
Vector resample_poly(const Vector& x, int up, int down, double kaiser_beta = 5.0);

// Resample between rates that are integral in millihertz. Identity (copy)
// when the rates are equal.
Vector resample(const Vector& x, double from_rate, double to_rate);

// Reduced up/down factors for a rate change.
std::pair<int, int> rational_factors(double from_rate, double to_rate);

// Periodic Hann window of length n.
Vector hann(std::size_t n);

// |DFT| of x zero-padded to nfft, bins 0..nfft/2.
class MagnitudeSpectrum {
 public:
  explicit MagnitudeSpectrum(std::size_t nfft);
  std::size_t nfft() const { return nfft_; }
  std::size_t bins() const { return nfft_ / 2 + 1; }
  // frame.size() <= nfft. Output has bins() entries.
  void compute(const Vector& frame, Vector& magnitude);

 private:
  std::size_t nfft_;
  std::vector<double> in_;
  std::vector<std::complex<double>> out_;
};

}  // namespace neurotrack::dsp
