#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "hdm/signal.hpp"

namespace hdm {

// Linear-phase FIR band-pass filter (Hamming-windowed sinc), taps normalized
// to unit gain at the band center (DC when low == 0).
struct FirFilter {
  int order = 100;
  std::vector<double> taps;  // order + 1 coefficients, symmetric
  double low_hz = 0.0;
  double high_hz = 0.0;
  double fs_hz = 10.0;
};

FirFilter design_bandpass(double low_hz, double high_hz, double fs_hz, int order = 100);

// Complex frequency response H(f) of the taps at frequency f_hz.
std::complex<double> frequency_response(const FirFilter& f, double f_hz);

// The five hemodynamic bands 0-0.02 ... 0.08-0.10 Hz (0.02 Hz spacing).
std::vector<FirFilter> default_bank(double fs_hz, int order = 100);

// Causal convolution with the taps, shifted left by the order/2 group delay so
// features stay time-aligned. The first and last order/2 samples are edge
// region (computed against zero padding).
SampledSignal apply(const FirFilter& f, const SampledSignal& y);

// Per band: log(mean of squared filtered samples + 1e-12) over [begin, end).
std::vector<double> band_powers(const SampledSignal& y, const std::vector<FirFilter>& bank,
                                std::size_t begin, std::size_t end);

// Plain-text column dump of the taps (one coefficient per line).
std::string format_taps(const FirFilter& f);

}  // namespace hdm
