#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hdm {

// Uniformly sampled time series. samples[n] is the value at t0 + n*t_h.
struct SampledSignal {
  double t_h = 0.1;  // sampling period, seconds
  double t0 = 0.0;   // time of samples[0], seconds
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t n) const { return t0 + static_cast<double>(n) * t_h; }
  double duration() const { return static_cast<double>(samples.size()) * t_h; }
};

// Shape of a sample grid without the values.
struct GridSpec {
  double t_h = 0.1;
  double t0 = 0.0;
  std::size_t n = 0;

  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * t_h; }
  SampledSignal zeros() const { return SampledSignal{t_h, t0, std::vector<double>(n, 0.0)}; }
};

inline GridSpec grid_of(const SampledSignal& s) { return GridSpec{s.t_h, s.t0, s.samples.size()}; }

struct StimulusEvent {
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds, >= 0
  double height = 1.0;    // dimensionless
};

// Onsets must be non-decreasing.
struct StimulusTrain {
  std::vector<StimulusEvent> events;

  void validate() const {
    double prev = -1e300;
    for (const auto& e : events) {
      if (e.onset < prev) throw std::invalid_argument("StimulusTrain: onsets must be non-decreasing");
      if (e.duration < 0) throw std::invalid_argument("StimulusTrain: negative duration");
      prev = e.onset;
    }
  }
};

inline double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace hdm
