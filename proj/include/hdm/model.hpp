#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hdm/hrf.hpp"
#include "hdm/signal.hpp"

namespace hdm {

// Deterministic Gaussian source. Uniforms come from std::mt19937_64 (whose
// output stream is fixed by the standard); the normal transform is our own
// Box-Muller so the stream does not depend on the C++ library vendor.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

  double normal();                 // N(0, 1)
  double uniform();                // [0, 1)
  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Noise description shared by both generative models. rho drives the AR(1)
// process on epsilon (GLM); theta_eps drives the lagged-output regression (HDM).
struct NoiseParams {
  double rho = 0.0;
  double theta_eps = 0.0;
  double sigma2 = 0.0;  // innovation variance, >= 0
};

// u(n T_h): sum of the heights of events covering that instant.
// Coverage is half-open: [onset, onset + duration).
SampledSignal boxcar(const StimulusTrain& train, const GridSpec& grid);

// Discrete causal convolution scaled by T_h; output truncated to u's length.
// Throws if sampling periods differ.
SampledSignal convolve(const SampledSignal& u, const SampledSignal& h);

// y(n) = beta * x(n) + eps(n), eps(n) = rho*eps(n-1) + eta(n), eta ~ N(0, sigma2).
SampledSignal glm_forward(const SampledSignal& x, double beta, const NoiseParams& noise, std::uint64_t seed);

// y(n) = sum_k h_k(n T_h) + theta_eps*y(n-1) + eta(n), with y(-1) = 0.
SampledSignal hdm_forward(const std::vector<KernelAtom>& atoms, const NoiseParams& noise, const GridSpec& grid,
                          const BaseKernel& base, std::uint64_t seed);

// Noiseless sum of atom waveforms on the grid.
SampledSignal reconstruct(const std::vector<KernelAtom>& atoms, const BaseKernel& base, const GridSpec& grid);

// Conditional log-likelihood of y under the HDM with Gaussian innovations:
//   -(N/2) log(2 pi) - (N/2) log sigma2 - (1/(2 sigma2)) sum (S_n)^2
// where S_n = y(n) - sum_k h_k(n) - theta_eps * y(n-1) and N = length - 1.
double log_likelihood(const SampledSignal& y, const std::vector<KernelAtom>& atoms, double theta_eps,
                      double sigma2, const BaseKernel& base);

}  // namespace hdm
