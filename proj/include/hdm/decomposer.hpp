#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hdm/hrf.hpp"
#include "hdm/signal.hpp"

namespace hdm {

enum class SeedOrder { DescendingMagnitude, Chronological };

struct DecomposerConfig {
  // Convergence radius. If xi_abs >= 0 it is used directly; otherwise
  // xi = xi_rel * ||y_centered||^2.
  double xi_abs = -1.0;
  double xi_rel = 0.02;
  int max_iterations = 50;  // L

  // Search-box constants.
  double kappa_a0 = 0.8;
  double kappa_tau0 = 0.8;
  double kappa_tau1 = 3.0;
  double omega_eps = 0.1;  // seconds
  double omega_m = 8.0;    // seconds

  int smoothing_halfwidth = 3;  // samples, moving-average pre-smoothing for extrema
  SeedOrder seed_order = SeedOrder::DescendingMagnitude;
  int n_starts = 3;   // multistart count for each per-seed fit
  // Cap on seeds fit per iteration (highest-priority seeds kept); keeps noisy
  // records from exploding the per-iteration cost. 0 disables the cap.
  int max_seeds_per_iter = 16;
  int threads = 1;    // > 1 fits the seeds of one iteration in parallel

  void validate() const;
};

struct Extremum {
  std::size_t index = 0;
  double t = 0.0;
  double value = 0.0;  // smoothed sample value
};

struct SearchBox {
  double a_lo = 0.0, a_hi = 0.0;
  double omega_lo = 0.0, omega_hi = 0.0;
  double tau_lo = 0.0, tau_hi = 0.0;
  double seed_time = 0.0;  // t_i the box was anchored at
  bool valid = false;
};

struct FitResult {
  KernelAtom atom;
  double local_sse = 0.0;  // windowed objective at the optimum
  bool ok = false;
  std::string diagnostic;
};

struct Decomposition {
  std::vector<KernelAtom> atoms;
  double theta_eps_hat = 0.0;
  double sigma2_hat = 0.0;
  std::vector<double> residual_curve;  // r^(l), starting at r^(0)
  int iterations = 0;
  BaseKernel base;
  bool converged = false;
  double mean_offset = 0.0;  // removed before fitting, restored in reconstructions
  double xi = 0.0;           // threshold actually used
  bool ar_denominator_zero = false;
};

// Local extrema of the smoothed signal: interior strict sign changes of the
// first difference; plateaus report their midpoint sample. Values are the
// smoothed values. Throws if the signal has fewer than 3 samples.
std::vector<Extremum> find_extrema(const SampledSignal& y, const DecomposerConfig& config);

// Moving average with centered window of half-width hw; edges use the
// truncated window.
std::vector<double> moving_average(const std::vector<double>& v, int halfwidth);

// Per-seed parameter box. Amplitude range is sign-aware; the tau range places
// the atom onset (tau - tau0) between kappa_tau0*tau0 and kappa_tau1*tau0
// seconds before t_i. invalid (valid=false) when y_i == 0.
SearchBox build_search_space(const Extremum& e, const DecomposerConfig& config, const BaseKernel& base);

// Squared L2 distance between the atom waveform and the residual over the
// window [t_i, t_i + 2*kappa_tau1*tau0], plus its gradient in (a, omega, tau).
double windowed_sse(const SampledSignal& residual, double t_i, const KernelAtom& atom,
                    const BaseKernel& base, const DecomposerConfig& config,
                    std::array<double, 3>* grad = nullptr);

// Bounded quasi-Newton (BFGS through a sigmoid box bijection) fit of one atom
// against the residual, multistarted; returns the best run.
FitResult fit_atom(const SampledSignal& residual, const SearchBox& box, const BaseKernel& base,
                   const DecomposerConfig& config);

// Closed-form least-squares estimate of the lag-1 regression coefficient of
// y on itself after subtracting the atom reconstruction. Returns {theta, flag}
// where flag is true if the denominator was zero (theta forced to 0).
std::pair<double, bool> estimate_ar(const SampledSignal& y, const std::vector<KernelAtom>& atoms,
                                    const BaseKernel& base);

// sigma2_hat = (1/N) sum S_n^2 with S_n = delta_n - theta*y(n-1).
double estimate_noise_var(const SampledSignal& y, const std::vector<KernelAtom>& atoms, double theta_eps,
                          const BaseKernel& base);

// Full greedy decomposition. The signal is mean-centered first; atoms explain
// the centered signal and mean_offset records the removed mean.
Decomposition decompose(const SampledSignal& y, const DecomposerConfig& config, const BaseKernel& base);

// Serial reference for the per-iteration seed sweep; decompose() with
// threads > 1 must produce identical output. Exposed for tests and benchmarks.
std::vector<FitResult> fit_seeds_serial(const SampledSignal& residual, const std::vector<SearchBox>& boxes,
                                        const BaseKernel& base, const DecomposerConfig& config);
std::vector<FitResult> fit_seeds_parallel(const SampledSignal& residual, const std::vector<SearchBox>& boxes,
                                          const BaseKernel& base, const DecomposerConfig& config);

// Reconstruction including the stored mean offset.
SampledSignal reconstruct_decomposition(const Decomposition& d, const GridSpec& grid);

}  // namespace hdm
