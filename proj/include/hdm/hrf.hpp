#pragma once

#include "hdm/signal.hpp"

namespace hdm {

// One gamma lobe: response height a, FWHM omega, time-to-peak tau.
struct GammaParams {
  double a = 1.0;
  double omega = 5.2;  // seconds, > 0
  double tau = 5.4;    // seconds, > 0
};

// Double-gamma HRF: increase lobe minus undershoot lobe.
// Defaults are the standard sensorimotor values.
struct CanonicalHrfParams {
  GammaParams increase{1.0, 5.2, 5.4};
  GammaParams undershoot{0.35, 10.8, 7.35};
};

// Fixed reference gamma cycle g0 that every decomposed atom rescales.
struct BaseKernel {
  GammaParams params{1.0, 5.2, 5.4};
};

// One decomposed component: amplitude a_k, duration scale omega_k, shift tau_k.
// The waveform is a_k * g0((t - tau_k + tau0) / (omega_k/omega0)).
struct KernelAtom {
  double a = 0.0;
  double omega = 5.2;  // seconds, > 0
  double tau = 0.0;    // seconds
};

// Shape exponent kappa = (8 ln 2) (tau/omega)^2. Throws std::domain_error
// on non-positive omega or tau.
double kappa(const GammaParams& p);

// Gamma basis g(t; a, omega, tau). Zero for t <= 0, peaks at t = tau with
// value exactly a.
double gamma_basis(double t, const GammaParams& p);

// Derivative of gamma_basis with respect to t (t != 0).
double gamma_basis_dt(double t, const GammaParams& p);

double canonical_hrf(double t, const CanonicalHrfParams& p);

// Rescaled argument s(t) = (t - tau_k + tau0) * omega0 / omega_k.
double atom_argument(double t, const KernelAtom& atom, const BaseKernel& base);

double atom_waveform(double t, const KernelAtom& atom, const BaseKernel& base);

// Time at which the atom waveform peaks: tau_k + tau0*(omega_k/omega0 - 1).
double atom_peak_time(const KernelAtom& atom, const BaseKernel& base);

// Support of the atom above the relative magnitude cutoff 1e-9: the waveform
// is zero before first and negligible after second.
struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
};
TimeInterval atom_support(const KernelAtom& atom, const BaseKernel& base);

// Dense samples of the atom waveform on {t0=0, t_h, 2 t_h, ...} up to horizon.
// Samples outside the support cutoff are exactly zero.
SampledSignal sample_atom(const KernelAtom& atom, const BaseKernel& base, double t_h, double horizon);

// Adds the atom waveform into an existing signal, touching only the support range.
void accumulate_atom(SampledSignal& out, const KernelAtom& atom, const BaseKernel& base, double scale = 1.0);

}  // namespace hdm
