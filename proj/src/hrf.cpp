#include "hdm/hrf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdm {

namespace {
constexpr double kEightLn2 = 5.545177444479562;  // 8 ln 2
constexpr double kTailCutoff = 1e-9;             // relative magnitude below which the tail is dropped

void check_positive(const GammaParams& p) {
  if (!(p.omega > 0.0) || !(p.tau > 0.0))
    throw std::domain_error("GammaParams: omega and tau must be positive");
}

// Smallest s > tau0 with g0(s) <= cutoff, for a unit-amplitude kernel.
double tail_end(const GammaParams& p, double cutoff) {
  GammaParams unit{1.0, p.omega, p.tau};
  double lo = p.tau;
  double hi = 2.0 * p.tau;
  while (gamma_basis(hi, unit) > cutoff) hi *= 2.0;
  for (int i = 0; i < 80 && hi - lo > 1e-9; ++i) {
    double mid = 0.5 * (lo + hi);
    (gamma_basis(mid, unit) > cutoff ? lo : hi) = mid;
  }
  return hi;
}
}  // namespace

double kappa(const GammaParams& p) {
  check_positive(p);
  double r = p.tau / p.omega;
  return kEightLn2 * r * r;
}

double gamma_basis(double t, const GammaParams& p) {
  check_positive(p);
  if (t <= 0.0) return 0.0;
  double k = kappa(p);
  // (t/tau)^k exp(-k (t-tau)/tau), evaluated in log space to avoid overflow
  double log_val = k * std::log(t / p.tau) - k * (t - p.tau) / p.tau;
  return p.a * std::exp(log_val);
}

double gamma_basis_dt(double t, const GammaParams& p) {
  if (t <= 0.0) return 0.0;
  double k = kappa(p);
  return gamma_basis(t, p) * k * (1.0 / t - 1.0 / p.tau);
}

double canonical_hrf(double t, const CanonicalHrfParams& p) {
  return gamma_basis(t, p.increase) - gamma_basis(t, p.undershoot);
}

double atom_argument(double t, const KernelAtom& atom, const BaseKernel& base) {
  return (t - atom.tau + base.params.tau) * base.params.omega / atom.omega;
}

double atom_waveform(double t, const KernelAtom& atom, const BaseKernel& base) {
  if (!(atom.omega > 0.0)) throw std::domain_error("KernelAtom: omega must be positive");
  double s = atom_argument(t, atom, base);
  if (s <= 0.0) return 0.0;
  return atom.a * gamma_basis(s, base.params);
}

double atom_peak_time(const KernelAtom& atom, const BaseKernel& base) {
  return atom.tau + base.params.tau * (atom.omega / base.params.omega - 1.0);
}

TimeInterval atom_support(const KernelAtom& atom, const BaseKernel& base) {
  double begin = atom.tau - base.params.tau;  // s(t) <= 0 before this
  double s_end = tail_end(base.params, kTailCutoff);
  double end = begin + s_end * atom.omega / base.params.omega;
  return {begin, end};
}

SampledSignal sample_atom(const KernelAtom& atom, const BaseKernel& base, double t_h, double horizon) {
  if (!(t_h > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("sample_atom: t_h and horizon must be positive");
  std::size_t n = static_cast<std::size_t>(std::floor(horizon / t_h)) + 1;
  SampledSignal out{t_h, 0.0, std::vector<double>(n, 0.0)};
  accumulate_atom(out, atom, base);
  return out;
}

void accumulate_atom(SampledSignal& out, const KernelAtom& atom, const BaseKernel& base, double scale) {
  if (atom.a == 0.0 || scale == 0.0) return;
  TimeInterval sup = atom_support(atom, base);
  auto idx_of = [&](double t) { return (t - out.t0) / out.t_h; };
  std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(std::ceil(idx_of(sup.begin)));
  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(std::floor(idx_of(sup.end)));
  lo = std::max<std::ptrdiff_t>(lo, 0);
  hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(out.samples.size()) - 1);
  for (std::ptrdiff_t i = lo; i <= hi; ++i)
    out.samples[static_cast<std::size_t>(i)] += scale * atom_waveform(out.time_at(static_cast<std::size_t>(i)), atom, base);
}

}  // namespace hdm
