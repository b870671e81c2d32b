#include "hdm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace hdm {

double GaussianRng::uniform() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double GaussianRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

SampledSignal boxcar(const StimulusTrain& train, const GridSpec& grid) {
  train.validate();
  SampledSignal out = grid.zeros();
  for (const auto& e : train.events) {
    for (std::size_t i = 0; i < grid.n; ++i) {
      double t = grid.time_at(i);
      if (t >= e.onset && t < e.onset + e.duration) out.samples[i] += e.height;
    }
  }
  return out;
}

SampledSignal convolve(const SampledSignal& u, const SampledSignal& h) {
  if (std::abs(u.t_h - h.t_h) > 1e-12)
    throw std::invalid_argument("convolve: sampling periods differ");
  SampledSignal out{u.t_h, u.t0, std::vector<double>(u.samples.size(), 0.0)};
  for (std::size_t n = 0; n < u.samples.size(); ++n) {
    double acc = 0.0;
    std::size_t kmax = std::min(n, h.samples.size() - 1);
    for (std::size_t k = 0; k <= kmax; ++k) acc += h.samples[k] * u.samples[n - k];
    out.samples[n] = acc * u.t_h;
  }
  return out;
}

SampledSignal glm_forward(const SampledSignal& x, double beta, const NoiseParams& noise, std::uint64_t seed) {
  if (noise.sigma2 < 0.0) throw std::invalid_argument("glm_forward: sigma2 < 0");
  GaussianRng rng(seed);
  double sd = std::sqrt(noise.sigma2);
  SampledSignal out{x.t_h, x.t0, std::vector<double>(x.samples.size(), 0.0)};
  double eps = 0.0;
  for (std::size_t n = 0; n < x.samples.size(); ++n) {
    double eta = sd > 0.0 ? sd * rng.normal() : 0.0;
    eps = (n == 0) ? eta : noise.rho * eps + eta;
    out.samples[n] = beta * x.samples[n] + eps;
  }
  return out;
}

SampledSignal hdm_forward(const std::vector<KernelAtom>& atoms, const NoiseParams& noise, const GridSpec& grid,
                          const BaseKernel& base, std::uint64_t seed) {
  if (noise.sigma2 < 0.0) throw std::invalid_argument("hdm_forward: sigma2 < 0");
  SampledSignal clean = reconstruct(atoms, base, grid);
  GaussianRng rng(seed);
  double sd = std::sqrt(noise.sigma2);
  SampledSignal out{grid.t_h, grid.t0, std::vector<double>(grid.n, 0.0)};
  double prev = 0.0;  // y(-1) = 0
  for (std::size_t n = 0; n < grid.n; ++n) {
    double eta = sd > 0.0 ? sd * rng.normal() : 0.0;
    out.samples[n] = clean.samples[n] + noise.theta_eps * prev + eta;
    prev = out.samples[n];
  }
  return out;
}

SampledSignal reconstruct(const std::vector<KernelAtom>& atoms, const BaseKernel& base, const GridSpec& grid) {
  SampledSignal out = grid.zeros();
  for (const auto& atom : atoms) accumulate_atom(out, atom, base);
  return out;
}

double log_likelihood(const SampledSignal& y, const std::vector<KernelAtom>& atoms, double theta_eps,
                      double sigma2, const BaseKernel& base) {
  if (!(sigma2 > 0.0)) throw std::domain_error("log_likelihood: sigma2 must be positive");
  if (y.samples.size() < 2) throw std::invalid_argument("log_likelihood: need at least 2 samples");
  SampledSignal recon = reconstruct(atoms, base, grid_of(y));
  std::size_t big_n = y.samples.size() - 1;
  double ss = 0.0;
  for (std::size_t n = 1; n <= big_n; ++n) {
    double delta = y.samples[n] - recon.samples[n];
    double s = delta - theta_eps * y.samples[n - 1];
    ss += s * s;
  }
  double dn = static_cast<double>(big_n);
  return -0.5 * dn * std::log(2.0 * M_PI) - 0.5 * dn * std::log(sigma2) - ss / (2.0 * sigma2);
}

}  // namespace hdm
