#include "hdm/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace hdm {

namespace {
KernelAtom draw_one(double peak_time, const AtomDrawRanges& r, GaussianRng& rng, const BaseKernel& base) {
  KernelAtom atom;
  atom.a = r.a_lo + (r.a_hi - r.a_lo) * rng.uniform();
  if (r.random_sign && rng.uniform() < 0.5) atom.a = -atom.a;
  atom.omega = r.omega_lo + (r.omega_hi - r.omega_lo) * rng.uniform();
  // Place tau so the waveform peaks at peak_time.
  atom.tau = peak_time - base.params.tau * (atom.omega / base.params.omega - 1.0);
  return atom;
}
}  // namespace

std::vector<KernelAtom> draw_atoms(int k, double duration, double min_spacing, const AtomDrawRanges& ranges,
                                   GaussianRng& rng, const BaseKernel& base) {
  double margin = base.params.tau + 2.0;
  std::vector<double> peaks;
  for (int i = 0; i < k; ++i) {
    double p = 0.0;
    bool ok = false;
    for (int tries = 0; tries < 200 && !ok; ++tries) {
      p = margin + (duration - 2.0 * margin) * rng.uniform();
      ok = true;
      for (double q : peaks) ok = ok && std::abs(p - q) >= min_spacing;
    }
    peaks.push_back(p);
  }
  std::sort(peaks.begin(), peaks.end());
  std::vector<KernelAtom> atoms;
  atoms.reserve(static_cast<std::size_t>(k));
  for (double p : peaks) atoms.push_back(draw_one(p, ranges, rng, base));
  return atoms;
}

NbackSim simulate_nback(const NbackSimConfig& config, std::uint64_t seed) {
  BaseKernel base;
  double duration = config.block_s * static_cast<double>(config.n_blocks);
  double t_h = 1.0 / config.fs;
  std::size_t n = static_cast<std::size_t>(std::llround(duration / t_h));
  GridSpec grid{t_h, 0.0, n};

  NbackSim sim;
  sim.recording.subject = "synthetic";
  for (int c = 0; c < config.channels; ++c) {
    GaussianRng rng(seed ^ (0x51ED2700ULL + static_cast<std::uint64_t>(c)));
    std::vector<KernelAtom> atoms;
    for (int b = 0; b < config.n_blocks; ++b) {
      int klass = b % kNumClasses;
      double rate = config.rates_per_min[static_cast<std::size_t>(klass)];
      double t_begin = config.block_s * static_cast<double>(b);
      int count = static_cast<int>(std::floor(rate * config.block_s / 60.0 + rng.uniform()));
      for (int i = 0; i < count; ++i) {
        double peak = t_begin + 4.0 + (config.block_s - 8.0) * rng.uniform();
        atoms.push_back(draw_one(peak, config.atom_ranges, rng, base));
      }
    }
    std::sort(atoms.begin(), atoms.end(), [](const KernelAtom& x, const KernelAtom& y) { return x.tau < y.tau; });
    NoiseParams noise{0.0, config.theta_eps, config.noise_sigma * config.noise_sigma};
    SampledSignal y = hdm_forward(atoms, noise, grid, base, seed ^ (0xBADC0FFEULL + static_cast<std::uint64_t>(c)));
    sim.recording.channel_names.push_back("ch" + std::to_string(c));
    sim.recording.channels.push_back(std::move(y));
    sim.truth.push_back(std::move(atoms));
  }
  for (int b = 0; b < config.n_blocks; ++b) {
    int klass = b % kNumClasses;
    if (klass == static_cast<int>(Label::Rest)) continue;  // rest blocks are marker gaps
    LabeledEvent e;
    e.onset = config.block_s * static_cast<double>(b);
    e.duration = config.block_s;
    e.label = static_cast<Label>(klass);
    sim.recording.markers.push_back(e);
  }
  return sim;
}

}  // namespace hdm
