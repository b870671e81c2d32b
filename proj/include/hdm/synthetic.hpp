#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hdm/harness.hpp"
#include "hdm/hrf.hpp"
#include "hdm/model.hpp"

namespace hdm {

// Parameter ranges for randomly drawn atoms. Defaults keep every draw inside
// the decomposer's search boxes (omega >= 0.8*omega0 so an atom peaking at an
// observed extremum has its tau inside the seeded tau range).
struct AtomDrawRanges {
  double a_lo = 0.8, a_hi = 1.5;
  double omega_lo = 4.6, omega_hi = 7.4;
  bool random_sign = false;
};

// K atoms with peak times uniformly spread over [margin, duration - margin],
// at least min_spacing apart (best effort, deterministic given the rng).
std::vector<KernelAtom> draw_atoms(int k, double duration, double min_spacing, const AtomDrawRanges& ranges,
                                   GaussianRng& rng, const BaseKernel& base);

// Synthetic 4-class benchmark: blocks of block_s seconds cycling
// rest, 0-back, 2-back, 3-back; within each block atoms appear at the class's
// rate (atoms per minute) with random-sign amplitudes, plus white noise.
// Class information is carried by the atom rate only.
struct NbackSimConfig {
  double fs = 10.0;
  double block_s = 80.0;
  int n_blocks = 12;  // total blocks; labels cycle in class order
  std::array<double, kNumClasses> rates_per_min = {1.0, 3.0, 6.0, 9.0};
  AtomDrawRanges atom_ranges{0.8, 1.4, 4.6, 7.4, true};
  double noise_sigma = 0.08;
  double theta_eps = 0.0;
  int channels = 1;
};

struct NbackSim {
  Recording recording;
  std::vector<std::vector<KernelAtom>> truth;  // per channel
};

NbackSim simulate_nback(const NbackSimConfig& config, std::uint64_t seed);

}  // namespace hdm
