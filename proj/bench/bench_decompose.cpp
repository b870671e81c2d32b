// Compares the serial seed-fit sweep against the OpenMP one on the same
// residual, and times a full decomposition at each thread count.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "hdm/decomposer.hpp"
#include "hdm/model.hpp"
#include "hdm/synthetic.hpp"

using Clock = std::chrono::steady_clock;

static double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int main(int argc, char** argv) {
  int max_threads = argc > 1 ? std::atoi(argv[1]) : 4;
  hdm::BaseKernel base;
  hdm::GaussianRng rng(42);
  hdm::AtomDrawRanges ranges;
  auto atoms = hdm::draw_atoms(12, 400.0, 15.0, ranges, rng, base);
  hdm::GridSpec grid{0.1, 0.0, 4000};
  hdm::NoiseParams noise{0.0, 0.2, 0.05 * 0.05};
  hdm::SampledSignal y = hdm::hdm_forward(atoms, noise, grid, base, 43);

  hdm::DecomposerConfig cfg;
  cfg.max_iterations = 20;

  // Seed sweep on the raw (centered) signal: serial reference vs parallel.
  double mean = 0.0;
  for (double v : y.samples) mean += v;
  mean /= static_cast<double>(y.samples.size());
  hdm::SampledSignal centered = y;
  for (double& v : centered.samples) v -= mean;
  auto extrema = hdm::find_extrema(centered, cfg);
  std::vector<hdm::SearchBox> boxes;
  for (const auto& e : extrema) {
    auto b = hdm::build_search_space(e, cfg, base);
    if (b.valid) boxes.push_back(b);
  }
  std::printf("seed sweep: %zu boxes, %zu samples\n", boxes.size(), y.samples.size());

  auto t0 = Clock::now();
  auto serial = hdm::fit_seeds_serial(centered, boxes, base, cfg);
  double t_serial = ms_since(t0);
  std::printf("  serial                 %8.1f ms\n", t_serial);

  for (int threads = 1; threads <= max_threads; threads *= 2) {
    hdm::DecomposerConfig pcfg = cfg;
    pcfg.threads = threads;
    t0 = Clock::now();
    auto parallel = hdm::fit_seeds_parallel(centered, boxes, base, pcfg);
    double t_par = ms_since(t0);
    bool identical = parallel.size() == serial.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i)
      identical = parallel[i].ok == serial[i].ok && parallel[i].atom.a == serial[i].atom.a &&
                  parallel[i].atom.omega == serial[i].atom.omega && parallel[i].atom.tau == serial[i].atom.tau;
    std::printf("  parallel (%d threads)   %8.1f ms  speedup %.2fx  %s\n", threads, t_par,
                t_serial / t_par, identical ? "identical" : "MISMATCH");
    if (!identical) return 1;
  }

  // Full decomposition timing.
  for (int threads = 1; threads <= max_threads; threads *= 2) {
    hdm::DecomposerConfig pcfg = cfg;
    pcfg.threads = threads;
    t0 = Clock::now();
    auto d = hdm::decompose(y, pcfg, base);
    std::printf("decompose (%d threads)   %8.1f ms  %zu atoms, %d iterations\n", threads, ms_since(t0),
                d.atoms.size(), d.iterations);
  }
  return 0;
}
