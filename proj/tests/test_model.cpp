#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hdm/model.hpp"

using namespace hdm;

TEST_CASE("GaussianRng is deterministic with sane moments") {
  GaussianRng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  GaussianRng rng(7);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / n, var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  GaussianRng u(9);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("boxcar half-open coverage and stacking") {
  StimulusTrain train;
  train.events = {{1.0, 2.0, 1.0}, {2.0, 2.0, 0.5}};
  GridSpec grid{0.5, 0.0, 12};
  SampledSignal u = boxcar(train, grid);
  // t=0.5: nothing; t=1.0: first event starts; t=3.0: first ends (half-open).
  CHECK(u.samples[1] == 0.0);
  CHECK(u.samples[2] == 1.0);
  CHECK(u.samples[5] == 1.5);  // t=2.5, both active
  CHECK(u.samples[6] == 0.5);  // t=3.0, first just ended
  CHECK(u.samples[8] == 0.0);  // t=4.0, second just ended
  StimulusTrain bad;
  bad.events = {{2.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("convolve against a hand-rolled reference") {
  SampledSignal u{0.1, 0.0, {1.0, 2.0, 0.0, -1.0}};
  SampledSignal h{0.1, 0.0, {0.5, 0.25}};
  SampledSignal y = convolve(u, h);
  REQUIRE(y.size() == u.size());
  // y[n] = T_h * sum_m u[m] h[n-m]
  CHECK(y.samples[0] == doctest::Approx(0.1 * 0.5).epsilon(1e-12));
  CHECK(y.samples[1] == doctest::Approx(0.1 * (2.0 * 0.5 + 1.0 * 0.25)).epsilon(1e-12));
  CHECK(y.samples[2] == doctest::Approx(0.1 * (0.0 + 2.0 * 0.25)).epsilon(1e-12));
  CHECK(y.samples[3] == doctest::Approx(0.1 * (-0.5 + 0.0)).epsilon(1e-12));
  // Scaled delta is the identity.
  SampledSignal delta{0.1, 0.0, {10.0}};
  SampledSignal id = convolve(u, delta);
  for (std::size_t n = 0; n < u.size(); ++n) CHECK(id.samples[n] == doctest::Approx(u.samples[n]).epsilon(1e-12));
  SampledSignal wrong{0.2, 0.0, {1.0}};
  CHECK_THROWS(convolve(u, wrong));
}

TEST_CASE("glm_forward AR(1) noise autocorrelation") {
  GridSpec grid{0.1, 0.0, 50000};
  SampledSignal x = grid.zeros();
  NoiseParams noise{0.5, 0.0, 1.0};
  SampledSignal y = glm_forward(x, 0.0, noise, 99);
  // With beta=0 the output is the AR(1) process itself.
  double num = 0.0, den = 0.0, mean = 0.0;
  for (double v : y.samples) mean += v;
  mean /= static_cast<double>(y.size());
  for (std::size_t n = 1; n < y.size(); ++n) {
    num += (y.samples[n] - mean) * (y.samples[n - 1] - mean);
    den += (y.samples[n - 1] - mean) * (y.samples[n - 1] - mean);
  }
  CHECK(num / den == doctest::Approx(0.5).epsilon(0.05));
  // Marginal variance of a stationary AR(1): sigma2 / (1 - rho^2).
  double var = 0.0;
  for (double v : y.samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  CHECK(var == doctest::Approx(1.0 / 0.75).epsilon(0.1));
}

TEST_CASE("glm_forward regression part") {
  GridSpec grid{0.1, 0.0, 100};
  SampledSignal x = grid.zeros();
  for (std::size_t n = 0; n < x.size(); ++n) x.samples[n] = static_cast<double>(n);
  NoiseParams none{0.0, 0.0, 0.0};
  SampledSignal y = glm_forward(x, 2.5, none, 1);
  for (std::size_t n = 0; n < y.size(); ++n) CHECK(y.samples[n] == doctest::Approx(2.5 * x.samples[n]).epsilon(1e-12));
}

TEST_CASE("hdm_forward noiseless equals reconstruct; recursion checks out") {
  BaseKernel base;
  std::vector<KernelAtom> atoms = {{1.2, 5.0, 20.0}, {-0.6, 7.0, 45.0}};
  GridSpec grid{0.1, 0.0, 900};
  NoiseParams none{0.0, 0.0, 0.0};
  SampledSignal y0 = hdm_forward(atoms, none, grid, base, 5);
  SampledSignal recon = reconstruct(atoms, base, grid);
  for (std::size_t n = 0; n < y0.size(); ++n) CHECK(y0.samples[n] == doctest::Approx(recon.samples[n]).epsilon(1e-12));

  // theta_eps recursion, still noiseless: y(n) = h(n) + theta*y(n-1).
  NoiseParams lagged{0.0, 0.4, 0.0};
  SampledSignal y1 = hdm_forward(atoms, lagged, grid, base, 5);
  CHECK(y1.samples[0] == doctest::Approx(recon.samples[0]).epsilon(1e-12));
  for (std::size_t n = 1; n < y1.size(); ++n)
    CHECK(y1.samples[n] == doctest::Approx(recon.samples[n] + 0.4 * y1.samples[n - 1]).epsilon(1e-9));

  // Same seed -> identical; different seed -> different (with noise).
  NoiseParams noisy{0.0, 0.0, 0.01};
  SampledSignal a = hdm_forward(atoms, noisy, grid, base, 7);
  SampledSignal b = hdm_forward(atoms, noisy, grid, base, 7);
  SampledSignal c = hdm_forward(atoms, noisy, grid, base, 8);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
}

TEST_CASE("log_likelihood matches direct evaluation and profile identity") {
  BaseKernel base;
  std::vector<KernelAtom> atoms = {{1.0, 5.2, 10.0}};
  GridSpec grid{0.1, 0.0, 500};
  NoiseParams noise{0.0, 0.3, 0.02};
  SampledSignal y = hdm_forward(atoms, noise, grid, base, 17);
  SampledSignal recon = reconstruct(atoms, base, grid);

  // Independent oracle: accumulate the definition directly.
  double sigma2 = 0.02, theta = 0.3;
  std::size_t N = y.size() - 1;
  double ss = 0.0;
  for (std::size_t n = 1; n < y.size(); ++n) {
    double s = y.samples[n] - recon.samples[n] - theta * y.samples[n - 1];
    ss += s * s;
  }
  double expected = -0.5 * static_cast<double>(N) * std::log(2.0 * M_PI) -
                    0.5 * static_cast<double>(N) * std::log(sigma2) - ss / (2.0 * sigma2);
  CHECK(log_likelihood(y, atoms, theta, sigma2, base) == doctest::Approx(expected).epsilon(1e-10));

  // Profile identity: at sigma2_hat = ss/N the value is -(N/2)(log 2pi + log s2 + 1).
  double s2hat = ss / static_cast<double>(N);
  double prof = -0.5 * static_cast<double>(N) * (std::log(2.0 * M_PI) + std::log(s2hat) + 1.0);
  CHECK(log_likelihood(y, atoms, theta, s2hat, base) == doctest::Approx(prof).epsilon(1e-10));

  CHECK_THROWS_AS(log_likelihood(y, atoms, theta, 0.0, base), std::domain_error);
  CHECK_THROWS_AS(log_likelihood(y, atoms, theta, -1.0, base), std::domain_error);
}
