#include "hdm/filterbank.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hdm {

namespace {
double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}
}  // namespace

FirFilter design_bandpass(double low_hz, double high_hz, double fs_hz, int order) {
  if (!(low_hz >= 0.0) || !(low_hz < high_hz) || !(high_hz <= fs_hz / 2.0))
    throw std::invalid_argument("design_bandpass: need 0 <= low < high <= fs/2");
  if (order < 2 || order % 2 != 0) throw std::invalid_argument("design_bandpass: order must be even and >= 2");

  FirFilter f;
  f.order = order;
  f.low_hz = low_hz;
  f.high_hz = high_hz;
  f.fs_hz = fs_hz;
  f.taps.resize(static_cast<std::size_t>(order) + 1);

  double f1 = low_hz / fs_hz;   // cycles per sample
  double f2 = high_hz / fs_hz;
  int half = order / 2;
  for (int n = 0; n <= order; ++n) {
    int m = n - half;
    double ideal = 2.0 * f2 * sinc(2.0 * f2 * m) - 2.0 * f1 * sinc(2.0 * f1 * m);
    double w = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / order);
    f.taps[static_cast<std::size_t>(n)] = ideal * w;
  }

  double center = low_hz == 0.0 ? 0.0 : 0.5 * (low_hz + high_hz);
  double gain = std::abs(frequency_response(f, center));
  if (!(gain > 0.0)) throw std::runtime_error("design_bandpass: degenerate center gain");
  for (auto& t : f.taps) t /= gain;
  return f;
}

std::complex<double> frequency_response(const FirFilter& f, double f_hz) {
  std::complex<double> acc{0.0, 0.0};
  double wf = 2.0 * M_PI * f_hz / f.fs_hz;
  for (std::size_t n = 0; n < f.taps.size(); ++n)
    acc += f.taps[n] * std::exp(std::complex<double>(0.0, -wf * static_cast<double>(n)));
  return acc;
}

std::vector<FirFilter> default_bank(double fs_hz, int order) {
  std::vector<FirFilter> bank;
  const double edges[] = {0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
  for (int i = 0; i < 5; ++i) bank.push_back(design_bandpass(edges[i], edges[i + 1], fs_hz, order));
  return bank;
}

SampledSignal apply(const FirFilter& f, const SampledSignal& y) {
  if (std::abs(1.0 / y.t_h - f.fs_hz) > 1e-6)
    throw std::invalid_argument("apply: filter fs does not match signal rate");
  std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.samples.size());
  std::ptrdiff_t half = f.order / 2;
  SampledSignal out{y.t_h, y.t0, std::vector<double>(y.samples.size(), 0.0)};
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k <= f.order; ++k) {
      std::ptrdiff_t j = i - k + half;  // group-delay compensated index
      if (j >= 0 && j < n) acc += f.taps[static_cast<std::size_t>(k)] * y.samples[static_cast<std::size_t>(j)];
    }
    out.samples[i] = acc;
  }
  return out;
}

std::vector<double> band_powers(const SampledSignal& y, const std::vector<FirFilter>& bank,
                                std::size_t begin, std::size_t end) {
  if (begin >= end || end > y.samples.size()) throw std::invalid_argument("band_powers: empty or out-of-range window");
  std::vector<double> out;
  out.reserve(bank.size());
  for (const auto& f : bank) {
    SampledSignal filtered = apply(f, y);
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += filtered.samples[i] * filtered.samples[i];
    out.push_back(std::log(acc / static_cast<double>(end - begin) + 1e-12));
  }
  return out;
}

std::string format_taps(const FirFilter& f) {
  std::ostringstream os;
  os.precision(17);
  for (double t : f.taps) os << t << "\n";
  return os.str();
}

}  // namespace hdm
