#include "hdm/decomposer.hpp"

#include "hdm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hdm {

void DecomposerConfig::validate() const {
  if (xi_abs < 0.0 && !(xi_rel > 0.0)) throw std::invalid_argument("DecomposerConfig: xi must be positive");
  if (max_iterations < 1) throw std::invalid_argument("DecomposerConfig: L >= 1 required");
  if (!(kappa_a0 > 0.0 && kappa_a0 < 1.0)) throw std::invalid_argument("DecomposerConfig: 0 < kappa_a0 < 1");
  if (!(kappa_tau0 < kappa_tau1)) throw std::invalid_argument("DecomposerConfig: kappa_tau0 < kappa_tau1");
  if (!(omega_eps > 0.0 && omega_eps < omega_m)) throw std::invalid_argument("DecomposerConfig: 0 < omega_eps < omega_m");
  if (smoothing_halfwidth < 0) throw std::invalid_argument("DecomposerConfig: smoothing_halfwidth >= 0");
  if (n_starts < 1) throw std::invalid_argument("DecomposerConfig: n_starts >= 1");
  if (max_seeds_per_iter < 0) throw std::invalid_argument("DecomposerConfig: max_seeds_per_iter >= 0");
  if (threads < 1) throw std::invalid_argument("DecomposerConfig: threads >= 1");
}

std::vector<double> moving_average(const std::vector<double>& v, int halfwidth) {
  if (halfwidth <= 0) return v;
  std::vector<double> out(v.size());
  std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - halfwidth);
    std::ptrdiff_t hi = std::min(n - 1, i + halfwidth);
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<Extremum> find_extrema(const SampledSignal& y, const DecomposerConfig& config) {
  if (y.samples.size() < 3) throw std::invalid_argument("find_extrema: need at least 3 samples");
  std::vector<double> s = moving_average(y.samples, config.smoothing_halfwidth);
  std::vector<Extremum> out;
  auto sgn = [](double d) { return d > 0.0 ? 1 : (d < 0.0 ? -1 : 0); };
  // Index of the last nonzero first difference and its sign. An extremum lies
  // between two nonzero diffs of opposite sign; a zero run in between is a
  // plateau and reports its midpoint sample.
  std::ptrdiff_t last_idx = -1;
  int last_sign = 0;
  std::size_t nd = s.size() - 1;
  for (std::size_t i = 0; i < nd; ++i) {
    int sg = sgn(s[i + 1] - s[i]);
    if (sg == 0) continue;
    if (last_sign != 0 && sg != last_sign) {
      std::size_t mid = (static_cast<std::size_t>(last_idx) + 1 + i) / 2;
      out.push_back({mid, y.time_at(mid), s[mid]});
    }
    last_sign = sg;
    last_idx = static_cast<std::ptrdiff_t>(i);
  }
  return out;
}

SearchBox build_search_space(const Extremum& e, const DecomposerConfig& config, const BaseKernel& base) {
  SearchBox box;
  box.seed_time = e.t;
  if (e.value == 0.0) return box;  // seed skipped
  double a1 = config.kappa_a0 * e.value;
  box.a_lo = std::min(a1, e.value);
  box.a_hi = std::max(a1, e.value);
  box.omega_lo = config.omega_eps;
  box.omega_hi = config.omega_m;
  // The onset tau - tau0 sits kappa_tau0..kappa_tau1 base peak-times before t_i.
  double tau0 = base.params.tau;
  box.tau_lo = e.t - config.kappa_tau1 * tau0 + tau0;
  box.tau_hi = e.t - config.kappa_tau0 * tau0 + tau0;
  box.valid = true;
  return box;
}

double windowed_sse(const SampledSignal& residual, double t_i, const KernelAtom& atom,
                    const BaseKernel& base, const DecomposerConfig& config, std::array<double, 3>* grad) {
  double window_len = 2.0 * config.kappa_tau1 * base.params.tau;
  std::ptrdiff_t n = static_cast<std::ptrdiff_t>(residual.samples.size());
  std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(std::llround((t_i - residual.t0) / residual.t_h));
  std::ptrdiff_t i1 = i0 + static_cast<std::ptrdiff_t>(std::llround(window_len / residual.t_h));
  i0 = std::clamp<std::ptrdiff_t>(i0, 0, n - 1);
  i1 = std::clamp<std::ptrdiff_t>(i1, 0, n - 1);

  const GammaParams& g0 = base.params;
  double k0 = kappa(g0);
  double scale = g0.omega / atom.omega;  // omega0 / omega_k
  double sse = 0.0;
  double ga = 0.0, gw = 0.0, gt = 0.0;
  for (std::ptrdiff_t i = i0; i <= i1; ++i) {
    double t = residual.time_at(static_cast<std::size_t>(i));
    double s = (t - atom.tau + g0.tau) * scale;
    double g = 0.0, gp = 0.0;
    if (s > 0.0) {
      g = gamma_basis(s, GammaParams{1.0, g0.omega, g0.tau});
      gp = g * k0 * (1.0 / s - 1.0 / g0.tau);
    }
    double err = atom.a * g - residual.samples[static_cast<std::size_t>(i)];
    sse += err * err;
    if (grad) {
      ga += 2.0 * err * g;
      gw += 2.0 * err * atom.a * gp * (-s / atom.omega);
      gt += 2.0 * err * atom.a * gp * (-scale);
    }
  }
  if (grad) *grad = {ga, gw, gt};
  return sse;
}

namespace {

struct BoxMap {
  std::array<double, 3> lo, hi;

  std::array<double, 3> to_params(const std::array<double, 3>& u) const {
    std::array<double, 3> x;
    for (int j = 0; j < 3; ++j) {
      double s = 1.0 / (1.0 + std::exp(-u[j]));
      x[j] = lo[j] + (hi[j] - lo[j]) * s;
    }
    return x;
  }
  std::array<double, 3> chain(const std::array<double, 3>& u, const std::array<double, 3>& gx) const {
    std::array<double, 3> gu;
    for (int j = 0; j < 3; ++j) {
      double s = 1.0 / (1.0 + std::exp(-u[j]));
      gu[j] = gx[j] * (hi[j] - lo[j]) * s * (1.0 - s);
    }
    return gu;
  }
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

Vec3 matvec(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += m[i][j] * v[j];
  return r;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm_inf(const Vec3& v) { return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])}); }

// BFGS on the sigmoid-unconstrained objective from one start point.
bool bfgs_run(const SampledSignal& residual, const SearchBox& box, const BaseKernel& base,
              const DecomposerConfig& config, const BoxMap& map, Vec3 u, KernelAtom& atom_out, double& sse_out) {
  auto eval = [&](const Vec3& uu, Vec3* gu) -> double {
    Vec3 x = map.to_params(uu);
    KernelAtom atom{x[0], x[1], x[2]};
    std::array<double, 3> gx{};
    double f = windowed_sse(residual, box.seed_time, atom, base, config, gu ? &gx : nullptr);
    if (gu) *gu = map.chain(uu, gx);
    return f;
  };

  Vec3 g{};
  double f = eval(u, &g);
  if (!std::isfinite(f)) return false;
  Mat3 h{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  for (int iter = 0; iter < 200; ++iter) {
    Vec3 p = matvec(h, g);
    for (auto& v : p) v = -v;
    double slope = dot(g, p);
    if (slope >= 0.0) {  // reset to steepest descent
      h = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
      p = {-g[0], -g[1], -g[2]};
      slope = dot(g, p);
    }
    if (norm_inf(g) < 1e-12 * (1.0 + std::abs(f))) break;

    double alpha = 1.0;
    Vec3 u_new{};
    double f_new = f;
    bool improved = false;
    for (int ls = 0; ls < 50; ++ls) {
      for (int j = 0; j < 3; ++j) u_new[j] = u[j] + alpha * p[j];
      f_new = eval(u_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * slope) {
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;

    Vec3 g_new{};
    f_new = eval(u_new, &g_new);
    Vec3 s_vec{u_new[0] - u[0], u_new[1] - u[1], u_new[2] - u[2]};
    Vec3 y_vec{g_new[0] - g[0], g_new[1] - g[1], g_new[2] - g[2]};
    double sy = dot(s_vec, y_vec);
    if (sy > 1e-14) {
      double rho = 1.0 / sy;
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      Mat3 a{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = (i == j ? 1.0 : 0.0) - rho * s_vec[i] * y_vec[j];
      Mat3 tmp{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) tmp[i][j] += a[i][k] * h[k][j];
      Mat3 h_new{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          for (int k = 0; k < 3; ++k) h_new[i][j] += tmp[i][k] * a[j][k];
          h_new[i][j] += rho * s_vec[i] * s_vec[j];
        }
      h = h_new;
    }
    u = u_new;
    g = g_new;
    if (std::abs(f - f_new) < 1e-15 * (1.0 + std::abs(f))) {
      f = f_new;
      break;
    }
    f = f_new;
  }

  Vec3 x = map.to_params(u);
  atom_out = KernelAtom{x[0], x[1], x[2]};
  sse_out = f;
  return std::isfinite(f);
}

}  // namespace

FitResult fit_atom(const SampledSignal& residual, const SearchBox& box, const BaseKernel& base,
                   const DecomposerConfig& config) {
  FitResult best;
  if (!box.valid) {
    best.diagnostic = "degenerate box (zero-amplitude seed)";
    return best;
  }
  BoxMap map{{box.a_lo, box.omega_lo, box.tau_lo}, {box.a_hi, box.omega_hi, box.tau_hi}};
  best.local_sse = std::numeric_limits<double>::infinity();
  // Starts in normalized box coordinates: center, low corner, high corner.
  const double c = 2.0;  // sigmoid(±2) ~ 0.12 / 0.88
  std::vector<Vec3> starts = {{0, 0, 0}, {-c, -c, -c}, {c, c, c}};
  for (int s = 0; s < config.n_starts && s < static_cast<int>(starts.size()); ++s) {
    KernelAtom atom;
    double sse = 0.0;
    if (bfgs_run(residual, box, base, config, map, starts[static_cast<std::size_t>(s)], atom, sse)) {
      if (sse < best.local_sse) {
        best.atom = atom;
        best.local_sse = sse;
        best.ok = true;
      }
    }
  }
  if (!best.ok) best.diagnostic = "optimizer produced non-finite objective";
  return best;
}

std::vector<FitResult> fit_seeds_serial(const SampledSignal& residual, const std::vector<SearchBox>& boxes,
                                        const BaseKernel& base, const DecomposerConfig& config) {
  std::vector<FitResult> out(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) out[i] = fit_atom(residual, boxes[i], base, config);
  return out;
}

std::vector<FitResult> fit_seeds_parallel(const SampledSignal& residual, const std::vector<SearchBox>& boxes,
                                          const BaseKernel& base, const DecomposerConfig& config) {
  std::vector<FitResult> out(boxes.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.threads)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(boxes.size()); ++i)
    out[static_cast<std::size_t>(i)] = fit_atom(residual, boxes[static_cast<std::size_t>(i)], base, config);
  return out;
}

std::pair<double, bool> estimate_ar(const SampledSignal& y, const std::vector<KernelAtom>& atoms,
                                    const BaseKernel& base) {
  if (y.samples.size() < 2) throw std::invalid_argument("estimate_ar: need at least 2 samples");
  SampledSignal recon = reconstruct(atoms, base, grid_of(y));
  double num = 0.0, den = 0.0;
  for (std::size_t n = 1; n < y.samples.size(); ++n) {
    double delta = y.samples[n] - recon.samples[n];
    num += delta * y.samples[n - 1];
    den += y.samples[n - 1] * y.samples[n - 1];
  }
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}

double estimate_noise_var(const SampledSignal& y, const std::vector<KernelAtom>& atoms, double theta_eps,
                          const BaseKernel& base) {
  if (y.samples.size() < 2) return 0.0;
  SampledSignal recon = reconstruct(atoms, base, grid_of(y));
  double ss = 0.0;
  for (std::size_t n = 1; n < y.samples.size(); ++n) {
    double s = y.samples[n] - recon.samples[n] - theta_eps * y.samples[n - 1];
    ss += s * s;
  }
  return ss / static_cast<double>(y.samples.size() - 1);
}

Decomposition decompose(const SampledSignal& y, const DecomposerConfig& config, const BaseKernel& base) {
  config.validate();
  Decomposition d;
  d.base = base;

  SampledSignal centered = y;
  double mean = centered.samples.empty()
                    ? 0.0
                    : std::accumulate(centered.samples.begin(), centered.samples.end(), 0.0) /
                          static_cast<double>(centered.samples.size());
  for (auto& v : centered.samples) v -= mean;
  d.mean_offset = mean;

  double r = squared_norm(centered.samples);
  // Floor the relative threshold so an (almost) exactly representable signal
  // still registers as converged instead of chasing rounding dust.
  d.xi = config.xi_abs >= 0.0 ? config.xi_abs : std::max(config.xi_rel * r, 1e-12);
  d.residual_curve.push_back(r);
  d.converged = r <= d.xi;

  SampledSignal residual = centered;
  while (!d.converged && d.iterations < config.max_iterations && residual.samples.size() >= 3) {
    std::vector<Extremum> seeds = find_extrema(residual, config);
    if (config.seed_order == SeedOrder::DescendingMagnitude) {
      std::stable_sort(seeds.begin(), seeds.end(),
                       [](const Extremum& a, const Extremum& b) { return std::abs(a.value) > std::abs(b.value); });
    }
    if (config.max_seeds_per_iter > 0 && seeds.size() > static_cast<std::size_t>(config.max_seeds_per_iter))
      seeds.resize(static_cast<std::size_t>(config.max_seeds_per_iter));
    std::vector<SearchBox> boxes;
    boxes.reserve(seeds.size());
    for (const auto& s : seeds) {
      SearchBox b = build_search_space(s, config, base);
      if (b.valid) boxes.push_back(b);
    }
    if (boxes.empty()) break;

    std::vector<FitResult> fits = config.threads > 1 ? fit_seeds_parallel(residual, boxes, base, config)
                                                     : fit_seeds_serial(residual, boxes, base, config);

    // Global residual reduction per candidate, evaluated over the atom support.
    double best_delta = 0.0;
    std::ptrdiff_t best_i = -1;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      if (!fits[i].ok) continue;
      const KernelAtom& atom = fits[i].atom;
      TimeInterval sup = atom_support(atom, base);
      std::ptrdiff_t n = static_cast<std::ptrdiff_t>(residual.samples.size());
      std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil((sup.begin - residual.t0) / residual.t_h)));
      std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, static_cast<std::ptrdiff_t>(std::floor((sup.end - residual.t0) / residual.t_h)));
      double delta = 0.0;
      for (std::ptrdiff_t k = lo; k <= hi; ++k) {
        double hval = atom_waveform(residual.time_at(static_cast<std::size_t>(k)), atom, base);
        delta += hval * (hval - 2.0 * residual.samples[static_cast<std::size_t>(k)]);
      }
      bool better = delta < best_delta;
      bool tie = delta == best_delta && best_i >= 0 &&
                 boxes[i].seed_time < boxes[static_cast<std::size_t>(best_i)].seed_time;
      if (better || tie) {
        best_delta = delta;
        best_i = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best_i < 0) break;  // no candidate strictly decreases the residual

    const KernelAtom& atom = fits[static_cast<std::size_t>(best_i)].atom;
    accumulate_atom(residual, atom, base, -1.0);
    d.atoms.push_back(atom);
    // Re-estimate the mean: each one-sided atom shifts the residual's DC level,
    // and leaving that offset in place would be chased with spurious atoms.
    if (!residual.samples.empty()) {
      double drift = std::accumulate(residual.samples.begin(), residual.samples.end(), 0.0) /
                     static_cast<double>(residual.samples.size());
      for (auto& v : residual.samples) v -= drift;
      d.mean_offset += drift;
    }
    r = squared_norm(residual.samples);
    // Guard against accumulation making the curve tick upward at machine scale.
    r = std::min(r, d.residual_curve.back());
    d.residual_curve.push_back(r);
    ++d.iterations;
    d.converged = r <= d.xi;
  }

  for (auto& v : centered.samples) v -= d.mean_offset - mean;
  if (centered.samples.size() >= 2) {
    auto [theta, flag] = estimate_ar(centered, d.atoms, base);
    d.theta_eps_hat = theta;
    d.ar_denominator_zero = flag;
    d.sigma2_hat = estimate_noise_var(centered, d.atoms, theta, base);
  }
  return d;
}

SampledSignal reconstruct_decomposition(const Decomposition& d, const GridSpec& grid) {
  SampledSignal out = reconstruct(d.atoms, d.base, grid);
  for (auto& v : out.samples) v += d.mean_offset;
  return out;
}

}  // namespace hdm
