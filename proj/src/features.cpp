#include "hdm/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdm {

std::string label_name(Label l) {
  switch (l) {
    case Label::Rest: return "rest";
    case Label::Back0: return "0-back";
    case Label::Back2: return "2-back";
    case Label::Back3: return "3-back";
  }
  throw std::invalid_argument("label_name: bad label");
}

Label label_from_name(const std::string& s) {
  if (s == "rest") return Label::Rest;
  if (s == "0-back") return Label::Back0;
  if (s == "2-back") return Label::Back2;
  if (s == "3-back") return Label::Back3;
  throw std::invalid_argument("unknown label: " + s);
}

void WindowSpec::validate() const {
  if (!(history > 0.0 && horizon > 0.0 && step > 0.0 && fs > 0.0))
    throw std::invalid_argument("WindowSpec: history, horizon, step, fs must be positive");
}

std::size_t WindowSpec::history_samples() const { return static_cast<std::size_t>(std::llround(history * fs)); }
std::size_t WindowSpec::step_samples() const {
  auto s = static_cast<std::size_t>(std::llround(step * fs));
  return s == 0 ? 1 : s;
}
std::size_t WindowSpec::window_start(std::size_t w) const { return w * step_samples(); }

std::size_t WindowSpec::window_count(std::size_t record_samples) const {
  std::size_t need = history_samples() + static_cast<std::size_t>(std::llround(horizon * fs));
  if (record_samples < need) return 0;
  return (record_samples - need) / step_samples() + 1;
}

namespace {
std::string channel_name(const std::vector<std::string>& names, std::size_t c) {
  return c < names.size() ? names[c] : "ch" + std::to_string(c);
}

void check_aligned(const std::vector<SampledSignal>& channels, const WindowSpec& spec) {
  spec.validate();
  if (channels.empty()) throw std::invalid_argument("features: no channels");
  for (const auto& ch : channels) {
    if (ch.samples.size() != channels.front().samples.size())
      throw std::invalid_argument("features: channels have unequal lengths");
    if (std::abs(1.0 / ch.t_h - spec.fs) > 1e-6)
      throw std::invalid_argument("features: channel rate does not match WindowSpec fs");
  }
}
}  // namespace

FeatureMatrix window_raw(const std::vector<SampledSignal>& channels, const WindowSpec& spec,
                         const std::vector<std::string>& names) {
  check_aligned(channels, spec);
  std::size_t n = channels.front().samples.size();
  std::size_t hist = spec.history_samples();
  std::size_t n_win = spec.window_count(n);

  FeatureMatrix m;
  for (std::size_t c = 0; c < channels.size(); ++c)
    for (std::size_t k = 0; k < hist; ++k)
      m.columns.push_back(channel_name(names, c) + "_raw" + std::to_string(k));
  m.rows.resize(n_win);
  for (std::size_t w = 0; w < n_win; ++w) {
    auto& row = m.rows[w];
    row.reserve(channels.size() * hist);
    std::size_t start = spec.window_start(w);
    for (const auto& ch : channels)
      row.insert(row.end(), ch.samples.begin() + static_cast<std::ptrdiff_t>(start),
                 ch.samples.begin() + static_cast<std::ptrdiff_t>(start + hist));
  }
  return m;
}

FeatureMatrix window_tfd(const std::vector<SampledSignal>& channels, const WindowSpec& spec,
                         const std::vector<FirFilter>& bank, const std::vector<std::string>& names) {
  check_aligned(channels, spec);
  std::size_t n = channels.front().samples.size();
  std::size_t hist = spec.history_samples();
  std::size_t n_win = spec.window_count(n);

  // Filter each channel once; band power per window is a windowed mean square.
  std::vector<std::vector<std::vector<double>>> filtered(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c)
    for (const auto& f : bank) filtered[c].push_back(apply(f, channels[c]).samples);

  FeatureMatrix m;
  for (std::size_t c = 0; c < channels.size(); ++c)
    for (std::size_t b = 0; b < bank.size(); ++b)
      m.columns.push_back(channel_name(names, c) + "_band" + std::to_string(b));
  m.rows.resize(n_win);
  for (std::size_t w = 0; w < n_win; ++w) {
    auto& row = m.rows[w];
    std::size_t start = spec.window_start(w);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      for (std::size_t b = 0; b < bank.size(); ++b) {
        double acc = 0.0;
        for (std::size_t k = start; k < start + hist; ++k) acc += filtered[c][b][k] * filtered[c][b][k];
        row.push_back(std::log(acc / static_cast<double>(hist) + 1e-12));
      }
    }
  }
  return m;
}

FeatureMatrix window_hdm(const std::vector<Decomposition>& decompositions, const WindowSpec& spec,
                         const HdmFeatureSpec& hspec, std::size_t record_samples,
                         const std::vector<std::string>& names) {
  spec.validate();
  if (decompositions.empty()) throw std::invalid_argument("window_hdm: no decompositions");
  if (hspec.k_max < 1) throw std::invalid_argument("window_hdm: k_max >= 1 required");
  std::size_t n_win = spec.window_count(record_samples);
  std::size_t hist = spec.history_samples();
  double t_h = 1.0 / spec.fs;

  FeatureMatrix m;
  for (std::size_t c = 0; c < decompositions.size(); ++c) {
    std::string ch = channel_name(names, c);
    for (int k = 0; k < hspec.k_max; ++k) {
      m.columns.push_back(ch + "_a" + std::to_string(k));
      m.columns.push_back(ch + "_omega" + std::to_string(k));
      m.columns.push_back(ch + "_tau" + std::to_string(k));
    }
    m.columns.push_back(ch + "_atom_count");
    m.columns.push_back(ch + "_sum_a_pos");
    m.columns.push_back(ch + "_sum_a_neg");
    m.columns.push_back(ch + "_max_abs_a");
    m.columns.push_back(ch + "_mean_omega");
    m.columns.push_back(ch + "_theta_eps");
    m.columns.push_back(ch + "_residual_rms");
  }

  m.rows.resize(n_win);
  for (std::size_t w = 0; w < n_win; ++w) {
    auto& row = m.rows[w];
    std::size_t start = spec.window_start(w);
    double t_begin = static_cast<double>(start) * t_h;
    double t_end = t_begin + static_cast<double>(hist) * t_h;
    for (const auto& d : decompositions) {
      std::vector<KernelAtom> in_window;
      for (const auto& atom : d.atoms) {
        double peak = atom_peak_time(atom, d.base);
        if (peak >= t_begin && peak < t_end) in_window.push_back(atom);
      }
      std::stable_sort(in_window.begin(), in_window.end(),
                       [](const KernelAtom& a, const KernelAtom& b) { return std::abs(a.a) > std::abs(b.a); });
      for (int k = 0; k < hspec.k_max; ++k) {
        if (k < static_cast<int>(in_window.size())) {
          const auto& atom = in_window[static_cast<std::size_t>(k)];
          row.push_back(atom.a);
          row.push_back(atom.omega);
          row.push_back(atom.tau - t_begin);
        } else {
          row.push_back(0.0);
          row.push_back(0.0);
          row.push_back(0.0);
        }
      }
      double sum_pos = 0.0, sum_neg = 0.0, max_abs = 0.0, mean_omega = 0.0;
      for (const auto& atom : in_window) {
        (atom.a >= 0.0 ? sum_pos : sum_neg) += atom.a;
        max_abs = std::max(max_abs, std::abs(atom.a));
        mean_omega += atom.omega;
      }
      if (!in_window.empty()) mean_omega /= static_cast<double>(in_window.size());
      double rss = d.residual_curve.empty() ? 0.0 : d.residual_curve.back();
      double rms = record_samples > 0 ? std::sqrt(rss / static_cast<double>(record_samples)) : 0.0;
      row.push_back(static_cast<double>(in_window.size()));
      row.push_back(sum_pos);
      row.push_back(sum_neg);
      row.push_back(max_abs);
      row.push_back(mean_omega);
      row.push_back(d.theta_eps_hat);
      row.push_back(rms);
    }
  }
  return m;
}

std::vector<Label> align_labels(const std::vector<LabeledEvent>& markers, const WindowSpec& spec,
                                std::size_t record_samples) {
  spec.validate();
  std::vector<LabeledEvent> sorted = markers;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabeledEvent& a, const LabeledEvent& b) { return a.onset < b.onset; });
  double prev_end = -1e300;
  for (const auto& e : sorted) {
    if (e.duration < 0.0) throw std::invalid_argument("align_labels: negative event duration");
    if (e.onset < prev_end - 1e-9) throw std::invalid_argument("align_labels: overlapping marker events");
    prev_end = e.onset + e.duration;
  }

  std::size_t n_win = spec.window_count(record_samples);
  double t_h = 1.0 / spec.fs;
  std::vector<Label> out(n_win, Label::Rest);
  for (std::size_t w = 0; w < n_win; ++w) {
    double hs = static_cast<double>(spec.window_start(w) + spec.history_samples()) * t_h;
    double he = hs + spec.horizon;
    double cover[kNumClasses] = {0.0, 0.0, 0.0, 0.0};
    double covered = 0.0;
    for (const auto& e : sorted) {
      double lo = std::max(hs, e.onset);
      double hi = std::min(he, e.onset + e.duration);
      if (hi > lo) {
        cover[static_cast<int>(e.label)] += hi - lo;
        covered += hi - lo;
      }
    }
    cover[static_cast<int>(Label::Rest)] += (he - hs) - covered;  // gaps are rest
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (cover[c] > cover[best]) best = c;
    out[w] = static_cast<Label>(best);
  }
  return out;
}

void attach_labels(FeatureMatrix& m, const std::vector<Label>& labels) {
  if (labels.size() != m.rows.size()) throw std::invalid_argument("attach_labels: label/row count mismatch");
  m.labels = labels;
}

}  // namespace hdm
