#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hdm/decomposer.hpp"
#include "hdm/filterbank.hpp"
#include "hdm/signal.hpp"

namespace hdm {

enum class Label : int { Rest = 0, Back0 = 1, Back2 = 2, Back3 = 3 };
constexpr int kNumClasses = 4;

std::string label_name(Label l);
Label label_from_name(const std::string& s);  // throws on unknown label

struct LabeledEvent {
  double onset = 0.0;
  double duration = 0.0;
  Label label = Label::Rest;
};

struct WindowSpec {
  double history = 60.0;  // seconds
  double horizon = 2.0;   // seconds
  double step = 2.0;      // seconds
  double fs = 10.0;       // Hz

  void validate() const;
  // Number of whole (history + horizon) windows that fit in a record of
  // record_samples samples, advancing by step.
  std::size_t window_count(std::size_t record_samples) const;
  std::size_t history_samples() const;
  std::size_t step_samples() const;
  // Sample index of window w's history start.
  std::size_t window_start(std::size_t w) const;
};

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;
  std::vector<std::string> columns;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return rows.empty() ? columns.size() : rows.front().size(); }
};

struct HdmFeatureSpec {
  int k_max = 8;  // atom slots per window per channel
};
constexpr int kHdmSummarySlots = 7;  // count, sum a+, sum a-, max |a|, mean omega, theta_eps, residual rms

// Flattened raw history samples, channels concatenated in input order.
FeatureMatrix window_raw(const std::vector<SampledSignal>& channels, const WindowSpec& spec,
                         const std::vector<std::string>& names = {});

// Per-channel log band powers over each history window. The bank is applied
// once per channel; per-window powers are means of the squared filtered samples.
FeatureMatrix window_tfd(const std::vector<SampledSignal>& channels, const WindowSpec& spec,
                         const std::vector<FirFilter>& bank, const std::vector<std::string>& names = {});

// Atom-slot features from whole-record decompositions: per window and channel,
// atoms whose analytic peak time falls inside the history window, sorted by
// |a| descending, fill k_max (a, omega, tau-relative-to-window-start) slots,
// zero padded, followed by the summary slots.
FeatureMatrix window_hdm(const std::vector<Decomposition>& decompositions, const WindowSpec& spec,
                         const HdmFeatureSpec& hspec, std::size_t record_samples,
                         const std::vector<std::string>& names = {});

// One label per window: the event covering the majority of the horizon
// interval; uncovered time counts as rest. Events must not overlap.
std::vector<Label> align_labels(const std::vector<LabeledEvent>& markers, const WindowSpec& spec,
                                std::size_t record_samples);

void attach_labels(FeatureMatrix& m, const std::vector<Label>& labels);

}  // namespace hdm
