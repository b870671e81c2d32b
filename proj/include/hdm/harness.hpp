#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdm/decomposer.hpp"
#include "hdm/features.hpp"
#include "hdm/ml.hpp"
#include "hdm/signal.hpp"

namespace hdm {

struct Recording {
  std::vector<std::string> channel_names;
  std::vector<SampledSignal> channels;  // same order as channel_names
  std::vector<LabeledEvent> markers;
  std::string subject;

  std::size_t n_samples() const { return channels.empty() ? 0 : channels.front().samples.size(); }
  const SampledSignal& channel(const std::string& name) const;  // throws if missing
  Recording select(const std::vector<std::string>& names) const;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Signal CSV contract: header "time,<name1>,<name2>,...", seconds in column 1,
// one row per sample, uniform sampling within 1e-6 s.
// Marker CSV contract: header "onset_s,duration_s,label", labels in
// {rest, 0-back, 2-back, 3-back}, events non-overlapping.
Recording load_recording(const std::string& signal_path, const std::string& marker_path,
                         const std::string& subject = "");
void save_recording(const Recording& rec, const std::string& signal_path, const std::string& marker_path);

enum class FeatureScheme { Raw, Tfd, Hdm };
FeatureScheme scheme_from_name(const std::string& s);
std::string scheme_name(FeatureScheme s);

struct SwttConfig {
  std::size_t min_train_rows = 30;  // warm-up before the first test row
  // 0 = cumulative past; > 0 = trailing window of that many training rows.
  std::size_t trailing_rows = 0;
};

struct SwttResult {
  ConfusionMatrix cm;
  std::vector<double> fold_accuracy;  // 1/0 per test row, prediction order
  std::size_t test_rows = 0;
  std::size_t first_test_row = 0;
};

// Walk-forward evaluation over a labeled feature matrix: a row i may train
// the model for test row j only if i's horizon ends no later than j's
// history start. With step-aligned rows that is i + gap_rows <= j where
// gap_rows covers history + horizon.
SwttResult swtt_evaluate(const FeatureMatrix& features, const WindowSpec& wspec, const ModelSpec& mspec,
                         const SwttConfig& cfg = {});

struct ScenarioConfig {
  std::vector<std::string> channel_subset;  // empty = all channels
  std::vector<FeatureScheme> schemes = {FeatureScheme::Raw, FeatureScheme::Tfd, FeatureScheme::Hdm};
  std::vector<ModelSpec> models;
  WindowSpec window;
  DecomposerConfig decomposer;
  HdmFeatureSpec hdm_features;
  SwttConfig swtt;
  std::uint64_t seed = 0;
};

struct ScenarioCell {
  std::string subject;
  FeatureScheme scheme = FeatureScheme::Raw;
  std::string model_name;
  ConfusionMatrix cm;
  MetricsReport report;
  std::vector<double> fold_accuracy;
};

struct ScenarioReport {
  std::vector<ScenarioCell> cells;
};

// Per-subject (scheme x model) evaluation grid.
ScenarioReport run_scenario(const std::vector<Recording>& recordings, const ScenarioConfig& config);

// Feature extraction shared by run_scenario and the CLI.
FeatureMatrix extract_features(const Recording& rec, FeatureScheme scheme, const WindowSpec& wspec,
                               const DecomposerConfig& dconfig, const HdmFeatureSpec& hspec);

}  // namespace hdm
