#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hdm/features.hpp"
#include "hdm/model.hpp"
#include "hdm/synthetic.hpp"

using namespace hdm;

namespace {
SampledSignal noise_channel(std::uint64_t seed, std::size_t n) {
  GaussianRng rng(seed);
  SampledSignal s{0.1, 0.0, {}};
  for (std::size_t i = 0; i < n; ++i) s.samples.push_back(rng.normal());
  return s;
}
}  // namespace

TEST_CASE("label names round-trip") {
  for (int c = 0; c < kNumClasses; ++c) {
    Label l = static_cast<Label>(c);
    CHECK(label_from_name(label_name(l)) == l);
  }
  CHECK(label_name(Label::Rest) == "rest");
  CHECK(label_name(Label::Back2) == "2-back");
  CHECK_THROWS(label_from_name("5-back"));
}

TEST_CASE("window arithmetic") {
  WindowSpec w;  // 60 s history, 2 s horizon, 2 s step at 10 Hz
  CHECK_NOTHROW(w.validate());
  CHECK(w.history_samples() == 600);
  CHECK(w.step_samples() == 20);
  // Record of 700 samples = 70 s: windows at starts 0, 20, 40, 60, 80 cover
  // history+horizon = 620 samples.
  CHECK(w.window_count(700) == 5);
  CHECK(w.window_count(620) == 1);
  CHECK(w.window_count(619) == 0);
  CHECK(w.window_start(3) == 60);
  WindowSpec bad = w;
  bad.step = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("window_raw layout and content") {
  auto ch0 = noise_channel(1, 700);
  auto ch1 = noise_channel(2, 700);
  WindowSpec w;
  FeatureMatrix m = window_raw({ch0, ch1}, w, {"a", "b"});
  REQUIRE(m.n_rows() == 5);
  REQUIRE(m.n_cols() == 1200);
  CHECK(m.columns.size() == 1200);
  CHECK(m.columns.front().substr(0, 1) == "a");
  // Row 2 starts at sample 40; first 600 columns are channel a.
  for (std::size_t i = 0; i < 600; ++i) {
    CHECK(m.rows[2][i] == ch0.samples[40 + i]);
    CHECK(m.rows[2][600 + i] == ch1.samples[40 + i]);
  }
}

TEST_CASE("window_tfd layout and scale sensitivity") {
  auto ch = noise_channel(3, 1300);
  WindowSpec w;
  auto bank = default_bank(10.0);
  FeatureMatrix m = window_tfd({ch}, w, bank, {"c"});
  REQUIRE(m.n_rows() == w.window_count(1300));
  REQUIRE(m.n_cols() == 5);
  // Doubling the signal raises every log band power by 2 log 2.
  SampledSignal big = ch;
  for (double& v : big.samples) v *= 2.0;
  FeatureMatrix mb = window_tfd({big}, w, bank, {"c"});
  for (std::size_t r = 0; r < m.n_rows(); ++r)
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(mb.rows[r][c] - m.rows[r][c] == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-2));
}

TEST_CASE("window_hdm atom slots and summaries") {
  WindowSpec w;
  HdmFeatureSpec hs;
  hs.k_max = 3;
  Decomposition d;
  d.base = BaseKernel{};
  // Two atoms peaking inside the second window (starts 2 s, history 60 s),
  // one peaking far outside.
  d.atoms = {{0.5, 5.2, 10.0}, {-1.5, 5.2, 30.0}, {1.0, 5.2, 500.0}};
  d.theta_eps_hat = 0.25;
  d.sigma2_hat = 0.04;
  d.residual_curve = {10.0, 1.0};
  std::size_t record = 6000;
  FeatureMatrix m = window_hdm({d}, w, hs, record, {"x"});
  REQUIRE(m.n_rows() == w.window_count(record));
  REQUIRE(m.n_cols() == static_cast<std::size_t>(3 * hs.k_max + kHdmSummarySlots));
  const auto& row = m.rows[1];  // window start 2 s
  // Sorted by |a| descending: the -1.5 atom first, then 0.5.
  CHECK(row[0] == doctest::Approx(-1.5));
  CHECK(row[1] == doctest::Approx(5.2));
  CHECK(row[2] == doctest::Approx(30.0 - 2.0));  // tau relative to window start
  CHECK(row[3] == doctest::Approx(0.5));
  CHECK(row[5] == doctest::Approx(10.0 - 2.0));
  // Third slot zero padded.
  CHECK(row[6] == 0.0);
  CHECK(row[7] == 0.0);
  CHECK(row[8] == 0.0);
  // Summaries: count, sum a+, sum a-, max |a|, mean omega, theta, residual rms.
  std::size_t s = 9;
  CHECK(row[s + 0] == doctest::Approx(2.0));
  CHECK(row[s + 1] == doctest::Approx(0.5));
  CHECK(row[s + 2] == doctest::Approx(-1.5));
  CHECK(row[s + 3] == doctest::Approx(1.5));
  CHECK(row[s + 4] == doctest::Approx(5.2));
  CHECK(row[s + 5] == doctest::Approx(0.25));
  CHECK(row[s + 6] == doctest::Approx(std::sqrt(1.0 / static_cast<double>(record))));
}

TEST_CASE("window_hdm k_max cap keeps the largest amplitudes") {
  WindowSpec w;
  HdmFeatureSpec hs;
  hs.k_max = 2;
  Decomposition d;
  d.atoms = {{0.3, 5.0, 20.0}, {2.0, 5.0, 25.0}, {-1.0, 5.0, 30.0}};
  d.residual_curve = {1.0};
  FeatureMatrix m = window_hdm({d}, w, hs, 6000, {"x"});
  const auto& row = m.rows[0];
  CHECK(row[0] == doctest::Approx(2.0));
  CHECK(row[3] == doctest::Approx(-1.0));
  CHECK(row[static_cast<std::size_t>(3 * hs.k_max)] == doctest::Approx(3.0));  // count still sees all three
}

TEST_CASE("atom-rate classes separate in count features") {
  // Two synthetic classes differing only in atom rate; class-mean atom counts
  // in the decomposition features must differ clearly.
  BaseKernel base;
  DecomposerConfig cfg;
  cfg.max_iterations = 30;
  WindowSpec w;
  HdmFeatureSpec hs;
  double dur = 240.0;
  GridSpec grid{0.1, 0.0, 2400};
  double mean_counts[2] = {0.0, 0.0};
  int windows[2] = {0, 0};
  for (int klass = 0; klass < 2; ++klass) {
    int n_atoms = klass == 0 ? 4 : 16;  // 1/min vs 4/min over 4 minutes
    GaussianRng rng(40 + klass);
    AtomDrawRanges ranges;
    auto truth = draw_atoms(n_atoms, dur, klass == 0 ? 30.0 : 8.0, ranges, rng, base);
    SampledSignal y = reconstruct(truth, base, grid);
    Decomposition d = decompose(y, cfg, base);
    FeatureMatrix m = window_hdm({d}, w, hs, grid.n, {"x"});
    for (const auto& row : m.rows) {
      mean_counts[klass] += row[static_cast<std::size_t>(3 * hs.k_max)];
      ++windows[klass];
    }
  }
  double m0 = mean_counts[0] / windows[0], m1 = mean_counts[1] / windows[1];
  CHECK(m1 - m0 >= 3.0);
}

TEST_CASE("align_labels majority, gaps, and ties") {
  WindowSpec w;
  std::size_t record = 700;  // 5 windows, horizons [60,62) [62,64) ... [68,70)
  std::vector<LabeledEvent> markers = {
      {60.0, 2.0, Label::Back2},   // covers horizon 0 fully
      {62.0, 0.5, Label::Back3},   // covers 25% of horizon 1 -> rest wins
      {66.0, 1.0, Label::Back0},   // 50/50 split with rest on horizon 3 -> tie, lowest class index wins
  };
  auto labels = align_labels(markers, w, record);
  REQUIRE(labels.size() == 5);
  CHECK(labels[0] == Label::Back2);
  CHECK(labels[1] == Label::Rest);
  CHECK(labels[2] == Label::Rest);
  CHECK(labels[3] == Label::Rest);  // rest idx 0 < Back0 idx 1 on exact tie
  CHECK(labels[4] == Label::Rest);

  std::vector<LabeledEvent> overlap = {{60.0, 5.0, Label::Back2}, {61.0, 5.0, Label::Back3}};
  CHECK_THROWS(align_labels(overlap, w, record));
}

TEST_CASE("align_labels majority override") {
  WindowSpec w;
  std::vector<LabeledEvent> markers = {{60.0, 1.5, Label::Back3}};  // 75% of horizon 0
  auto labels = align_labels(markers, w, 700);
  CHECK(labels[0] == Label::Back3);
}

TEST_CASE("attach_labels validates length") {
  FeatureMatrix m;
  m.rows = {{1.0}, {2.0}};
  m.columns = {"f"};
  CHECK_THROWS(attach_labels(m, {Label::Rest}));
  attach_labels(m, {Label::Rest, Label::Back0});
  CHECK(m.labels.size() == 2);
}
