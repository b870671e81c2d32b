#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "hdm/harness.hpp"
#include "hdm/io.hpp"
#include "hdm/synthetic.hpp"

using namespace hdm;

namespace {

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() / ("hdm_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

// Feature matrix whose labels are decidable from the features: label = horizon
// class repeated in blocks, feature = the row's own label with noise.
FeatureMatrix leaky_free_features(int rows, std::uint64_t seed) {
  GaussianRng rng(seed);
  FeatureMatrix m;
  m.columns = {"f0", "f1"};
  for (int i = 0; i < rows; ++i) {
    Label l = static_cast<Label>((i / 8) % 4);
    m.rows.push_back({static_cast<double>(l) + 0.05 * rng.normal(), rng.normal()});
    m.labels.push_back(l);
  }
  return m;
}

}  // namespace

TEST_CASE("recording save/load round-trip is bit-identical") {
  TempDir tmp;
  NbackSimConfig cfg;
  cfg.n_blocks = 4;
  cfg.block_s = 40.0;
  NbackSim sim = simulate_nback(cfg, 5);
  save_recording(sim.recording, tmp.path("s.csv"), tmp.path("m.csv"));
  Recording back = load_recording(tmp.path("s.csv"), tmp.path("m.csv"), "subj");
  CHECK(back.subject == "subj");
  REQUIRE(back.channels.size() == sim.recording.channels.size());
  CHECK(back.channel_names == sim.recording.channel_names);
  for (std::size_t c = 0; c < back.channels.size(); ++c)
    CHECK(back.channels[c].samples == sim.recording.channels[c].samples);
  REQUIRE(back.markers.size() == sim.recording.markers.size());
  for (std::size_t i = 0; i < back.markers.size(); ++i) {
    CHECK(back.markers[i].onset == sim.recording.markers[i].onset);
    CHECK(back.markers[i].duration == sim.recording.markers[i].duration);
    CHECK(back.markers[i].label == sim.recording.markers[i].label);
  }
}

TEST_CASE("ingest errors carry file and line information") {
  TempDir tmp;
  write_file(tmp.path("bad_header.csv"), "zeit,ch0\n0.0,1.0\n0.1,2.0\n");
  write_file(tmp.path("markers.csv"), "onset_s,duration_s,label\n");
  CHECK_THROWS_AS(load_recording(tmp.path("bad_header.csv"), tmp.path("markers.csv")), ParseError);

  write_file(tmp.path("nonuniform.csv"), "time,ch0\n0.0,1.0\n0.1,2.0\n0.35,3.0\n");
  try {
    load_recording(tmp.path("nonuniform.csv"), tmp.path("markers.csv"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("non-uniform") != std::string::npos);
  }

  write_file(tmp.path("badnum.csv"), "time,ch0\n0.0,1.0\n0.1,oops\n");
  try {
    load_recording(tmp.path("badnum.csv"), tmp.path("markers.csv"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }

  write_file(tmp.path("ok.csv"), "time,ch0\n0.0,1.0\n0.1,2.0\n0.2,1.0\n");
  write_file(tmp.path("bad_label.csv"), "onset_s,duration_s,label\n0.0,1.0,4-back\n");
  CHECK_THROWS_AS(load_recording(tmp.path("ok.csv"), tmp.path("bad_label.csv")), ParseError);
  write_file(tmp.path("overlap.csv"), "onset_s,duration_s,label\n0.0,2.0,2-back\n1.0,2.0,3-back\n");
  CHECK_THROWS_AS(load_recording(tmp.path("ok.csv"), tmp.path("overlap.csv")), ParseError);
  CHECK_THROWS_AS(load_recording(tmp.path("missing.csv"), tmp.path("markers.csv")), ParseError);
}

TEST_CASE("channel selection") {
  Recording rec;
  rec.channel_names = {"a", "b", "c"};
  rec.channels.resize(3);
  rec.channels[1].samples = {1.0, 2.0};
  Recording sel = rec.select({"b"});
  REQUIRE(sel.channels.size() == 1);
  CHECK(sel.channel_names[0] == "b");
  CHECK(sel.channels[0].samples == rec.channels[1].samples);
  CHECK_THROWS(rec.select({"z"}));
  CHECK(rec.select({}).channels.size() == 3);
}

TEST_CASE("swtt walk-forward respects the training gap") {
  WindowSpec w;  // hist 600, hor 20, step 20 -> gap_rows = 31
  FeatureMatrix m = leaky_free_features(120, 3);
  ModelSpec spec;
  spec.kind = ModelKind::Cart;
  SwttConfig cfg;
  cfg.min_train_rows = 30;
  SwttResult r = swtt_evaluate(m, w, spec, cfg);
  CHECK(r.first_test_row == 30 + 31 - 1);
  CHECK(r.test_rows == m.rows.size() - r.first_test_row);
  CHECK(static_cast<std::size_t>(r.cm.total()) == r.test_rows);
  CHECK(r.fold_accuracy.size() == r.test_rows);
  // The features literally encode the label: accuracy should be high even
  // with the gap.
  CHECK(metrics(r.cm).accuracy >= 0.9);
}

TEST_CASE("swtt trailing window and insufficient data") {
  WindowSpec w;
  FeatureMatrix m = leaky_free_features(120, 4);
  ModelSpec spec;
  spec.kind = ModelKind::Cart;
  SwttConfig trailing;
  trailing.trailing_rows = 40;
  SwttResult r = swtt_evaluate(m, w, spec, trailing);
  CHECK(metrics(r.cm).accuracy >= 0.85);

  FeatureMatrix small = leaky_free_features(40, 5);
  CHECK_THROWS_AS(swtt_evaluate(small, w, spec, SwttConfig{}), std::invalid_argument);
}

TEST_CASE("swtt single-class warm-up predicts that class") {
  WindowSpec w;
  FeatureMatrix m;
  m.columns = {"f"};
  GaussianRng rng(6);
  for (int i = 0; i < 80; ++i) {
    m.rows.push_back({rng.normal()});
    m.labels.push_back(i < 70 ? Label::Back2 : Label::Back3);
  }
  ModelSpec spec;
  spec.kind = ModelKind::Cart;
  SwttResult r = swtt_evaluate(m, w, spec, SwttConfig{});
  // Early folds have only 2-back in training; they must predict 2-back.
  long back2_pred = 0;
  for (int c = 0; c < kNumClasses; ++c) back2_pred += r.cm.counts[static_cast<std::size_t>(c)][2];
  CHECK(back2_pred >= static_cast<long>(r.test_rows) - 10);
}

TEST_CASE("shuffled labels score at chance") {
  WindowSpec w;
  GaussianRng rng(8);
  FeatureMatrix m;
  m.columns = {"f0", "f1", "f2"};
  for (int i = 0; i < 520; ++i) {
    m.rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    m.labels.push_back(static_cast<Label>(static_cast<int>(rng.uniform() * 4)));
  }
  ModelSpec spec;
  spec.kind = ModelKind::Cart;
  spec.cart_depth = 6;
  SwttResult r = swtt_evaluate(m, w, spec, SwttConfig{});
  CHECK(r.test_rows >= 400);
  double acc = metrics(r.cm).accuracy;
  CHECK(acc >= 0.20);
  CHECK(acc <= 0.30);
}

TEST_CASE("run_scenario layout and determinism") {
  NbackSimConfig cfg;
  cfg.n_blocks = 8;
  cfg.block_s = 40.0;
  NbackSim sim = simulate_nback(cfg, 21);
  sim.recording.subject = "s0";

  ScenarioConfig sc;
  sc.window.history = 20.0;
  sc.window.horizon = 2.0;
  sc.window.step = 2.0;
  sc.window.fs = 10.0;
  sc.schemes = {FeatureScheme::Raw, FeatureScheme::Tfd};
  ModelSpec cart;
  cart.kind = ModelKind::Cart;
  ModelSpec forest;
  forest.kind = ModelKind::RandomForest;
  forest.rf_trees = 5;
  sc.models = {cart, forest};
  sc.swtt.min_train_rows = 20;
  sc.seed = 77;

  ScenarioReport a = run_scenario({sim.recording}, sc);
  REQUIRE(a.cells.size() == 4);  // 2 schemes x 2 models
  CHECK(a.cells[0].subject == "s0");
  CHECK(a.cells[0].model_name == "cart-10");
  CHECK(a.cells[1].model_name == "rf-5");
  CHECK(scheme_name(a.cells[0].scheme) == "raw");
  CHECK(scheme_name(a.cells[2].scheme) == "tfd");

  ScenarioReport b = run_scenario({sim.recording}, sc);
  REQUIRE(b.cells.size() == a.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].cm.counts == b.cells[i].cm.counts);
    CHECK(a.cells[i].fold_accuracy == b.cells[i].fold_accuracy);
  }
}

TEST_CASE("feature csv round-trip") {
  TempDir tmp;
  FeatureMatrix m;
  m.columns = {"x", "y"};
  m.rows = {{1.5, -2.25}, {0.125, 3.0}};
  m.labels = {Label::Back0, Label::Rest};
  write_feature_csv(m, tmp.path("f.csv"));
  FeatureMatrix back = read_feature_csv(tmp.path("f.csv"));
  CHECK(back.columns == m.columns);
  CHECK(back.rows == m.rows);
  CHECK(back.labels == m.labels);
}

TEST_CASE("confusion csv round-trip") {
  TempDir tmp;
  ConfusionMatrix cm;
  cm.counts = {{{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}, {13, 14, 15, 16}}};
  write_confusion_csv(cm, tmp.path("cm.csv"));
  ConfusionMatrix back = read_confusion_csv(tmp.path("cm.csv"));
  CHECK(back.counts == cm.counts);
}

TEST_CASE("decomposition json round-trip") {
  Decomposition d;
  d.atoms = {{1.25, 5.5, 10.0}, {-0.5, 3.0, 40.0}};
  d.theta_eps_hat = 0.31;
  d.sigma2_hat = 0.007;
  d.residual_curve = {5.0, 2.0, 0.5};
  d.iterations = 2;
  d.converged = true;
  d.mean_offset = 0.125;
  d.xi = 0.6;
  auto j = decomposition_to_json(d);
  CHECK(j.at("version").get<std::string>() == kToolVersion);
  Decomposition back = decomposition_from_json(j);
  REQUIRE(back.atoms.size() == 2);
  CHECK(back.atoms[1].a == d.atoms[1].a);
  CHECK(back.residual_curve == d.residual_curve);
  CHECK(back.converged);
  CHECK(back.mean_offset == d.mean_offset);
  CHECK(back.xi == d.xi);
}

TEST_CASE("decomposer config json round-trip") {
  DecomposerConfig c;
  c.xi_rel = 0.05;
  c.max_iterations = 17;
  c.seed_order = SeedOrder::Chronological;
  c.max_seeds_per_iter = 9;
  c.threads = 3;
  auto j = config_to_json(c);
  CHECK_FALSE(j.contains("threads"));  // execution detail, not provenance
  DecomposerConfig back;
  config_from_json(j, back);
  CHECK(back.xi_rel == c.xi_rel);
  CHECK(back.max_iterations == c.max_iterations);
  CHECK(back.seed_order == SeedOrder::Chronological);
  CHECK(back.max_seeds_per_iter == 9);
}
