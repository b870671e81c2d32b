// hdm: command-line front end (simulate / decompose / features / eval / report).
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hdm/decomposer.hpp"
#include "hdm/harness.hpp"
#include "hdm/hrf.hpp"
#include "hdm/io.hpp"
#include "hdm/model.hpp"
#include "hdm/synthetic.hpp"

using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitNumerical = 4;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Options shared by decompose / features / eval.
struct DecompOpts {
  double xi_abs = -1.0;
  double xi_rel = 0.02;
  int max_iter = 50;
  int smoothing = 3;
  int n_starts = 3;
  int max_seeds = 16;
  int threads = 1;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--xi", xi_abs, "absolute convergence threshold (overrides --xi-rel)");
    cmd->add_option("--xi-rel", xi_rel, "relative convergence threshold");
    cmd->add_option("--max-iter", max_iter, "iteration cap L");
    cmd->add_option("--smoothing", smoothing, "moving-average half-width for extrema");
    cmd->add_option("--n-starts", n_starts, "multistart count per seed fit");
    cmd->add_option("--max-seeds", max_seeds, "cap on seeds fit per iteration (0 = no cap)");
    cmd->add_option("--threads", threads, "parallel seed fits per iteration");
  }

  hdm::DecomposerConfig to_config() const {
    hdm::DecomposerConfig c;
    c.xi_abs = xi_abs;
    c.xi_rel = xi_rel;
    c.max_iterations = max_iter;
    c.smoothing_halfwidth = smoothing;
    c.n_starts = n_starts;
    c.max_seeds_per_iter = max_seeds;
    c.threads = threads;
    return c;
  }
};

struct WindowOpts {
  double history = 60.0;
  double horizon = 2.0;
  double step = 2.0;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--history", history, "history window, seconds");
    cmd->add_option("--horizon", horizon, "prediction horizon, seconds");
    cmd->add_option("--step", step, "window step, seconds");
  }

  hdm::WindowSpec to_spec(double fs) const { return hdm::WindowSpec{history, horizon, step, fs}; }
};

json window_echo(const hdm::WindowSpec& w) {
  return json{{"history", w.history}, {"horizon", w.horizon}, {"step", w.step}, {"fs", w.fs}};
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

json truth_to_json(const std::vector<std::vector<hdm::KernelAtom>>& truth) {
  json channels = json::array();
  for (const auto& atoms : truth) {
    json arr = json::array();
    for (const auto& a : atoms) arr.push_back({{"a", a.a}, {"omega", a.omega}, {"tau", a.tau}});
    channels.push_back(arr);
  }
  return channels;
}

// ---- simulate ----------------------------------------------------------

struct SimulateOpts {
  std::string model = "hdm";
  std::string out_signal, out_markers, out_truth;
  std::uint64_t seed = 0;
  int atoms = 5;
  double duration = 300.0;
  double fs = 10.0;
  double sigma2 = 0.01;
  double theta = 0.0;
  double rho = 0.0;
  double beta = 1.0;
  double min_spacing = 20.0;
  double stim_period = 40.0;
  double stim_duration = 10.0;
  int blocks = 12;
  double block_s = 80.0;
  int channels = 1;
};

int cmd_simulate(const SimulateOpts& o) {
  hdm::BaseKernel base;
  json config_echo = {{"command", "simulate"}, {"model", o.model},    {"seed", o.seed},
                      {"atoms", o.atoms},     {"duration", o.duration}, {"fs", o.fs},
                      {"sigma2", o.sigma2},   {"theta", o.theta},     {"rho", o.rho},
                      {"beta", o.beta},       {"min_spacing", o.min_spacing},
                      {"stim_period", o.stim_period}, {"stim_duration", o.stim_duration},
                      {"blocks", o.blocks},   {"block_s", o.block_s}, {"channels", o.channels}};
  hdm::Recording rec;
  std::vector<std::vector<hdm::KernelAtom>> truth;

  if (o.model == "nback") {
    hdm::NbackSimConfig cfg;
    cfg.fs = o.fs;
    cfg.block_s = o.block_s;
    cfg.n_blocks = o.blocks;
    cfg.noise_sigma = std::sqrt(o.sigma2);
    cfg.theta_eps = o.theta;
    cfg.channels = o.channels;
    hdm::NbackSim sim = hdm::simulate_nback(cfg, o.seed);
    rec = std::move(sim.recording);
    truth = std::move(sim.truth);
  } else if (o.model == "hdm") {
    hdm::GaussianRng rng(o.seed);
    hdm::AtomDrawRanges ranges;
    auto atoms = hdm::draw_atoms(o.atoms, o.duration, o.min_spacing, ranges, rng, base);
    hdm::GridSpec grid{1.0 / o.fs, 0.0, static_cast<std::size_t>(std::llround(o.duration * o.fs))};
    hdm::NoiseParams noise{0.0, o.theta, o.sigma2};
    rec.channel_names = {"ch0"};
    rec.channels.push_back(hdm::hdm_forward(atoms, noise, grid, base, o.seed ^ 0x9E3779B97F4A7C15ULL));
    truth.push_back(std::move(atoms));
  } else if (o.model == "glm") {
    hdm::GridSpec grid{1.0 / o.fs, 0.0, static_cast<std::size_t>(std::llround(o.duration * o.fs))};
    hdm::StimulusTrain train;
    for (double t = 0.0; t + o.stim_duration <= o.duration; t += o.stim_period)
      train.events.push_back({t, o.stim_duration, 1.0});
    train.validate();
    hdm::SampledSignal u = hdm::boxcar(train, grid);
    hdm::SampledSignal h{1.0 / o.fs, 0.0, {}};
    hdm::CanonicalHrfParams hp;
    for (std::size_t n = 0; n < static_cast<std::size_t>(std::llround(32.0 * o.fs)); ++n)
      h.samples.push_back(hdm::canonical_hrf(static_cast<double>(n) / o.fs, hp));
    hdm::SampledSignal x = hdm::convolve(u, h);
    hdm::NoiseParams noise{o.rho, 0.0, o.sigma2};
    rec.channel_names = {"ch0"};
    rec.channels.push_back(hdm::glm_forward(x, o.beta, noise, o.seed ^ 0x9E3779B97F4A7C15ULL));
    for (const auto& e : train.events)
      rec.markers.push_back({e.onset, e.duration, hdm::Label::Back2});
  } else {
    std::cerr << "simulate: unknown --model " << o.model << " (hdm, glm, nback)\n";
    return kExitUsage;
  }

  rec.subject = "sim";
  hdm::save_recording(rec, o.out_signal, o.out_markers);
  if (!o.out_truth.empty())
    write_json_file(o.out_truth, json{{"version", hdm::kToolVersion},
                                      {"config", config_echo},
                                      {"truth", truth_to_json(truth)}});
  return 0;
}

// ---- decompose ---------------------------------------------------------

struct DecomposeOpts {
  std::string in_signal, channel, out_json, out_residual;
  DecompOpts dec;
};

int cmd_decompose(const DecomposeOpts& o) {
  hdm::Recording rec = hdm::load_recording(o.in_signal, "");
  if (rec.channels.empty()) throw hdm::ParseError(o.in_signal + ": no channels");
  const hdm::SampledSignal& y =
      o.channel.empty() ? rec.channels.front() : rec.channel(o.channel);
  hdm::DecomposerConfig cfg = o.dec.to_config();
  cfg.validate();
  hdm::BaseKernel base;
  hdm::Decomposition d = hdm::decompose(y, cfg, base);

  json out = hdm::decomposition_to_json(d);
  out["config"] = hdm::config_to_json(cfg);
  out["config"]["command"] = "decompose";
  out["config"]["channel"] = o.channel.empty() ? rec.channel_names.front() : o.channel;
  write_json_file(o.out_json, out);

  if (!o.out_residual.empty()) {
    std::ofstream f(o.out_residual);
    if (!f) throw std::runtime_error("cannot write " + o.out_residual);
    f << "# " << hdm::kToolVersion << " config=" << hdm::config_to_json(cfg).dump() << "\n";
    f << "iteration,residual\n";
    f.precision(17);
    for (std::size_t i = 0; i < d.residual_curve.size(); ++i)
      f << i << "," << d.residual_curve[i] << "\n";
  }
  return 0;
}

// ---- features ----------------------------------------------------------

struct FeaturesOpts {
  std::string in_signal, in_markers, scheme = "raw", out_csv;
  WindowOpts win;
  DecompOpts dec;
};

int cmd_features(const FeaturesOpts& o) {
  hdm::Recording rec = hdm::load_recording(o.in_signal, o.in_markers);
  if (rec.channels.empty()) throw hdm::ParseError(o.in_signal + ": no channels");
  hdm::FeatureScheme scheme = hdm::scheme_from_name(o.scheme);
  hdm::WindowSpec wspec = o.win.to_spec(1.0 / rec.channels.front().t_h);
  wspec.validate();
  hdm::DecomposerConfig dcfg = o.dec.to_config();
  dcfg.validate();
  hdm::HdmFeatureSpec hspec;
  hdm::FeatureMatrix m = hdm::extract_features(rec, scheme, wspec, dcfg, hspec);
  hdm::write_feature_csv(m, o.out_csv);
  return 0;
}

// ---- eval --------------------------------------------------------------

struct EvalOpts {
  std::vector<std::string> in_signals, in_markers;
  std::string schemes = "raw,tfd,hdm";
  std::string models = "lda,cart,rf,svm-l";
  std::string out_report, out_prefix;
  std::uint64_t seed = 0;
  std::size_t min_train_rows = 30;
  WindowOpts win;
  DecompOpts dec;
};

int cmd_eval(const EvalOpts& o) {
  if (o.in_signals.size() != o.in_markers.size())
    throw hdm::ParseError("eval: need one --markers per --in");
  std::vector<hdm::Recording> recs;
  for (std::size_t i = 0; i < o.in_signals.size(); ++i) {
    hdm::Recording r = hdm::load_recording(o.in_signals[i], o.in_markers[i]);
    if (r.subject.empty()) r.subject = "s" + std::to_string(i);
    recs.push_back(std::move(r));
  }
  if (recs.empty() || recs.front().channels.empty()) throw hdm::ParseError("eval: no input channels");

  hdm::ScenarioConfig cfg;
  cfg.window = o.win.to_spec(1.0 / recs.front().channels.front().t_h);
  cfg.window.validate();
  cfg.decomposer = o.dec.to_config();
  cfg.decomposer.validate();
  cfg.swtt.min_train_rows = o.min_train_rows;
  cfg.seed = o.seed;
  cfg.schemes.clear();
  for (const auto& s : split_csv_list(o.schemes)) cfg.schemes.push_back(hdm::scheme_from_name(s));
  for (const auto& m : split_csv_list(o.models)) {
    hdm::ModelSpec ms;
    ms.kind = hdm::model_kind_from_name(m);
    cfg.models.push_back(ms);
  }
  if (cfg.schemes.empty() || cfg.models.empty())
    throw hdm::ParseError("eval: empty --features or --models list");

  hdm::ScenarioReport report = hdm::run_scenario(recs, cfg);

  json out = hdm::scenario_report_to_json(report);
  out["config"] = {{"command", "eval"},
                   {"seed", o.seed},
                   {"features", o.schemes},
                   {"models", o.models},
                   {"min_train_rows", o.min_train_rows},
                   {"window", window_echo(cfg.window)},
                   {"decomposer", hdm::config_to_json(cfg.decomposer)}};
  write_json_file(o.out_report, out);

  if (!o.out_prefix.empty()) {
    for (const auto& cell : report.cells) {
      std::string stem = o.out_prefix + cell.subject + "_" + hdm::scheme_name(cell.scheme) + "_" + cell.model_name;
      hdm::write_confusion_csv(cell.cm, stem + "_confusion.csv");
      std::ofstream f(stem + "_folds.csv");
      if (!f) throw std::runtime_error("cannot write " + stem + "_folds.csv");
      f << "fold,correct\n";
      for (std::size_t i = 0; i < cell.fold_accuracy.size(); ++i)
        f << i << "," << cell.fold_accuracy[i] << "\n";
    }
  }
  return 0;
}

// ---- report ------------------------------------------------------------

int cmd_report(const std::string& in_json, const std::string& out_txt) {
  json j = json::parse(hdm::read_text_file(in_json));
  std::ostringstream out;
  out << j.value("version", "unknown version") << " scenario report\n";
  out << "subject      scheme  model    accuracy  macro_recall  macro_precision\n";
  for (const auto& cell : j.at("cells")) {
    const auto& m = cell.at("metrics");
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-7s %-8s %8.4f  %12.4f  %15.4f\n",
                  cell.at("subject").get<std::string>().c_str(),
                  cell.at("scheme").get<std::string>().c_str(),
                  cell.at("model").get<std::string>().c_str(), m.at("accuracy").get<double>(),
                  m.at("macro_recall").get<double>(), m.at("macro_precision").get<double>());
    out << line;
  }
  if (out_txt.empty())
    std::cout << out.str();
  else
    hdm::write_text_file(out_txt, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdm: gamma-kernel decomposition toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hdm::kToolVersion);

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "generate a synthetic recording");
  c_sim->add_option("--model", sim.model, "generator: hdm, glm, nback");
  c_sim->add_option("--out-signal", sim.out_signal, "signal CSV path")->required();
  c_sim->add_option("--out-markers", sim.out_markers, "marker CSV path")->required();
  c_sim->add_option("--out-truth", sim.out_truth, "ground-truth atoms JSON path");
  c_sim->add_option("--seed", sim.seed, "RNG seed")->required();
  c_sim->add_option("--atoms", sim.atoms, "atom count (hdm model)");
  c_sim->add_option("--duration", sim.duration, "record length, seconds");
  c_sim->add_option("--fs", sim.fs, "sampling rate, Hz");
  c_sim->add_option("--sigma2", sim.sigma2, "innovation variance");
  c_sim->add_option("--theta", sim.theta, "lag-1 output coefficient (hdm/nback)");
  c_sim->add_option("--rho", sim.rho, "AR(1) coefficient (glm)");
  c_sim->add_option("--beta", sim.beta, "regression weight (glm)");
  c_sim->add_option("--min-spacing", sim.min_spacing, "minimum atom peak spacing, seconds");
  c_sim->add_option("--stim-period", sim.stim_period, "stimulus period, seconds (glm)");
  c_sim->add_option("--stim-duration", sim.stim_duration, "stimulus duration, seconds (glm)");
  c_sim->add_option("--blocks", sim.blocks, "block count (nback)");
  c_sim->add_option("--block-s", sim.block_s, "block length, seconds (nback)");
  c_sim->add_option("--channels", sim.channels, "channel count (nback)");

  DecomposeOpts dec;
  auto* c_dec = app.add_subcommand("decompose", "fit kernel atoms to a recording channel");
  c_dec->add_option("--in", dec.in_signal, "signal CSV path")->required();
  c_dec->add_option("--channel", dec.channel, "channel name (default: first)");
  c_dec->add_option("--out", dec.out_json, "decomposition JSON path")->required();
  c_dec->add_option("--residual-csv", dec.out_residual, "residual-curve CSV path");
  dec.dec.add_flags(c_dec);

  FeaturesOpts fea;
  auto* c_fea = app.add_subcommand("features", "extract a labeled feature matrix");
  c_fea->add_option("--in", fea.in_signal, "signal CSV path")->required();
  c_fea->add_option("--markers", fea.in_markers, "marker CSV path")->required();
  c_fea->add_option("--scheme", fea.scheme, "raw, tfd, or hdm");
  c_fea->add_option("--out", fea.out_csv, "feature CSV path")->required();
  fea.win.add_flags(c_fea);
  fea.dec.add_flags(c_fea);

  EvalOpts ev;
  auto* c_ev = app.add_subcommand("eval", "walk-forward scenario evaluation");
  c_ev->add_option("--in", ev.in_signals, "signal CSV path(s)")->required();
  c_ev->add_option("--markers", ev.in_markers, "marker CSV path(s)")->required();
  c_ev->add_option("--features", ev.schemes, "comma list of raw,tfd,hdm");
  c_ev->add_option("--models", ev.models, "comma list of lda,cart,rf,svm-l");
  c_ev->add_option("--out", ev.out_report, "report JSON path")->required();
  c_ev->add_option("--out-prefix", ev.out_prefix, "prefix for per-cell confusion/fold CSVs");
  c_ev->add_option("--seed", ev.seed, "RNG seed")->required();
  c_ev->add_option("--min-train-rows", ev.min_train_rows, "warm-up rows before first test");
  ev.win.add_flags(c_ev);
  ev.dec.add_flags(c_ev);

  std::string rep_in, rep_out;
  auto* c_rep = app.add_subcommand("report", "render a scenario report as text");
  c_rep->add_option("--in", rep_in, "report JSON path")->required();
  c_rep->add_option("--out", rep_out, "text output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_dec->parsed()) return cmd_decompose(dec);
    if (c_fea->parsed()) return cmd_features(fea);
    if (c_ev->parsed()) return cmd_eval(ev);
    if (c_rep->parsed()) return cmd_report(rep_in, rep_out);
  } catch (const hdm::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
