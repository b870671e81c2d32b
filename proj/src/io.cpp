#include "hdm/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hdm {

using nlohmann::json;

json decomposition_to_json(const Decomposition& d) {
  json atoms = json::array();
  for (const auto& a : d.atoms) atoms.push_back({{"a", a.a}, {"omega", a.omega}, {"tau", a.tau}});
  return json{{"version", kToolVersion},
              {"base", {{"a", d.base.params.a}, {"omega", d.base.params.omega}, {"tau", d.base.params.tau}}},
              {"atoms", atoms},
              {"theta_eps_hat", d.theta_eps_hat},
              {"sigma2_hat", d.sigma2_hat},
              {"residual_curve", d.residual_curve},
              {"iterations", d.iterations},
              {"converged", d.converged},
              {"mean_offset", d.mean_offset},
              {"xi", d.xi}};
}

Decomposition decomposition_from_json(const json& j) {
  Decomposition d;
  d.base.params.a = j.at("base").at("a").get<double>();
  d.base.params.omega = j.at("base").at("omega").get<double>();
  d.base.params.tau = j.at("base").at("tau").get<double>();
  for (const auto& a : j.at("atoms"))
    d.atoms.push_back({a.at("a").get<double>(), a.at("omega").get<double>(), a.at("tau").get<double>()});
  d.theta_eps_hat = j.at("theta_eps_hat").get<double>();
  d.sigma2_hat = j.at("sigma2_hat").get<double>();
  d.residual_curve = j.at("residual_curve").get<std::vector<double>>();
  d.iterations = j.at("iterations").get<int>();
  d.converged = j.at("converged").get<bool>();
  d.mean_offset = j.at("mean_offset").get<double>();
  d.xi = j.at("xi").get<double>();
  return d;
}

json config_to_json(const DecomposerConfig& c) {
  return json{{"xi_abs", c.xi_abs},
              {"xi_rel", c.xi_rel},
              {"max_iterations", c.max_iterations},
              {"kappa_a0", c.kappa_a0},
              {"kappa_tau0", c.kappa_tau0},
              {"kappa_tau1", c.kappa_tau1},
              {"omega_eps", c.omega_eps},
              {"omega_m", c.omega_m},
              {"smoothing_halfwidth", c.smoothing_halfwidth},
              {"seed_order", c.seed_order == SeedOrder::DescendingMagnitude ? "descending" : "chronological"},
              {"n_starts", c.n_starts},
              {"max_seeds_per_iter", c.max_seeds_per_iter}};
  // threads is an execution detail, not provenance: results are identical at
  // any thread count, so echoing it would break bit-identical reruns.
}

void config_from_json(const json& j, DecomposerConfig& c) {
  c.xi_abs = j.value("xi_abs", c.xi_abs);
  c.xi_rel = j.value("xi_rel", c.xi_rel);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.kappa_a0 = j.value("kappa_a0", c.kappa_a0);
  c.kappa_tau0 = j.value("kappa_tau0", c.kappa_tau0);
  c.kappa_tau1 = j.value("kappa_tau1", c.kappa_tau1);
  c.omega_eps = j.value("omega_eps", c.omega_eps);
  c.omega_m = j.value("omega_m", c.omega_m);
  c.smoothing_halfwidth = j.value("smoothing_halfwidth", c.smoothing_halfwidth);
  if (j.contains("seed_order"))
    c.seed_order = j.at("seed_order").get<std::string>() == "chronological" ? SeedOrder::Chronological
                                                                            : SeedOrder::DescendingMagnitude;
  c.n_starts = j.value("n_starts", c.n_starts);
  c.max_seeds_per_iter = j.value("max_seeds_per_iter", c.max_seeds_per_iter);
}

void write_feature_csv(const FeatureMatrix& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(17);
  for (const auto& c : m.columns) f << c << ",";
  f << "label\n";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    for (double v : m.rows[i]) f << v << ",";
    f << (i < m.labels.size() ? label_name(m.labels[i]) : "rest") << "\n";
  }
}

FeatureMatrix read_feature_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  FeatureMatrix m;
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
  {
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) m.columns.push_back(field);
    if (m.columns.empty() || m.columns.back() != "label") throw std::runtime_error(path + ": missing label column");
    m.columns.pop_back();
  }
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<double> row;
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      if (!std::getline(ss, field, ',')) throw std::runtime_error(path + ": short row");
      row.push_back(std::stod(field));
    }
    if (!std::getline(ss, field, ',')) throw std::runtime_error(path + ": missing label");
    m.labels.push_back(label_from_name(field));
    m.rows.push_back(std::move(row));
  }
  return m;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "actual\\predicted,rest,0-back,2-back,3-back\n";
  for (int a = 0; a < kNumClasses; ++a) {
    f << label_name(static_cast<Label>(a));
    for (int p = 0; p < kNumClasses; ++p) f << "," << cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
    f << "\n";
  }
}

ConfusionMatrix read_confusion_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
  ConfusionMatrix cm;
  for (int a = 0; a < kNumClasses; ++a) {
    if (!std::getline(f, line)) throw std::runtime_error(path + ": truncated confusion matrix");
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');  // row label
    for (int p = 0; p < kNumClasses; ++p) {
      if (!std::getline(ss, field, ',')) throw std::runtime_error(path + ": short confusion row");
      cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] = std::stol(field);
    }
  }
  return cm;
}

json metrics_to_json(const MetricsReport& r) {
  json per_class = json::array();
  for (int c = 0; c < kNumClasses; ++c)
    per_class.push_back({{"class", label_name(static_cast<Label>(c))},
                         {"recall", r.recall[static_cast<std::size_t>(c)]},
                         {"precision", r.precision[static_cast<std::size_t>(c)]},
                         {"recall_undefined", r.recall_undefined[static_cast<std::size_t>(c)]},
                         {"precision_undefined", r.precision_undefined[static_cast<std::size_t>(c)]}});
  return json{{"accuracy", r.accuracy},
              {"per_class", per_class},
              {"macro_recall", r.macro_recall},
              {"macro_precision", r.macro_precision}};
}

json scenario_report_to_json(const ScenarioReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cm = json::array();
    for (const auto& row : c.cm.counts) cm.push_back(row);
    cells.push_back({{"subject", c.subject},
                     {"scheme", scheme_name(c.scheme)},
                     {"model", c.model_name},
                     {"confusion", cm},
                     {"metrics", metrics_to_json(c.report)},
                     {"fold_accuracy", c.fold_accuracy}});
  }
  return json{{"version", kToolVersion}, {"cells", cells}};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace hdm
