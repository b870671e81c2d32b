#include "hdm/ml.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace hdm {

using nlohmann::json;

ModelKind model_kind_from_name(const std::string& s) {
  if (s == "lda") return ModelKind::Lda;
  if (s == "cart") return ModelKind::Cart;
  if (s == "rf") return ModelKind::RandomForest;
  if (s == "svm-l") return ModelKind::LinearSvm;
  throw std::invalid_argument("unknown model kind: " + s);
}

std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Lda: return "lda";
    case ModelKind::Cart: return "cart";
    case ModelKind::RandomForest: return "rf";
    case ModelKind::LinearSvm: return "svm-l";
  }
  throw std::invalid_argument("bad model kind");
}

std::vector<Label> Model::predict(const FeatureMatrix& x) const {
  std::vector<Label> out;
  out.reserve(x.rows.size());
  for (const auto& row : x.rows) {
    if (row.size() != n_features) throw std::invalid_argument("predict: feature dimension mismatch");
    out.push_back(predict_row(row));
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_training_input(const FeatureMatrix& x) {
  if (x.rows.empty()) throw std::invalid_argument("train: empty training set");
  if (x.labels.size() != x.rows.size()) throw std::invalid_argument("train: rows/labels mismatch");
  std::array<long, kNumClasses> counts{};
  for (Label l : x.labels) counts[static_cast<int>(l)]++;
  int present = 0;
  for (long c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) throw std::invalid_argument("train: need at least 2 classes present");
  for (const auto& row : x.rows)
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("train: non-finite feature value");
}

// ---------------------------------------------------------------- LDA

struct LdaModel final : Model {
  // One linear discriminant per class; absent classes score -inf.
  std::vector<std::vector<double>> weights;  // [class][feature]
  std::array<double, kNumClasses> bias{};
  std::array<bool, kNumClasses> present{};

  Label predict_row(const std::vector<double>& row) const override {
    double best = -std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < kNumClasses; ++c) {
      if (!present[static_cast<std::size_t>(c)]) continue;
      double s = bias[static_cast<std::size_t>(c)];
      const auto& w = weights[static_cast<std::size_t>(c)];
      for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * row[j];
      if (s > best) {
        best = s;
        best_c = c;
      }
    }
    return static_cast<Label>(best_c);
  }

  std::string serialize() const override {
    json j{{"kind", "lda"}, {"n_features", n_features}, {"bias", bias}, {"present", present}, {"weights", weights}};
    return j.dump();
  }
};

std::unique_ptr<Model> train_lda(const ModelSpec& spec, const FeatureMatrix& x) {
  std::size_t n = x.rows.size();
  std::size_t d = x.rows.front().size();
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x.rows[i][j];

  std::array<long, kNumClasses> counts{};
  for (Label l : x.labels) counts[static_cast<int>(l)]++;

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(kNumClasses, static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) means.row(static_cast<int>(x.labels[i])) += data.row(static_cast<Eigen::Index>(i));
  for (int c = 0; c < kNumClasses; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0) means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

  // Pooled within-class covariance with diagonal shrinkage gamma*trace/d.
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd dev = data.row(static_cast<Eigen::Index>(i)).transpose() - means.row(static_cast<int>(x.labels[i])).transpose();
    cov.noalias() += dev * dev.transpose();
  }
  cov /= static_cast<double>(n);
  double ridge = spec.lda_shrinkage * cov.trace() / static_cast<double>(d);
  if (!(ridge > 0.0)) ridge = spec.lda_shrinkage;
  cov.diagonal().array() += ridge;

  Eigen::LDLT<Eigen::MatrixXd> solver(cov);
  auto model = std::make_unique<LdaModel>();
  model->n_features = d;
  model->weights.assign(kNumClasses, std::vector<double>(d, 0.0));
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) continue;
    model->present[static_cast<std::size_t>(c)] = true;
    Eigen::VectorXd mu = means.row(c).transpose();
    Eigen::VectorXd w = solver.solve(mu);
    for (std::size_t j = 0; j < d; ++j) model->weights[static_cast<std::size_t>(c)][j] = w(static_cast<Eigen::Index>(j));
    double prior = static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
    model->bias[static_cast<std::size_t>(c)] = -0.5 * mu.dot(w) + std::log(prior);
  }
  return model;
}

// ---------------------------------------------------------------- CART / RF

struct TreeNode {
  int feature = -1;          // -1: leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  int klass = 0;
};

struct TreeOptions {
  int max_depth = 10;
  int min_leaf = 2;
  int mtry = 0;  // features tried per split; 0 = all
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, TreeOptions opt, std::uint64_t seed)
      : x_(x), opt_(opt), rng_state_(seed) {}

  std::vector<TreeNode> build(std::vector<int> indices) {
    nodes_.clear();
    grow(std::move(indices), 0);
    return std::move(nodes_);
  }

 private:
  std::uint64_t next_rand() { return rng_state_ = splitmix64(rng_state_); }

  int majority(const std::vector<int>& idx) const {
    std::array<long, kNumClasses> counts{};
    for (int i : idx) counts[static_cast<int>(x_.labels[static_cast<std::size_t>(i)])]++;
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    return best;
  }

  static double gini(const std::array<long, kNumClasses>& counts, long total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (long c : counts) {
      double p = static_cast<double>(c) / static_cast<double>(total);
      g -= p * p;
    }
    return g;
  }

  int grow(std::vector<int> idx, int depth) {
    int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::array<long, kNumClasses> counts{};
    for (int i : idx) counts[static_cast<int>(x_.labels[static_cast<std::size_t>(i)])]++;
    bool pure = false;
    for (long c : counts) pure = pure || c == static_cast<long>(idx.size());
    nodes_[static_cast<std::size_t>(node_id)].klass = majority(idx);
    if (pure || depth >= opt_.max_depth || static_cast<int>(idx.size()) < 2 * opt_.min_leaf) return node_id;

    std::size_t d = x_.rows.front().size();
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (opt_.mtry > 0 && opt_.mtry < static_cast<int>(d)) {
      // Deterministic partial Fisher-Yates driven by the tree's own stream.
      for (int i = 0; i < opt_.mtry; ++i) {
        std::size_t j = static_cast<std::size_t>(i) + next_rand() % (d - static_cast<std::size_t>(i));
        std::swap(features[static_cast<std::size_t>(i)], features[j]);
      }
      features.resize(static_cast<std::size_t>(opt_.mtry));
      std::sort(features.begin(), features.end());
    }

    double best_impurity = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> vals;
    for (int f : features) {
      vals.clear();
      vals.reserve(idx.size());
      for (int i : idx) vals.emplace_back(x_.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)],
                                          static_cast<int>(x_.labels[static_cast<std::size_t>(i)]));
      std::sort(vals.begin(), vals.end());
      std::array<long, kNumClasses> left{};
      std::array<long, kNumClasses> right = counts;
      long n_left = 0;
      long n_total = static_cast<long>(vals.size());
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left[static_cast<std::size_t>(vals[i].second)]++;
        right[static_cast<std::size_t>(vals[i].second)]--;
        ++n_left;
        if (vals[i].first == vals[i + 1].first) continue;
        long n_right = n_total - n_left;
        if (n_left < opt_.min_leaf || n_right < opt_.min_leaf) continue;
        double imp = (static_cast<double>(n_left) * gini(left, n_left) +
                      static_cast<double>(n_right) * gini(right, n_right)) /
                     static_cast<double>(n_total);
        if (imp < best_impurity - 1e-15) {
          best_impurity = imp;
          best_feature = f;
          best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;
    double parent_impurity = gini(counts, static_cast<long>(idx.size()));
    if (best_impurity >= parent_impurity - 1e-15) return node_id;

    std::vector<int> idx_left, idx_right;
    for (int i : idx) {
      if (x_.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)] <= best_threshold)
        idx_left.push_back(i);
      else
        idx_right.push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    int l = grow(std::move(idx_left), depth + 1);
    int r = grow(std::move(idx_right), depth + 1);
    nodes_[static_cast<std::size_t>(node_id)].left = l;
    nodes_[static_cast<std::size_t>(node_id)].right = r;
    return node_id;
  }

  const FeatureMatrix& x_;
  TreeOptions opt_;
  std::uint64_t rng_state_;
  std::vector<TreeNode> nodes_;
};

int tree_predict(const std::vector<TreeNode>& nodes, const std::vector<double>& row) {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].klass;
}

json tree_to_json(const std::vector<TreeNode>& nodes) {
  json arr = json::array();
  for (const auto& n : nodes) arr.push_back({n.feature, n.threshold, n.left, n.right, n.klass});
  return arr;
}

std::vector<TreeNode> tree_from_json(const json& arr) {
  std::vector<TreeNode> nodes;
  for (const auto& e : arr) {
    TreeNode n;
    n.feature = e[0].get<int>();
    n.threshold = e[1].get<double>();
    n.left = e[2].get<int>();
    n.right = e[3].get<int>();
    n.klass = e[4].get<int>();
    nodes.push_back(n);
  }
  return nodes;
}

struct CartModel final : Model {
  std::vector<TreeNode> nodes;

  Label predict_row(const std::vector<double>& row) const override {
    return static_cast<Label>(tree_predict(nodes, row));
  }
  std::string serialize() const override {
    return json{{"kind", "cart"}, {"n_features", n_features}, {"tree", tree_to_json(nodes)}}.dump();
  }
};

struct ForestModel final : Model {
  std::vector<std::vector<TreeNode>> trees;

  Label predict_row(const std::vector<double>& row) const override {
    std::array<long, kNumClasses> votes{};
    for (const auto& t : trees) votes[static_cast<std::size_t>(tree_predict(t, row))]++;
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    return static_cast<Label>(best);
  }
  std::string serialize() const override {
    json arr = json::array();
    for (const auto& t : trees) arr.push_back(tree_to_json(t));
    return json{{"kind", "rf"}, {"n_features", n_features}, {"trees", arr}}.dump();
  }
};

std::unique_ptr<Model> train_cart(const ModelSpec& spec, const FeatureMatrix& x) {
  auto model = std::make_unique<CartModel>();
  model->n_features = x.rows.front().size();
  std::vector<int> idx(x.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  TreeBuilder builder(x, TreeOptions{spec.cart_depth, 2, 0}, spec.seed);
  model->nodes = builder.build(std::move(idx));
  return model;
}

std::unique_ptr<Model> train_forest(const ModelSpec& spec, const FeatureMatrix& x) {
  if (spec.rf_trees < 1) throw std::invalid_argument("train: rf_trees >= 1 required");
  auto model = std::make_unique<ForestModel>();
  std::size_t n = x.rows.size();
  std::size_t d = x.rows.front().size();
  model->n_features = d;
  int mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));
  model->trees.resize(static_cast<std::size_t>(spec.rf_trees));
  for (int t = 0; t < spec.rf_trees; ++t) {
    std::uint64_t tree_seed = splitmix64(spec.seed ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(t)));
    std::vector<int> boot = rf_bootstrap_indices(spec.seed, t, n);
    TreeBuilder builder(x, TreeOptions{spec.cart_depth, 2, mtry}, splitmix64(tree_seed));
    model->trees[static_cast<std::size_t>(t)] = builder.build(std::move(boot));
  }
  return model;
}

// ---------------------------------------------------------------- linear SVM

struct SvmModel final : Model {
  std::vector<std::vector<double>> weights;  // one-vs-rest, [class][feature]
  std::array<double, kNumClasses> bias{};
  std::array<bool, kNumClasses> present{};
  std::vector<double> center, scale;  // feature standardization

  Label predict_row(const std::vector<double>& row) const override {
    double best = -std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < kNumClasses; ++c) {
      if (!present[static_cast<std::size_t>(c)]) continue;
      double s = bias[static_cast<std::size_t>(c)];
      const auto& w = weights[static_cast<std::size_t>(c)];
      for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * (row[j] - center[j]) / scale[j];
      if (s > best) {
        best = s;
        best_c = c;
      }
    }
    return static_cast<Label>(best_c);
  }
  std::string serialize() const override {
    return json{{"kind", "svm-l"}, {"n_features", n_features}, {"weights", weights}, {"bias", bias},
                {"present", present}, {"center", center}, {"scale", scale}}
        .dump();
  }
};

std::unique_ptr<Model> train_svm(const ModelSpec& spec, const FeatureMatrix& x) {
  std::size_t n = x.rows.size();
  std::size_t d = x.rows.front().size();
  auto model = std::make_unique<SvmModel>();
  model->n_features = d;
  model->center.assign(d, 0.0);
  model->scale.assign(d, 1.0);
  for (const auto& row : x.rows)
    for (std::size_t j = 0; j < d; ++j) model->center[j] += row[j];
  for (auto& c : model->center) c /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (const auto& row : x.rows)
    for (std::size_t j = 0; j < d; ++j) {
      double dev = row[j] - model->center[j];
      var[j] += dev * dev;
    }
  for (std::size_t j = 0; j < d; ++j) {
    double s = std::sqrt(var[j] / static_cast<double>(n));
    model->scale[j] = s > 1e-12 ? s : 1.0;
  }

  std::array<long, kNumClasses> counts{};
  for (Label l : x.labels) counts[static_cast<int>(l)]++;
  model->weights.assign(kNumClasses, std::vector<double>(d, 0.0));

  // One-vs-rest hinge loss, deterministic epoch-ordered subgradient descent.
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) continue;
    model->present[static_cast<std::size_t>(c)] = true;
    auto& w = model->weights[static_cast<std::size_t>(c)];
    double& b = model->bias[static_cast<std::size_t>(c)];
    for (int epoch = 0; epoch < spec.svm_epochs; ++epoch) {
      double eta = 1.0 / (1.0 + static_cast<double>(epoch));
      for (std::size_t i = 0; i < n; ++i) {
        double yi = static_cast<int>(x.labels[i]) == c ? 1.0 : -1.0;
        double s = b;
        for (std::size_t j = 0; j < d; ++j) s += w[j] * (x.rows[i][j] - model->center[j]) / model->scale[j];
        double margin = yi * s;
        for (std::size_t j = 0; j < d; ++j) {
          double g = spec.svm_lambda * w[j];
          if (margin < 1.0) g -= yi * (x.rows[i][j] - model->center[j]) / model->scale[j];
          w[j] -= eta * g / static_cast<double>(n);
        }
        if (margin < 1.0) b += eta * yi / static_cast<double>(n);
      }
    }
  }
  return model;
}

}  // namespace

std::vector<int> rf_bootstrap_indices(std::uint64_t master_seed, int tree_index, std::size_t n) {
  std::uint64_t state = splitmix64(master_seed ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(tree_index)));
  std::vector<int> boot(n);
  for (std::size_t i = 0; i < n; ++i) {
    state = splitmix64(state);
    boot[i] = static_cast<int>(state % n);
  }
  return boot;
}

std::unique_ptr<Model> train(const ModelSpec& spec, const FeatureMatrix& x) {
  check_training_input(x);
  switch (spec.kind) {
    case ModelKind::Lda: return train_lda(spec, x);
    case ModelKind::Cart: return train_cart(spec, x);
    case ModelKind::RandomForest: return train_forest(spec, x);
    case ModelKind::LinearSvm: return train_svm(spec, x);
  }
  throw std::invalid_argument("train: bad model kind");
}

std::unique_ptr<Model> deserialize_model(const std::string& text) {
  json j = json::parse(text);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "lda") {
    auto m = std::make_unique<LdaModel>();
    m->n_features = j.at("n_features").get<std::size_t>();
    m->weights = j.at("weights").get<std::vector<std::vector<double>>>();
    auto bias = j.at("bias").get<std::vector<double>>();
    auto present = j.at("present").get<std::vector<bool>>();
    for (int c = 0; c < kNumClasses; ++c) {
      m->bias[static_cast<std::size_t>(c)] = bias[static_cast<std::size_t>(c)];
      m->present[static_cast<std::size_t>(c)] = present[static_cast<std::size_t>(c)];
    }
    return m;
  }
  if (kind == "cart") {
    auto m = std::make_unique<CartModel>();
    m->n_features = j.at("n_features").get<std::size_t>();
    m->nodes = tree_from_json(j.at("tree"));
    return m;
  }
  if (kind == "rf") {
    auto m = std::make_unique<ForestModel>();
    m->n_features = j.at("n_features").get<std::size_t>();
    for (const auto& t : j.at("trees")) m->trees.push_back(tree_from_json(t));
    return m;
  }
  if (kind == "svm-l") {
    auto m = std::make_unique<SvmModel>();
    m->n_features = j.at("n_features").get<std::size_t>();
    m->weights = j.at("weights").get<std::vector<std::vector<double>>>();
    auto bias = j.at("bias").get<std::vector<double>>();
    auto present = j.at("present").get<std::vector<bool>>();
    for (int c = 0; c < kNumClasses; ++c) {
      m->bias[static_cast<std::size_t>(c)] = bias[static_cast<std::size_t>(c)];
      m->present[static_cast<std::size_t>(c)] = present[static_cast<std::size_t>(c)];
    }
    m->center = j.at("center").get<std::vector<double>>();
    m->scale = j.at("scale").get<std::vector<double>>();
    return m;
  }
  throw std::invalid_argument("deserialize_model: unknown kind " + kind);
}

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts)
    for (long v : row) t += v;
  return t;
}

long ConfusionMatrix::trace() const {
  long t = 0;
  for (int c = 0; c < kNumClasses; ++c) t += counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
  return t;
}

ConfusionMatrix confusion(const std::vector<Label>& actual, const std::vector<Label>& predicted) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("confusion: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    int a = static_cast<int>(actual[i]);
    int p = static_cast<int>(predicted[i]);
    if (a < 0 || a >= kNumClasses || p < 0 || p >= kNumClasses) throw std::invalid_argument("confusion: unknown label");
    cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)]++;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  long total = cm.total();
  if (total <= 0) throw std::invalid_argument("metrics: empty confusion matrix");
  MetricsReport r;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (int c = 0; c < kNumClasses; ++c) {
    long row = 0, col = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      row += cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
      col += cm.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
    }
    long diag = cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    if (row > 0)
      r.recall[static_cast<std::size_t>(c)] = static_cast<double>(diag) / static_cast<double>(row);
    else
      r.recall_undefined[static_cast<std::size_t>(c)] = true;
    if (col > 0)
      r.precision[static_cast<std::size_t>(c)] = static_cast<double>(diag) / static_cast<double>(col);
    else
      r.precision_undefined[static_cast<std::size_t>(c)] = true;
    r.macro_recall += r.recall[static_cast<std::size_t>(c)];
    r.macro_precision += r.precision[static_cast<std::size_t>(c)];
  }
  r.macro_recall /= kNumClasses;
  r.macro_precision /= kNumClasses;
  return r;
}

}  // namespace hdm
