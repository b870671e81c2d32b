#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hdm/features.hpp"

namespace hdm {

enum class ModelKind { Lda, Cart, RandomForest, LinearSvm };

struct ModelSpec {
  ModelKind kind = ModelKind::RandomForest;
  int cart_depth = 10;        // CART and per-tree depth cap
  int rf_trees = 50;          // RandomForest only
  double svm_lambda = 1e-3;   // LinearSvm L2 strength
  int svm_epochs = 20;        // LinearSvm pass count
  double lda_shrinkage = 1e-3;
  std::uint64_t seed = 0;
};

ModelKind model_kind_from_name(const std::string& s);
std::string model_kind_name(ModelKind k);

class Model {
 public:
  virtual ~Model() = default;
  virtual Label predict_row(const std::vector<double>& row) const = 0;
  virtual std::string serialize() const = 0;
  std::vector<Label> predict(const FeatureMatrix& x) const;

  std::size_t n_features = 0;
};

// Trains a model. Throws if fewer than 2 classes are present or rows are
// empty/non-finite.
std::unique_ptr<Model> train(const ModelSpec& spec, const FeatureMatrix& x);

std::unique_ptr<Model> deserialize_model(const std::string& text);

// Bootstrap row indices used for tree `tree_index` of a forest trained with
// `master_seed`. Exposed so the degenerate one-tree forest can be checked
// against a plain CART fit on the same bootstrap.
std::vector<int> rf_bootstrap_indices(std::uint64_t master_seed, int tree_index, std::size_t n);

struct ConfusionMatrix {
  // rows = actual, cols = predicted, class order (rest, 0-back, 2-back, 3-back)
  std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

  long total() const;
  long trace() const;
};

ConfusionMatrix confusion(const std::vector<Label>& actual, const std::vector<Label>& predicted);

struct MetricsReport {
  double accuracy = 0.0;
  std::array<double, kNumClasses> recall{};     // diag / row sum
  std::array<double, kNumClasses> precision{};  // diag / column sum
  std::array<bool, kNumClasses> recall_undefined{};
  std::array<bool, kNumClasses> precision_undefined{};
  double macro_recall = 0.0;
  double macro_precision = 0.0;
};

MetricsReport metrics(const ConfusionMatrix& cm);

}  // namespace hdm
