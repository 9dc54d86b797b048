#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/types.hpp"

namespace mlexp {

enum class Algorithm { knn, gnb, tree, logreg, kmeans, dbscan };

std::string to_string(Algorithm algorithm);
bool is_clustering(Algorithm algorithm);

struct KnnParams {
  std::size_t k = 5;
};
struct GnbParams {};
struct TreeParams {
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
};
struct LogregParams {
  double learning_rate = 0.1;
  double l2 = 0.0;
  std::size_t max_iters = 5000;
  double tol = 1e-6;
};
struct KMeansParams {
  std::size_t k = 2;
  std::size_t max_iters = 300;
  double tol = 1e-4;
};
struct DbscanParams {
  double eps = 0.5;
  std::size_t min_pts = 5;
};

using Hyperparameters = std::variant<KnnParams, GnbParams, TreeParams, LogregParams, KMeansParams, DbscanParams>;

/// Algorithm id plus hyperparameters. The ids and hyperparameter names in
/// the JSON form are the stable public contract.
struct ModelSpec {
  Algorithm algorithm = Algorithm::knn;
  Hyperparameters params = KnnParams{};
  std::uint64_t seed = 0;

  /// Spec with default hyperparameters for `algorithm`.
  static ModelSpec defaults(Algorithm algorithm);

  void check() const;
};

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& doc);

struct KnnModel {
  Matrix x;
  Labels y;
  std::size_t k = 1;
};

struct GnbModel {
  Matrix means;      ///< C x d
  Matrix variances;  ///< C x d, smoothed
  std::vector<double> log_priors;  ///< -inf for classes absent from training
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> class_freq;  ///< training label frequencies at this node
};

struct TreeModel {
  std::vector<TreeNode> nodes;  ///< root is nodes[0]
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct LogregModel {
  Matrix weights;  ///< C x d
  Vector bias;     ///< C
  std::size_t iterations = 0;
  double final_gradient_norm = 0.0;
};

/// Immutable after train(); safe to share.
struct FittedModel {
  Algorithm algorithm = Algorithm::knn;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::variant<KnnModel, GnbModel, TreeModel, LogregModel> state;
};

/// Classifier training. `num_classes` is the dataset's class count; a
/// training fold may lack some classes.
FittedModel train(const ModelSpec& spec, const Matrix& x, const Labels& y, std::size_t num_classes);

/// n x C, each row a distribution.
Matrix predict_scores(const FittedModel& model, const Matrix& x);

/// Row-wise argmax of predict_scores, ties to the lowest class index. kNN
/// breaks vote ties by the smaller summed neighbour distance first.
Labels predict(const FittedModel& model, const Matrix& x);

std::string digest(const FittedModel& model);

struct ClusterResult {
  std::vector<int> assignments;  ///< DBSCAN noise is -1
  std::size_t cluster_count = 0;
  Matrix centroids;              ///< k-means only
  double inertia = 0.0;          ///< k-means only
  std::vector<double> inertia_history;  ///< k-means, one entry per assignment step
  std::size_t iterations = 0;
};

ClusterResult cluster(const ModelSpec& spec, const Matrix& x);

}  // namespace mlexp
