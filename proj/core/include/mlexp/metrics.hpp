#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/types.hpp"

namespace mlexp {

/// Entry (i, j) counts rows of true class i predicted as j.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  ///< from (0,0) to (1,1), one point per distinct score
  double auc = 0.0;
};

enum class Task { classification, clustering };

/// Everything measured on one test fold (classification) or one clustering.
/// Rates follow the 0/0 -> 0 convention.
struct MetricsBundle {
  Task task = Task::classification;

  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  ConfusionMatrix confusion;
  /// One-vs-rest; empty optional when the fold lacks positives or negatives.
  std::vector<std::optional<double>> auc;
  std::optional<double> macro_auc;
  std::vector<std::optional<RocCurve>> roc;

  std::optional<double> silhouette;
  std::optional<double> adjusted_rand;
  std::size_t cluster_count = 0;

  bool operator==(const MetricsBundle&) const;
};

ConfusionMatrix confusion_matrix(const Labels& truth, const Labels& predicted, std::size_t num_classes);

/// Accuracy, per-class and averaged precision/recall/F1 from a confusion matrix.
MetricsBundle classification_metrics(const ConfusionMatrix& cm);

/// Binary ROC treating `positive_class` as positive. One point per distinct
/// score (descending), so tied scores form a single diagonal segment. AUC by
/// the trapezoidal rule. Throws when only one class is present.
RocCurve roc_curve(const Labels& truth, std::span<const double> positive_scores, int positive_class);

/// classification_metrics plus one-vs-rest ROC/AUC per class from `scores`
/// (n x C).
MetricsBundle evaluate_predictions(const Labels& truth, const Labels& predicted, const Matrix& scores,
                                   std::size_t num_classes);

/// Mean silhouette over non-noise points (assignment -1 is noise). Points in
/// singleton clusters contribute 0. Throws with fewer than two clusters.
double silhouette(const Matrix& x, const std::vector<int>& assignments);

/// Pair-counting adjusted Rand index. Returns 1 when the expected-index
/// correction degenerates (both partitions trivial and identical in shape).
double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b);

nlohmann::json to_json(const MetricsBundle& m);
MetricsBundle metrics_from_json(const nlohmann::json& doc);

/// Scalar metrics under their published ids, e.g. accuracy, macro_f1,
/// recall_1, auc_0, silhouette. Undefined values are omitted.
std::map<std::string, double> scalar_metrics(const MetricsBundle& m);

enum class Direction { maximize, minimize };

/// True for the ids scalar_metrics can emit plus train_time / test_time.
bool is_published_metric(const std::string& id);
/// Maps the short aliases precision, recall, f1 and auc to their macro ids.
std::string canonical_metric_id(const std::string& id);
Direction default_direction(const std::string& id);
std::string to_string(Direction direction);

}  // namespace mlexp
