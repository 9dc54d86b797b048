#include "mlexp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>

#include "mlexp/error.hpp"

namespace mlexp {

bool MetricsBundle::operator==(const MetricsBundle& other) const {
  return to_json(*this) == to_json(other);
}

ConfusionMatrix confusion_matrix(const Labels& truth, const Labels& predicted, std::size_t num_classes) {
  if (truth.size() != predicted.size()) throw ValidationError("confusion_matrix: length mismatch");
  ConfusionMatrix cm(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes || static_cast<std::size_t>(p) >= num_classes) {
      throw ValidationError("confusion_matrix: class index out of range at position " + std::to_string(i));
    }
    ++cm[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return cm;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

MetricsBundle classification_metrics(const ConfusionMatrix& cm) {
  const std::size_t c_count = cm.size();
  for (const auto& row : cm) {
    if (row.size() != c_count) throw ValidationError("classification_metrics: confusion matrix is not square");
  }
  MetricsBundle m;
  m.task = Task::classification;
  m.confusion = cm;
  std::vector<double> row_sum(c_count, 0.0), col_sum(c_count, 0.0);
  double total = 0.0, trace = 0.0;
  for (std::size_t i = 0; i < c_count; ++i) {
    for (std::size_t j = 0; j < c_count; ++j) {
      const auto v = static_cast<double>(cm[i][j]);
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
    trace += static_cast<double>(cm[i][i]);
  }
  m.accuracy = ratio(trace, total);
  for (std::size_t c = 0; c < c_count; ++c) {
    const auto tp = static_cast<double>(cm[c][c]);
    const double p = ratio(tp, col_sum[c]);
    const double r = ratio(tp, row_sum[c]);
    m.precision.push_back(p);
    m.recall.push_back(r);
    m.f1.push_back(ratio(2.0 * p * r, p + r));
  }
  if (c_count > 0) {
    const auto mean = [&](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(c_count);
    };
    const auto weighted = [&](const std::vector<double>& v) {
      double s = 0.0;
      for (std::size_t c = 0; c < c_count; ++c) s += v[c] * row_sum[c];
      return ratio(s, total);
    };
    m.macro_precision = mean(m.precision);
    m.macro_recall = mean(m.recall);
    m.macro_f1 = mean(m.f1);
    m.weighted_precision = weighted(m.precision);
    m.weighted_recall = weighted(m.recall);
    m.weighted_f1 = weighted(m.f1);
  }
  return m;
}

RocCurve roc_curve(const Labels& truth, std::span<const double> positive_scores, int positive_class) {
  if (truth.size() != positive_scores.size()) throw ValidationError("roc_curve: length mismatch");
  double positives = 0.0, negatives = 0.0;
  for (int t : truth) (t == positive_class ? positives : negatives) += 1.0;
  if (positives == 0.0 || negatives == 0.0) throw ValidationError("roc_curve: only one class present");

  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return positive_scores[a] > positive_scores[b]; });
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = positive_scores[order[i]];
    while (i < order.size() && positive_scores[order[i]] == s) {
      (truth[order[i]] == positive_class ? tp : fp) += 1.0;
      ++i;
    }
    curve.points.push_back({fp / negatives, tp / positives});
  }
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    const auto& a = curve.points[p - 1];
    const auto& b = curve.points[p];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

MetricsBundle evaluate_predictions(const Labels& truth, const Labels& predicted, const Matrix& scores,
                                   std::size_t num_classes) {
  MetricsBundle m = classification_metrics(confusion_matrix(truth, predicted, num_classes));
  if (static_cast<std::size_t>(scores.rows()) != truth.size() || static_cast<std::size_t>(scores.cols()) != num_classes) {
    throw ValidationError("evaluate_predictions: score matrix shape mismatch");
  }
  double auc_sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const bool has_pos = std::find(truth.begin(), truth.end(), static_cast<int>(c)) != truth.end();
    const bool has_neg = std::any_of(truth.begin(), truth.end(), [&](int t) { return t != static_cast<int>(c); });
    if (!has_pos || !has_neg) {
      m.auc.emplace_back();
      m.roc.emplace_back();
      continue;
    }
    std::vector<double> col(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) col[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    RocCurve curve = roc_curve(truth, col, static_cast<int>(c));
    m.auc.emplace_back(curve.auc);
    auc_sum += curve.auc;
    ++defined;
    m.roc.emplace_back(std::move(curve));
  }
  if (defined > 0) m.macro_auc = auc_sum / static_cast<double>(defined);
  return m;
}

double silhouette(const Matrix& x, const std::vector<int>& assignments) {
  if (static_cast<std::size_t>(x.rows()) != assignments.size()) throw ValidationError("silhouette: length mismatch");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] >= 0) members[assignments[i]].push_back(i);
  }
  if (members.size() < 2) throw ValidationError("silhouette: need at least two clusters");

  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& [label, own] : members) {
    for (auto i : own) {
      ++counted;
      if (own.size() == 1) continue;
      const auto mean_dist = [&](const std::vector<std::size_t>& group) {
        double s = 0.0;
        for (auto j : group) {
          if (j != i) s += (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
        }
        return s / static_cast<double>(group.size() - (std::find(group.begin(), group.end(), i) != group.end() ? 1 : 0));
      };
      const double a = mean_dist(own);
      double b = std::numeric_limits<double>::infinity();
      for (const auto& [other, group] : members) {
        if (other != label) b = std::min(b, mean_dist(group));
      }
      const double denom = std::max(a, b);
      total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
  }
  return total / static_cast<double>(counted);
}

double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("adjusted_rand: length mismatch");
  if (a.size() < 2) throw ValidationError("adjusted_rand: need at least two points");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  const auto pairs = [](double v) { return v * (v - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [_, v] : joint) index += pairs(v);
  for (const auto& [_, v] : rows) sum_a += pairs(v);
  for (const auto& [_, v] : cols) sum_b += pairs(v);
  const double expected = sum_a * sum_b / pairs(static_cast<double>(a.size()));
  const double max_index = (sum_a + sum_b) / 2.0;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> optional_from(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

nlohmann::json to_json(const MetricsBundle& m) {
  nlohmann::json doc;
  if (m.task == Task::clustering) {
    doc["task"] = "clustering";
    doc["silhouette"] = optional_json(m.silhouette);
    doc["adjusted_rand"] = optional_json(m.adjusted_rand);
    doc["cluster_count"] = m.cluster_count;
    return doc;
  }
  doc["task"] = "classification";
  doc["accuracy"] = m.accuracy;
  doc["precision"] = m.precision;
  doc["recall"] = m.recall;
  doc["f1"] = m.f1;
  doc["macro_precision"] = m.macro_precision;
  doc["macro_recall"] = m.macro_recall;
  doc["macro_f1"] = m.macro_f1;
  doc["weighted_precision"] = m.weighted_precision;
  doc["weighted_recall"] = m.weighted_recall;
  doc["weighted_f1"] = m.weighted_f1;
  doc["confusion"] = m.confusion;
  doc["auc"] = nlohmann::json::array();
  for (const auto& a : m.auc) doc["auc"].push_back(optional_json(a));
  doc["macro_auc"] = optional_json(m.macro_auc);
  doc["roc"] = nlohmann::json::array();
  for (const auto& curve : m.roc) {
    if (!curve) {
      doc["roc"].push_back(nullptr);
      continue;
    }
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : curve->points) pts.push_back({p.fpr, p.tpr});
    doc["roc"].push_back(std::move(pts));
  }
  return doc;
}

MetricsBundle metrics_from_json(const nlohmann::json& doc) {
  MetricsBundle m;
  try {
    if (doc.at("task").get<std::string>() == "clustering") {
      m.task = Task::clustering;
      m.silhouette = optional_from(doc.at("silhouette"));
      m.adjusted_rand = optional_from(doc.at("adjusted_rand"));
      m.cluster_count = doc.at("cluster_count").get<std::size_t>();
      return m;
    }
    m.accuracy = doc.at("accuracy").get<double>();
    m.precision = doc.at("precision").get<std::vector<double>>();
    m.recall = doc.at("recall").get<std::vector<double>>();
    m.f1 = doc.at("f1").get<std::vector<double>>();
    m.macro_precision = doc.at("macro_precision").get<double>();
    m.macro_recall = doc.at("macro_recall").get<double>();
    m.macro_f1 = doc.at("macro_f1").get<double>();
    m.weighted_precision = doc.at("weighted_precision").get<double>();
    m.weighted_recall = doc.at("weighted_recall").get<double>();
    m.weighted_f1 = doc.at("weighted_f1").get<double>();
    m.confusion = doc.at("confusion").get<ConfusionMatrix>();
    for (const auto& a : doc.at("auc")) m.auc.push_back(optional_from(a));
    m.macro_auc = optional_from(doc.at("macro_auc"));
    for (const auto& curve : doc.at("roc")) {
      if (curve.is_null()) {
        m.roc.emplace_back();
        continue;
      }
      RocCurve c;
      for (const auto& p : curve) c.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      for (std::size_t i = 1; i < c.points.size(); ++i) {
        c.auc += (c.points[i].fpr - c.points[i - 1].fpr) * (c.points[i].tpr + c.points[i - 1].tpr) / 2.0;
      }
      m.roc.emplace_back(std::move(c));
    }
    // The stored AUC is authoritative; the curve recomputation above only fills the field.
    for (std::size_t c = 0; c < m.roc.size() && c < m.auc.size(); ++c) {
      if (m.roc[c] && m.auc[c]) m.roc[c]->auc = *m.auc[c];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics: ") + e.what());
  }
  return m;
}

std::map<std::string, double> scalar_metrics(const MetricsBundle& m) {
  std::map<std::string, double> out;
  if (m.task == Task::clustering) {
    if (m.silhouette) out["silhouette"] = *m.silhouette;
    if (m.adjusted_rand) out["adjusted_rand"] = *m.adjusted_rand;
    return out;
  }
  out["accuracy"] = m.accuracy;
  out["macro_precision"] = m.macro_precision;
  out["macro_recall"] = m.macro_recall;
  out["macro_f1"] = m.macro_f1;
  out["weighted_precision"] = m.weighted_precision;
  out["weighted_recall"] = m.weighted_recall;
  out["weighted_f1"] = m.weighted_f1;
  if (m.macro_auc) out["macro_auc"] = *m.macro_auc;
  for (std::size_t c = 0; c < m.precision.size(); ++c) {
    const auto s = std::to_string(c);
    out["precision_" + s] = m.precision[c];
    out["recall_" + s] = m.recall[c];
    out["f1_" + s] = m.f1[c];
    if (c < m.auc.size() && m.auc[c]) out["auc_" + s] = *m.auc[c];
  }
  return out;
}

bool is_published_metric(const std::string& id) {
  static const std::regex pattern(
      "accuracy|macro_(precision|recall|f1|auc)|weighted_(precision|recall|f1)|(precision|recall|f1|auc)_[0-9]+|"
      "silhouette|adjusted_rand|train_time|test_time");
  return std::regex_match(id, pattern);
}

std::string canonical_metric_id(const std::string& id) {
  if (id == "precision" || id == "recall" || id == "f1" || id == "auc") return "macro_" + id;
  return id;
}

Direction default_direction(const std::string& id) {
  return id == "train_time" || id == "test_time" ? Direction::minimize : Direction::maximize;
}

std::string to_string(Direction direction) { return direction == Direction::maximize ? "maximize" : "minimize"; }

}  // namespace mlexp
