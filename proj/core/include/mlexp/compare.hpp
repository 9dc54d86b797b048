#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/evaluate.hpp"
#include "mlexp/metrics.hpp"
#include "mlexp/stat_tests.hpp"

namespace mlexp {

struct Criterion {
  std::string metric;
  double weight = 1.0;
  Direction direction = Direction::maximize;
};

/// A named weighting of metrics. JSON:
/// {"name": ..., "criteria": [{"metric": ..., "weight": ..., "direction": "maximize"|"minimize"}]}
/// `direction` defaults to the metric's natural direction.
struct Scenario {
  std::string name;
  std::vector<Criterion> criteria;

  void check() const;
};

/// Validates metric ids, rejects non-positive weights and normalizes weights
/// to sum 1.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& scenario);

struct RankedModel {
  std::string model;
  double score = 0.0;
};

/// model id -> metric id -> summary value (usually the mean over folds).
using MetricSummaries = std::map<std::string, std::map<std::string, double>>;

/// Min-max normalizes each criterion across models (constant -> 0.5), flips
/// minimized metrics, and sorts by weighted sum, descending; ties by model id.
std::vector<RankedModel> rank_models(const Scenario& scenario, const MetricSummaries& summaries);

/// Mean of every published scalar metric per config hash.
MetricSummaries summarize_records(const std::vector<RunRecord>& records);

/// Paired per-(run, fold) values of one metric for several models.
struct MetricSamples {
  std::string metric;
  Direction direction = Direction::maximize;
  std::vector<std::string> models;
  std::vector<std::pair<std::size_t, std::size_t>> keys;  ///< (run, fold), shared by every model
  std::vector<std::vector<double>> values;                ///< values[model][sample]
};

/// Gathers `metric` for the given config hashes. Throws ValidationError when
/// a hash is absent (listing those present), when a record lacks the metric,
/// or when the (run, fold) keys differ between models.
MetricSamples samples_from_records(const std::vector<RunRecord>& records, const std::string& metric,
                                   const std::vector<std::string>& models);

struct PairwiseResult {
  std::size_t a = 0;
  std::size_t b = 0;
  TestResult test;
  double p_adjusted = 1.0;
  bool reject = false;
};

struct NormalityCheck {
  std::string sample;
  std::optional<TestResult> result;  ///< empty when the test could not run
  bool normal = false;
  std::string note;
};

struct ComparisonReport {
  std::string metric;
  double alpha = 0.05;
  std::vector<std::string> models;
  std::size_t sample_size = 0;
  std::vector<NormalityCheck> normality;
  std::optional<TestResult> levene;
  std::string family;  ///< "parametric" or "nonparametric"
  std::string family_reason;
  std::optional<FriedmanResult> omnibus;
  std::vector<PairwiseResult> pairwise;
  std::optional<NemenyiResult> nemenyi;
  std::vector<std::string> trail;
  std::string conclusion;
};

/// Automatic test selection. Two models: Shapiro-Wilk on the differences
/// picks paired t or Wilcoxon. Three or more: Shapiro-Wilk per model and
/// Levene; all normal and homogeneous gives Holm-corrected paired t for every
/// pair, otherwise Friedman, then (if it rejects) Nemenyi and a Holm-corrected
/// Wilcoxon table.
ComparisonReport compare(const MetricSamples& samples, double alpha = 0.05);

nlohmann::json to_json(const ComparisonReport& report);
std::string to_text(const ComparisonReport& report);

}  // namespace mlexp
