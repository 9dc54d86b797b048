#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/config.hpp"
#include "mlexp/dataset.hpp"
#include "mlexp/metrics.hpp"
#include "mlexp/transform.hpp"

namespace mlexp {

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  ///< fold of each row
  std::size_t run_index = 0;
  std::uint64_t seed = 0;

  RowIndices train_rows(std::size_t fold) const;
  RowIndices test_rows(std::size_t fold) const;
};

/// Ungrouped: per class (ascending), the class's rows are shuffled and dealt
/// round-robin; the deal position carries over between classes so fold sizes
/// stay within one of each other. Needs at least k rows. Grouped: groups in first-appearance order
/// are shuffled and dealt round-robin; stratification is then best-effort.
FoldPlan stratified_folds(const Labels& y, std::size_t k, std::uint64_t seed,
                          std::optional<std::span<const std::int64_t>> groups = std::nullopt);

struct Timing {
  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

struct RowCounts {
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t train_resampled = 0;
};

struct RunRecord {
  std::string config_hash;
  std::size_t run = 0;
  std::size_t fold = 0;
  MetricsBundle metrics;
  Timing timing;
  RowCounts rows;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& doc);

/// Published scalar metrics of a record, including train_time and test_time.
std::map<std::string, double> scalar_metrics(const RunRecord& record);

/// Equal in every field except timing.
bool same_outcome(const RunRecord& a, const RunRecord& b);

struct FoldContext {
  std::size_t run = 0;
  std::size_t fold = 0;
  const RowIndices& train;
  const RowIndices& test;
};

/// Hooks for instrumentation. Row indices refer to the dataset the folds were
/// built on (after windowing, when configured).
class PipelineObserver {
 public:
  virtual ~PipelineObserver() = default;
  virtual void on_fit(const FoldContext&, std::size_t /*stage*/, const RowIndices& /*rows*/,
                      const FittedTransform&) {}
  virtual void on_apply(const FoldContext&, std::size_t /*stage*/, const RowIndices& /*rows*/,
                        const Matrix& /*output*/) {}
  virtual void on_resample(const FoldContext&, const RowIndices& /*rows*/, const Resampled&) {}
  virtual void on_train(const FoldContext&, const RowIndices& /*rows*/) {}
  virtual void on_predict(const FoldContext&, const RowIndices& /*rows*/) {}
};

/// Throws LeakageError if any of `rows` is a test row of the current fold.
void guard_rows(const FoldContext& ctx, const RowIndices& rows, const std::string& stage);

/// Runs every fold of every run. Records come back ordered by (run, fold).
/// Fold seed of run r is base_seed + r; model seed is
/// base_seed + r * 10007 + fold; resample seed adds the step's own seed.
/// Clustering models are fit once on all rows and reported as run 0, fold 0.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const Dataset& ds,
                                      PipelineObserver* observer = nullptr);

}  // namespace mlexp
