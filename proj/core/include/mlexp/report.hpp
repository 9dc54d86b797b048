#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mlexp/evaluate.hpp"
#include "mlexp/metrics.hpp"

namespace mlexp {

struct MetricAggregate {
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

/// One row per published scalar metric present in any record, sorted by id.
std::vector<MetricAggregate> aggregate_metrics(const std::vector<RunRecord>& records);

/// Element-wise sum of the records' confusion matrices.
ConfusionMatrix summed_confusion(const std::vector<RunRecord>& records);

/// Vertical averaging at the union of FPR breakpoints. Where a curve jumps
/// at a breakpoint both its lower and upper TPR are averaged, giving two
/// points at that FPR.
std::vector<RocPoint> mean_roc(const std::vector<std::vector<RocPoint>>& curves);

/// Writes under out_dir:
///   <config_hash>/metrics.csv, metrics.txt      mean and std per metric
///   <config_hash>/confusion.csv, confusion.txt  summed over folds
///   <config_hash>/roc_class_<c>.csv, roc.svg    mean one-vs-rest ROC
///   summary.csv                                 one row per config
/// Returns every path written. Throws ValidationError on an empty selection
/// or a hash with no records.
std::vector<std::filesystem::path> generate_report(const std::filesystem::path& store_path,
                                                   const std::vector<std::string>& selection,
                                                   const std::filesystem::path& out_dir);

}  // namespace mlexp
