#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/config.hpp"

namespace mlexp {

/// An ExperimentConfig document in which any scalar position may hold a list
/// of candidates instead (the `transforms` array itself is the chain, not an
/// axis). An optional top-level "workers" key sets parallelism.
struct BatchConfig {
  nlohmann::ordered_json document;  ///< without "workers"
  std::size_t workers = 1;
  std::filesystem::path base_dir;
};

BatchConfig batch_from_json(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir = {});
BatchConfig load_batch(const std::filesystem::path& path);

struct GridAxis {
  std::string pointer;  ///< JSON pointer to the list, e.g. /model/hyperparameters/k
  std::vector<nlohmann::ordered_json> values;
};

/// Axes in document order (depth-first).
std::vector<GridAxis> grid_axes(const BatchConfig& batch);

/// Cartesian product, first axis varying slowest. Every config is checked;
/// an invalid one aborts with its grid coordinates in the message.
std::vector<ExperimentConfig> expand_grid(const BatchConfig& batch);

struct BatchSummary {
  std::size_t configs = 0;
  std::size_t records_written = 0;
  std::size_t records_skipped = 0;  ///< duplicate keys already in the store
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  std::vector<std::string> config_hashes;  ///< in input order
};

/// Layout under out_dir: records.jsonl (the results store) and
/// configs/<config_hash>.json (canonical form). A failing config is logged
/// and counted; the others still run.
BatchSummary run_configs(const std::vector<ExperimentConfig>& configs, const std::filesystem::path& out_dir,
                         std::size_t workers = 1, std::ostream* log = nullptr);

BatchSummary run_batch(const BatchConfig& batch, const std::filesystem::path& out_dir, std::ostream* log = nullptr);

std::filesystem::path store_path(const std::filesystem::path& out_dir);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace mlexp
