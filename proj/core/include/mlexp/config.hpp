#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/learn.hpp"
#include "mlexp/transform.hpp"

namespace mlexp {

struct DatasetRef {
  std::string path;
  std::string manifest;
};

struct CvSettings {
  std::size_t k = 5;
  std::size_t runs = 1;
  std::uint64_t base_seed = 0;
  bool grouped = false;
};

/// One fully specified experiment.
///
/// JSON form:
///   {"dataset": {"path": ..., "manifest": ...},
///    "transforms": [TransformSpec...],
///    "model": {"algorithm": ..., "hyperparameters": {...}, "seed": ...},
///    "cv": {"k": 5, "runs": 1, "base_seed": 0, "grouped": false},
///    "label": "optional name"}
struct ExperimentConfig {
  DatasetRef dataset;
  std::vector<TransformSpec> transforms;
  ModelSpec model;
  CvSettings cv;
  std::optional<std::string> label;
  /// Directory that relative dataset paths resolve against. Not serialized.
  std::filesystem::path base_dir;

  /// Throws ValidationError. Rules: at most one resample and it is last; a
  /// window step only in first position and only with grouped CV; no
  /// resample for clustering; k >= 2; runs >= 1.
  void check() const;

  std::filesystem::path dataset_path() const;
  std::filesystem::path manifest_path() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Strict: unknown keys are rejected. Missing cv fields take defaults.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sorted keys, no whitespace, shortest round-trip numbers, defaults filled.
std::string canonical_json(const ExperimentConfig& config);
/// SHA-256 of canonical_json, 64 lowercase hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace mlexp
