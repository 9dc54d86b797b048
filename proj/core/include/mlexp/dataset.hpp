#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/types.hpp"

namespace mlexp {

enum class FeatureKind { numeric, categorical };
enum class MissingPolicy { drop_row, error };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
};

/// Describes how to read one CSV file. Columns not named here are ignored.
struct Manifest {
  std::vector<FeatureSpec> features;
  std::optional<std::string> label_column;
  std::optional<std::string> group_column;
  std::string missing_token = "?";
  MissingPolicy missing_policy = MissingPolicy::drop_row;

  /// Throws ValidationError on duplicate names, empty feature list or an
  /// empty missing token.
  void check() const;
};

nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& doc);
Manifest load_manifest(const std::filesystem::path& path);

/// Sorted keys, no whitespace. Used for digests.
std::string canonical_manifest(const Manifest& manifest);

struct FeatureMeta {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  /// Categorical levels in first-appearance order; value i encodes levels[i].
  std::vector<std::string> levels;

  bool operator==(const FeatureMeta&) const = default;
};

struct Finding {
  std::string code;
  std::string message;
  std::string location;
  /// Number of affected rows or items, when the finding counts something.
  std::size_t count = 0;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  bool ok() const { return errors.empty(); }
};

/// Immutable after construction; share freely across threads.
struct Dataset {
  Matrix features;
  std::optional<Labels> labels;
  std::vector<std::string> class_names;
  std::vector<FeatureMeta> feature_meta;
  std::optional<std::vector<std::int64_t>> group_ids;
  /// "<path>#sha256:<hex>" where the digest covers file bytes + canonical manifest.
  std::string origin;
  /// Non-fatal notes produced while loading (dropped rows).
  std::vector<Finding> load_warnings;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t num_classes() const { return class_names.size(); }
  bool has_labels() const { return labels.has_value(); }

  /// Throws ValidationError when any structural invariant is broken.
  void check_invariants() const;
};

/// Same content: bitwise-equal matrices and identical metadata. Ignores
/// origin and load warnings.
bool same_content(const Dataset& a, const Dataset& b);

Dataset load_dataset(const std::filesystem::path& path, const Manifest& manifest);

/// Parses CSV text already in memory. `source` is used for origin and messages.
Dataset parse_dataset(std::string_view csv, const Manifest& manifest, const std::string& source);

/// Writes features (categoricals as their level text), then the label and
/// group columns named by `manifest`, so that reloading with the same
/// manifest reproduces the dataset.
void write_dataset(const Dataset& ds, const Manifest& manifest, const std::filesystem::path& path);

ValidationReport validate_dataset(const Dataset& ds, std::size_t cv_folds);

}  // namespace mlexp
