#include "mlexp/dataset.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mlexp/digest.hpp"
#include "mlexp/error.hpp"
#include "mlexp/format.hpp"

namespace mlexp {

Matrix select_rows(const Matrix& x, const RowIndices& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Labels select_labels(const Labels& y, const RowIndices& rows) {
  Labels out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(y[r]);
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

const char* kind_name(FeatureKind kind) { return kind == FeatureKind::numeric ? "numeric" : "categorical"; }

const char* policy_name(MissingPolicy policy) {
  return policy == MissingPolicy::drop_row ? "drop_row" : "error";
}

}  // namespace

void Manifest::check() const {
  if (features.empty()) throw ValidationError("manifest: at least one feature is required");
  if (missing_token.empty()) throw ValidationError("manifest: missing_token must be non-empty");
  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw ValidationError("manifest: feature name must be non-empty");
    if (!names.insert(f.name).second) throw ValidationError("manifest: duplicate feature name '" + f.name + "'");
  }
  if (label_column && names.count(*label_column)) {
    throw ValidationError("manifest: label column '" + *label_column + "' is also listed as a feature");
  }
  if (group_column && names.count(*group_column)) {
    throw ValidationError("manifest: group column '" + *group_column + "' is also listed as a feature");
  }
  if (label_column && group_column && *label_column == *group_column) {
    throw ValidationError("manifest: label and group columns must differ");
  }
}

nlohmann::json to_json(const Manifest& manifest) {
  nlohmann::json doc;
  doc["features"] = nlohmann::json::array();
  for (const auto& f : manifest.features) {
    doc["features"].push_back({{"name", f.name}, {"kind", kind_name(f.kind)}});
  }
  doc["label"] = manifest.label_column ? nlohmann::json(*manifest.label_column) : nlohmann::json(nullptr);
  doc["group"] = manifest.group_column ? nlohmann::json(*manifest.group_column) : nlohmann::json(nullptr);
  doc["missing_token"] = manifest.missing_token;
  doc["missing_policy"] = policy_name(manifest.missing_policy);
  return doc;
}

Manifest manifest_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("manifest: expected a JSON object");
  static const std::set<std::string> known{"features", "label", "group", "missing_token", "missing_policy"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ParseError("manifest: unknown key '" + key + "'");
  }
  Manifest m;
  if (!doc.contains("features") || !doc["features"].is_array()) {
    throw ParseError("manifest: 'features' must be an array");
  }
  for (const auto& f : doc["features"]) {
    if (!f.is_object() || !f.contains("name") || !f["name"].is_string()) {
      throw ParseError("manifest: each feature needs a string 'name'");
    }
    FeatureSpec spec{f["name"].get<std::string>(), FeatureKind::numeric};
    if (f.contains("kind")) {
      const auto kind = f["kind"].get<std::string>();
      if (kind == "numeric") {
        spec.kind = FeatureKind::numeric;
      } else if (kind == "categorical") {
        spec.kind = FeatureKind::categorical;
      } else {
        throw ParseError("manifest: feature '" + spec.name + "' has unknown kind '" + kind + "'");
      }
    }
    m.features.push_back(std::move(spec));
  }
  const auto optional_text = [&](const char* key) -> std::optional<std::string> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    if (!doc[key].is_string()) throw ParseError(std::string("manifest: '") + key + "' must be a string or null");
    return doc[key].get<std::string>();
  };
  m.label_column = optional_text("label");
  m.group_column = optional_text("group");
  if (auto token = optional_text("missing_token")) m.missing_token = *token;
  if (auto policy = optional_text("missing_policy")) {
    if (*policy == "drop_row") {
      m.missing_policy = MissingPolicy::drop_row;
    } else if (*policy == "error") {
      m.missing_policy = MissingPolicy::error;
    } else {
      throw ParseError("manifest: unknown missing_policy '" + *policy + "'");
    }
  }
  try {
    m.check();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("manifest '" + path.string() + "': " + e.what());
  }
  return manifest_from_json(doc);
}

std::string canonical_manifest(const Manifest& manifest) { return to_json(manifest).dump(); }

// ---------------------------------------------------------------------------
// Dataset

void Dataset::check_invariants() const {
  if (feature_meta.size() != cols()) throw ValidationError("dataset: feature metadata does not match column count");
  if (!features.allFinite()) throw ValidationError("dataset: non-finite feature value");
  std::set<std::string> names(class_names.begin(), class_names.end());
  if (names.size() != class_names.size()) throw ValidationError("dataset: duplicate class name");
  if (labels) {
    if (labels->size() != rows()) throw ValidationError("dataset: label count does not match row count");
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (int y : *labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= class_names.size()) {
        throw ValidationError("dataset: label index out of range");
      }
      ++counts[static_cast<std::size_t>(y)];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) throw ValidationError("dataset: class '" + class_names[c] + "' has no rows");
    }
  }
  if (group_ids && group_ids->size() != rows()) throw ValidationError("dataset: group id count does not match row count");
}

bool same_content(const Dataset& a, const Dataset& b) {
  if (a.features.rows() != b.features.rows() || a.features.cols() != b.features.cols()) return false;
  for (Eigen::Index i = 0; i < a.features.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.features.data()[i]) != std::bit_cast<std::uint64_t>(b.features.data()[i])) {
      return false;
    }
  }
  return a.labels == b.labels && a.class_names == b.class_names && a.feature_meta == b.feature_meta &&
         a.group_ids == b.group_ids;
}

namespace {

std::string location(std::size_t line, std::string_view column) {
  return "line " + std::to_string(line) + ", column '" + std::string(column) + "'";
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name, const std::string& source) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(source + ": column '" + name + "' not found in header");
  if (std::find(it + 1, header.end(), name) != header.end()) {
    throw ParseError(source + ": column '" + name + "' appears more than once in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

/// Maps text to dense ids in first-appearance order.
class Interner {
 public:
  std::size_t intern(std::string_view text) {
    const auto [it, inserted] = ids_.try_emplace(std::string(text), names_.size());
    if (inserted) names_.emplace_back(text);
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
};

}  // namespace

Dataset parse_dataset(std::string_view csv, const Manifest& manifest, const std::string& source) {
  manifest.check();

  std::vector<std::string_view> lines = split(csv, '\n');
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  if (lines.empty() || trim(lines.front()).empty()) throw ParseError(source + ": missing header row");

  std::vector<std::string> header;
  for (auto field : split(lines.front(), ',')) header.emplace_back(trim(field));

  const std::size_t d = manifest.features.size();
  std::vector<std::size_t> feature_cols;
  for (const auto& f : manifest.features) feature_cols.push_back(find_column(header, f.name, source));
  std::optional<std::size_t> label_col;
  std::optional<std::size_t> group_col;
  if (manifest.label_column) label_col = find_column(header, *manifest.label_column, source);
  if (manifest.group_column) group_col = find_column(header, *manifest.group_column, source);

  std::vector<Interner> levels(d);
  Interner classes;
  Interner groups;
  std::vector<double> values;
  Labels labels;
  std::vector<std::int64_t> group_ids;
  std::vector<Finding> warnings;
  std::vector<double> row(d);
  std::vector<std::string_view> categorical_text(d);

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (trim(lines[li]).empty()) continue;
    std::vector<std::string_view> fields = split(lines[li], ',');
    for (auto& f : fields) f = trim(f);
    if (fields.size() != header.size()) {
      throw ParseError(source + ": line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }

    std::optional<std::string> missing_at;
    const auto check_missing = [&](std::size_t col) {
      if (!missing_at && fields[col] == manifest.missing_token) missing_at = header[col];
    };
    for (auto col : feature_cols) check_missing(col);
    if (label_col) check_missing(*label_col);
    if (group_col) check_missing(*group_col);
    if (missing_at) {
      if (manifest.missing_policy == MissingPolicy::error) {
        throw ParseError(source + ": " + location(line_no, *missing_at) + ": missing value '" +
                         manifest.missing_token + "'");
      }
      warnings.push_back({"dropped_row", "row dropped: missing value in column '" + *missing_at + "'",
                          "line " + std::to_string(line_no), 1});
      continue;
    }

    for (std::size_t j = 0; j < d; ++j) {
      const auto text = fields[feature_cols[j]];
      if (manifest.features[j].kind == FeatureKind::numeric) {
        const auto parsed = parse_number(text);
        if (!parsed) {
          throw ParseError(source + ": " + location(line_no, manifest.features[j].name) + ": non-numeric value '" +
                           std::string(text) + "'");
        }
        row[j] = *parsed;
      } else {
        categorical_text[j] = text;
      }
    }
    // The row is accepted; only now may it introduce new levels or classes.
    for (std::size_t j = 0; j < d; ++j) {
      if (manifest.features[j].kind == FeatureKind::categorical) {
        row[j] = static_cast<double>(levels[j].intern(categorical_text[j]));
      }
    }
    values.insert(values.end(), row.begin(), row.end());
    if (label_col) labels.push_back(static_cast<int>(classes.intern(fields[*label_col])));
    if (group_col) group_ids.push_back(static_cast<std::int64_t>(groups.intern(fields[*group_col])));
  }

  const std::size_t n = values.size() / d;
  if (n == 0) throw ValidationError(source + ": dataset is empty after dropping rows with missing values");

  Dataset ds;
  ds.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  if (label_col) {
    ds.labels = std::move(labels);
    ds.class_names = classes.names();
  }
  if (group_col) ds.group_ids = std::move(group_ids);
  for (std::size_t j = 0; j < d; ++j) {
    ds.feature_meta.push_back({manifest.features[j].name, manifest.features[j].kind, levels[j].names()});
  }
  ds.origin = source + "#sha256:" +
              Sha256().update(csv).update(std::string_view("\n")).update(canonical_manifest(manifest)).hex_digest();
  ds.load_warnings = std::move(warnings);
  ds.check_invariants();
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const Manifest& manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), manifest, path.string());
}

void write_dataset(const Dataset& ds, const Manifest& manifest, const std::filesystem::path& path) {
  if (manifest.features.size() != ds.cols()) throw ValidationError("write_dataset: manifest does not match dataset");
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    if (manifest.features[j].name != ds.feature_meta[j].name) {
      throw ValidationError("write_dataset: manifest feature '" + manifest.features[j].name +
                            "' does not match dataset feature '" + ds.feature_meta[j].name + "'");
    }
  }
  if (manifest.label_column.has_value() != ds.has_labels() ||
      manifest.group_column.has_value() != ds.group_ids.has_value()) {
    throw ValidationError("write_dataset: manifest label/group columns do not match dataset");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExecutionError("cannot write dataset '" + path.string() + "'");
  for (std::size_t j = 0; j < ds.cols(); ++j) out << (j ? "," : "") << ds.feature_meta[j].name;
  if (manifest.label_column) out << ',' << *manifest.label_column;
  if (manifest.group_column) out << ',' << *manifest.group_column;
  out << '\n';
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j) {
      const double v = ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (j) out << ',';
      if (ds.feature_meta[j].kind == FeatureKind::categorical) {
        out << ds.feature_meta[j].levels.at(static_cast<std::size_t>(v));
      } else {
        out << format_number(v);
      }
    }
    if (ds.labels) out << ',' << ds.class_names[static_cast<std::size_t>((*ds.labels)[i])];
    if (ds.group_ids) out << ',' << (*ds.group_ids)[i];
    out << '\n';
  }
}

ValidationReport validate_dataset(const Dataset& ds, std::size_t cv_folds) {
  ValidationReport report;
  const auto n = static_cast<Eigen::Index>(ds.rows());

  for (std::size_t j = 0; j < ds.cols(); ++j) {
    const auto col = ds.features.col(static_cast<Eigen::Index>(j));
    if (n > 0 && (col.array() == col(0)).all()) {
      report.warnings.push_back({"constant_feature", "feature '" + ds.feature_meta[j].name + "' is constant",
                                 "feature '" + ds.feature_meta[j].name + "'", 1});
    }
  }

  // Rows are compared on exact feature bits plus label.
  std::map<std::vector<std::uint64_t>, std::size_t> seen;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::uint64_t> key;
    key.reserve(ds.cols() + 1);
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      key.push_back(std::bit_cast<std::uint64_t>(ds.features(i, j) == 0.0 ? 0.0 : ds.features(i, j)));
    }
    if (ds.labels) key.push_back(static_cast<std::uint64_t>((*ds.labels)[static_cast<std::size_t>(i)]));
    ++seen[key];
  }
  std::size_t duplicated = 0;
  for (const auto& [_, count] : seen) {
    if (count > 1) duplicated += count;
  }
  if (duplicated > 0) {
    report.warnings.push_back({"duplicate_rows",
                               std::to_string(duplicated) + " rows are identical to at least one other row", "rows",
                               duplicated});
  }

  if (ds.labels) {
    std::vector<std::size_t> counts(ds.num_classes(), 0);
    for (int y : *ds.labels) ++counts[static_cast<std::size_t>(y)];
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] < cv_folds) {
        report.errors.push_back({"class_too_small",
                                 "class smaller than fold count: class '" + ds.class_names[c] + "' has " +
                                     std::to_string(counts[c]) + " rows, fold count is " + std::to_string(cv_folds),
                                 "class '" + ds.class_names[c] + "'", counts[c]});
      }
    }
  }
  return report;
}

}  // namespace mlexp
