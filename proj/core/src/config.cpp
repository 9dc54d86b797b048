#include "mlexp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mlexp/digest.hpp"
#include "mlexp/error.hpp"

namespace mlexp {

void ExperimentConfig::check() const {
  if (dataset.path.empty()) throw ValidationError("config: dataset.path is empty");
  if (dataset.manifest.empty()) throw ValidationError("config: dataset.manifest is empty");
  if (cv.k < 2) throw ValidationError("config: cv.k must be >= 2");
  if (cv.runs < 1) throw ValidationError("config: cv.runs must be >= 1");
  model.check();
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    const auto& t = transforms[i];
    t.check();
    const std::string where = "config: transform " + std::to_string(i) + " (" + to_string(t.kind) + ")";
    if (t.kind == TransformKind::resample) {
      if (i + 1 != transforms.size()) throw ValidationError(where + ": resample must be the last step");
      if (is_clustering(model.algorithm)) throw ValidationError(where + ": resample needs a classifier");
    }
    if (t.kind == TransformKind::window) {
      if (i != 0) throw ValidationError(where + ": window must be the first step");
      if (!cv.grouped && !is_clustering(model.algorithm)) {
        throw ValidationError(where + ": window needs cv.grouped so overlapping windows stay in one fold");
      }
    }
  }
}

std::filesystem::path ExperimentConfig::dataset_path() const {
  const std::filesystem::path p(dataset.path);
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path ExperimentConfig::manifest_path() const {
  const std::filesystem::path p(dataset.manifest);
  return p.is_absolute() ? p : base_dir / p;
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json doc;
  doc["dataset"] = {{"path", config.dataset.path}, {"manifest", config.dataset.manifest}};
  doc["transforms"] = nlohmann::json::array();
  for (const auto& t : config.transforms) doc["transforms"].push_back(to_json(t));
  doc["model"] = to_json(config.model);
  doc["cv"] = {{"k", config.cv.k}, {"runs", config.cv.runs}, {"base_seed", config.cv.base_seed},
               {"grouped", config.cv.grouped}};
  if (config.label) doc["label"] = *config.label;
  return doc;
}

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ParseError(where + ": unknown key '" + key + "'");
  }
}

std::size_t count_field(const nlohmann::json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
  throw ParseError(where + ": expected a non-negative integer");
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  config.base_dir = base_dir;
  reject_unknown(doc, {"dataset", "transforms", "model", "cv", "label"}, "config");
  try {
    const auto& ds = doc.at("dataset");
    reject_unknown(ds, {"path", "manifest"}, "config.dataset");
    config.dataset.path = ds.at("path").get<std::string>();
    config.dataset.manifest = ds.at("manifest").get<std::string>();
    if (doc.contains("transforms")) {
      if (!doc["transforms"].is_array()) throw ParseError("config.transforms: expected an array");
      for (const auto& t : doc["transforms"]) config.transforms.push_back(transform_spec_from_json(t));
    }
    config.model = model_spec_from_json(doc.at("model"));
    if (doc.contains("cv")) {
      const auto& cv = doc["cv"];
      reject_unknown(cv, {"k", "runs", "base_seed", "grouped"}, "config.cv");
      if (cv.contains("k")) config.cv.k = count_field(cv["k"], "config.cv.k");
      if (cv.contains("runs")) config.cv.runs = count_field(cv["runs"], "config.cv.runs");
      if (cv.contains("base_seed")) config.cv.base_seed = count_field(cv["base_seed"], "config.cv.base_seed");
      if (cv.contains("grouped")) config.cv.grouped = cv["grouped"].get<bool>();
    }
    if (doc.contains("label")) config.label = doc["label"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

std::string canonical_json(const ExperimentConfig& config) { return to_json(config).dump(); }

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(canonical_json(config)); }

}  // namespace mlexp
