#include "mlexp/runner.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include "mlexp/dataset.hpp"
#include "mlexp/error.hpp"
#include "mlexp/evaluate.hpp"
#include "mlexp/store.hpp"

namespace mlexp {

BatchConfig batch_from_json(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ParseError("batch: expected an object");
  BatchConfig batch;
  batch.base_dir = base_dir;
  batch.document = doc;
  if (doc.contains("workers")) {
    const auto& w = doc["workers"];
    if (!w.is_number_integer() || w.get<std::int64_t>() < 1) throw ValidationError("batch: workers must be >= 1");
    batch.workers = w.get<std::size_t>();
    batch.document.erase("workers");
  }
  return batch;
}

BatchConfig load_batch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open batch " + path.string());
  try {
    return batch_from_json(nlohmann::ordered_json::parse(in), path.parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

void collect_axes(const nlohmann::ordered_json& node, const std::string& pointer, std::vector<GridAxis>& axes) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) collect_axes(value, pointer + "/" + escape_token(key), axes);
  } else if (node.is_array()) {
    if (pointer == "/transforms") {
      for (std::size_t i = 0; i < node.size(); ++i) collect_axes(node[i], pointer + "/" + std::to_string(i), axes);
      return;
    }
    if (node.empty()) throw ValidationError("batch: empty candidate list at " + pointer);
    GridAxis axis{pointer, {}};
    for (const auto& v : node) {
      if (v.is_structured()) throw ValidationError("batch: candidates at " + pointer + " must be scalars");
      axis.values.push_back(v);
    }
    axes.push_back(std::move(axis));
  }
}

}  // namespace

std::vector<GridAxis> grid_axes(const BatchConfig& batch) {
  std::vector<GridAxis> axes;
  collect_axes(batch.document, "", axes);
  return axes;
}

std::vector<ExperimentConfig> expand_grid(const BatchConfig& batch) {
  const auto axes = grid_axes(batch);
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();

  std::vector<ExperimentConfig> out;
  std::vector<std::size_t> index(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    nlohmann::ordered_json doc = batch.document;
    std::string coords;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& v = axes[a].values[index[a]];
      doc[nlohmann::ordered_json::json_pointer(axes[a].pointer)] = v;
      coords += (coords.empty() ? "" : ", ") + axes[a].pointer + "=" + v.dump();
    }
    try {
      ExperimentConfig config = config_from_json(nlohmann::json::parse(doc.dump()), batch.base_dir);
      config.check();
      out.push_back(std::move(config));
    } catch (const Error& e) {
      throw ValidationError("grid point {" + coords + "}: " + e.what());
    }
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++index[a] < axes[a].values.size()) break;
      index[a] = 0;
    }
  }
  return out;
}

std::filesystem::path store_path(const std::filesystem::path& out_dir) { return out_dir / "records.jsonl"; }

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExecutionError("cannot write config " + path.string());
  out << canonical_json(config) << "\n";
}

namespace {

class DatasetCache {
 public:
  std::shared_ptr<const Dataset> get(const ExperimentConfig& config) {
    const auto key = std::make_pair(config.dataset_path().lexically_normal().string(),
                                    config.manifest_path().lexically_normal().string());
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (!std::filesystem::exists(config.dataset_path())) {
      throw ValidationError("dataset not found: " + config.dataset_path().string());
    }
    auto ds = std::make_shared<const Dataset>(load_dataset(config.dataset_path(), load_manifest(config.manifest_path())));
    cache_.emplace(key, ds);
    return ds;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const Dataset>> cache_;
};

}  // namespace

BatchSummary run_configs(const std::vector<ExperimentConfig>& configs, const std::filesystem::path& out_dir,
                         std::size_t workers, std::ostream* log) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "configs", ec);
  if (ec) throw ExecutionError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  RecordStore store(store_path(out_dir));

  BatchSummary summary;
  summary.configs = configs.size();
  for (const auto& c : configs) summary.config_hashes.push_back(config_hash(c));

  DatasetCache cache;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      const auto& config = configs[i];
      const auto& hash = summary.config_hashes[i];
      const std::string name = "config " + std::to_string(i + 1) + "/" + std::to_string(configs.size()) + " " +
                               hash.substr(0, 12) + (config.label ? " (" + *config.label + ")" : "");
      std::size_t written = 0, skipped = 0;
      try {
        save_config(config, out_dir / "configs" / (hash + ".json"));
        const auto ds = cache.get(config);
        for (const auto& r : run_experiment(config, *ds)) (store.append(r) ? written : skipped) += 1;
        std::lock_guard lock(mutex);
        summary.records_written += written;
        summary.records_skipped += skipped;
        if (log) {
          *log << name << ": " << written << " records written";
          if (skipped) *log << ", " << skipped << " duplicates skipped";
          *log << "\n";
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        ++summary.failures;
        summary.records_written += written;
        summary.records_skipped += skipped;
        summary.failure_messages.push_back(name + ": " + e.what());
        if (log) *log << name << ": FAILED: " << e.what() << "\n";
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, configs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return summary;
}

BatchSummary run_batch(const BatchConfig& batch, const std::filesystem::path& out_dir, std::ostream* log) {
  return run_configs(expand_grid(batch), out_dir, batch.workers, log);
}

}  // namespace mlexp
