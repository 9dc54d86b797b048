#include "mlexp/store.hpp"

#include "mlexp/error.hpp"

namespace mlexp {

bool RecordFilter::matches(const RunRecord& record) const {
  if (config_hash && record.config_hash != *config_hash) return false;
  if (run && record.run != *run) return false;
  if (fold && record.fold != *fold) return false;
  if (metric && !scalar_metrics(record).count(canonical_metric_id(*metric))) return false;
  return true;
}

RecordKey key_of(const RunRecord& record) { return {record.config_hash, record.run, record.fold}; }

namespace {

std::ofstream open_append(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw ExecutionError("cannot open results store " + path.string() + " for writing");
  return out;
}

void write_line(std::ofstream& out, const RunRecord& record, const std::filesystem::path& path) {
  const std::string line = to_json(record).dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw ExecutionError("write to results store " + path.string() + " failed");
}

}  // namespace

void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& store_path) {
  auto out = open_append(store_path);
  for (const auto& r : records) write_line(out, r, store_path);
}

std::vector<RunRecord> read_records(const std::filesystem::path& store_path, const RecordFilter& filter) {
  std::ifstream in(store_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open results store " + store_path.string());
  std::vector<RunRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RunRecord record;
    try {
      record = record_from_json(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      throw ParseError(store_path.string() + ": line " + std::to_string(number) + ": " + e.what());
    }
    if (filter.matches(record)) out.push_back(std::move(record));
  }
  return out;
}

RecordStore::RecordStore(const std::filesystem::path& path) : path_(path) {
  if (std::filesystem::exists(path)) {
    for (const auto& r : read_records(path)) keys_.insert(key_of(r));
  }
  out_ = open_append(path);
}

bool RecordStore::append(const RunRecord& record) {
  std::lock_guard lock(mutex_);
  if (!keys_.insert(key_of(record)).second) return false;
  write_line(out_, record, path_);
  return true;
}

bool RecordStore::contains(const RecordKey& key) const {
  std::lock_guard lock(mutex_);
  return keys_.count(key) > 0;
}

}  // namespace mlexp
