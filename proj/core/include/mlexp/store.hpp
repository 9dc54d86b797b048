#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mlexp/evaluate.hpp"

namespace mlexp {

struct RecordFilter {
  std::optional<std::string> config_hash;
  /// Keeps records that report this metric id.
  std::optional<std::string> metric;
  std::optional<std::size_t> run;
  std::optional<std::size_t> fold;

  bool matches(const RunRecord& record) const;
};

using RecordKey = std::tuple<std::string, std::size_t, std::size_t>;

RecordKey key_of(const RunRecord& record);

/// Appends one JSON line per record; each line is written and flushed whole.
void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& store_path);

/// Throws ParseError naming the line number of a malformed line.
std::vector<RunRecord> read_records(const std::filesystem::path& store_path, const RecordFilter& filter = {});

/// Append-only JSON Lines sink that refuses duplicate (config_hash, run,
/// fold) keys, including keys already present in the file. Thread-safe.
class RecordStore {
 public:
  explicit RecordStore(const std::filesystem::path& path);

  /// False (and nothing written) when the key is already stored.
  bool append(const RunRecord& record);
  bool contains(const RecordKey& key) const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::set<RecordKey> keys_;
  mutable std::mutex mutex_;
};

}  // namespace mlexp
