#include <gtest/gtest.h>

#include <sstream>

#include "mlexp/config.hpp"
#include "mlexp/digest.hpp"
#include "mlexp/error.hpp"
#include "mlexp/runner.hpp"
#include "mlexp/store.hpp"
#include "test_support.hpp"

using namespace mlexp;
using testing_support::TempDir;

namespace {

nlohmann::ordered_json small_batch() {
  return nlohmann::ordered_json::parse(R"({
    "dataset": {"path": "blobs.csv", "manifest": "blobs.manifest.json"},
    "transforms": [{"kind": "zscore"}],
    "model": {"algorithm": "knn", "hyperparameters": {"k": [1, 3]}},
    "cv": {"k": 5, "runs": 2, "base_seed": 1}
  })");
}

std::vector<RunRecord> sorted(std::vector<RunRecord> v) {
  std::sort(v.begin(), v.end(), [](const RunRecord& a, const RunRecord& b) { return key_of(a) < key_of(b); });
  return v;
}

RunRecord fake_record(const std::string& hash, std::size_t run, std::size_t fold) {
  RunRecord r;
  r.config_hash = hash;
  r.run = run;
  r.fold = fold;
  r.metrics = classification_metrics({{3, 1}, {1, 5}});
  r.timing = {0.25, 0.125};
  r.rows = {20, 10, 20};
  return r;
}

}  // namespace

TEST(ConfigHash, KeyOrderDoesNotMatter) {
  const auto a = config_from_json(nlohmann::json::parse(
      R"({"dataset":{"path":"d.csv","manifest":"m.json"},"transforms":[],"model":{"algorithm":"knn","hyperparameters":{"k":3}},"cv":{"k":5}})"));
  const auto b = config_from_json(nlohmann::json::parse(
      R"({"cv":{"k":5},"model":{"hyperparameters":{"k":3},"algorithm":"knn"},"transforms":[],"dataset":{"manifest":"m.json","path":"d.csv"}})"));
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(canonical_json(a), canonical_json(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
  auto c = a;
  c.cv.base_seed = 1;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(ConfigHash, StableAcrossProcesses) {
  // Recorded from an earlier process; a change means stored hashes no longer match.
  const auto c = load_config(testing_support::data_dir() / "knn_config.json");
  EXPECT_EQ(config_hash(c), sha256_hex(canonical_json(c)));
  EXPECT_EQ(config_hash(c), "49e771462fbca4bc5bfb9dab6dafb5bee17408e5d385f0ab03e61b00980ecd0f");
}

TEST(Config, StrictParsingAndRules) {
  auto doc = nlohmann::json::parse(testing_support::read_file(testing_support::data_dir() / "knn_config.json"));
  auto bad = doc;
  bad["cv"]["folds"] = 3;
  EXPECT_THROW(config_from_json(bad), Error);
  bad = doc;
  bad["cv"]["k"] = 1;
  EXPECT_THROW(config_from_json(bad).check(), ValidationError);
  bad = doc;
  bad["transforms"].push_back({{"kind", "window"}, {"width", 2}});
  EXPECT_THROW(config_from_json(bad).check(), ValidationError);
  const auto c = config_from_json(doc, "/base");
  EXPECT_EQ(c.dataset_path(), std::filesystem::path("/base/blobs.csv"));
  EXPECT_EQ(config_from_json(to_json(c)).label, c.label);
  EXPECT_EQ(canonical_json(config_from_json(to_json(c))), canonical_json(c));
}

TEST(Grid, TwoAxesProduct) {
  auto doc = small_batch();
  doc["transforms"].push_back({{"kind", "pca"}, {"components", {2}}});
  const auto batch = batch_from_json(doc, testing_support::data_dir());
  const auto axes = grid_axes(batch);
  ASSERT_EQ(axes.size(), 2u);
  EXPECT_EQ(axes[0].pointer, "/transforms/1/components");
  EXPECT_EQ(axes[1].pointer, "/model/hyperparameters/k");
  EXPECT_EQ(expand_grid(batch).size(), 2u);
}

TEST(Grid, NoAxesIsSingleConfig) {
  const auto doc = nlohmann::ordered_json::parse(
      testing_support::read_file(testing_support::data_dir() / "knn_config.json"));
  const auto configs = expand_grid(batch_from_json(doc, testing_support::data_dir()));
  ASSERT_EQ(configs.size(), 1u);
  EXPECT_EQ(config_hash(configs[0]), config_hash(load_config(testing_support::data_dir() / "knn_config.json")));
}

TEST(Grid, TwelveConfigsInAxisOrder) {
  const auto batch = load_batch(testing_support::data_dir() / "grid_batch.json");
  EXPECT_EQ(batch.workers, 2u);
  const auto configs = expand_grid(batch);
  ASSERT_EQ(configs.size(), 12u);
  std::set<std::string> hashes;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    hashes.insert(config_hash(configs[i]));
    const std::size_t pca = i / 4, k = (i / 2) % 2, seed = i % 2;
    EXPECT_EQ(*configs[i].transforms[1].components, 2 + pca);
    EXPECT_EQ(std::get<KnnParams>(configs[i].model.params).k, k == 0 ? 1u : 5u);
    EXPECT_EQ(configs[i].cv.base_seed, 3 + seed);
  }
  EXPECT_EQ(hashes.size(), 12u);
}

TEST(Grid, LengthIsProductOfAxes) {
  for (std::size_t a = 1; a <= 3; ++a) {
    for (std::size_t b = 1; b <= 3; ++b) {
      auto doc = small_batch();
      doc["model"]["hyperparameters"]["k"] = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < a; ++i) doc["model"]["hyperparameters"]["k"].push_back(i + 1);
      doc["cv"]["base_seed"] = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < b; ++i) doc["cv"]["base_seed"].push_back(i);
      EXPECT_EQ(expand_grid(batch_from_json(doc, testing_support::data_dir())).size(), a * b);
    }
  }
}

TEST(Grid, InvalidPointNamesCoordinates) {
  auto doc = small_batch();
  doc["model"]["hyperparameters"]["k"] = {1, 0};
  try {
    expand_grid(batch_from_json(doc, testing_support::data_dir()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/model/hyperparameters/k=0"), std::string::npos) << e.what();
  }
}

TEST(Batch, RecordCountsAndRerunSkips) {
  TempDir out("batch");
  const auto batch = batch_from_json(small_batch(), testing_support::data_dir());
  const auto s = run_batch(batch, out.path());
  EXPECT_EQ(s.configs, 2u);
  EXPECT_EQ(s.records_written, 20u);
  EXPECT_EQ(s.failures, 0u);
  for (const auto& h : s.config_hashes) {
    const auto saved = out.path() / "configs" / (h + ".json");
    ASSERT_TRUE(std::filesystem::exists(saved));
    EXPECT_EQ(config_hash(load_config(saved)), h);
  }
  const auto again = run_batch(batch, out.path());
  EXPECT_EQ(again.records_written, 0u);
  EXPECT_EQ(again.records_skipped, 20u);
  EXPECT_EQ(read_records(store_path(out.path())).size(), 20u);
}

TEST(Batch, FailingConfigIsIsolated) {
  TempDir out("isolate");
  auto good = load_config(testing_support::data_dir() / "knn_config.json");
  auto missing = good;
  missing.dataset.path = "does_not_exist.csv";
  std::ostringstream log;
  const auto s = run_configs({missing, good}, out.path(), 2, &log);
  EXPECT_EQ(s.failures, 1u);
  ASSERT_EQ(s.failure_messages.size(), 1u);
  EXPECT_NE(s.failure_messages[0].find("does_not_exist.csv"), std::string::npos);
  const auto records = read_records(store_path(out.path()));
  EXPECT_EQ(records.size(), 10u);
  for (const auto& r : records) EXPECT_EQ(r.config_hash, config_hash(good));
}

TEST(Batch, WorkerCountDoesNotChangeResults) {
  TempDir a("serial"), b("parallel");
  const auto configs = expand_grid(load_batch(testing_support::data_dir() / "grid_batch.json"));
  run_configs(configs, a.path(), 1);
  run_configs(configs, b.path(), 4);
  const auto ra = sorted(read_records(store_path(a.path())));
  const auto rb = sorted(read_records(store_path(b.path())));
  ASSERT_EQ(ra.size(), 120u);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_TRUE(same_outcome(ra[i], rb[i]));
}

TEST(Store, RoundTripExactly) {
  TempDir dir("store");
  std::vector<RunRecord> records{fake_record("h1", 0, 0), fake_record("h1", 0, 1)};
  records[1].metrics.accuracy = 1.0 / 3.0;
  write_records(records, dir / "s.jsonl");
  const auto back = read_records(dir / "s.jsonl");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(same_outcome(back[i], records[i]));
    EXPECT_EQ(back[i].timing.train_seconds, records[i].timing.train_seconds);
    EXPECT_EQ(back[i].timing.test_seconds, records[i].timing.test_seconds);
  }
}

TEST(Store, Filters) {
  TempDir dir("filter");
  std::vector<RunRecord> records;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t f = 0; f < 5; ++f) records.push_back(fake_record("cfg", r, f));
  }
  records.push_back(fake_record("other", 0, 0));
  write_records(records, dir / "s.jsonl");
  RecordFilter by_hash;
  by_hash.config_hash = "other";
  EXPECT_EQ(read_records(dir / "s.jsonl", by_hash).size(), 1u);
  RecordFilter run0;
  run0.config_hash = "cfg";
  run0.run = 0;
  EXPECT_EQ(read_records(dir / "s.jsonl", run0).size(), 5u);
  RecordFilter metric;
  metric.metric = "silhouette";
  EXPECT_TRUE(read_records(dir / "s.jsonl", metric).empty());
  metric.metric = "macro_f1";
  EXPECT_EQ(read_records(dir / "s.jsonl", metric).size(), 16u);
}

TEST(Store, DuplicateKeysRefused) {
  TempDir dir("dups");
  {
    RecordStore store(dir / "s.jsonl");
    EXPECT_TRUE(store.append(fake_record("h", 0, 0)));
    EXPECT_FALSE(store.append(fake_record("h", 0, 0)));
    EXPECT_TRUE(store.append(fake_record("h", 0, 1)));
  }
  RecordStore reopened(dir / "s.jsonl");
  EXPECT_TRUE(reopened.contains({"h", 0, 1}));
  EXPECT_FALSE(reopened.append(fake_record("h", 0, 1)));
  EXPECT_EQ(read_records(dir / "s.jsonl").size(), 2u);
}

TEST(Store, MalformedLineNamesLineNumber) {
  TempDir dir("bad");
  write_records({fake_record("h", 0, 0)}, dir / "s.jsonl");
  {
    std::ofstream out(dir / "s.jsonl", std::ios::app);
    out << "{not json\n";
  }
  try {
    read_records(dir / "s.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}
