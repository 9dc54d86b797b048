#include <gtest/gtest.h>

#include "mlexp/config.hpp"
#include "mlexp/error.hpp"
#include "mlexp/report.hpp"
#include "mlexp/runner.hpp"
#include "mlexp/store.hpp"
#include "test_support.hpp"

using namespace mlexp;
using testing_support::TempDir;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Report, SingleConfigTablesAndConservation) {
  TempDir dir("report");
  const auto config = load_config(testing_support::data_dir() / "knn_config.json");
  const auto summary = run_configs({config}, dir / "results");
  ASSERT_EQ(summary.records_written, 10u);
  const auto hash = summary.config_hashes[0];
  const auto store = store_path(dir / "results");
  const auto paths = generate_report(store, {hash}, dir / "report");
  for (const auto& p : paths) EXPECT_TRUE(std::filesystem::exists(p)) << p;

  const auto records = read_records(store);
  const auto metrics = lines(testing_support::read_file(dir / "report" / hash / "metrics.csv"));
  EXPECT_EQ(metrics[0], "metric,mean,std,count");
  EXPECT_EQ(metrics.size() - 1, aggregate_metrics(records).size());
  EXPECT_EQ(metrics.size() - 1, scalar_metrics(records[0]).size());
  for (std::size_t i = 1; i < metrics.size(); ++i) EXPECT_EQ(std::count(metrics[i].begin(), metrics[i].end(), ','), 3);

  std::size_t tested = 0, total = 0;
  for (const auto& r : records) tested += r.rows.test;
  for (const auto& row : summed_confusion(records)) {
    for (auto v : row) total += v;
  }
  EXPECT_EQ(total, tested);
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / hash / "confusion.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / hash / "roc_class_0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / hash / "roc.svg"));

  const auto sum = lines(testing_support::read_file(dir / "report" / "summary.csv"));
  ASSERT_EQ(sum.size(), 2u);
  EXPECT_EQ(sum[1].rfind(hash + ",knn on blobs,10,", 0), 0u) << sum[1];
}

TEST(Report, AggregateUsesSampleStd) {
  std::vector<RunRecord> records(3);
  const double acc[] = {0.5, 0.7, 0.9};
  for (int i = 0; i < 3; ++i) {
    records[i].metrics = classification_metrics({{1, 0}, {0, 1}});
    records[i].metrics.accuracy = acc[i];
  }
  for (const auto& a : aggregate_metrics(records)) {
    if (a.metric != "accuracy") continue;
    EXPECT_NEAR(a.mean, 0.7, 1e-15);
    EXPECT_NEAR(a.std, 0.2, 1e-15);
    EXPECT_EQ(a.count, 3u);
  }
}

TEST(Report, MeanOfIdenticalCurvesIsThatCurve) {
  const std::vector<RocPoint> c{{0, 0}, {0, 0.5}, {0.25, 0.75}, {0.5, 0.75}, {1, 1}};
  EXPECT_EQ(mean_roc({c, c, c}), c);
}

TEST(Report, MeanRocVerticalAverage) {
  const std::vector<RocPoint> a{{0, 0}, {0.5, 1}, {1, 1}}, b{{0, 0}, {1, 1}};
  const auto m = mean_roc({a, b});
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[1].fpr, 0.5);
  EXPECT_DOUBLE_EQ(m[1].tpr, 0.75);
}

TEST(Report, RejectsEmptyOrUnknownSelection) {
  TempDir dir("report_bad");
  write_records({}, dir / "s.jsonl");
  EXPECT_THROW(generate_report(dir / "s.jsonl", {}, dir / "out"), ValidationError);
  EXPECT_THROW(generate_report(dir / "s.jsonl", {"nope"}, dir / "out"), ValidationError);
}
