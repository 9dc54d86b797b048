#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "app.hpp"
#include "mlexp/config.hpp"
#include "mlexp/runner.hpp"
#include "mlexp/store.hpp"
#include "test_support.hpp"

using namespace mlexp;
using testing_support::data_dir;
using testing_support::read_file;
using testing_support::TempDir;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = mlexp::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

Result session(const std::string& input) { return invoke({}, input); }

std::vector<RunRecord> sorted_records(const std::filesystem::path& out_dir) {
  auto v = read_records(store_path(out_dir));
  std::sort(v.begin(), v.end(), [](const RunRecord& a, const RunRecord& b) { return key_of(a) < key_of(b); });
  return v;
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Absolute-path copy of the knn fixture config, as a user would write it by hand.
std::filesystem::path hand_config(const TempDir& dir) {
  const auto path = dir / "hand.json";
  testing_support::write_file(path, R"({
  "dataset": {"path": ")" + (data_dir() / "blobs.csv").string() + R"(",
              "manifest": ")" + (data_dir() / "blobs.manifest.json").string() + R"("},
  "transforms": [{"kind": "zscore"}, {"kind": "pca", "components": 3}],
  "model": {"algorithm": "knn", "hyperparameters": {"k": 5}},
  "cv": {"k": 5, "runs": 2, "base_seed": 11}
}
)");
  return path;
}

// Menu answers that build the same experiment as hand_config.
std::string scripted_session(const std::filesystem::path& saved, const std::filesystem::path& out_dir) {
  std::ostringstream s;
  s << "1\n" << (data_dir() / "blobs.csv").string() << "\n" << (data_dir() / "blobs.manifest.json").string() << "\n";
  s << "3\n1\n1\n1\n5\n1\n3\n0\n";  // chain: add zscore, add pca with 3 components, back
  s << "4\n1\n5\n";                 // knn, k = 5
  s << "5\n5\n2\n11\nn\n";          // 5 folds, 2 runs, base seed 11, not grouped
  s << "9\n" << saved.string() << "\n";
  s << "6\n" << out_dir.string() << "\n";
  s << "7\n0\n";
  return s.str();
}

}  // namespace

TEST(Cli, RunValidConfig) {
  TempDir dir("cli_run");
  const auto r = invoke({"run", (data_dir() / "knn_config.json").string(), "--out", (dir / "results").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(store_path(dir / "results")));
  EXPECT_EQ(read_records(store_path(dir / "results")).size(), 10u);
  EXPECT_NE(r.out.find(config_hash(load_config(data_dir() / "knn_config.json"))), std::string::npos);
}

TEST(Cli, RunMissingFileNamesPath) {
  TempDir dir("cli_missing");
  const auto r = invoke({"run", "/no/such/config.json", "--out", (dir / "results").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/no/such/config.json"), std::string::npos) << r.err;
}

TEST(Cli, RunConfigWithMissingDatasetNamesPath) {
  TempDir dir("cli_missing_ds");
  testing_support::write_file(dir / "c.json", R"({"dataset":{"path":"gone.csv","manifest":"gone.json"},
    "transforms":[],"model":{"algorithm":"gnb"},"cv":{"k":2}})");
  const auto r = invoke({"run", (dir / "c.json").string(), "--out", (dir / "results").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gone.csv"), std::string::npos) << r.err;
}

TEST(Cli, MalformedConfigIsValidationExit) {
  TempDir dir("cli_bad");
  testing_support::write_file(dir / "c.json", "{\"dataset\": 3}");
  EXPECT_EQ(invoke({"run", (dir / "c.json").string(), "--out", (dir / "r").string()}).code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({"run"}).code, 1);
  const auto r = invoke({"compare", "--store", "x.jsonl", "--models", "only_one"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, CompareMissingHashListsAvailable) {
  TempDir dir("cli_compare");
  const auto batch = load_batch(data_dir() / "grid_batch.json");
  const auto configs = expand_grid(batch);
  run_configs({configs[0], configs[1]}, dir / "results");
  const auto h0 = config_hash(configs[0]), h1 = config_hash(configs[1]);
  const auto store = store_path(dir / "results").string();

  const auto good = invoke({"compare", "--store", store, "--metric", "accuracy", "--models", h0, h1});
  EXPECT_EQ(good.code, 0) << good.err;
  EXPECT_NE(good.out.find("Shapiro-Wilk"), std::string::npos);

  const auto prefixed = invoke({"compare", "--store", store, "--metric", "macro_f1", "--models", h0.substr(0, 10), h1.substr(0, 10), "--json"});
  EXPECT_EQ(prefixed.code, 0) << prefixed.err;
  EXPECT_EQ(nlohmann::json::parse(prefixed.out)["metric"], "macro_f1");

  const std::string absent(64, 'f');
  const auto bad = invoke({"compare", "--store", store, "--metric", "accuracy", "--models", h0, absent});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find(h0), std::string::npos) << bad.err;
  EXPECT_NE(bad.err.find(h1), std::string::npos) << bad.err;
}

TEST(Cli, BatchRankAndReport) {
  TempDir dir("cli_batch");
  const auto b = invoke({"batch", (data_dir() / "grid_batch.json").string(), "--out", (dir / "r").string(), "--workers", "3"});
  EXPECT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_records(store_path(dir / "r")).size(), 120u);
  const auto rank = invoke({"rank", "--store", store_path(dir / "r").string(), "--scenario",
                         (data_dir() / "scenario.json").string()});
  EXPECT_EQ(rank.code, 0) << rank.err;
  EXPECT_GE(occurrences(rank.out, "\n"), 12u);
  const auto rep = invoke({"report", "--store", store_path(dir / "r").string(), "--out", (dir / "rep").string()});
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "rep" / "summary.csv"));
}

TEST(Cli, AnalyzeWritesPlots) {
  TempDir dir("cli_analyze");
  const auto r = invoke({"analyze", (data_dir() / "blobs.csv").string(), (data_dir() / "blobs.manifest.json").string(),
                      "--plots", dir.path().string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("setosa"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "boxplot.csv"));
}

TEST(Cli, SeedOverrideIsEchoed) {
  TempDir dir("cli_seed");
  ::setenv("PROPHETIC_SEED", "99", 1);
  const auto r = invoke({"run", (data_dir() / "knn_config.json").string(), "--out", (dir / "results").string()});
  ::unsetenv("PROPHETIC_SEED");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("PROPHETIC_SEED active: base_seed = 99"), std::string::npos) << r.out;
  auto config = load_config(data_dir() / "knn_config.json");
  config.cv.base_seed = 99;
  EXPECT_EQ(read_records(store_path(dir / "results"))[0].config_hash, config_hash(config));
}

TEST(Session, InvalidMenuInputRePrompts) {
  const auto r = session("12\nabc\n0\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(occurrences(r.out, "invalid choice"), 2u);
  EXPECT_EQ(occurrences(r.out, "== main menu =="), 1u);
  EXPECT_NE(r.out.find("bye"), std::string::npos);
}

TEST(Session, RunBeforeLoadIsRejected) {
  const auto r = session("6\n2\n7\n0\n");
  EXPECT_NE(r.out.find("option 6 needs a loaded dataset; choose 1 first"), std::string::npos);
  EXPECT_NE(r.out.find("option 2 needs a loaded dataset"), std::string::npos);
  EXPECT_NE(r.out.find("no results yet"), std::string::npos);
  EXPECT_EQ(r.out.find("output directory"), std::string::npos);
}

TEST(Session, EndOfInputExitsCleanly) {
  const auto r = session("3\n1\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("end of input, leaving session"), std::string::npos);
}

TEST(Session, QuitOffersToSaveDraft) {
  TempDir dir("session_quit");
  const auto r = session("1\n" + (data_dir() / "blobs.csv").string() + "\n" + (data_dir() / "blobs.manifest.json").string() +
                         "\n5\n3\n1\n0\nn\n0\ny\n" + (dir / "draft.json").string() + "\n");
  EXPECT_NE(r.out.find("draft has unsaved changes"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "draft.json"));
  EXPECT_EQ(load_config(dir / "draft.json").cv.k, 3u);
}

TEST(Session, BadValuesKeepState) {
  const auto r = session("5\n1\n1\n0\nn\n0\nn\n");
  EXPECT_NE(r.out.find("cross-validation rejected"), std::string::npos);
  EXPECT_NE(r.out.find("cv:      k=5 runs=1 base_seed=0"), std::string::npos);
}

TEST(Session, ScriptedSessionMatchesSubcommand) {
  TempDir dir("session_e2e");
  const auto hand = hand_config(dir);
  const auto saved = dir / "session.json";
  const auto s = session(scripted_session(saved, dir / "from_session"));
  EXPECT_EQ(s.code, 0);
  ASSERT_TRUE(std::filesystem::exists(saved)) << s.out;
  const auto c = invoke({"run", hand.string(), "--out", (dir / "from_cli").string()});
  ASSERT_EQ(c.code, 0) << c.err;

  const auto hash = config_hash(load_config(hand));
  EXPECT_EQ(config_hash(load_config(saved)), hash);
  EXPECT_EQ(canonical_json(load_config(saved)), canonical_json(load_config(hand)));
  const auto a = read_file(dir / "from_session" / "configs" / (hash + ".json"));
  const auto b = read_file(dir / "from_cli" / "configs" / (hash + ".json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);

  const auto ra = sorted_records(dir / "from_session"), rb = sorted_records(dir / "from_cli");
  ASSERT_EQ(ra.size(), 10u);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_TRUE(same_outcome(ra[i], rb[i]));
  EXPECT_NE(s.out.find("records written: 10"), std::string::npos);
}

TEST(Architecture, CliHasNoStatisticsOrMath) {
  // The CLI only calls library operations; numeric work belongs in core.
  const std::regex forbidden(
      R"(std::(sqrt|log|log1p|exp|pow|lgamma|tgamma|erf|erfc|accumulate|inner_product)\b|dist::|\.(mean|sum|norm|squaredNorm|dot)\(\))");
  std::size_t scanned = 0;
  for (const auto& entry : std::filesystem::directory_iterator(MLEXP_TOOLS_SOURCE_DIR)) {
    const auto ext = entry.path().extension();
    if (ext != ".cpp" && ext != ".hpp") continue;
    ++scanned;
    std::istringstream text(read_file(entry.path()));
    std::size_t line_no = 0;
    for (std::string line; std::getline(text, line);) {
      ++line_no;
      EXPECT_FALSE(std::regex_search(line, forbidden)) << entry.path().filename() << ":" << line_no << ": " << line;
    }
  }
  EXPECT_GE(scanned, 3u);
}
