#include "mlexp/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <unordered_map>

#include "mlexp/error.hpp"
#include "mlexp/learn.hpp"
#include "mlexp/rng.hpp"

namespace mlexp {

RowIndices FoldPlan::train_rows(std::size_t fold) const {
  RowIndices rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(i);
  }
  return rows;
}

RowIndices FoldPlan::test_rows(std::size_t fold) const {
  RowIndices rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(i);
  }
  return rows;
}

FoldPlan stratified_folds(const Labels& y, std::size_t k, std::uint64_t seed,
                          std::optional<std::span<const std::int64_t>> groups) {
  if (k < 2) throw ValidationError("folds: k must be >= 2");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(y.size(), 0);
  Rng rng(seed);

  if (groups) {
    if (groups->size() != y.size()) throw ValidationError("folds: group ids and labels differ in length");
    std::vector<std::int64_t> order;
    std::unordered_map<std::int64_t, std::size_t> slot;
    for (auto g : *groups) {
      if (slot.emplace(g, order.size()).second) order.push_back(g);
    }
    if (order.size() < k) {
      throw ValidationError("folds: fewer groups than folds (" + std::to_string(order.size()) + " groups, k=" +
                            std::to_string(k) + ")");
    }
    rng.shuffle(order);
    std::unordered_map<std::int64_t, std::size_t> fold_of;
    for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % k;
    for (std::size_t i = 0; i < y.size(); ++i) plan.assignments[i] = fold_of[(*groups)[i]];
    return plan;
  }

  std::map<int, RowIndices> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  // The deal position carries across classes, so every fold is non-empty
  // once n >= k even when a class has fewer than k rows.
  if (y.size() < k) {
    throw ValidationError("folds: fewer rows (" + std::to_string(y.size()) + ") than folds (k=" + std::to_string(k) + ")");
  }
  std::size_t pos = 0;
  for (auto& [c, rows] : by_class) {
    rng.shuffle(rows);
    for (auto r : rows) plan.assignments[r] = pos++ % k;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Records

nlohmann::json to_json(const RunRecord& record) {
  return {{"config_hash", record.config_hash},
          {"run", record.run},
          {"fold", record.fold},
          {"metrics", to_json(record.metrics)},
          {"timing", {{"train_seconds", record.timing.train_seconds}, {"test_seconds", record.timing.test_seconds}}},
          {"rows",
           {{"train", record.rows.train}, {"test", record.rows.test}, {"train_resampled", record.rows.train_resampled}}}};
}

RunRecord record_from_json(const nlohmann::json& doc) {
  RunRecord r;
  try {
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.run = doc.at("run").get<std::size_t>();
    r.fold = doc.at("fold").get<std::size_t>();
    r.metrics = metrics_from_json(doc.at("metrics"));
    r.timing.train_seconds = doc.at("timing").at("train_seconds").get<double>();
    r.timing.test_seconds = doc.at("timing").at("test_seconds").get<double>();
    r.rows.train = doc.at("rows").at("train").get<std::size_t>();
    r.rows.test = doc.at("rows").at("test").get<std::size_t>();
    r.rows.train_resampled = doc.at("rows").at("train_resampled").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  return r;
}

std::map<std::string, double> scalar_metrics(const RunRecord& record) {
  auto out = scalar_metrics(record.metrics);
  out["train_time"] = record.timing.train_seconds;
  out["test_time"] = record.timing.test_seconds;
  return out;
}

bool same_outcome(const RunRecord& a, const RunRecord& b) {
  auto ja = to_json(a), jb = to_json(b);
  ja.erase("timing");
  jb.erase("timing");
  return ja == jb;
}

void guard_rows(const FoldContext& ctx, const RowIndices& rows, const std::string& stage) {
  const std::set<std::size_t> test(ctx.test.begin(), ctx.test.end());
  for (auto r : rows) {
    if (test.count(r)) {
      throw LeakageError("run " + std::to_string(ctx.run) + " fold " + std::to_string(ctx.fold) + " stage '" + stage +
                         "': test row " + std::to_string(r) + " reached a fitting call");
    }
  }
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
auto stage(std::size_t run, std::size_t fold, const std::string& name, F&& f) -> decltype(f()) {
  const auto where = [&] {
    return "run " + std::to_string(run) + " fold " + std::to_string(fold) + " stage '" + name + "': ";
  };
  try {
    return f();
  } catch (const LeakageError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExecutionError(where() + e.what());
  }
}

std::uint64_t model_seed(const ExperimentConfig& config, std::size_t run, std::size_t fold) {
  return config.cv.base_seed + static_cast<std::uint64_t>(run) * 10007u + fold;
}

RunRecord run_fold(const ExperimentConfig& config, const Dataset& data, const FoldPlan& plan, std::size_t fold,
                   std::size_t first_stage, PipelineObserver* observer) {
  const RowIndices train = plan.train_rows(fold);
  const RowIndices test = plan.test_rows(fold);
  const FoldContext ctx{plan.run_index, fold, train, test};
  const std::size_t r = plan.run_index;
  const Labels& y = *data.labels;

  RunRecord record;
  record.run = r;
  record.fold = fold;
  record.rows.train = train.size();
  record.rows.test = test.size();

  const auto t_train = Clock::now();
  Matrix x_train = select_rows(data.features, train);
  Matrix x_test = select_rows(data.features, test);
  Labels y_train = select_labels(y, train);
  const Labels y_test = select_labels(y, test);

  for (std::size_t i = first_stage; i < config.transforms.size(); ++i) {
    const auto& spec = config.transforms[i];
    const std::string name = to_string(spec.kind);
    if (spec.kind == TransformKind::resample) {
      const Resampled res = stage(r, fold, name, [&] {
        guard_rows(ctx, train, name);
        return resample(x_train, y_train, data.num_classes(), spec.method,
                        spec.seed + model_seed(config, r, fold), spec.k_neighbors);
      });
      if (observer) observer->on_resample(ctx, train, res);
      x_train = res.x;
      y_train = res.y;
      continue;
    }
    const FittedTransform ft = stage(r, fold, "fit " + name, [&] {
      guard_rows(ctx, train, "fit " + name);
      return fit_transform(spec, x_train);
    });
    if (observer) observer->on_fit(ctx, i, train, ft);
    x_train = stage(r, fold, "apply " + name, [&] { return apply_transform(ft, x_train); });
    if (observer) observer->on_apply(ctx, i, train, x_train);
    x_test = stage(r, fold, "apply " + name, [&] { return apply_transform(ft, x_test); });
    if (observer) observer->on_apply(ctx, i, test, x_test);
  }
  record.rows.train_resampled = static_cast<std::size_t>(x_train.rows());

  ModelSpec spec = config.model;
  spec.seed = model_seed(config, r, fold);
  const FittedModel model = stage(r, fold, "train " + to_string(spec.algorithm), [&] {
    guard_rows(ctx, train, "train");
    return mlexp::train(spec, x_train, y_train, data.num_classes());
  });
  if (observer) observer->on_train(ctx, train);
  record.timing.train_seconds = seconds_since(t_train);

  const auto t_test = Clock::now();
  const auto [scores, predicted] = stage(r, fold, "predict", [&] {
    return std::make_pair(predict_scores(model, x_test), predict(model, x_test));
  });
  if (observer) observer->on_predict(ctx, test);
  record.timing.test_seconds = seconds_since(t_test);

  record.metrics = stage(r, fold, "metrics",
                         [&] { return evaluate_predictions(y_test, predicted, scores, data.num_classes()); });
  return record;
}

RunRecord run_clustering(const ExperimentConfig& config, const Dataset& data, std::size_t first_stage,
                         PipelineObserver* observer) {
  RowIndices all(data.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const RowIndices none;
  const FoldContext ctx{0, 0, all, none};

  RunRecord record;
  record.rows.train = record.rows.train_resampled = data.rows();

  const auto t0 = Clock::now();
  Matrix x = data.features;
  for (std::size_t i = first_stage; i < config.transforms.size(); ++i) {
    const auto& spec = config.transforms[i];
    const std::string name = to_string(spec.kind);
    const FittedTransform ft = stage(0, 0, "fit " + name, [&] { return fit_transform(spec, x); });
    if (observer) observer->on_fit(ctx, i, all, ft);
    x = stage(0, 0, "apply " + name, [&] { return apply_transform(ft, x); });
    if (observer) observer->on_apply(ctx, i, all, x);
  }
  ModelSpec spec = config.model;
  spec.seed = model_seed(config, 0, 0);
  const ClusterResult result = stage(0, 0, "cluster " + to_string(spec.algorithm), [&] { return cluster(spec, x); });
  if (observer) observer->on_train(ctx, all);
  record.timing.train_seconds = seconds_since(t0);

  MetricsBundle& m = record.metrics;
  m.task = Task::clustering;
  m.cluster_count = result.cluster_count;
  if (result.cluster_count >= 2) m.silhouette = silhouette(x, result.assignments);
  if (data.has_labels() && data.rows() >= 2) m.adjusted_rand = adjusted_rand(*data.labels, result.assignments);
  return record;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const Dataset& ds, PipelineObserver* observer) {
  config.check();
  ds.check_invariants();

  std::optional<Dataset> windowed;
  std::size_t first_stage = 0;
  if (!config.transforms.empty() && config.transforms.front().kind == TransformKind::window) {
    const auto& w = config.transforms.front();
    windowed = stage(0, 0, "window", [&] { return make_windows(ds, w.width, w.stride); });
    first_stage = 1;
  }
  const Dataset& data = windowed ? *windowed : ds;
  const std::string hash = config_hash(config);

  if (is_clustering(config.model.algorithm)) {
    RunRecord record = run_clustering(config, data, first_stage, observer);
    record.config_hash = hash;
    return {record};
  }

  if (!data.has_labels()) throw ValidationError("experiment: a classifier needs a labelled dataset");
  if (config.cv.grouped && !data.group_ids) throw ValidationError("experiment: grouped CV needs a group column");
  const auto report = validate_dataset(data, config.cv.grouped ? 0 : config.cv.k);
  if (!report.ok()) throw ValidationError("experiment: dataset invalid: " + report.errors.front().message);

  std::vector<RunRecord> records;
  for (std::size_t r = 0; r < config.cv.runs; ++r) {
    std::optional<std::span<const std::int64_t>> groups;
    if (config.cv.grouped) groups = std::span<const std::int64_t>(*data.group_ids);
    FoldPlan plan = stratified_folds(*data.labels, config.cv.k, config.cv.base_seed + r, groups);
    plan.run_index = r;
    for (std::size_t f = 0; f < plan.k; ++f) {
      RunRecord record = run_fold(config, data, plan, f, first_stage, observer);
      record.config_hash = hash;
      records.push_back(std::move(record));
    }
  }
  return records;
}

}  // namespace mlexp
