#include "app.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "mlexp/analysis.hpp"
#include "mlexp/compare.hpp"
#include "mlexp/dataset.hpp"
#include "mlexp/error.hpp"
#include "mlexp/format.hpp"
#include "mlexp/report.hpp"
#include "mlexp/runner.hpp"
#include "mlexp/store.hpp"

namespace fs = std::filesystem;

namespace mlexp::cli {

std::optional<std::uint64_t> seed_override() {
  const char* raw = std::getenv("PROPHETIC_SEED");
  if (!raw || !*raw) return std::nullopt;
  const std::string text(raw);
  if (text.find_first_not_of("0123456789") != std::string::npos || text.size() > 19) {
    throw ValidationError("PROPHETIC_SEED must be an unsigned integer, got '" + text + "'");
  }
  return std::stoull(text);
}

void apply_seed_override(ExperimentConfig& config, std::ostream& out) {
  if (const auto seed = seed_override()) {
    config.cv.base_seed = *seed;
    out << "PROPHETIC_SEED active: base_seed = " << *seed << "\n";
  }
}

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw UsageError(what + " not found: " + path.string());
}

void print_summary(const BatchSummary& s, std::ostream& out) {
  out << "configs: " << s.configs << ", records written: " << s.records_written
      << ", duplicates skipped: " << s.records_skipped << ", failures: " << s.failures << "\n";
  for (const auto& m : s.failure_messages) out << "  failure: " << m << "\n";
}

}  // namespace

void print_analysis(const Dataset& ds, std::ostream& out) {
  out << "dataset " << ds.origin << "\n" << ds.rows() << " rows, " << ds.cols() << " features";
  if (ds.has_labels()) out << ", " << ds.num_classes() << " classes";
  out << "\n\n";
  out << std::left << std::setw(20) << "feature" << std::right;
  for (const char* h : {"mean", "std", "min", "q1", "median", "q3", "max"}) out << std::setw(11) << h;
  out << std::setw(9) << "distinct" << "\n";
  for (const auto& s : describe(ds)) {
    out << std::left << std::setw(20) << s.name << std::right << std::setprecision(4);
    for (double v : {s.mean, s.std, s.min, s.q1, s.median, s.q3, s.max}) out << std::setw(11) << v;
    out << std::setw(9) << s.distinct_count << "\n";
  }
  if (ds.has_labels()) {
    const auto dist = class_distribution(ds);
    out << "\nclasses:\n";
    for (std::size_t c = 0; c < dist.counts.size(); ++c) {
      out << "  " << std::left << std::setw(18) << dist.class_names[c] << std::right << std::setw(7) << dist.counts[c]
          << std::setw(9) << std::fixed << std::setprecision(3) << dist.fractions[c] << std::defaultfloat << "\n";
    }
  }
  if (ds.rows() >= 2) {
    const Matrix corr = correlation_matrix(ds, CorrelationMethod::pearson);
    out << "\npearson correlation:\n";
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
      out << "  " << std::left << std::setw(18) << ds.feature_meta[static_cast<std::size_t>(i)].name << std::right;
      for (Eigen::Index j = 0; j < corr.cols(); ++j) out << std::setw(8) << std::fixed << std::setprecision(3) << corr(i, j);
      out << std::defaultfloat << "\n";
    }
  }
  const auto report = validate_dataset(ds, 0);
  for (const auto& w : ds.load_warnings) out << "warning: " << w.message << "\n";
  for (const auto& w : report.warnings) out << "warning: " << w.message << "\n";
  for (const auto& e : report.errors) out << "error: " << e.message << "\n";
}

namespace {

int cmd_analyze(const std::string& dataset, const std::string& manifest, const std::string& plots, std::ostream& out) {
  require_file(dataset, "dataset");
  require_file(manifest, "manifest");
  const Dataset ds = load_dataset(dataset, load_manifest(manifest));
  print_analysis(ds, out);
  if (!plots.empty()) {
    std::vector<std::string> names;
    for (const auto& m : ds.feature_meta) names.push_back(m.name);
    const auto box = export_plot(ds, PlotKind::boxplot, names, plots);
    out << "wrote " << box.data_csv.string() << " and " << box.svg.string() << "\n";
    if (names.size() >= 2) {
      const auto sc = export_plot(ds, PlotKind::scatter, {names[0], names[1]}, plots);
      out << "wrote " << sc.data_csv.string() << " and " << sc.svg.string() << "\n";
    }
  }
  return ok;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  require_file(config_path, "config file");
  ExperimentConfig config = load_config(config_path);
  apply_seed_override(config, out);
  config.check();
  require_file(config.dataset_path(), "dataset");
  require_file(config.manifest_path(), "manifest");
  const Dataset ds = load_dataset(config.dataset_path(), load_manifest(config.manifest_path()));
  const auto report = validate_dataset(ds, config.cv.grouped || is_clustering(config.model.algorithm) ? 0 : config.cv.k);
  if (!report.ok()) throw ValidationError(report.errors.front().message);
  out << "config " << config_hash(config) << "\n";
  const auto summary = run_configs({config}, out_dir, 1, &out);
  print_summary(summary, out);
  out << "store: " << store_path(out_dir).string() << "\n";
  return summary.failures ? execution : ok;
}

int cmd_batch(const std::string& batch_path, const std::string& out_dir, std::optional<std::size_t> workers,
              std::ostream& out) {
  require_file(batch_path, "batch file");
  BatchConfig batch = load_batch(batch_path);
  if (workers) batch.workers = *workers;
  auto configs = expand_grid(batch);
  if (const auto seed = seed_override()) {
    out << "PROPHETIC_SEED active: base_seed = " << *seed << "\n";
    for (auto& c : configs) c.cv.base_seed = *seed;
  }
  out << configs.size() << " configs, " << batch.workers << " workers\n";
  const auto summary = run_configs(configs, out_dir, batch.workers, &out);
  print_summary(summary, out);
  out << "store: " << store_path(out_dir).string() << "\n";
  return summary.failures ? execution : ok;
}

std::vector<std::string> store_hashes(const std::vector<RunRecord>& records) {
  std::vector<std::string> hashes;
  for (const auto& r : records) {
    if (std::find(hashes.begin(), hashes.end(), r.config_hash) == hashes.end()) hashes.push_back(r.config_hash);
  }
  return hashes;
}

/// Exact hash or unique prefix; anything else passes through unchanged.
std::string resolve_hash(const std::vector<std::string>& known, const std::string& wanted) {
  std::string match;
  for (const auto& h : known) {
    if (h == wanted) return h;
    if (h.rfind(wanted, 0) == 0) {
      if (!match.empty()) return wanted;
      match = h;
    }
  }
  return match.empty() ? wanted : match;
}

int cmd_compare(const std::string& store, const std::string& metric, const std::vector<std::string>& models,
                double alpha, bool json, std::ostream& out) {
  require_file(store, "store");
  const auto records = read_records(store);
  const auto known = store_hashes(records);
  std::vector<std::string> resolved;
  for (const auto& m : models) resolved.push_back(resolve_hash(known, m));
  const auto report = compare(samples_from_records(records, metric, resolved), alpha);
  out << (json ? to_json(report).dump(2) + "\n" : to_text(report));
  return ok;
}

int cmd_rank(const std::string& store, const std::string& scenario_path, std::ostream& out) {
  require_file(store, "store");
  require_file(scenario_path, "scenario");
  const Scenario scenario = load_scenario(scenario_path);
  const auto ranked = rank_models(scenario, summarize_records(read_records(store)));
  out << "scenario '" << scenario.name << "':";
  for (const auto& c : scenario.criteria) out << " " << c.metric << "(" << format_number(c.weight) << ", " << to_string(c.direction) << ")";
  out << "\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out << std::setw(3) << i + 1 << ". " << ranked[i].model << "  " << std::fixed << std::setprecision(4)
        << ranked[i].score << std::defaultfloat << "\n";
  }
  return ok;
}

int cmd_report(const std::string& store, const std::string& out_dir, const std::vector<std::string>& configs,
               std::ostream& out) {
  require_file(store, "store");
  const auto records = read_records(store);
  const auto known = store_hashes(records);
  std::vector<std::string> selection;
  for (const auto& c : configs) selection.push_back(resolve_hash(known, c));
  if (configs.empty()) selection = known;
  for (const auto& p : generate_report(store, selection, out_dir)) out << "wrote " << p.string() << "\n";
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"mlexp: machine learning experiment runner", "mlexp"};
  app.require_subcommand(0, 1);

  std::string dataset, manifest, plots;
  auto* analyze = app.add_subcommand("analyze", "Describe a dataset and optionally export plots");
  analyze->add_option("dataset", dataset, "CSV file")->required();
  analyze->add_option("manifest", manifest, "manifest JSON")->required();
  analyze->add_option("--plots", plots, "directory for plot CSV/SVG files");

  std::string config_path, out_dir;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  run_cmd->add_option("config", config_path, "experiment config JSON")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->required();

  std::string batch_path;
  std::optional<std::size_t> workers;
  auto* batch = app.add_subcommand("batch", "Expand a batch grid and run every config");
  batch->add_option("batch", batch_path, "batch config JSON")->required();
  batch->add_option("--out", out_dir, "output directory")->required();
  batch->add_option("--workers", workers, "override the batch worker count")->check(CLI::PositiveNumber);

  std::string store, metric = "macro_f1";
  std::vector<std::string> models;
  double alpha = 0.05;
  bool json = false;
  auto* cmp = app.add_subcommand("compare", "Statistically compare configs on one metric");
  cmp->add_option("--store", store, "results store (records.jsonl)")->required();
  cmp->add_option("--metric", metric, "metric id")->required();
  cmp->add_option("--models", models, "config hashes (unique prefixes accepted)")->required()->expected(2, -1);
  cmp->add_option("--alpha", alpha, "significance level");
  cmp->add_flag("--json", json, "print the report as JSON");

  std::string scenario;
  auto* rank = app.add_subcommand("rank", "Rank every config in a store under a scenario");
  rank->add_option("--store", store, "results store")->required();
  rank->add_option("--scenario", scenario, "scenario JSON")->required();

  std::vector<std::string> selection;
  auto* report = app.add_subcommand("report", "Write metric tables, confusion matrices and ROC curves");
  report->add_option("--store", store, "results store")->required();
  report->add_option("--out", out_dir, "report directory")->required();
  report->add_option("--configs", selection, "config hashes (default: all)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return usage;
  }

  try {
    if (*analyze) return cmd_analyze(dataset, manifest, plots, out);
    if (*run_cmd) return cmd_run(config_path, out_dir, out);
    if (*batch) return cmd_batch(batch_path, out_dir, workers, out);
    if (*cmp) return cmd_compare(store, metric, models, alpha, json, out);
    if (*rank) return cmd_rank(store, scenario, out);
    if (*report) return cmd_report(store, out_dir, selection, out);
    return interactive_session(in, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return validation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return execution;
  }
}

}  // namespace mlexp::cli
