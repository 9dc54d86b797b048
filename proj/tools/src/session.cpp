#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "app.hpp"
#include "mlexp/compare.hpp"
#include "mlexp/error.hpp"
#include "mlexp/format.hpp"
#include "mlexp/report.hpp"
#include "mlexp/runner.hpp"
#include "mlexp/store.hpp"

namespace fs = std::filesystem;

namespace mlexp::cli {

namespace {

struct EndOfInput {};
struct QuitRequested {};

class Prompter {
 public:
  Prompter(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  std::string line(const std::string& prompt) {
    out_ << prompt << std::flush;
    std::string text;
    if (!std::getline(in_, text)) throw EndOfInput{};
    return std::string(trim(text));
  }

  /// Number in [lo, hi]; "q" quits. Re-prompts on anything else.
  std::size_t choice(std::size_t lo, std::size_t hi) {
    for (;;) {
      const std::string text = line("> ");
      if (text == "q" || text == "Q") throw QuitRequested{};
      if (const auto v = parse_number(text); v && *v == std::floor(*v) && *v >= static_cast<double>(lo) &&
                                              *v <= static_cast<double>(hi)) {
        return static_cast<std::size_t>(*v);
      }
      out_ << "invalid choice '" << text << "': enter a number from " << lo << " to " << hi << " (q quits)\n";
    }
  }

  double number(const std::string& prompt, double fallback) {
    for (;;) {
      const std::string text = line(prompt + " [" + format_number(fallback) + "]: ");
      if (text.empty()) return fallback;
      if (const auto v = parse_number(text)) return *v;
      out_ << "not a number: '" << text << "'\n";
    }
  }

  std::size_t count(const std::string& prompt, std::size_t fallback) {
    for (;;) {
      const std::string text = line(prompt + " [" + std::to_string(fallback) + "]: ");
      if (text.empty()) return fallback;
      if (const auto v = parse_number(text); v && *v >= 0 && *v == std::floor(*v)) return static_cast<std::size_t>(*v);
      out_ << "not a non-negative integer: '" << text << "'\n";
    }
  }

  bool yes_no(const std::string& prompt, bool fallback) {
    for (;;) {
      const std::string text = line(prompt + (fallback ? " [y/n, default y]: " : " [y/n, default n]: "));
      if (text.empty()) return fallback;
      if (text == "y" || text == "yes") return true;
      if (text == "n" || text == "no") return false;
      out_ << "answer y or n\n";
    }
  }

 private:
  std::istream& in_;
  std::ostream& out_;
};

struct SessionState {
  std::optional<Dataset> dataset;
  ExperimentConfig draft;
  bool dirty = false;
  std::optional<fs::path> results_dir;
};

std::string chain_text(const ExperimentConfig& c) {
  if (c.transforms.empty()) return "(empty)";
  std::string s;
  for (const auto& t : c.transforms) s += (s.empty() ? "" : " > ") + to_json(t).dump();
  return s;
}

std::string model_text(const ModelSpec& m) { return to_string(m.algorithm) + " " + to_json(m)["hyperparameters"].dump(); }

std::string cv_text(const CvSettings& cv) {
  return "k=" + std::to_string(cv.k) + " runs=" + std::to_string(cv.runs) + " base_seed=" + std::to_string(cv.base_seed) +
         (cv.grouped ? " grouped" : "");
}

class Session {
 public:
  Session(std::istream& in, std::ostream& out) : p_(in, out), out_(out) {
    state_.draft.model = ModelSpec::defaults(Algorithm::knn);
  }

  int loop() {
    out_ << "mlexp interactive session (enter q at any menu to quit)\n";
    try {
      for (;;) {
        out_ << "\n== main menu ==\n"
             << "dataset: " << (state_.dataset ? state_.draft.dataset.path : "(none)") << "\n"
             << "chain:   " << chain_text(state_.draft) << "\n"
             << "model:   " << model_text(state_.draft.model) << "\n"
             << "cv:      " << cv_text(state_.draft.cv) << "\n"
             << " 1) Load dataset\n 2) View analysis\n 3) Edit transform chain\n"
             << " 4) Choose algorithm and hyperparameters\n 5) Set cross-validation\n 6) Run experiment\n"
             << " 7) View results\n 8) Compare or rank results\n 9) Save config as JSON\n 0) Quit\n";
        const auto c = p_.choice(0, 9);
        if (c == 0) throw QuitRequested{};
        if ((c == 2 || c == 6) && !state_.dataset) {
          out_ << "option " << c << " needs a loaded dataset; choose 1 first\n";
          continue;
        }
        if ((c == 7 || c == 8) && !state_.results_dir) {
          out_ << "no results yet; run an experiment first (6)\n";
          continue;
        }
        switch (c) {
          case 1: load(); break;
          case 2: print_analysis(*state_.dataset, out_); break;
          case 3: edit_chain(); break;
          case 4: choose_model(); break;
          case 5: set_cv(); break;
          case 6: run(); break;
          case 7: view_results(); break;
          case 8: compare_menu(); break;
          case 9: save(); break;
        }
      }
    } catch (const EndOfInput&) {
      out_ << "\nend of input, leaving session\n";
      return 0;
    } catch (const QuitRequested&) {
    }
    try {
      if (state_.dirty && p_.yes_no("draft has unsaved changes; save before quitting?", true)) save();
    } catch (const EndOfInput&) {
    } catch (const QuitRequested&) {
    }
    out_ << "bye\n";
    return 0;
  }

 private:
  void mark(const std::string& confirmation) {
    state_.dirty = true;
    out_ << confirmation << "\n";
  }

  void load() {
    const std::string csv = p_.line("dataset CSV path: ");
    const std::string manifest = p_.line("manifest JSON path: ");
    try {
      Dataset ds = load_dataset(csv, load_manifest(manifest));
      out_ << "loaded " << csv << ": " << ds.rows() << " rows, " << ds.cols() << " features";
      if (ds.has_labels()) out_ << ", " << ds.num_classes() << " classes";
      out_ << "\n";
      for (const auto& w : ds.load_warnings) out_ << "warning: " << w.message << "\n";
      state_.dataset = std::move(ds);
      state_.draft.dataset = {csv, manifest};
      state_.dirty = true;
    } catch (const std::exception& e) {
      out_ << "could not load dataset: " << e.what() << "\n";
    }
  }

  void edit_chain() {
    for (;;) {
      out_ << "\n== transform chain ==\n" << chain_text(state_.draft) << "\n"
           << " 1) Add step\n 2) Remove last step\n 3) Clear chain\n 0) Back\n";
      const auto c = p_.choice(0, 3);
      if (c == 0) return;
      auto& chain = state_.draft.transforms;
      if (c == 1) {
        add_step();
      } else if (c == 2) {
        if (chain.empty()) {
          out_ << "chain is already empty\n";
        } else {
          chain.pop_back();
          mark("removed last step; chain now " + chain_text(state_.draft));
        }
      } else {
        chain.clear();
        mark("chain cleared");
      }
    }
  }

  void add_step() {
    auto& chain = state_.draft.transforms;
    out_ << "step kind:\n 1) zscore\n 2) minmax\n 3) variance_filter\n 4) correlation_filter\n 5) pca\n"
         << " 6) window\n 7) resample\n 0) Back\n";
    const auto c = p_.choice(0, 7);
    if (c == 0) return;
    static constexpr TransformKind kinds[] = {TransformKind::zscore,      TransformKind::minmax,
                                              TransformKind::variance_filter, TransformKind::correlation_filter,
                                              TransformKind::pca,         TransformKind::window,
                                              TransformKind::resample};
    TransformSpec t;
    t.kind = kinds[c - 1];
    switch (t.kind) {
      case TransformKind::variance_filter: t.threshold = p_.number("threshold", 0.0); break;
      case TransformKind::correlation_filter: t.threshold = p_.number("threshold", 0.95); break;
      case TransformKind::pca:
        out_ << " 1) fixed component count\n 2) explained variance ratio\n";
        if (p_.choice(1, 2) == 1) {
          t.components = p_.count("components", 2);
        } else {
          t.variance_ratio = p_.number("variance ratio", 0.95);
        }
        break;
      case TransformKind::window:
        t.width = p_.count("width", 2);
        t.stride = p_.count("stride", 1);
        break;
      case TransformKind::resample: {
        out_ << "method:\n 1) undersample\n 2) oversample\n 3) smote\n";
        static constexpr ResampleMethod methods[] = {ResampleMethod::undersample, ResampleMethod::oversample,
                                                     ResampleMethod::smote};
        t.method = methods[p_.choice(1, 3) - 1];
        if (t.method == ResampleMethod::smote) t.k_neighbors = p_.count("k_neighbors", 5);
        t.seed = p_.count("seed", 0);
        break;
      }
      default: break;
    }
    try {
      t.check();
      if (!chain.empty() && chain.back().kind == TransformKind::resample) {
        throw ValidationError("resample must stay the last step; remove it first");
      }
      if (t.kind == TransformKind::window && !chain.empty()) throw ValidationError("window must be the first step");
    } catch (const ValidationError& e) {
      out_ << "step rejected: " << e.what() << "\n";
      return;
    }
    chain.push_back(t);
    mark("added step " + std::to_string(chain.size()) + ": " + to_json(t).dump());
  }

  void choose_model() {
    out_ << "\n== algorithm ==\n 1) knn\n 2) gnb\n 3) tree\n 4) logreg\n 5) kmeans\n 6) dbscan\n 0) Back\n";
    const auto c = p_.choice(0, 6);
    if (c == 0) return;
    static constexpr Algorithm algorithms[] = {Algorithm::knn,    Algorithm::gnb,    Algorithm::tree,
                                               Algorithm::logreg, Algorithm::kmeans, Algorithm::dbscan};
    const Algorithm algorithm = algorithms[c - 1];
    ModelSpec spec = state_.draft.model.algorithm == algorithm ? state_.draft.model : ModelSpec::defaults(algorithm);
    std::visit(
        [&](auto& h) {
          using T = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<T, KnnParams>) {
            h.k = p_.count("k", h.k);
          } else if constexpr (std::is_same_v<T, TreeParams>) {
            h.max_depth = p_.count("max_depth", h.max_depth);
            h.min_samples_split = p_.count("min_samples_split", h.min_samples_split);
          } else if constexpr (std::is_same_v<T, LogregParams>) {
            h.learning_rate = p_.number("learning_rate", h.learning_rate);
            h.l2 = p_.number("l2", h.l2);
            h.max_iters = p_.count("max_iters", h.max_iters);
            h.tol = p_.number("tol", h.tol);
          } else if constexpr (std::is_same_v<T, KMeansParams>) {
            h.k = p_.count("k", h.k);
            h.max_iters = p_.count("max_iters", h.max_iters);
            h.tol = p_.number("tol", h.tol);
          } else if constexpr (std::is_same_v<T, DbscanParams>) {
            h.eps = p_.number("eps", h.eps);
            h.min_pts = p_.count("min_pts", h.min_pts);
          }
        },
        spec.params);
    try {
      spec.check();
    } catch (const ValidationError& e) {
      out_ << "model rejected: " << e.what() << "\n";
      return;
    }
    state_.draft.model = spec;
    mark("model set: " + model_text(spec));
  }

  void set_cv() {
    CvSettings cv = state_.draft.cv;
    cv.k = p_.count("folds k", cv.k);
    cv.runs = p_.count("runs", cv.runs);
    cv.base_seed = p_.count("base seed", cv.base_seed);
    cv.grouped = p_.yes_no("grouped by the group column?", cv.grouped);
    if (cv.k < 2 || cv.runs < 1) {
      out_ << "cross-validation rejected: need k >= 2 and runs >= 1\n";
      return;
    }
    state_.draft.cv = cv;
    mark("cross-validation set: " + cv_text(cv));
  }

  void run() {
    const std::string dir = p_.line("output directory [results]: ");
    const fs::path out_dir = dir.empty() ? fs::path("results") : fs::path(dir);
    ExperimentConfig config = state_.draft;
    try {
      apply_seed_override(config, out_);
      config.check();
    } catch (const Error& e) {
      out_ << "cannot run this draft: " << e.what() << "\n";
      return;
    }
    out_ << "running config " << config_hash(config) << " ...\n";
    try {
      const auto s = run_configs({config}, out_dir, 1, &out_);
      out_ << "records written: " << s.records_written << ", duplicates skipped: " << s.records_skipped
           << ", failures: " << s.failures << "\n";
      for (const auto& m : s.failure_messages) out_ << "failure: " << m << "\n";
      state_.results_dir = out_dir;
      out_ << "results stored in " << store_path(out_dir).string() << "\n";
    } catch (const std::exception& e) {
      out_ << "run failed: " << e.what() << "\n";
    }
  }

  std::vector<std::string> hashes(const std::vector<RunRecord>& records) {
    std::vector<std::string> out;
    for (const auto& r : records) {
      if (std::find(out.begin(), out.end(), r.config_hash) == out.end()) out.push_back(r.config_hash);
    }
    return out;
  }

  void view_results() {
    const auto records = read_records(store_path(*state_.results_dir));
    for (const auto& h : hashes(records)) {
      std::vector<RunRecord> mine;
      for (const auto& r : records) {
        if (r.config_hash == h) mine.push_back(r);
      }
      out_ << "\nconfig " << h << " (" << mine.size() << " records)\n";
      for (const auto& a : aggregate_metrics(mine)) {
        out_ << "  " << std::left << std::setw(22) << a.metric << std::right << std::fixed << std::setprecision(4)
             << a.mean << " +/- " << a.std << std::defaultfloat << "\n";
      }
      const auto cm = summed_confusion(mine);
      if (!cm.empty()) {
        out_ << "  summed confusion matrix (rows = true):\n";
        for (const auto& row : cm) {
          out_ << "   ";
          for (auto v : row) out_ << std::setw(7) << v;
          out_ << "\n";
        }
      }
    }
  }

  void compare_menu() {
    out_ << "\n== compare or rank ==\n 1) Compare configs statistically\n 2) Rank configs under a scenario file\n"
         << " 0) Back\n";
    const auto c = p_.choice(0, 2);
    if (c == 0) return;
    const auto path = store_path(*state_.results_dir);
    try {
      const auto records = read_records(path);
      if (c == 2) {
        const Scenario scenario = load_scenario(p_.line("scenario JSON path: "));
        const auto ranked = rank_models(scenario, summarize_records(records));
        for (std::size_t i = 0; i < ranked.size(); ++i) {
          out_ << std::setw(3) << i + 1 << ". " << ranked[i].model << "  " << std::fixed << std::setprecision(4)
               << ranked[i].score << std::defaultfloat << "\n";
        }
        return;
      }
      const auto known = hashes(records);
      for (std::size_t i = 0; i < known.size(); ++i) out_ << " " << i + 1 << ") " << known[i] << "\n";
      std::istringstream picks(p_.line("configs to compare (numbers separated by spaces): "));
      std::vector<std::string> models;
      for (std::size_t i; picks >> i;) {
        if (i < 1 || i > known.size()) throw ValidationError("no config numbered " + std::to_string(i));
        models.push_back(known[i - 1]);
      }
      std::string metric = p_.line("metric id [macro_f1]: ");
      if (metric.empty()) metric = "macro_f1";
      const double alpha = p_.number("alpha", 0.05);
      out_ << to_text(compare(samples_from_records(records, metric, models), alpha));
    } catch (const Error& e) {
      out_ << "cannot compare: " << e.what() << "\n";
    }
  }

  void save() {
    const std::string path = p_.line("config path: ");
    try {
      state_.draft.check();
      save_config(state_.draft, path);
      state_.dirty = false;
      out_ << "saved " << path << " (config " << config_hash(state_.draft) << ")\n";
    } catch (const Error& e) {
      out_ << "not saved: " << e.what() << "\n";
    }
  }

  Prompter p_;
  std::ostream& out_;
  SessionState state_;
};

}  // namespace

int interactive_session(std::istream& in, std::ostream& out) { return Session(in, out).loop(); }

}  // namespace mlexp::cli
