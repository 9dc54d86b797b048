#include "mlexp/learn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include "mlexp/digest.hpp"
#include "mlexp/error.hpp"
#include "mlexp/rng.hpp"
#include "mlexp/transform.hpp"

namespace mlexp {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::knn: return "knn";
    case Algorithm::gnb: return "gnb";
    case Algorithm::tree: return "tree";
    case Algorithm::logreg: return "logreg";
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::dbscan: return "dbscan";
  }
  return "?";
}

bool is_clustering(Algorithm algorithm) { return algorithm == Algorithm::kmeans || algorithm == Algorithm::dbscan; }

ModelSpec ModelSpec::defaults(Algorithm algorithm) {
  ModelSpec spec;
  spec.algorithm = algorithm;
  switch (algorithm) {
    case Algorithm::knn: spec.params = KnnParams{}; break;
    case Algorithm::gnb: spec.params = GnbParams{}; break;
    case Algorithm::tree: spec.params = TreeParams{}; break;
    case Algorithm::logreg: spec.params = LogregParams{}; break;
    case Algorithm::kmeans: spec.params = KMeansParams{}; break;
    case Algorithm::dbscan: spec.params = DbscanParams{}; break;
  }
  return spec;
}

void ModelSpec::check() const {
  const std::string where = "model '" + to_string(algorithm) + "': ";
  const bool matches = std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        switch (algorithm) {
          case Algorithm::knn: return std::is_same_v<P, KnnParams>;
          case Algorithm::gnb: return std::is_same_v<P, GnbParams>;
          case Algorithm::tree: return std::is_same_v<P, TreeParams>;
          case Algorithm::logreg: return std::is_same_v<P, LogregParams>;
          case Algorithm::kmeans: return std::is_same_v<P, KMeansParams>;
          case Algorithm::dbscan: return std::is_same_v<P, DbscanParams>;
        }
        return false;
      },
      params);
  if (!matches) throw ValidationError(where + "hyperparameters belong to a different algorithm");

  if (const auto* p = std::get_if<KnnParams>(&params); p && p->k < 1) throw ValidationError(where + "k must be >= 1");
  if (const auto* p = std::get_if<TreeParams>(&params)) {
    if (p->max_depth < 1) throw ValidationError(where + "max_depth must be >= 1");
    if (p->min_samples_split < 2) throw ValidationError(where + "min_samples_split must be >= 2");
  }
  if (const auto* p = std::get_if<LogregParams>(&params)) {
    if (!(p->learning_rate > 0.0)) throw ValidationError(where + "learning_rate must be > 0");
    if (!(p->l2 >= 0.0)) throw ValidationError(where + "l2 must be >= 0");
    if (p->max_iters < 1) throw ValidationError(where + "max_iters must be >= 1");
    if (!(p->tol > 0.0)) throw ValidationError(where + "tol must be > 0");
  }
  if (const auto* p = std::get_if<KMeansParams>(&params)) {
    if (p->k < 1) throw ValidationError(where + "k must be >= 1");
    if (p->max_iters < 1) throw ValidationError(where + "max_iters must be >= 1");
    if (!(p->tol >= 0.0)) throw ValidationError(where + "tol must be >= 0");
  }
  if (const auto* p = std::get_if<DbscanParams>(&params)) {
    if (!(p->eps > 0.0)) throw ValidationError(where + "eps must be > 0");
    if (p->min_pts < 1) throw ValidationError(where + "min_pts must be >= 1");
  }
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json hp = nlohmann::json::object();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          hp["k"] = p.k;
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          hp["max_depth"] = p.max_depth;
          hp["min_samples_split"] = p.min_samples_split;
        } else if constexpr (std::is_same_v<P, LogregParams>) {
          hp["learning_rate"] = p.learning_rate;
          hp["l2"] = p.l2;
          hp["max_iters"] = p.max_iters;
          hp["tol"] = p.tol;
        } else if constexpr (std::is_same_v<P, KMeansParams>) {
          hp["k"] = p.k;
          hp["max_iters"] = p.max_iters;
          hp["tol"] = p.tol;
        } else if constexpr (std::is_same_v<P, DbscanParams>) {
          hp["eps"] = p.eps;
          hp["min_pts"] = p.min_pts;
        }
      },
      spec.params);
  return {{"algorithm", to_string(spec.algorithm)}, {"hyperparameters", hp}, {"seed", spec.seed}};
}

namespace {

std::size_t hp_size(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ParseError("hyperparameter '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double hp_double(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ParseError("hyperparameter '" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

ModelSpec model_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("algorithm") || !doc["algorithm"].is_string()) {
    throw ParseError("model: expected an object with a string 'algorithm'");
  }
  static const std::map<std::string, Algorithm> ids{{"knn", Algorithm::knn},     {"gnb", Algorithm::gnb},
                                                    {"tree", Algorithm::tree},   {"logreg", Algorithm::logreg},
                                                    {"kmeans", Algorithm::kmeans}, {"dbscan", Algorithm::dbscan}};
  const auto name = doc["algorithm"].get<std::string>();
  const auto it = ids.find(name);
  if (it == ids.end()) throw ParseError("model: unknown algorithm '" + name + "'");
  for (const auto& [key, _] : doc.items()) {
    if (key != "algorithm" && key != "hyperparameters" && key != "seed") {
      throw ParseError("model: unknown key '" + key + "'");
    }
  }
  ModelSpec spec = ModelSpec::defaults(it->second);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw ParseError("model: 'seed' must be an integer");
    spec.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("hyperparameters")) {
    const auto& hp = doc["hyperparameters"];
    if (!hp.is_object()) throw ParseError("model: 'hyperparameters' must be an object");
    for (const auto& [key, value] : hp.items()) {
      bool known = true;
      std::visit(
          [&](auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, KnnParams>) {
              if (key == "k") p.k = hp_size(value, key); else known = false;
            } else if constexpr (std::is_same_v<P, GnbParams>) {
              known = false;
            } else if constexpr (std::is_same_v<P, TreeParams>) {
              if (key == "max_depth") p.max_depth = hp_size(value, key);
              else if (key == "min_samples_split") p.min_samples_split = hp_size(value, key);
              else known = false;
            } else if constexpr (std::is_same_v<P, LogregParams>) {
              if (key == "learning_rate") p.learning_rate = hp_double(value, key);
              else if (key == "l2") p.l2 = hp_double(value, key);
              else if (key == "max_iters") p.max_iters = hp_size(value, key);
              else if (key == "tol") p.tol = hp_double(value, key);
              else known = false;
            } else if constexpr (std::is_same_v<P, KMeansParams>) {
              if (key == "k") p.k = hp_size(value, key);
              else if (key == "max_iters") p.max_iters = hp_size(value, key);
              else if (key == "tol") p.tol = hp_double(value, key);
              else known = false;
            } else if constexpr (std::is_same_v<P, DbscanParams>) {
              if (key == "eps") p.eps = hp_double(value, key);
              else if (key == "min_pts") p.min_pts = hp_size(value, key);
              else known = false;
            }
          },
          spec.params);
      if (!known) throw ParseError("model '" + name + "': unknown hyperparameter '" + key + "'");
    }
  }
  try {
    spec.check();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------

namespace {

void check_training_input(const Matrix& x, const Labels& y, std::size_t num_classes) {
  if (x.rows() < 1) throw ValidationError("train: need at least one row");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ValidationError("train: row/label count mismatch");
  if (num_classes < 2) throw ValidationError("train: need at least two classes");
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) throw ValidationError("train: label out of range");
  }
}

std::vector<std::size_t> class_counts(const Labels& y, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int label : y) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

struct Neighbor {
  double distance;
  std::size_t index;
};

/// k nearest training rows, nearest first; equal distances go to the lower index.
std::vector<Neighbor> nearest(const KnnModel& m, const Eigen::Ref<const Eigen::RowVectorXd>& q) {
  std::vector<Neighbor> all(static_cast<std::size_t>(m.x.rows()));
  for (Eigen::Index i = 0; i < m.x.rows(); ++i) {
    all[static_cast<std::size_t>(i)] = {(m.x.row(i) - q).squaredNorm(), static_cast<std::size_t>(i)};
  }
  const auto by_distance = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m.k), all.end(), by_distance);
  all.resize(m.k);
  for (auto& nb : all) nb.distance = std::sqrt(nb.distance);
  return all;
}

// Tree -----------------------------------------------------------------------

struct TreeBuilder {
  const Matrix& x;
  const Labels& y;
  std::size_t num_classes;
  TreeParams params;
  std::vector<TreeNode> nodes;

  static double gini_mass(const std::vector<std::size_t>& counts, std::size_t n) {
    // n * gini = n - sum(c^2) / n
    if (n == 0) return 0.0;
    double s = 0.0;
    for (auto c : counts) s += static_cast<double>(c) * static_cast<double>(c);
    return static_cast<double>(n) - s / static_cast<double>(n);
  }

  int build(RowIndices rows, std::size_t depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    std::vector<std::size_t> counts(num_classes, 0);
    for (auto r : rows) ++counts[static_cast<std::size_t>(y[r])];
    {
      auto& node = nodes.back();
      node.class_freq.resize(num_classes);
      for (std::size_t c = 0; c < num_classes; ++c) {
        node.class_freq[c] = static_cast<double>(counts[c]) / static_cast<double>(rows.size());
      }
    }
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    if (pure || rows.size() < params.min_samples_split || depth >= params.max_depth) return id;

    const double parent = gini_mass(counts, rows.size());
    double best = parent;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> sorted(rows.size());
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        sorted[i] = {x(static_cast<Eigen::Index>(rows[i]), f), y[rows[i]]};
      }
      std::sort(sorted.begin(), sorted.end());
      std::vector<std::size_t> left(num_classes, 0), right = counts;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++left[static_cast<std::size_t>(sorted[i].second)];
        --right[static_cast<std::size_t>(sorted[i].second)];
        const double lo = sorted[i].first, hi = sorted[i + 1].first;
        if (lo == hi) continue;
        const double impurity = gini_mass(left, i + 1) + gini_mass(right, sorted.size() - i - 1);
        // Strictly better by a margin, so equal splits keep the earlier
        // (lower feature, lower threshold) candidate.
        if (impurity < best - 1e-12) {
          best = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = lo + (hi - lo) / 2.0;
          if (!(best_threshold < hi)) best_threshold = lo;
        }
      }
    }
    if (best_feature < 0) return id;

    RowIndices left_rows, right_rows;
    for (auto r : rows) {
      (x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    const int l = build(std::move(left_rows), depth + 1);
    const int rr = build(std::move(right_rows), depth + 1);
    nodes[static_cast<std::size_t>(id)].feature = best_feature;
    nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = rr;
    return id;
  }
};

// Logistic regression ------------------------------------------------------------

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    double s = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      p(i, c) = std::exp(logits(i, c) - m);
      s += p(i, c);
    }
    p.row(i) /= s;
  }
  return p;
}

LogregModel train_logreg(const LogregParams& params, const Matrix& x, const Labels& y, std::size_t num_classes) {
  const auto n = static_cast<double>(x.rows());
  const auto c_count = static_cast<Eigen::Index>(num_classes);
  LogregModel m;
  m.weights = Matrix::Zero(c_count, x.cols());
  m.bias = Vector::Zero(c_count);
  Matrix onehot = Matrix::Zero(x.rows(), c_count);
  for (std::size_t i = 0; i < y.size(); ++i) onehot(static_cast<Eigen::Index>(i), y[i]) = 1.0;

  for (std::size_t it = 0; it < params.max_iters; ++it) {
    Matrix logits = x * m.weights.transpose();
    logits.rowwise() += m.bias.transpose();
    const Matrix residual = softmax_rows(logits) - onehot;
    const Matrix grad_w = residual.transpose() * x / n + params.l2 * m.weights;
    const Vector grad_b = residual.colwise().sum().transpose() / n;
    m.final_gradient_norm = std::max(grad_w.cwiseAbs().maxCoeff(), grad_b.cwiseAbs().maxCoeff());
    if (m.final_gradient_norm < params.tol) break;
    m.weights -= params.learning_rate * grad_w;
    m.bias -= params.learning_rate * grad_b;
    m.iterations = it + 1;
  }
  return m;
}

}  // namespace

std::size_t TreeModel::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.feature < 0; }));
}

FittedModel train(const ModelSpec& spec, const Matrix& x, const Labels& y, std::size_t num_classes) {
  spec.check();
  if (is_clustering(spec.algorithm)) throw ValidationError("train: '" + to_string(spec.algorithm) + "' is a clustering algorithm");
  check_training_input(x, y, num_classes);

  FittedModel model;
  model.algorithm = spec.algorithm;
  model.num_classes = num_classes;
  model.num_features = static_cast<std::size_t>(x.cols());

  switch (spec.algorithm) {
    case Algorithm::knn: {
      const auto& p = std::get<KnnParams>(spec.params);
      if (p.k > y.size()) {
        throw ValidationError("train: knn k=" + std::to_string(p.k) + " exceeds training rows " + std::to_string(y.size()));
      }
      model.state = KnnModel{x, y, p.k};
      break;
    }
    case Algorithm::gnb: {
      const auto counts = class_counts(y, num_classes);
      const auto c_count = static_cast<Eigen::Index>(num_classes);
      GnbModel g;
      g.means = Matrix::Zero(c_count, x.cols());
      g.variances = Matrix::Zero(c_count, x.cols());
      for (std::size_t i = 0; i < y.size(); ++i) g.means.row(y[i]) += x.row(static_cast<Eigen::Index>(i));
      for (Eigen::Index c = 0; c < c_count; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) g.means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
      for (std::size_t i = 0; i < y.size(); ++i) {
        g.variances.row(y[i]) += (x.row(static_cast<Eigen::Index>(i)) - g.means.row(y[i])).array().square().matrix();
      }
      const Vector mean_all = x.colwise().mean();
      double max_var = 0.0;
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        max_var = std::max(max_var, (x.col(j).array() - mean_all(j)).square().sum() / static_cast<double>(x.rows()));
      }
      // All-constant input would leave a zero variance; fall back to an absolute epsilon.
      const double eps = max_var > 0.0 ? 1e-9 * max_var : 1e-9;
      for (Eigen::Index c = 0; c < c_count; ++c) {
        const auto n_c = counts[static_cast<std::size_t>(c)];
        if (n_c > 0) g.variances.row(c) /= static_cast<double>(n_c);
        g.variances.row(c).array() += eps;
        g.log_priors.push_back(n_c > 0 ? std::log(static_cast<double>(n_c) / static_cast<double>(y.size()))
                                       : -std::numeric_limits<double>::infinity());
      }
      model.state = std::move(g);
      break;
    }
    case Algorithm::tree: {
      TreeBuilder builder{x, y, num_classes, std::get<TreeParams>(spec.params), {}};
      RowIndices all(y.size());
      std::iota(all.begin(), all.end(), 0);
      builder.build(std::move(all), 0);
      model.state = TreeModel{std::move(builder.nodes)};
      break;
    }
    case Algorithm::logreg:
      model.state = train_logreg(std::get<LogregParams>(spec.params), x, y, num_classes);
      break;
    default:
      break;
  }
  return model;
}

namespace {

void check_predict_input(const FittedModel& model, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model.num_features) {
    throw ValidationError("predict: expected " + std::to_string(model.num_features) + " features, got " +
                          std::to_string(x.cols()));
  }
}

}  // namespace

Matrix predict_scores(const FittedModel& model, const Matrix& x) {
  check_predict_input(model, x);
  const auto c_count = static_cast<Eigen::Index>(model.num_classes);
  Matrix scores = Matrix::Zero(x.rows(), c_count);

  if (const auto* knn = std::get_if<KnnModel>(&model.state)) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (const auto& nb : nearest(*knn, x.row(i))) scores(i, knn->y[nb.index]) += 1.0;
      scores.row(i) /= static_cast<double>(knn->k);
    }
  } else if (const auto* g = std::get_if<GnbModel>(&model.state)) {
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::vector<double> log_post(model.num_classes);
      double top = -std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < c_count; ++c) {
        double lp = g->log_priors[static_cast<std::size_t>(c)];
        if (std::isfinite(lp)) {
          for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double v = g->variances(c, j);
            const double diff = x(i, j) - g->means(c, j);
            lp += -0.5 * (kLog2Pi + std::log(v)) - diff * diff / (2.0 * v);
          }
        }
        log_post[static_cast<std::size_t>(c)] = lp;
        top = std::max(top, lp);
      }
      double s = 0.0;
      for (Eigen::Index c = 0; c < c_count; ++c) {
        const double lp = log_post[static_cast<std::size_t>(c)];
        scores(i, c) = std::isfinite(lp) ? std::exp(lp - top) : 0.0;
        s += scores(i, c);
      }
      scores.row(i) /= s;
    }
  } else if (const auto* tree = std::get_if<TreeModel>(&model.state)) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::size_t node = 0;
      while (tree->nodes[node].feature >= 0) {
        const auto& n = tree->nodes[node];
        node = static_cast<std::size_t>(x(i, n.feature) <= n.threshold ? n.left : n.right);
      }
      for (Eigen::Index c = 0; c < c_count; ++c) scores(i, c) = tree->nodes[node].class_freq[static_cast<std::size_t>(c)];
    }
  } else {
    const auto& lr = std::get<LogregModel>(model.state);
    Matrix logits = x * lr.weights.transpose();
    logits.rowwise() += lr.bias.transpose();
    scores = softmax_rows(logits);
  }
  return scores;
}

Labels predict(const FittedModel& model, const Matrix& x) {
  const Matrix scores = predict_scores(model, x);
  Labels out(static_cast<std::size_t>(x.rows()));
  const auto* knn = std::get_if<KnnModel>(&model.state);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    std::vector<int> tied;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      if (scores(i, c) == top) tied.push_back(static_cast<int>(c));
    }
    int choice = tied.front();
    if (knn != nullptr && tied.size() > 1) {
      std::vector<double> total(model.num_classes, 0.0);
      for (const auto& nb : nearest(*knn, x.row(i))) total[static_cast<std::size_t>(knn->y[nb.index])] += nb.distance;
      for (int c : tied) {
        if (total[static_cast<std::size_t>(c)] < total[static_cast<std::size_t>(choice)]) choice = c;
      }
    }
    out[static_cast<std::size_t>(i)] = choice;
  }
  return out;
}

std::string digest(const FittedModel& model) {
  Sha256 h;
  h.update(to_string(model.algorithm)).update_u64(model.num_classes).update_u64(model.num_features);
  if (const auto* knn = std::get_if<KnnModel>(&model.state)) {
    h.update(matrix_digest(knn->x)).update_u64(knn->k);
    for (int label : knn->y) h.update_i64(label);
  } else if (const auto* g = std::get_if<GnbModel>(&model.state)) {
    h.update(matrix_digest(g->means)).update(matrix_digest(g->variances));
    for (double p : g->log_priors) h.update_f64(p);
  } else if (const auto* tree = std::get_if<TreeModel>(&model.state)) {
    for (const auto& n : tree->nodes) {
      h.update_i64(n.feature).update_f64(n.threshold).update_i64(n.left).update_i64(n.right);
      for (double f : n.class_freq) h.update_f64(f);
    }
  } else {
    const auto& lr = std::get<LogregModel>(model.state);
    h.update(matrix_digest(lr.weights));
    for (Eigen::Index c = 0; c < lr.bias.size(); ++c) h.update_f64(lr.bias(c));
    h.update_u64(lr.iterations);
  }
  return h.hex_digest();
}

// ---------------------------------------------------------------------------
// Clustering

namespace {

ClusterResult run_kmeans(const KMeansParams& p, std::uint64_t seed, const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (p.k > static_cast<std::size_t>(n)) {
    throw ValidationError("cluster: kmeans k=" + std::to_string(p.k) + " exceeds rows " + std::to_string(n));
  }
  const auto k = static_cast<Eigen::Index>(p.k);
  Rng rng(seed);

  // k-means++ seeding.
  Matrix centroids(k, x.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  centroids.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = true;
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (x.row(i) - centroids.row(0)).squaredNorm();
  for (Eigen::Index c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = d2[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        cumulative += w;
        pick = i;
        if (cumulative > target) break;
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centroids.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - centroids.row(c)).squaredNorm());
    }
  }

  ClusterResult out;
  out.assignments.assign(static_cast<std::size_t>(n), 0);
  const auto assign = [&]() {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double dist = (x.row(i) - centroids.row(c)).squaredNorm();
        if (dist < best) {
          best = dist;
          arg = static_cast<int>(c);
        }
      }
      out.assignments[static_cast<std::size_t>(i)] = arg;
      inertia += best;
    }
    return inertia;
  };

  for (std::size_t it = 0; it < p.max_iters; ++it) {
    out.inertia_history.push_back(assign());
    Matrix next = Matrix::Zero(k, x.cols());
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(out.assignments[static_cast<std::size_t>(i)]) += x.row(i);
      ++sizes[static_cast<std::size_t>(out.assignments[static_cast<std::size_t>(i)])];
    }
    double shift = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] == 0) {
        next.row(c) = centroids.row(c);
      } else {
        next.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      }
      shift = std::max(shift, (next.row(c) - centroids.row(c)).norm());
    }
    centroids = std::move(next);
    out.iterations = it + 1;
    if (shift < p.tol || shift == 0.0) break;
  }
  out.inertia = assign();
  out.inertia_history.push_back(out.inertia);
  out.centroids = centroids;
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (int a : out.assignments) used[static_cast<std::size_t>(a)] = true;
  out.cluster_count = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
  return out;
}

ClusterResult run_dbscan(const DbscanParams& p, const Matrix& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  const double eps2 = p.eps * p.eps;
  std::vector<RowIndices> neighborhood(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm() <= eps2) {
        neighborhood[i].push_back(j);
      }
    }
  }
  const auto is_core = [&](std::size_t i) { return neighborhood[i].size() >= p.min_pts; };

  ClusterResult out;
  out.assignments.assign(n, -1);
  std::vector<bool> visited(n, false);
  int next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (visited[i] || !is_core(i)) continue;
    const int id = next_id++;
    std::deque<std::size_t> queue{i};
    visited[i] = true;
    out.assignments[i] = id;
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      if (!is_core(cur)) continue;
      for (auto nb : neighborhood[cur]) {
        if (out.assignments[nb] == -1) out.assignments[nb] = id;
        if (!visited[nb]) {
          visited[nb] = true;
          queue.push_back(nb);
        }
      }
    }
  }
  out.cluster_count = static_cast<std::size_t>(next_id);
  out.iterations = 1;
  return out;
}

}  // namespace

ClusterResult cluster(const ModelSpec& spec, const Matrix& x) {
  spec.check();
  if (x.rows() < 1) throw ValidationError("cluster: need at least one row");
  if (const auto* km = std::get_if<KMeansParams>(&spec.params)) return run_kmeans(*km, spec.seed, x);
  if (const auto* db = std::get_if<DbscanParams>(&spec.params)) return run_dbscan(*db, x);
  throw ValidationError("cluster: '" + to_string(spec.algorithm) + "' is not a clustering algorithm");
}

}  // namespace mlexp
