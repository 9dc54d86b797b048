#include "mlexp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "mlexp/analysis.hpp"
#include "mlexp/digest.hpp"
#include "mlexp/error.hpp"
#include "mlexp/rng.hpp"

namespace mlexp {

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::zscore: return "zscore";
    case TransformKind::minmax: return "minmax";
    case TransformKind::variance_filter: return "variance_filter";
    case TransformKind::correlation_filter: return "correlation_filter";
    case TransformKind::pca: return "pca";
    case TransformKind::window: return "window";
    case TransformKind::resample: return "resample";
  }
  return "?";
}

std::string to_string(ResampleMethod method) {
  switch (method) {
    case ResampleMethod::undersample: return "undersample";
    case ResampleMethod::oversample: return "oversample";
    case ResampleMethod::smote: return "smote";
  }
  return "?";
}

void TransformSpec::check() const {
  const std::string where = "transform '" + to_string(kind) + "': ";
  switch (kind) {
    case TransformKind::zscore:
    case TransformKind::minmax:
      break;
    case TransformKind::variance_filter:
      if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw ValidationError(where + "threshold must be >= 0");
      break;
    case TransformKind::correlation_filter:
      if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError(where + "threshold must be in (0, 1]");
      break;
    case TransformKind::pca:
      if (components.has_value() == variance_ratio.has_value()) {
        throw ValidationError(where + "exactly one of 'components' or 'variance_ratio' is required");
      }
      if (components && *components < 1) throw ValidationError(where + "components must be >= 1");
      if (variance_ratio && !(*variance_ratio > 0.0 && *variance_ratio <= 1.0)) {
        throw ValidationError(where + "variance_ratio must be in (0, 1]");
      }
      break;
    case TransformKind::window:
      if (width < 1 || stride < 1) throw ValidationError(where + "width and stride must be >= 1");
      break;
    case TransformKind::resample:
      if (method == ResampleMethod::smote && k_neighbors < 1) throw ValidationError(where + "k_neighbors must be >= 1");
      break;
  }
}

nlohmann::json to_json(const TransformSpec& spec) {
  nlohmann::json doc{{"kind", to_string(spec.kind)}};
  switch (spec.kind) {
    case TransformKind::variance_filter:
    case TransformKind::correlation_filter:
      doc["threshold"] = spec.threshold;
      break;
    case TransformKind::pca:
      if (spec.components) doc["components"] = *spec.components;
      if (spec.variance_ratio) doc["variance_ratio"] = *spec.variance_ratio;
      break;
    case TransformKind::window:
      doc["width"] = spec.width;
      doc["stride"] = spec.stride;
      break;
    case TransformKind::resample:
      doc["method"] = to_string(spec.method);
      if (spec.method == ResampleMethod::smote) doc["k_neighbors"] = spec.k_neighbors;
      doc["seed"] = spec.seed;
      break;
    default:
      break;
  }
  return doc;
}

namespace {

std::size_t json_size(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ParseError("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double json_double(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ParseError("'" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

TransformSpec transform_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw ParseError("transform: expected an object with a string 'kind'");
  }
  static const std::map<std::string, TransformKind> kinds{
      {"zscore", TransformKind::zscore},   {"minmax", TransformKind::minmax},
      {"variance_filter", TransformKind::variance_filter},
      {"correlation_filter", TransformKind::correlation_filter},
      {"pca", TransformKind::pca},         {"window", TransformKind::window},
      {"resample", TransformKind::resample}};
  const auto kind_name = doc["kind"].get<std::string>();
  const auto it = kinds.find(kind_name);
  if (it == kinds.end()) throw ParseError("transform: unknown kind '" + kind_name + "'");

  TransformSpec spec;
  spec.kind = it->second;
  std::set<std::string> allowed{"kind"};
  switch (spec.kind) {
    case TransformKind::variance_filter:
    case TransformKind::correlation_filter: allowed.insert("threshold"); break;
    case TransformKind::pca: allowed.insert({"components", "variance_ratio"}); break;
    case TransformKind::window: allowed.insert({"width", "stride"}); break;
    case TransformKind::resample: allowed.insert({"method", "k_neighbors", "seed"}); break;
    default: break;
  }
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw ParseError("transform '" + kind_name + "': unknown key '" + key + "'");
    if (key == "threshold") spec.threshold = json_double(value, key);
    if (key == "components") spec.components = json_size(value, key);
    if (key == "variance_ratio") spec.variance_ratio = json_double(value, key);
    if (key == "width") spec.width = json_size(value, key);
    if (key == "stride") spec.stride = json_size(value, key);
    if (key == "k_neighbors") spec.k_neighbors = json_size(value, key);
    if (key == "seed") {
      if (!value.is_number_integer()) throw ParseError("'seed' must be an integer");
      spec.seed = value.get<std::uint64_t>();
    }
    if (key == "method") {
      const auto m = value.is_string() ? value.get<std::string>() : std::string();
      if (m == "undersample") {
        spec.method = ResampleMethod::undersample;
      } else if (m == "oversample") {
        spec.method = ResampleMethod::oversample;
      } else if (m == "smote") {
        spec.method = ResampleMethod::smote;
      } else {
        throw ParseError("transform 'resample': unknown method '" + m + "'");
      }
    }
  }
  if (spec.kind == TransformKind::resample && !doc.contains("method")) {
    throw ParseError("transform 'resample': 'method' is required");
  }
  try {
    spec.check();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Fitting

std::size_t FittedTransform::output_dim() const {
  if (const auto* sel = std::get_if<SelectionState>(&state)) return sel->kept.size();
  if (const auto* pca = std::get_if<PcaState>(&state)) return static_cast<std::size_t>(pca->components.cols());
  return input_dim;
}

std::string matrix_digest(const Matrix& x) {
  Sha256 h;
  h.update_u64(static_cast<std::uint64_t>(x.rows())).update_u64(static_cast<std::uint64_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.size(); ++i) h.update_f64(x.data()[i]);
  return h.hex_digest();
}

namespace {

FittedTransform base_fit(TransformKind kind, const Matrix& x) {
  FittedTransform ft;
  ft.kind = kind;
  ft.input_dim = static_cast<std::size_t>(x.cols());
  ft.fitted_rows = static_cast<std::size_t>(x.rows());
  ft.fitted_digest = matrix_digest(x);
  return ft;
}

Vector population_variance(const Matrix& x) {
  const Vector mean = x.colwise().mean();
  Vector var(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    var(j) = (x.col(j).array() - mean(j)).square().sum() / static_cast<double>(x.rows());
  }
  return var;
}

void require_rows(const Matrix& x, Eigen::Index min_rows, const char* what) {
  if (x.rows() < min_rows) {
    throw ValidationError(std::string(what) + ": need at least " + std::to_string(min_rows) + " rows");
  }
  if (x.cols() < 1) throw ValidationError(std::string(what) + ": no features");
}

}  // namespace

FittedTransform fit_standardize(const Matrix& x, TransformKind mode) {
  if (mode != TransformKind::zscore && mode != TransformKind::minmax) {
    throw ValidationError("fit_standardize: mode must be zscore or minmax");
  }
  require_rows(x, 1, "fit_standardize");
  FittedTransform ft = base_fit(mode, x);
  StandardizeState st;
  if (mode == TransformKind::zscore) {
    st.center = x.colwise().mean();
    st.scale = population_variance(x).array().sqrt();
  } else {
    st.center = x.colwise().minCoeff();
    st.scale = x.colwise().maxCoeff().transpose() - st.center;
  }
  ft.state = std::move(st);
  return ft;
}

FittedTransform fit_variance_filter(const Matrix& x, double threshold) {
  require_rows(x, 2, "fit_variance_filter");
  if (!(threshold >= 0.0)) throw ValidationError("fit_variance_filter: threshold must be >= 0");
  FittedTransform ft = base_fit(TransformKind::variance_filter, x);
  const Vector var = population_variance(x);
  SelectionState sel;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (var(j) > threshold) sel.kept.push_back(static_cast<std::size_t>(j));
  }
  if (sel.kept.empty()) throw ValidationError("variance_filter: empty feature set");
  ft.state = std::move(sel);
  return ft;
}

FittedTransform fit_correlation_filter(const Matrix& x, double threshold) {
  require_rows(x, 2, "fit_correlation_filter");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("fit_correlation_filter: threshold must be in (0, 1]");
  FittedTransform ft = base_fit(TransformKind::correlation_filter, x);
  const Matrix r = correlation_matrix(x, CorrelationMethod::pearson).cwiseAbs();
  std::vector<std::size_t> remaining(static_cast<std::size_t>(x.cols()));
  std::iota(remaining.begin(), remaining.end(), 0);

  const auto mean_abs = [&](std::size_t f) {
    double s = 0.0;
    for (auto g : remaining) {
      if (g != f) s += r(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(g));
    }
    return s / static_cast<double>(remaining.size() - 1);
  };

  while (remaining.size() > 1) {
    // Most correlated pair above the threshold; first in (i, j) order on ties.
    double best = threshold;
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    for (std::size_t a = 0; a < remaining.size(); ++a) {
      for (std::size_t b = a + 1; b < remaining.size(); ++b) {
        const double v = r(static_cast<Eigen::Index>(remaining[a]), static_cast<Eigen::Index>(remaining[b]));
        if (v > best) {
          best = v;
          pair = {remaining[a], remaining[b]};
        }
      }
    }
    if (!pair) break;
    const double ma = mean_abs(pair->first);
    const double mb = mean_abs(pair->second);
    // pair->second has the higher index, so it loses ties.
    const std::size_t drop = ma > mb ? pair->first : pair->second;
    remaining.erase(std::find(remaining.begin(), remaining.end(), drop));
  }
  if (remaining.empty()) throw ValidationError("correlation_filter: empty feature set");
  ft.state = SelectionState{remaining};
  return ft;
}

namespace {

FittedTransform fit_pca_impl(const Matrix& x, std::optional<std::size_t> k, std::optional<double> ratio) {
  require_rows(x, 2, "fit_pca");
  const auto d = static_cast<std::size_t>(x.cols());
  if (k && (*k < 1 || *k > d)) {
    throw ValidationError("fit_pca: components must be in [1, " + std::to_string(d) + "], got " + std::to_string(*k));
  }
  FittedTransform ft = base_fit(TransformKind::pca, x);
  PcaState st;
  st.mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - st.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
  if (!cov.allFinite()) throw ExecutionError("fit_pca: non-finite covariance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw ExecutionError("fit_pca: eigendecomposition failed");
  // Eigen returns ascending order.
  std::vector<double> values(d);
  Eigen::MatrixXd vectors(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto src = static_cast<Eigen::Index>(d - 1 - i);
    values[i] = eig.eigenvalues()(src);
    vectors.col(static_cast<Eigen::Index>(i)) = eig.eigenvectors().col(src);
  }
  const double largest = std::max(values.front(), 0.0);
  std::size_t rank = 0;
  for (auto& v : values) {
    if (v <= 1e-12 * largest || v < 0.0) v = 0.0;
    if (v > 0.0) ++rank;
  }
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  std::vector<double> ratios(d, 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < d; ++i) ratios[i] = values[i] / total;
  }

  std::size_t keep = k.value_or(0);
  if (ratio) {
    keep = std::max<std::size_t>(rank, 1);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < rank; ++i) {
      cumulative += ratios[i];
      if (cumulative >= *ratio - 1e-12) {
        keep = i + 1;
        break;
      }
    }
  }

  st.components.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(keep));
  for (std::size_t c = 0; c < keep; ++c) {
    Eigen::VectorXd v = vectors.col(static_cast<Eigen::Index>(c));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    st.components.col(static_cast<Eigen::Index>(c)) = v;
    st.explained_ratio.push_back(ratios[c]);
  }
  st.eigenvalues = values;
  ft.state = std::move(st);
  return ft;
}

}  // namespace

FittedTransform fit_pca(const Matrix& x, std::size_t components) { return fit_pca_impl(x, components, std::nullopt); }

FittedTransform fit_pca_variance(const Matrix& x, double variance_ratio) {
  if (!(variance_ratio > 0.0 && variance_ratio <= 1.0)) throw ValidationError("fit_pca: variance_ratio must be in (0, 1]");
  return fit_pca_impl(x, std::nullopt, variance_ratio);
}

FittedTransform fit_transform(const TransformSpec& spec, const Matrix& x) {
  spec.check();
  switch (spec.kind) {
    case TransformKind::zscore:
    case TransformKind::minmax: return fit_standardize(x, spec.kind);
    case TransformKind::variance_filter: return fit_variance_filter(x, spec.threshold);
    case TransformKind::correlation_filter: return fit_correlation_filter(x, spec.threshold);
    case TransformKind::pca:
      return spec.components ? fit_pca(x, *spec.components) : fit_pca_variance(x, *spec.variance_ratio);
    default: throw ValidationError("fit_transform: '" + to_string(spec.kind) + "' is not a feature transform");
  }
}

Matrix apply_transform(const FittedTransform& ft, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != ft.input_dim) {
    throw ValidationError("apply_transform(" + to_string(ft.kind) + "): expected " + std::to_string(ft.input_dim) +
                          " features, got " + std::to_string(x.cols()));
  }
  if (const auto* st = std::get_if<StandardizeState>(&ft.state)) {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (st->scale(j) == 0.0) {
        out.col(j).setZero();
      } else {
        out.col(j) = (x.col(j).array() - st->center(j)) / st->scale(j);
      }
    }
    return out;
  }
  if (const auto* sel = std::get_if<SelectionState>(&ft.state)) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(sel->kept.size()));
    for (std::size_t c = 0; c < sel->kept.size(); ++c) {
      out.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(sel->kept[c]));
    }
    return out;
  }
  const auto& pca = std::get<PcaState>(ft.state);
  return (x.rowwise() - pca.mean.transpose()) * pca.components;
}

Matrix inverse_pca(const FittedTransform& ft, const Matrix& scores) {
  const auto* pca = std::get_if<PcaState>(&ft.state);
  if (pca == nullptr) throw ValidationError("inverse_pca: not a PCA transform");
  if (scores.cols() != pca->components.cols()) throw ValidationError("inverse_pca: dimension mismatch");
  Matrix out = scores * pca->components.transpose();
  out.rowwise() += pca->mean.transpose();
  return out;
}

std::string digest(const FittedTransform& ft) {
  Sha256 h;
  h.update(to_string(ft.kind)).update_u64(ft.input_dim).update_u64(ft.fitted_rows).update(ft.fitted_digest);
  const auto put_vec = [&](const Vector& v) {
    h.update_u64(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) h.update_f64(v(i));
  };
  if (const auto* st = std::get_if<StandardizeState>(&ft.state)) {
    put_vec(st->center);
    put_vec(st->scale);
  } else if (const auto* sel = std::get_if<SelectionState>(&ft.state)) {
    h.update_u64(sel->kept.size());
    for (auto k : sel->kept) h.update_u64(k);
  } else {
    const auto& pca = std::get<PcaState>(ft.state);
    put_vec(pca.mean);
    h.update(matrix_digest(pca.components));
    for (double r : pca.explained_ratio) h.update_f64(r);
    for (double v : pca.eigenvalues) h.update_f64(v);
  }
  return h.hex_digest();
}

// ---------------------------------------------------------------------------
// Windowing

Dataset make_windows(const Dataset& ds, std::size_t width, std::size_t stride) {
  if (width < 1 || stride < 1) throw ValidationError("make_windows: width and stride must be >= 1");
  if (!ds.group_ids) throw ValidationError("make_windows: dataset has no group column");
  const auto& gids = *ds.group_ids;

  std::vector<std::int64_t> group_order;
  std::map<std::int64_t, RowIndices> rows_of;
  for (std::size_t i = 0; i < gids.size(); ++i) {
    auto [it, inserted] = rows_of.try_emplace(gids[i]);
    if (inserted) group_order.push_back(gids[i]);
    it->second.push_back(i);
  }
  for (auto g : group_order) {
    if (rows_of[g].size() < width) {
      throw ValidationError("make_windows: group " + std::to_string(g) + " has " + std::to_string(rows_of[g].size()) +
                            " rows, shorter than window width " + std::to_string(width));
    }
  }

  const std::size_t d = ds.cols();
  std::vector<RowIndices> windows;
  std::vector<std::int64_t> window_groups;
  for (auto g : group_order) {
    const auto& rows = rows_of[g];
    for (std::size_t start = 0; start + width <= rows.size(); start += stride) {
      windows.emplace_back(rows.begin() + static_cast<std::ptrdiff_t>(start),
                           rows.begin() + static_cast<std::ptrdiff_t>(start + width));
      window_groups.push_back(g);
    }
  }

  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(width * d));
  for (std::size_t w = 0; w < windows.size(); ++w) {
    for (std::size_t t = 0; t < width; ++t) {
      out.features.block(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(t * d), 1, static_cast<Eigen::Index>(d)) =
          ds.features.row(static_cast<Eigen::Index>(windows[w][t]));
    }
  }
  for (std::size_t t = 0; t < width; ++t) {
    for (const auto& meta : ds.feature_meta) {
      out.feature_meta.push_back({meta.name + "@" + std::to_string(t), meta.kind, meta.levels});
    }
  }
  out.group_ids = window_groups;
  if (ds.labels) {
    Labels raw;
    for (const auto& w : windows) raw.push_back((*ds.labels)[w.back()]);
    std::vector<int> remap(ds.num_classes(), -1);
    for (int y : raw) remap[static_cast<std::size_t>(y)] = 0;
    int next = 0;
    for (std::size_t c = 0; c < remap.size(); ++c) {
      if (remap[c] == 0) {
        remap[c] = next++;
        out.class_names.push_back(ds.class_names[c]);
      }
    }
    for (auto& y : raw) y = remap[static_cast<std::size_t>(y)];
    out.labels = std::move(raw);
  }
  out.origin = ds.origin + "|window(" + std::to_string(width) + "," + std::to_string(stride) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// Resampling

Vector smote_interpolate(const Vector& point, const Vector& neighbor, double u) { return point + u * (neighbor - point); }

Resampled resample(const Matrix& x, const Labels& y, std::size_t num_classes, ResampleMethod method,
                   std::uint64_t seed, std::size_t k_neighbors) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ValidationError("resample: row/label count mismatch");
  if (num_classes < 2) throw ValidationError("resample: need at least two classes");
  std::vector<RowIndices> by_class(num_classes);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= num_classes) throw ValidationError("resample: label out of range");
    by_class[static_cast<std::size_t>(y[i])].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (by_class[c].empty()) throw ValidationError("resample: class " + std::to_string(c) + " is empty");
  }
  std::size_t minority = by_class[0].size(), majority = by_class[0].size();
  for (const auto& rows : by_class) {
    minority = std::min(minority, rows.size());
    majority = std::max(majority, rows.size());
  }

  Rng rng(seed);
  Resampled out;
  RowIndices chosen;

  if (method == ResampleMethod::undersample) {
    for (auto rows : by_class) {
      rng.shuffle(rows);
      chosen.insert(chosen.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(minority));
    }
    std::sort(chosen.begin(), chosen.end());
    out.x = select_rows(x, chosen);
    out.y = select_labels(y, chosen);
    out.source = chosen;
    out.partner = chosen;
    out.original_count = chosen.size();
    return out;
  }

  std::vector<Vector> synthetic;
  RowIndices added_source, added_partner;
  Labels added_labels;
  if (method == ResampleMethod::oversample) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      const auto& rows = by_class[c];
      for (std::size_t t = rows.size(); t < majority; ++t) {
        const auto r = rows[static_cast<std::size_t>(rng.below(rows.size()))];
        added_source.push_back(r);
        added_partner.push_back(r);
        added_labels.push_back(static_cast<int>(c));
      }
    }
  } else {
    for (std::size_t c = 0; c < num_classes; ++c) {
      const auto& rows = by_class[c];
      if (rows.size() >= majority) continue;
      if (rows.size() < 2) {
        throw ValidationError("resample: smote needs at least 2 rows in class " + std::to_string(c) + ", found 1");
      }
      const std::size_t kk = std::min(k_neighbors, rows.size() - 1);
      // Exact neighbour lists; distance ties go to the lower row index.
      std::vector<RowIndices> neighbors(rows.size());
      for (std::size_t a = 0; a < rows.size(); ++a) {
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t b = 0; b < rows.size(); ++b) {
          if (a == b) continue;
          dist.emplace_back((x.row(static_cast<Eigen::Index>(rows[a])) - x.row(static_cast<Eigen::Index>(rows[b]))).squaredNorm(),
                            rows[b]);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
        for (std::size_t t = 0; t < kk; ++t) neighbors[a].push_back(dist[t].second);
      }
      for (std::size_t t = rows.size(); t < majority; ++t) {
        const auto a = static_cast<std::size_t>(rng.below(rows.size()));
        const auto nn = neighbors[a][static_cast<std::size_t>(rng.below(kk))];
        const double u = rng.uniform();
        synthetic.push_back(smote_interpolate(x.row(static_cast<Eigen::Index>(rows[a])).transpose(),
                                              x.row(static_cast<Eigen::Index>(nn)).transpose(), u));
        added_source.push_back(rows[a]);
        added_partner.push_back(nn);
        added_labels.push_back(static_cast<int>(c));
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto extra = static_cast<Eigen::Index>(added_source.size());
  out.x.resize(n + extra, x.cols());
  out.x.topRows(n) = x;
  for (Eigen::Index i = 0; i < extra; ++i) {
    if (method == ResampleMethod::smote) {
      out.x.row(n + i) = synthetic[static_cast<std::size_t>(i)].transpose();
    } else {
      out.x.row(n + i) = x.row(static_cast<Eigen::Index>(added_source[static_cast<std::size_t>(i)]));
    }
  }
  out.y = y;
  out.y.insert(out.y.end(), added_labels.begin(), added_labels.end());
  out.source.resize(static_cast<std::size_t>(n));
  std::iota(out.source.begin(), out.source.end(), 0);
  out.partner = out.source;
  out.source.insert(out.source.end(), added_source.begin(), added_source.end());
  out.partner.insert(out.partner.end(), added_partner.begin(), added_partner.end());
  out.original_count = static_cast<std::size_t>(n);
  return out;
}

}  // namespace mlexp
