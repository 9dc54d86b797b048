#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlexp/dataset.hpp"
#include "mlexp/types.hpp"

namespace mlexp {

enum class TransformKind { zscore, minmax, variance_filter, correlation_filter, pca, window, resample };
enum class ResampleMethod { undersample, oversample, smote };

std::string to_string(TransformKind kind);
std::string to_string(ResampleMethod method);

/// One preprocessing step as it appears in an experiment configuration.
/// Only the fields relevant to `kind` are meaningful; the rest keep their
/// defaults and are omitted from the JSON form.
struct TransformSpec {
  TransformKind kind = TransformKind::zscore;
  double threshold = 0.0;                 ///< variance_filter: >= 0; correlation_filter: (0, 1]
  std::optional<std::size_t> components;  ///< pca, exclusive with variance_ratio
  std::optional<double> variance_ratio;   ///< pca, in (0, 1]
  std::size_t width = 1;                  ///< window
  std::size_t stride = 1;                 ///< window
  ResampleMethod method = ResampleMethod::oversample;
  std::size_t k_neighbors = 5;            ///< smote
  std::uint64_t seed = 0;                 ///< resample

  /// Throws ValidationError on out-of-range parameters for this kind.
  void check() const;

  /// Transforms that learn from rows and are applied to a feature matrix.
  bool is_feature_transform() const {
    return kind != TransformKind::window && kind != TransformKind::resample;
  }
};

nlohmann::json to_json(const TransformSpec& spec);
TransformSpec transform_spec_from_json(const nlohmann::json& doc);

struct StandardizeState {
  Vector center;  ///< mean (zscore) or min (minmax)
  Vector scale;   ///< population std (zscore) or max - min (minmax); 0 maps output to 0
};

struct SelectionState {
  std::vector<std::size_t> kept;  ///< ascending
};

struct PcaState {
  Vector mean;
  Matrix components;  ///< d x k, one unit column per component
  std::vector<double> explained_ratio;
  std::vector<double> eigenvalues;  ///< all d, descending
};

/// Learned parameters of one transform. Immutable once returned by a fit
/// function; apply_transform only reads it.
struct FittedTransform {
  TransformKind kind = TransformKind::zscore;
  std::size_t input_dim = 0;
  std::variant<StandardizeState, SelectionState, PcaState> state;
  std::size_t fitted_rows = 0;
  std::string fitted_digest;  ///< digest of the training matrix the parameters came from

  std::size_t output_dim() const;
};

FittedTransform fit_standardize(const Matrix& x, TransformKind mode);
FittedTransform fit_variance_filter(const Matrix& x, double threshold);
FittedTransform fit_correlation_filter(const Matrix& x, double threshold);
FittedTransform fit_pca(const Matrix& x, std::size_t components);
FittedTransform fit_pca_variance(const Matrix& x, double variance_ratio);

/// Dispatches on spec.kind; only for feature transforms.
FittedTransform fit_transform(const TransformSpec& spec, const Matrix& x);

Matrix apply_transform(const FittedTransform& ft, const Matrix& x);

/// Maps PCA scores back to the input space.
Matrix inverse_pca(const FittedTransform& ft, const Matrix& scores);

std::string digest(const FittedTransform& ft);
std::string matrix_digest(const Matrix& x);

/// Sliding windows over each group's rows (file order). A window flattens w
/// consecutive rows into w*d features named `<feature>@<t>`, t = 0 for the
/// oldest row, takes the label of its last row and keeps its source group.
/// Classes that label no window are removed; the rest keep their order.
Dataset make_windows(const Dataset& ds, std::size_t width, std::size_t stride);

struct Resampled {
  Matrix x;
  Labels y;
  /// For each output row: the input row it copies, or the base row of a
  /// synthetic point.
  RowIndices source;
  /// SMOTE neighbour used for each synthetic row; equals `source` otherwise.
  RowIndices partner;
  /// Rows [0, original_count) are originals in input order; later rows were added.
  std::size_t original_count = 0;
};

/// Balances classes on training rows only. undersample: every class down to
/// the minority count, without replacement. oversample: every class up to the
/// majority count with copies drawn with replacement. smote: classes below the
/// majority count get synthetic points x + u (nn - x), nn among the
/// min(k, size - 1) nearest same-class rows.
Resampled resample(const Matrix& x, const Labels& y, std::size_t num_classes, ResampleMethod method,
                   std::uint64_t seed, std::size_t k_neighbors = 5);

Vector smote_interpolate(const Vector& point, const Vector& neighbor, double u);

}  // namespace mlexp
