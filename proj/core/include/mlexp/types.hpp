#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace mlexp {

/// Row-major so that a sample is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Class indices in [0, C).
using Labels = std::vector<int>;
using RowIndices = std::vector<std::size_t>;

/// Copies the given rows of `x`, in the given order.
Matrix select_rows(const Matrix& x, const RowIndices& rows);
Labels select_labels(const Labels& y, const RowIndices& rows);

}  // namespace mlexp
