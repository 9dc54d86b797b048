#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mlexp/dataset.hpp"

namespace mlexp {

struct FeatureStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  ///< population (ddof = 0)
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t distinct_count = 0;
};

/// Quantile by linear interpolation between closest ranks: position
/// p * (n - 1) in the sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

FeatureStats describe_values(std::string name, std::span<const double> values);
std::vector<FeatureStats> describe(const Dataset& ds);

enum class CorrelationMethod { pearson, spearman };

/// Pearson correlation of two equal-length samples; 0 when either has zero
/// variance. Clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Symmetric, unit diagonal. Zero-variance features correlate 0 with all others.
Matrix correlation_matrix(const Matrix& x, CorrelationMethod method);
inline Matrix correlation_matrix(const Dataset& ds, CorrelationMethod method) {
  return correlation_matrix(ds.features, method);
}

struct ClassDistribution {
  std::vector<std::string> class_names;
  std::vector<std::size_t> counts;
  std::vector<double> fractions;
};

ClassDistribution class_distribution(const Dataset& ds);

enum class PlotKind { boxplot, scatter };

struct BoxSummary {
  std::string feature;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  double whisker_low = 0.0, whisker_high = 0.0;
  std::vector<double> outliers;
};

/// Tukey box: whiskers reach the most extreme values inside q1 - 1.5 IQR and
/// q3 + 1.5 IQR; anything beyond is an outlier.
BoxSummary box_summary(std::string feature, std::span<const double> values);

struct PlotArtifacts {
  std::filesystem::path data_csv;
  std::filesystem::path svg;
};

/// Writes the plot data as CSV (authoritative) plus a minimal SVG rendering
/// into `out_dir`. Boxplot files are `boxplot.csv/.svg`; scatter files are
/// `scatter_<x>_<y>.csv/.svg`.
PlotArtifacts export_plot(const Dataset& ds, PlotKind kind, const std::vector<std::string>& selection,
                          const std::filesystem::path& out_dir);

/// Reads a boxplot CSV written by export_plot.
std::vector<BoxSummary> read_boxplot_csv(const std::filesystem::path& path);

}  // namespace mlexp
