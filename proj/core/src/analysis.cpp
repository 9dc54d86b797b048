#include "mlexp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "mlexp/error.hpp"
#include "mlexp/format.hpp"
#include "mlexp/svg.hpp"

namespace mlexp {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FeatureStats describe_values(std::string name, std::span<const double> values) {
  if (values.empty()) throw ValidationError("describe: feature '" + name + "' has no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  FeatureStats s;
  s.name = std::move(name);
  const auto n = static_cast<double>(sorted.size());
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.distinct_count =
      static_cast<std::size_t>(std::distance(sorted.begin(), std::unique(sorted.begin(), sorted.end())));
  return s;
}

namespace {

std::vector<double> column(const Matrix& x, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = x(i, j);
  return out;
}

}  // namespace

std::vector<FeatureStats> describe(const Dataset& ds) {
  std::vector<FeatureStats> out;
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    const auto values = column(ds.features, static_cast<Eigen::Index>(j));
    out.push_back(describe_values(ds.feature_meta[j].name, values));
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least two observations");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

Matrix correlation_matrix(const Matrix& x, CorrelationMethod method) {
  if (x.rows() < 2) throw ValidationError("correlation_matrix: need at least two rows");
  const Eigen::Index d = x.cols();
  std::vector<std::vector<double>> cols;
  for (Eigen::Index j = 0; j < d; ++j) {
    auto c = column(x, j);
    if (method == CorrelationMethod::spearman) c = average_ranks(c);
    cols.push_back(std::move(c));
  }
  Matrix r = Matrix::Identity(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      const double v = pearson(cols[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
      r(a, b) = v;
      r(b, a) = v;
    }
  }
  return r;
}

ClassDistribution class_distribution(const Dataset& ds) {
  if (!ds.labels) throw ValidationError("class_distribution: dataset has no labels");
  ClassDistribution out;
  out.class_names = ds.class_names;
  out.counts.assign(ds.num_classes(), 0);
  for (int y : *ds.labels) ++out.counts[static_cast<std::size_t>(y)];
  for (auto c : out.counts) out.fractions.push_back(static_cast<double>(c) / static_cast<double>(ds.rows()));
  return out;
}

BoxSummary box_summary(std::string feature, std::span<const double> values) {
  const FeatureStats s = describe_values(feature, values);
  BoxSummary b;
  b.feature = std::move(feature);
  b.min = s.min;
  b.q1 = s.q1;
  b.median = s.median;
  b.q3 = s.q3;
  b.max = s.max;
  const double iqr = s.q3 - s.q1;
  const double low_fence = s.q1 - 1.5 * iqr;
  const double high_fence = s.q3 + 1.5 * iqr;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  b.whisker_low = s.q1;
  b.whisker_high = s.q3;
  bool low_set = false;
  for (double v : sorted) {
    if (v < low_fence || v > high_fence) {
      b.outliers.push_back(v);
      continue;
    }
    if (!low_set) {
      b.whisker_low = v;
      low_set = true;
    }
    b.whisker_high = v;
  }
  return b;
}

namespace {

std::size_t feature_index(const Dataset& ds, const std::string& name) {
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    if (ds.feature_meta[j].name == name) return j;
  }
  throw ValidationError("unknown feature '" + name + "'");
}

std::string file_safe(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

void write_boxplot_svg(const std::vector<BoxSummary>& boxes, const std::filesystem::path& path) {
  double lo = boxes.front().min, hi = boxes.front().max;
  for (const auto& b : boxes) {
    lo = std::min(lo, b.min);
    hi = std::max(hi, b.max);
  }
  const double pad = (hi - lo) * 0.05;
  svg::Canvas canvas(0.0, static_cast<double>(boxes.size()), lo - pad, hi + pad);
  canvas.title("Boxplot");
  canvas.axes("feature", "value");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double c = static_cast<double>(i) + 0.5;
    canvas.rect(c - 0.25, b.q1, c + 0.25, b.q3, "black");
    canvas.line(c - 0.25, b.median, c + 0.25, b.median, "#d62728", 2.0);
    canvas.line(c, b.q3, c, b.whisker_high, "black");
    canvas.line(c, b.q1, c, b.whisker_low, "black");
    canvas.line(c - 0.1, b.whisker_high, c + 0.1, b.whisker_high, "black");
    canvas.line(c - 0.1, b.whisker_low, c + 0.1, b.whisker_low, "black");
    for (double o : b.outliers) canvas.point(c, o, "#555555", 2.5);
    canvas.text(c, lo - pad * 0.5, b.feature, 10);
  }
  canvas.save(path.string());
}

}  // namespace

PlotArtifacts export_plot(const Dataset& ds, PlotKind kind, const std::vector<std::string>& selection,
                          const std::filesystem::path& out_dir) {
  if (selection.empty()) throw ValidationError("export_plot: empty feature selection");
  std::vector<std::size_t> idx;
  for (const auto& name : selection) idx.push_back(feature_index(ds, name));
  std::filesystem::create_directories(out_dir);

  PlotArtifacts out;
  if (kind == PlotKind::boxplot) {
    std::vector<BoxSummary> boxes;
    for (auto j : idx) boxes.push_back(box_summary(ds.feature_meta[j].name, column(ds.features, static_cast<Eigen::Index>(j))));
    out.data_csv = out_dir / "boxplot.csv";
    out.svg = out_dir / "boxplot.svg";
    std::ofstream csv(out.data_csv, std::ios::binary);
    if (!csv) throw ExecutionError("cannot write '" + out.data_csv.string() + "'");
    csv << "feature,min,q1,median,q3,max,whisker_low,whisker_high,outliers\n";
    for (const auto& b : boxes) {
      csv << b.feature << ',' << format_number(b.min) << ',' << format_number(b.q1) << ',' << format_number(b.median)
          << ',' << format_number(b.q3) << ',' << format_number(b.max) << ',' << format_number(b.whisker_low) << ','
          << format_number(b.whisker_high) << ',';
      for (std::size_t i = 0; i < b.outliers.size(); ++i) csv << (i ? ";" : "") << format_number(b.outliers[i]);
      csv << '\n';
    }
    write_boxplot_svg(boxes, out.svg);
    return out;
  }

  if (idx.size() != 2) throw ValidationError("export_plot: scatter needs exactly 2 features");
  const auto& xname = ds.feature_meta[idx[0]].name;
  const auto& yname = ds.feature_meta[idx[1]].name;
  const std::string stem = "scatter_" + file_safe(xname) + "_" + file_safe(yname);
  out.data_csv = out_dir / (stem + ".csv");
  out.svg = out_dir / (stem + ".svg");
  std::ofstream csv(out.data_csv, std::ios::binary);
  if (!csv) throw ExecutionError("cannot write '" + out.data_csv.string() + "'");
  csv << "x,y,label\n";
  const auto xs = column(ds.features, static_cast<Eigen::Index>(idx[0]));
  const auto ys = column(ds.features, static_cast<Eigen::Index>(idx[1]));
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    csv << format_number(xs[i]) << ',' << format_number(ys[i]) << ',';
    if (ds.labels) csv << ds.class_names[static_cast<std::size_t>((*ds.labels)[i])];
    csv << '\n';
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  svg::Canvas canvas(*xmin, *xmax, *ymin, *ymax);
  canvas.title(xname + " vs " + yname);
  canvas.axes(xname, yname);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const std::size_t c = ds.labels ? static_cast<std::size_t>((*ds.labels)[i]) : 0;
    canvas.point(xs[i], ys[i], svg::palette(c));
  }
  canvas.save(out.svg.string());
  return out;
}

std::vector<BoxSummary> read_boxplot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<BoxSummary> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 9) throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected 9 fields");
    const auto num = [&](std::size_t i) {
      const auto v = parse_number(fields[i]);
      if (!v) throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": bad number");
      return *v;
    };
    BoxSummary b;
    b.feature = std::string(fields[0]);
    b.min = num(1);
    b.q1 = num(2);
    b.median = num(3);
    b.q3 = num(4);
    b.max = num(5);
    b.whisker_low = num(6);
    b.whisker_high = num(7);
    if (!trim(fields[8]).empty()) {
      for (auto part : split(fields[8], ';')) {
        const auto v = parse_number(part);
        if (!v) throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": bad outlier");
        b.outliers.push_back(*v);
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace mlexp
