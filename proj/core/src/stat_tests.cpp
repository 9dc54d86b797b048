#include "mlexp/stat_tests.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include "mlexp/distributions.hpp"
#include "mlexp/error.hpp"

namespace mlexp {

namespace {

double poly(const double* c, int n, double x) {
  double r = c[n - 1];
  for (int i = n - 2; i >= 0; --i) r = r * x + c[i];
  return r;
}

/// Average ranks (1-based) ascending; equal values share their mean rank.
std::vector<double> average_ranks_of(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

TestResult shapiro_wilk(std::vector<double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw ValidationError("shapiro_wilk: need at least 3 values");
  if (n > 5000) throw ValidationError("shapiro_wilk: at most 5000 values");
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) throw ValidationError("shapiro_wilk: degenerate sample");

  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
  static constexpr double g[] = {-2.273, 0.459};

  const std::size_t half = n / 2;
  const auto an = static_cast<double>(n);
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = dist::normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, 6, rsn) - m[0] / ssumm2;
    std::size_t first;
    double fac;
    if (n > 5) {
      first = 2;
      const double a2 = -m[1] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      first = 1;
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / an;
  double ssq = 0.0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  double num = 0.0;
  for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  double w = std::min(1.0, num * num / ssq);

  TestResult result{"shapiro_wilk", w, 1.0, ""};
  if (n == 3) {
    w = std::max(w, 0.75);
    result.statistic = w;
    result.p = clamp_p(6.0 / M_PI * (std::asin(std::sqrt(w)) - M_PI / 3.0));
    return result;
  }
  const double w1 = std::log1p(-w);
  double mu, sigma, y;
  if (n <= 11) {
    const double gamma = poly(g, 2, an);
    if (w1 >= gamma) {
      result.p = 0.0;
      return result;
    }
    y = -std::log(gamma - w1);
    mu = poly(c3, 4, an);
    sigma = std::exp(poly(c4, 4, an));
  } else {
    const double ln = std::log(an);
    y = w1;
    mu = poly(c5, 4, ln);
    sigma = std::exp(poly(c6, 3, ln));
  }
  result.p = clamp_p(dist::normal_sf((y - mu) / sigma));
  return result;
}

TestResult levene(const std::vector<std::vector<double>>& samples) {
  const std::size_t k = samples.size();
  if (k < 2) throw ValidationError("levene: need at least two samples");
  std::vector<std::vector<double>> z(k);
  std::vector<double> zbar(k);
  double total = 0.0;
  std::size_t n_total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (samples[i].size() < 2) throw ValidationError("levene: each sample needs at least 2 values");
    const double med = median_of(samples[i]);
    for (double v : samples[i]) z[i].push_back(std::fabs(v - med));
    zbar[i] = std::accumulate(z[i].begin(), z[i].end(), 0.0) / static_cast<double>(z[i].size());
    total += std::accumulate(z[i].begin(), z[i].end(), 0.0);
    n_total += z[i].size();
  }
  const double grand = total / static_cast<double>(n_total);
  double between = 0.0, within = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    between += static_cast<double>(z[i].size()) * (zbar[i] - grand) * (zbar[i] - grand);
    for (double v : z[i]) within += (v - zbar[i]) * (v - zbar[i]);
  }
  const double df1 = static_cast<double>(k - 1), df2 = static_cast<double>(n_total - k);
  TestResult result{"levene", 0.0, 1.0, ""};
  if (within == 0.0) {
    if (between == 0.0) {
      result.note = "all deviations zero";
    } else {
      result.statistic = DBL_MAX;
      result.p = 0.0;
      result.note = "zero spread within samples";
    }
    return result;
  }
  result.statistic = (df2 / df1) * between / within;
  result.p = clamp_p(dist::f_sf(result.statistic, df1, df2));
  return result;
}

TestResult paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("paired_t: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("paired_t: need at least 2 pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  TestResult result{"paired_t", 0.0, 1.0, ""};
  if (ss == 0.0) {
    if (mean == 0.0) {
      result.note = "samples identical";
      return result;
    }
    throw ValidationError("paired_t: zero-variance differences (identical except constant shift)");
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  result.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p = clamp_p(dist::t_two_sided(result.statistic, static_cast<double>(n - 1)));
  return result;
}

TestResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b, WilcoxonMethod method) {
  if (a.size() != b.size()) throw ValidationError("wilcoxon: length mismatch");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  const std::size_t m = d.size();
  if (m == 0) throw ValidationError("wilcoxon: no evidence (all differences zero)");
  std::vector<double> absd(m);
  for (std::size_t i = 0; i < m; ++i) absd[i] = std::fabs(d[i]);
  const std::vector<double> ranks = average_ranks_of(absd);
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < m; ++i) (d[i] > 0 ? w_plus : w_minus) += ranks[i];
  const double w = std::min(w_plus, w_minus);

  TestResult result{"wilcoxon", w, 1.0, ""};
  const bool exact = method == WilcoxonMethod::exact || (method == WilcoxonMethod::automatic && m <= 25);
  if (exact) {
    if (m > 52) throw ValidationError("wilcoxon: exact method supports at most 52 nonzero differences");
    // Doubled ranks are integers even with ties.
    std::vector<std::size_t> r2(m);
    std::size_t total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      r2[i] = static_cast<std::size_t>(std::lround(ranks[i] * 2.0));
      total += r2[i];
    }
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    std::size_t reach = 0;
    for (auto r : r2) {
      reach += r;
      for (std::size_t s = reach; s >= r; --s) {
        count[s] += count[s - r];
        if (s == r) break;
      }
    }
    const auto w2 = static_cast<std::size_t>(std::lround(w * 2.0));
    double tail = 0.0;
    for (std::size_t s = 0; s <= w2; ++s) tail += count[s];
    result.p = std::min(1.0, std::ldexp(2.0 * tail, -static_cast<int>(m)));
    result.note = "exact";
    return result;
  }
  const auto mm = static_cast<double>(m);
  const double mean = mm * (mm + 1.0) / 4.0;
  double var = mm * (mm + 1.0) * (2.0 * mm + 1.0) / 24.0;
  std::vector<double> sorted = absd;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j < m && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  const double z = std::max(0.0, std::fabs(w - mean) - 0.5) / std::sqrt(var);
  result.p = clamp_p(2.0 * dist::normal_sf(z));
  result.note = "normal approximation";
  return result;
}

std::vector<std::vector<double>> rank_rows(const std::vector<std::vector<double>>& matrix, Direction direction) {
  std::vector<std::vector<double>> out;
  for (const auto& row : matrix) {
    std::vector<double> keyed = row;
    if (direction == Direction::maximize) {
      for (auto& v : keyed) v = -v;
    }
    out.push_back(average_ranks_of(keyed));
  }
  return out;
}

namespace {

std::vector<double> mean_ranks(const std::vector<std::vector<double>>& matrix, Direction direction) {
  if (matrix.empty()) throw ValidationError("ranking: empty matrix");
  const std::size_t k = matrix.front().size();
  for (const auto& row : matrix) {
    if (row.size() != k) throw ValidationError("ranking: ragged matrix");
  }
  const auto ranks = rank_rows(matrix, direction);
  std::vector<double> mean(k, 0.0);
  for (const auto& row : ranks) {
    for (std::size_t j = 0; j < k; ++j) mean[j] += row[j];
  }
  for (auto& v : mean) v /= static_cast<double>(matrix.size());
  return mean;
}

}  // namespace

FriedmanResult friedman(const std::vector<std::vector<double>>& matrix, Direction direction) {
  if (matrix.size() < 2) throw ValidationError("friedman: need at least 2 rows");
  const std::size_t k = matrix.front().size();
  if (k < 3) throw ValidationError("friedman: need at least 3 models (use the pairwise path)");
  FriedmanResult r;
  r.mean_ranks = mean_ranks(matrix, direction);
  const auto n = static_cast<double>(matrix.size());
  const auto kk = static_cast<double>(k);
  double ss = 0.0;
  for (double rank : r.mean_ranks) ss += (rank - (kk + 1.0) / 2.0) * (rank - (kk + 1.0) / 2.0);
  r.chi2 = 12.0 * n / (kk * (kk + 1.0)) * ss;
  r.chi2_p = clamp_p(dist::chi2_sf(r.chi2, kk - 1.0));
  const double denom = n * (kk - 1.0) - r.chi2;
  if (denom <= 0.0) {
    r.f_id = DBL_MAX;
    r.p = 0.0;
    r.note = "rankings identical in every row; Iman-Davenport F unbounded, p taken as 0";
    return r;
  }
  r.f_id = (n - 1.0) * r.chi2 / denom;
  r.p = clamp_p(dist::f_sf(r.f_id, kk - 1.0, (kk - 1.0) * (n - 1.0)));
  return r;
}

double nemenyi_q(std::size_t k, double alpha) {
  // q_alpha = studentized range quantile (infinite df) / sqrt(2). k <= 10
  // from Demsar (2006), beyond computed from the studentized range.
  static constexpr double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219,
                                   3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};
  static constexpr double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
                                   3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319};
  if (k < 2 || k > 20) throw ValidationError("nemenyi: k must lie in [2, 20], got " + std::to_string(k));
  if (std::fabs(alpha - 0.05) < 1e-12) return q05[k - 2];
  if (std::fabs(alpha - 0.10) < 1e-12) return q10[k - 2];
  throw ValidationError("nemenyi: alpha must be 0.05 or 0.10");
}

NemenyiResult nemenyi(const std::vector<std::vector<double>>& matrix, double alpha, Direction direction) {
  NemenyiResult r;
  r.mean_ranks = mean_ranks(matrix, direction);
  const std::size_t k = r.mean_ranks.size();
  r.q = nemenyi_q(k, alpha);
  const auto kk = static_cast<double>(k);
  r.cd = r.q * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(matrix.size())));
  r.reject.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) r.reject[i][j] = std::fabs(r.mean_ranks[i] - r.mean_ranks[j]) > r.cd;
  }
  return r;
}

HolmResult holm(const std::vector<double>& p_values, double alpha) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("holm: p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  HolmResult r;
  r.reject.assign(m, false);
  r.adjusted.assign(m, 1.0);
  bool stopped = false;
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double p = p_values[order[i]];
    const auto factor = static_cast<double>(m - i);
    if (!stopped && p <= alpha / factor) {
      r.reject[order[i]] = true;
    } else {
      stopped = true;
    }
    running = std::max(running, std::min(1.0, factor * p));
    r.adjusted[order[i]] = running;
  }
  return r;
}

}  // namespace mlexp
