#include "mlexp/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mlexp/error.hpp"
#include "mlexp/format.hpp"

namespace mlexp {

void Scenario::check() const {
  if (criteria.empty()) throw ValidationError("scenario '" + name + "': needs at least one criterion");
  for (const auto& c : criteria) {
    if (!is_published_metric(c.metric)) throw ValidationError("scenario '" + name + "': unknown metric '" + c.metric + "'");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw ValidationError("scenario '" + name + "': weight of '" + c.metric + "' must be positive");
    }
  }
}

Scenario scenario_from_json(const nlohmann::json& doc) {
  Scenario s;
  try {
    for (const auto& [key, _] : doc.items()) {
      if (key != "name" && key != "criteria") throw ParseError("scenario: unknown key '" + key + "'");
    }
    s.name = doc.at("name").get<std::string>();
    for (const auto& c : doc.at("criteria")) {
      for (const auto& [key, _] : c.items()) {
        if (key != "metric" && key != "weight" && key != "direction") {
          throw ParseError("scenario criterion: unknown key '" + key + "'");
        }
      }
      Criterion crit;
      crit.metric = canonical_metric_id(c.at("metric").get<std::string>());
      crit.weight = c.at("weight").get<double>();
      crit.direction = default_direction(crit.metric);
      if (c.contains("direction")) {
        const auto d = c["direction"].get<std::string>();
        if (d == "maximize") {
          crit.direction = Direction::maximize;
        } else if (d == "minimize") {
          crit.direction = Direction::minimize;
        } else {
          throw ParseError("scenario criterion: direction must be maximize or minimize");
        }
      }
      s.criteria.push_back(crit);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  s.check();
  double total = 0.0;
  for (const auto& c : s.criteria) total += c.weight;
  for (auto& c : s.criteria) c.weight /= total;
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario " + path.string());
  try {
    return scenario_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const Scenario& scenario) {
  nlohmann::json doc{{"name", scenario.name}, {"criteria", nlohmann::json::array()}};
  for (const auto& c : scenario.criteria) {
    doc["criteria"].push_back({{"metric", c.metric}, {"weight", c.weight}, {"direction", to_string(c.direction)}});
  }
  return doc;
}

std::vector<RankedModel> rank_models(const Scenario& scenario, const MetricSummaries& summaries) {
  if (scenario.criteria.empty()) throw ValidationError("rank_models: scenario has no criteria");
  double total_weight = 0.0;
  for (const auto& c : scenario.criteria) total_weight += c.weight;

  std::vector<RankedModel> ranked;
  for (const auto& [model, _] : summaries) ranked.push_back({model, 0.0});
  for (const auto& c : scenario.criteria) {
    std::vector<double> values;
    for (const auto& [model, metrics] : summaries) {
      const auto it = metrics.find(c.metric);
      if (it == metrics.end()) throw ValidationError("rank_models: model '" + model + "' lacks metric '" + c.metric + "'");
      values.push_back(it->second);
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo, max = *hi;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double norm = max > min ? (values[i] - min) / (max - min) : 0.5;
      if (c.direction == Direction::minimize && max > min) norm = 1.0 - norm;
      ranked[i].score += c.weight / total_weight * norm;
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedModel& a, const RankedModel& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.model < b.model;
  });
  return ranked;
}

MetricSummaries summarize_records(const std::vector<RunRecord>& records) {
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> acc;
  for (const auto& r : records) {
    for (const auto& [id, v] : scalar_metrics(r)) {
      auto& slot = acc[r.config_hash][id];
      slot.first += v;
      ++slot.second;
    }
  }
  MetricSummaries out;
  for (const auto& [hash, metrics] : acc) {
    for (const auto& [id, sum] : metrics) out[hash][id] = sum.first / static_cast<double>(sum.second);
  }
  return out;
}

MetricSamples samples_from_records(const std::vector<RunRecord>& records, const std::string& metric,
                                   const std::vector<std::string>& models) {
  const std::string id = canonical_metric_id(metric);
  if (!is_published_metric(id)) throw ValidationError("compare: unknown metric '" + metric + "'");
  std::set<std::string> present;
  for (const auto& r : records) present.insert(r.config_hash);
  for (const auto& m : models) {
    if (!present.count(m)) {
      std::string list;
      for (const auto& p : present) list += (list.empty() ? "" : ", ") + p;
      throw ValidationError("compare: no records for model '" + m + "'; available: " + (list.empty() ? "none" : list));
    }
  }

  MetricSamples s;
  s.metric = id;
  s.direction = default_direction(id);
  s.models = models;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    std::map<std::pair<std::size_t, std::size_t>, double> by_key;
    for (const auto& r : records) {
      if (r.config_hash != models[mi]) continue;
      const auto values = scalar_metrics(r);
      const auto it = values.find(id);
      if (it == values.end()) {
        throw ValidationError("compare: model '" + models[mi] + "' run " + std::to_string(r.run) + " fold " +
                              std::to_string(r.fold) + " lacks metric '" + id + "'");
      }
      by_key[{r.run, r.fold}] = it->second;
    }
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    std::vector<double> values;
    for (const auto& [key, v] : by_key) {
      keys.push_back(key);
      values.push_back(v);
    }
    if (mi == 0) {
      s.keys = keys;
    } else if (keys != s.keys) {
      throw ValidationError("compare: samples are not paired; (run, fold) keys of '" + models[mi] + "' differ from '" +
                            models[0] + "'");
    }
    s.values.push_back(std::move(values));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Decision procedure

namespace {

std::string num(double v) { return format_number(v); }

std::string describe(const TestResult& t) {
  std::string s = t.name + " statistic=" + num(t.statistic) + " p=" + num(t.p);
  if (!t.note.empty()) s += " (" + t.note + ")";
  return s;
}

/// Paired t when requested and possible, Wilcoxon otherwise. Identical
/// samples give p = 1.
TestResult pair_test(const std::vector<double>& a, const std::vector<double>& b, bool parametric,
                     std::vector<std::string>& trail, const std::string& label) {
  if (a == b) {
    trail.push_back(label + ": all differences zero, samples identical, p = 1");
    return {"identical", 0.0, 1.0, "all differences zero"};
  }
  if (parametric) {
    try {
      return paired_t(a, b);
    } catch (const ValidationError& e) {
      trail.push_back(label + ": paired t not applicable (" + e.what() + "); using Wilcoxon");
    }
  }
  return wilcoxon_signed_rank(a, b);
}

void pairwise_table(ComparisonReport& report, const MetricSamples& samples, bool parametric) {
  const std::size_t k = samples.models.size();
  std::vector<double> ps;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const std::string label = samples.models[i] + " vs " + samples.models[j];
      PairwiseResult row{i, j, pair_test(samples.values[i], samples.values[j], parametric, report.trail, label)};
      ps.push_back(row.test.p);
      report.pairwise.push_back(row);
    }
  }
  const HolmResult h = holm(ps, report.alpha);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    report.pairwise[i].p_adjusted = h.adjusted[i];
    report.pairwise[i].reject = h.reject[i];
  }
  report.trail.push_back("Holm correction over " + std::to_string(ps.size()) + " pairwise tests at alpha=" +
                         num(report.alpha));
}

std::string pairwise_conclusion(const ComparisonReport& report) {
  std::string out;
  for (const auto& row : report.pairwise) {
    if (!row.reject) continue;
    out += (out.empty() ? "significant differences: " : "; ") + report.models[row.a] + " vs " +
           report.models[row.b] + " (adjusted p=" + num(row.p_adjusted) + ")";
  }
  return out.empty() ? "no significant difference" : out;
}

}  // namespace

ComparisonReport compare(const MetricSamples& samples, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("compare: alpha must lie in (0, 1)");
  const std::size_t k = samples.models.size();
  if (k < 2) throw ValidationError("compare: need at least two models");
  if (samples.values.size() != k) throw ValidationError("compare: one sample vector per model required");
  const std::size_t n = samples.values.front().size();
  for (const auto& v : samples.values) {
    if (v.size() != n) throw ValidationError("compare: sample vectors differ in length (not paired)");
  }
  if (n < 3) throw ValidationError("compare: need at least 3 paired samples per model");

  ComparisonReport report;
  report.metric = samples.metric;
  report.alpha = alpha;
  report.models = samples.models;
  report.sample_size = n;
  auto& trail = report.trail;
  trail.push_back(std::to_string(k) + " models, " + std::to_string(n) + " paired samples of '" + samples.metric +
                  "', alpha=" + num(alpha));

  const auto normality = [&](const std::string& name, const std::vector<double>& v) {
    NormalityCheck check{name, std::nullopt, false, ""};
    try {
      check.result = shapiro_wilk(v);
      check.normal = check.result->p > alpha;
      trail.push_back("Shapiro-Wilk on " + name + ": W=" + num(check.result->statistic) +
                      " p=" + num(check.result->p) + (check.normal ? " > " : " <= ") + num(alpha) +
                      (check.normal ? ", normality not rejected" : ", normality rejected"));
    } catch (const ValidationError& e) {
      check.note = e.what();
      trail.push_back("Shapiro-Wilk on " + name + " not applicable (" + check.note + "); treated as non-normal");
    }
    report.normality.push_back(check);
    return check.normal;
  };

  if (k == 2) {
    const auto& a = samples.values[0];
    const auto& b = samples.values[1];
    const std::string label = samples.models[0] + " vs " + samples.models[1];
    if (a == b) {
      report.family = "nonparametric";
      report.family_reason = "all differences zero";
      report.pairwise.push_back({0, 1, {"identical", 0.0, 1.0, "all differences zero"}, 1.0, false});
      trail.push_back(label + ": all differences zero, p = 1");
      report.conclusion = "no significant difference (p=1)";
      trail.push_back(report.conclusion);
      return report;
    }
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const bool normal = normality("differences", d);
    report.family = normal ? "parametric" : "nonparametric";
    const auto& check = report.normality.back();
    report.family_reason = check.result ? "Shapiro-Wilk p=" + num(check.result->p) + (normal ? " > " : " <= ") +
                                              "alpha=" + num(alpha)
                                        : "Shapiro-Wilk not applicable: " + check.note;
    PairwiseResult row{0, 1, pair_test(a, b, normal, trail, label)};
    row.p_adjusted = row.test.p;
    row.reject = row.test.p <= alpha;
    trail.push_back(label + ": " + describe(row.test));
    report.pairwise.push_back(row);
    report.conclusion = row.reject ? "significant difference between " + label + " (p=" + num(row.test.p) + ")"
                                   : "no significant difference (p=" + num(row.test.p) + ")";
    trail.push_back(report.conclusion);
    return report;
  }

  bool all_normal = true;
  for (std::size_t i = 0; i < k; ++i) all_normal = normality(samples.models[i], samples.values[i]) && all_normal;
  report.levene = levene(samples.values);
  const bool homogeneous = report.levene->p > alpha;
  trail.push_back("Levene (median-centred) across models: W=" + num(report.levene->statistic) +
                  " p=" + num(report.levene->p) + (homogeneous ? " > " : " <= ") + num(alpha) +
                  (homogeneous ? ", equal variances not rejected" : ", equal variances rejected"));

  if (all_normal && homogeneous) {
    report.family = "parametric";
    report.family_reason = "every sample normal and variances homogeneous";
    trail.push_back("parametric path: paired t for every pair");
    pairwise_table(report, samples, true);
    for (const auto& row : report.pairwise) {
      trail.push_back(samples.models[row.a] + " vs " + samples.models[row.b] + ": " + describe(row.test) +
                      " adjusted p=" + num(row.p_adjusted) + (row.reject ? " reject" : " keep"));
    }
    report.conclusion = pairwise_conclusion(report);
    trail.push_back(report.conclusion);
    return report;
  }

  report.family = "nonparametric";
  report.family_reason = !all_normal ? "normality rejected or untestable for at least one sample"
                                     : "variances not homogeneous (Levene p=" + num(report.levene->p) + ")";
  std::vector<std::vector<double>> matrix(n, std::vector<double>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) matrix[i][j] = samples.values[j][i];
  }
  report.omnibus = friedman(matrix, samples.direction);
  const auto& fr = *report.omnibus;
  const bool rejected = fr.p <= alpha;
  std::string ranks;
  for (std::size_t j = 0; j < k; ++j) ranks += (j ? ", " : "") + samples.models[j] + "=" + num(fr.mean_ranks[j]);
  trail.push_back("Friedman: chi2=" + num(fr.chi2) + " (p=" + num(fr.chi2_p) + "), Iman-Davenport F=" + num(fr.f_id) +
                  " p=" + num(fr.p) + (rejected ? " <= " : " > ") + num(alpha) + "; mean ranks " + ranks +
                  (fr.note.empty() ? "" : "; " + fr.note));
  if (!rejected) {
    report.conclusion = "no significant difference (Friedman p=" + num(fr.p) + ")";
    trail.push_back(report.conclusion);
    return report;
  }
  try {
    report.nemenyi = nemenyi(matrix, alpha, samples.direction);
    std::string pairs;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        if (report.nemenyi->reject[i][j]) pairs += (pairs.empty() ? "" : ", ") + samples.models[i] + "/" + samples.models[j];
      }
    }
    trail.push_back("Nemenyi: q=" + num(report.nemenyi->q) + " CD=" + num(report.nemenyi->cd) +
                    "; pairs beyond CD: " + (pairs.empty() ? "none" : pairs));
  } catch (const ValidationError& e) {
    trail.push_back(std::string("Nemenyi skipped: ") + e.what());
  }
  pairwise_table(report, samples, false);
  for (const auto& row : report.pairwise) {
    trail.push_back(samples.models[row.a] + " vs " + samples.models[row.b] + ": " + describe(row.test) +
                    " adjusted p=" + num(row.p_adjusted) + (row.reject ? " reject" : " keep"));
  }
  report.conclusion = pairwise_conclusion(report);
  trail.push_back(report.conclusion);
  return report;
}

// ---------------------------------------------------------------------------
// Output

namespace {

nlohmann::json test_json(const TestResult& t) {
  return {{"name", t.name}, {"statistic", t.statistic}, {"p", t.p}, {"note", t.note}};
}

}  // namespace

nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json doc;
  doc["metric"] = r.metric;
  doc["alpha"] = r.alpha;
  doc["models"] = r.models;
  doc["sample_size"] = r.sample_size;
  doc["normality"] = nlohmann::json::array();
  for (const auto& n : r.normality) {
    doc["normality"].push_back({{"sample", n.sample},
                                {"result", n.result ? test_json(*n.result) : nlohmann::json(nullptr)},
                                {"normal", n.normal},
                                {"note", n.note}});
  }
  doc["levene"] = r.levene ? test_json(*r.levene) : nlohmann::json(nullptr);
  doc["family"] = r.family;
  doc["family_reason"] = r.family_reason;
  if (r.omnibus) {
    doc["omnibus"] = {{"name", "friedman"},           {"chi2", r.omnibus->chi2}, {"chi2_p", r.omnibus->chi2_p},
                      {"f_id", r.omnibus->f_id},      {"p", r.omnibus->p},       {"mean_ranks", r.omnibus->mean_ranks},
                      {"note", r.omnibus->note}};
  } else {
    doc["omnibus"] = nullptr;
  }
  doc["pairwise"] = nlohmann::json::array();
  for (const auto& p : r.pairwise) {
    doc["pairwise"].push_back({{"a", r.models[p.a]},
                               {"b", r.models[p.b]},
                               {"test", test_json(p.test)},
                               {"p_adjusted", p.p_adjusted},
                               {"reject", p.reject}});
  }
  if (r.nemenyi) {
    doc["nemenyi"] = {{"q", r.nemenyi->q},
                      {"cd", r.nemenyi->cd},
                      {"mean_ranks", r.nemenyi->mean_ranks},
                      {"reject", r.nemenyi->reject}};
  } else {
    doc["nemenyi"] = nullptr;
  }
  doc["trail"] = r.trail;
  doc["conclusion"] = r.conclusion;
  return doc;
}

std::string to_text(const ComparisonReport& r) {
  std::ostringstream out;
  out << "Comparison of '" << r.metric << "' (alpha " << num(r.alpha) << ", " << r.sample_size << " paired samples)\n";
  for (std::size_t i = 0; i < r.models.size(); ++i) out << "  [" << i << "] " << r.models[i] << "\n";
  out << "Family: " << r.family << " (" << r.family_reason << ")\n";
  if (r.nemenyi) {
    out << "Nemenyi CD " << num(r.nemenyi->cd) << ", mean ranks:";
    for (std::size_t i = 0; i < r.models.size(); ++i) out << " [" << i << "]=" << num(r.nemenyi->mean_ranks[i]);
    out << "\n";
  }
  if (!r.pairwise.empty()) {
    out << "Pairwise:\n";
    for (const auto& p : r.pairwise) {
      out << "  [" << p.a << "] vs [" << p.b << "]  " << p.test.name << "  p=" << num(p.test.p)
          << "  adjusted=" << num(p.p_adjusted) << "  " << (p.reject ? "reject" : "keep") << "\n";
    }
  }
  out << "Trail:\n";
  for (std::size_t i = 0; i < r.trail.size(); ++i) out << "  " << i + 1 << ". " << r.trail[i] << "\n";
  out << "Conclusion: " << r.conclusion << "\n";
  return out.str();
}

}  // namespace mlexp
