#include "mlexp/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "mlexp/error.hpp"
#include "mlexp/format.hpp"
#include "mlexp/store.hpp"
#include "mlexp/svg.hpp"

namespace mlexp {

std::vector<MetricAggregate> aggregate_metrics(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& r : records) {
    for (const auto& [id, v] : scalar_metrics(r)) values[id].push_back(v);
  }
  std::vector<MetricAggregate> out;
  for (const auto& [id, v] : values) {
    MetricAggregate a{id, 0.0, 0.0, v.size()};
    for (double x : v) a.mean += x;
    a.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - a.mean) * (x - a.mean);
      a.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    out.push_back(a);
  }
  return out;
}

ConfusionMatrix summed_confusion(const std::vector<RunRecord>& records) {
  ConfusionMatrix sum;
  for (const auto& r : records) {
    const auto& cm = r.metrics.confusion;
    if (cm.empty()) continue;
    if (sum.empty()) sum.assign(cm.size(), std::vector<std::size_t>(cm.size(), 0));
    if (cm.size() != sum.size()) throw ValidationError("report: confusion matrices differ in size");
    for (std::size_t i = 0; i < cm.size(); ++i) {
      for (std::size_t j = 0; j < cm.size(); ++j) sum[i][j] += cm[i][j];
    }
  }
  return sum;
}

namespace {

// Lower and upper TPR of a monotone curve at `fpr`.
std::pair<double, double> tpr_at(const std::vector<RocPoint>& c, double fpr) {
  double lo = -1.0, hi = -1.0;
  for (const auto& p : c) {
    if (p.fpr == fpr) {
      if (lo < 0.0) lo = p.tpr;
      hi = p.tpr;
    }
  }
  if (lo >= 0.0) return {lo, hi};
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i - 1].fpr < fpr && fpr < c[i].fpr) {
      const double t = c[i - 1].tpr + (c[i].tpr - c[i - 1].tpr) * (fpr - c[i - 1].fpr) / (c[i].fpr - c[i - 1].fpr);
      return {t, t};
    }
  }
  return fpr < c.front().fpr ? std::pair{0.0, 0.0} : std::pair{1.0, 1.0};
}

void write_file(const std::filesystem::path& path, const std::string& content, std::vector<std::filesystem::path>& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ExecutionError("cannot write " + path.string());
  f << content;
  out.push_back(path);
}

std::string config_label(const std::filesystem::path& store_path, const std::string& hash) {
  const auto path = store_path.parent_path() / "configs" / (hash + ".json");
  std::ifstream in(path);
  if (!in) return "";
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.contains("label")) return doc["label"].get<std::string>();
    return doc.at("model").at("algorithm").get<std::string>();
  } catch (const std::exception&) {
    return "";
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::vector<RocPoint> mean_roc(const std::vector<std::vector<RocPoint>>& curves) {
  if (curves.empty()) return {};
  std::set<double> grid;
  for (const auto& c : curves) {
    for (const auto& p : c) grid.insert(p.fpr);
  }
  std::vector<RocPoint> out;
  const auto n = static_cast<double>(curves.size());
  for (double f : grid) {
    double lo = 0.0, hi = 0.0;
    for (const auto& c : curves) {
      const auto [a, b] = tpr_at(c, f);
      lo += a;
      hi += b;
    }
    out.push_back({f, lo / n});
    if (hi != lo) out.push_back({f, hi / n});
  }
  return out;
}

std::vector<std::filesystem::path> generate_report(const std::filesystem::path& store_path,
                                                   const std::vector<std::string>& selection,
                                                   const std::filesystem::path& out_dir) {
  if (selection.empty()) throw ValidationError("report: empty selection");
  const auto all = read_records(store_path);
  std::vector<std::filesystem::path> written;
  std::filesystem::create_directories(out_dir);

  std::ostringstream summary;
  std::vector<std::vector<MetricAggregate>> per_config;
  std::set<std::string> metric_ids;

  for (const auto& hash : selection) {
    std::vector<RunRecord> records;
    for (const auto& r : all) {
      if (r.config_hash == hash) records.push_back(r);
    }
    if (records.empty()) throw ValidationError("report: no records for config " + hash);
    std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) { return key_of(a) < key_of(b); });
    const auto dir = out_dir / hash;
    std::filesystem::create_directories(dir);

    const auto agg = aggregate_metrics(records);
    per_config.push_back(agg);
    std::ostringstream csv, txt;
    csv << "metric,mean,std,count\n";
    txt << "config " << hash << " (" << records.size() << " records)\n";
    for (const auto& a : agg) {
      metric_ids.insert(a.metric);
      csv << a.metric << "," << format_number(a.mean) << "," << format_number(a.std) << "," << a.count << "\n";
      txt << "  " << std::left << std::setw(22) << a.metric << std::fixed << std::setprecision(4) << a.mean
          << " +/- " << a.std << "\n";
    }
    write_file(dir / "metrics.csv", csv.str(), written);
    write_file(dir / "metrics.txt", txt.str(), written);

    const auto cm = summed_confusion(records);
    if (!cm.empty()) {
      std::ostringstream ccsv, ctxt;
      ccsv << "true\\predicted";
      for (std::size_t j = 0; j < cm.size(); ++j) ccsv << "," << j;
      ccsv << "\n";
      std::size_t width = 5;
      for (const auto& row : cm) {
        for (auto v : row) width = std::max(width, std::to_string(v).size() + 1);
      }
      ctxt << "summed confusion matrix (rows = true class, columns = predicted)\n" << std::setw(6) << "";
      for (std::size_t j = 0; j < cm.size(); ++j) ctxt << std::setw(static_cast<int>(width)) << j;
      ctxt << "\n";
      for (std::size_t i = 0; i < cm.size(); ++i) {
        ccsv << i;
        ctxt << std::setw(6) << i;
        for (std::size_t j = 0; j < cm.size(); ++j) {
          ccsv << "," << cm[i][j];
          ctxt << std::setw(static_cast<int>(width)) << cm[i][j];
        }
        ccsv << "\n";
        ctxt << "\n";
      }
      write_file(dir / "confusion.csv", ccsv.str(), written);
      write_file(dir / "confusion.txt", ctxt.str(), written);

      svg::Canvas canvas(0.0, 1.0, 0.0, 1.0);
      canvas.axes("false positive rate", "true positive rate");
      canvas.title("mean ROC (one-vs-rest)");
      canvas.line(0.0, 0.0, 1.0, 1.0, "#bbbbbb");
      bool any = false;
      for (std::size_t c = 0; c < cm.size(); ++c) {
        std::vector<std::vector<RocPoint>> curves;
        for (const auto& r : records) {
          if (c < r.metrics.roc.size() && r.metrics.roc[c]) curves.push_back(r.metrics.roc[c]->points);
        }
        if (curves.empty()) continue;
        const auto mean = mean_roc(curves);
        std::ostringstream rcsv;
        rcsv << "fpr,tpr\n";
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : mean) {
          rcsv << format_number(p.fpr) << "," << format_number(p.tpr) << "\n";
          pts.emplace_back(p.fpr, p.tpr);
        }
        write_file(dir / ("roc_class_" + std::to_string(c) + ".csv"), rcsv.str(), written);
        canvas.polyline(pts, svg::palette(c));
        canvas.text(0.62, 0.05 + 0.06 * static_cast<double>(c), "class " + std::to_string(c));
        any = true;
      }
      if (any) {
        canvas.save((dir / "roc.svg").string());
        written.push_back(dir / "roc.svg");
      }
    }
  }

  summary << "config_hash,label,records";
  for (const auto& id : metric_ids) summary << "," << id;
  summary << "\n";
  for (std::size_t i = 0; i < selection.size(); ++i) {
    std::size_t count = 0;
    std::map<std::string, double> means;
    for (const auto& a : per_config[i]) {
      means[a.metric] = a.mean;
      count = std::max(count, a.count);
    }
    summary << selection[i] << "," << csv_field(config_label(store_path, selection[i])) << "," << count;
    for (const auto& id : metric_ids) {
      summary << ",";
      if (means.count(id)) summary << format_number(means[id]);
    }
    summary << "\n";
  }
  write_file(out_dir / "summary.csv", summary.str(), written);
  return written;
}

}  // namespace mlexp
