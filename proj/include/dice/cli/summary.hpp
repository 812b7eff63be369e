#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "dice/errors.hpp"
#include "dice/runtime/training.hpp"

namespace dice::cli {

/// 100 (G - G_random) / (G_ref - G_random).
inline double normalized_score(double g, double g_random, double g_ref) {
  if (g_ref == g_random) throw InvalidArgument("normalized_score: reference equals random score");
  return 100.0 * (g - g_random) / (g_ref - g_random);
}

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"mean_return",        "median_return",        "entropy",
                                                 "tau_p10",            "tau_p50",              "tau_p90",
                                                 "mean_shaped_return", "median_shaped_return", "bva_return"};
  return names;
}

inline std::vector<double> metric_values(const EvalPoint& p) {
  return {p.mean_return,        p.median_return,        p.entropy,   p.tau_p10, p.tau_p50, p.tau_p90,
          p.mean_shaped_return, p.median_shaped_return, p.bva_return};
}

struct SummaryRow {
  long step = 0;
  std::vector<double> mean;    ///< per metric, across seeds
  std::vector<double> median;  ///< per metric, across seeds
};

/// Mean and median across seeds at each evaluation point. Seeds missing a metric
/// (NaN) are skipped for that metric.
inline std::vector<SummaryRow> summarize(const std::vector<TrainingReport>& reports) {
  if (reports.empty()) throw InvalidArgument("summarize: no reports");
  const auto& first = reports.front().points;
  for (const auto& r : reports) {
    if (r.points.size() != first.size()) throw InvalidArgument("summarize: reports have different evaluation points");
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (r.points[i].step != first[i].step) throw InvalidArgument("summarize: evaluation steps disagree");
    }
  }
  const std::size_t metrics = metric_names().size();
  std::vector<SummaryRow> rows;
  for (std::size_t i = 0; i < first.size(); ++i) {
    SummaryRow row;
    row.step = first[i].step;
    for (std::size_t m = 0; m < metrics; ++m) {
      std::vector<double> xs;
      for (const auto& r : reports) {
        const double x = metric_values(r.points[i])[m];
        if (std::isfinite(x)) xs.push_back(x);
      }
      row.mean.push_back(mean_of(xs));
      row.median.push_back(median_of(xs));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string format_number(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

/// Columns: step, <metric>_mean, <metric>_median for every metric, then the
/// normalized score of the seed-mean greedy return.
inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, double g_random,
                              double g_ref) {
  out << "step";
  for (const auto& name : metric_names()) out << ',' << name << "_mean," << name << "_median";
  out << ",normalized_score\n";
  for (const auto& row : rows) {
    out << row.step;
    for (std::size_t m = 0; m < row.mean.size(); ++m) {
      out << ',' << format_number(row.mean[m]) << ',' << format_number(row.median[m]);
    }
    const double score = g_ref == g_random ? std::nan("") : normalized_score(row.mean[0], g_random, g_ref);
    out << ',' << format_number(score) << '\n';
  }
}

}  // namespace dice::cli
