#pragma once

#include <string>
#include <vector>

namespace flowtrace {

/// One corpus member's results: named norm columns plus the quoted
/// numerator/denominator pair whose quotient is the reported ratio.
struct ReportRow {
  std::string id;
  std::vector<double> values;  // aligned with ExperimentReport::columns
  double numerator = 0;
  double denominator = 0;
  double ratio = 0;
};

/// Per-experiment results with the full parameter echo. Serialization is
/// deterministic: identical manifest and seed give byte-identical CSV. Wall
/// time is reported on stderr only, never in the file.
struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;

  double min_ratio = 0;
  double max_ratio = 0;
  double median_ratio = 0;
  double maxmin = 0;  // max_ratio / min_ratio
  std::vector<std::pair<std::string, double>> extra_summary;  // experiment-specific
  bool pass = false;
  double wall_seconds = 0;

  void finalize_ratios();  // fills min/max/median/maxmin from rows
  std::string to_csv() const;
};

std::string format_double(double v);  // %.12g, the report-wide convention

}  // namespace flowtrace
