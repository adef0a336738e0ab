#include "flowtrace/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flowtrace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void ExperimentReport::finalize_ratios() {
  if (rows.empty()) throw std::runtime_error("ExperimentReport: no rows");
  std::vector<double> ratios;
  ratios.reserve(rows.size());
  for (const auto& r : rows) ratios.push_back(r.ratio);
  std::sort(ratios.begin(), ratios.end());
  min_ratio = ratios.front();
  max_ratio = ratios.back();
  size_t mid = ratios.size() / 2;
  median_ratio =
      ratios.size() % 2 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
  maxmin = min_ratio > 0 ? max_ratio / min_ratio : std::numeric_limits<double>::infinity();
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << "# experiment = " << experiment << "\n";
  for (const auto& [key, value] : params) out << "# " << key << " = " << value << "\n";

  out << "id";
  for (const auto& c : columns) out << ',' << c;
  out << ",numerator,denominator,ratio\n";
  for (const auto& r : rows) {
    out << r.id;
    for (double v : r.values) out << ',' << format_double(v);
    out << ',' << format_double(r.numerator) << ',' << format_double(r.denominator) << ','
        << format_double(r.ratio) << "\n";
  }

  out << "# summary min_ratio = " << format_double(min_ratio)
      << " max_ratio = " << format_double(max_ratio)
      << " median_ratio = " << format_double(median_ratio)
      << " maxmin = " << format_double(maxmin);
  for (const auto& [key, value] : extra_summary) out << ' ' << key << " = " << format_double(value);
  out << " pass = " << (pass ? 1 : 0) << "\n";
  return out.str();
}

}  // namespace flowtrace
