#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "riskaverse/format.hpp"

namespace riskaverse {

/// Verdict of a numeric bound check. margin = observed - claimed_bound on
/// the worst instance; passed iff margin >= -tolerance.
struct LemmaReport {
  std::string name;
  bool passed = true;
  double claimed_bound = 0.0;
  double observed = std::numeric_limits<double>::infinity();
  double margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::size_t instances_checked = 0;
  std::string worst_instance;
};

/// Accumulates instances into a LemmaReport, keeping the smallest margin.
class LemmaTally {
 public:
  LemmaTally(std::string name, double tolerance) {
    report_.name = std::move(name);
    report_.tolerance = tolerance;
  }

  /// Records observed >= claimed, with an extra per-instance slack (for
  /// Monte Carlo terms) on top of the report tolerance.
  void record(const std::string& instance, double observed, double claimed, double slack = 0.0) {
    ++report_.instances_checked;
    const double margin = observed - claimed;
    if (!(margin + slack >= -report_.tolerance)) report_.passed = false;
    if (report_.instances_checked == 1 || margin < report_.margin || std::isnan(margin)) {
      report_.margin = margin;
      report_.observed = observed;
      report_.claimed_bound = claimed;
      report_.worst_instance = instance;
    }
  }

  void fail(const std::string& instance) {
    ++report_.instances_checked;
    report_.passed = false;
    report_.worst_instance = instance;
    report_.margin = -std::numeric_limits<double>::infinity();
  }

  /// Folds another report in: counts add, the smaller margin wins.
  void absorb(const LemmaReport& other) {
    const bool first = report_.instances_checked == 0;
    report_.instances_checked += other.instances_checked;
    if (!other.passed) report_.passed = false;
    if (first || other.margin < report_.margin || std::isnan(other.margin)) {
      report_.margin = other.margin;
      report_.observed = other.observed;
      report_.claimed_bound = other.claimed_bound;
      report_.worst_instance = other.worst_instance;
    }
  }

  const LemmaReport& report() const { return report_; }
  LemmaReport take() { return std::move(report_); }

 private:
  LemmaReport report_;
};

inline constexpr const char* kLemmaCsvHeader =
    "name,passed,claimed_bound,observed,margin,instances_checked,worst_instance";

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv_row(std::ostream& os, const LemmaReport& r) {
  os << csv_field(r.name) << ',' << (r.passed ? "true" : "false") << ',' << format_number(r.claimed_bound) << ','
     << format_number(r.observed) << ',' << format_number(r.margin) << ',' << r.instances_checked << ','
     << csv_field(r.worst_instance) << '\n';
}

}  // namespace riskaverse
