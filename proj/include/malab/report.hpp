#ifndef MALAB_REPORT_HPP
#define MALAB_REPORT_HPP

#include "json.hpp"

#include <deque>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace malab {

/// One asserted comparison. Relations: "<=", "<", ">=", ">" pass when
/// lhs compares to rhs with `tolerance` of absolute slack in the loosening
/// direction; "~=" passes when |lhs - rhs| <= tolerance * |rhs|.
struct Inequality
{
  std::string name;
  double lhs = 0.0;
  std::string relation;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

bool evaluate_relation(double lhs, const std::string& relation, double rhs, double tolerance);

struct ExperimentReport
{
  std::string id;
  nlohmann::ordered_json config;
  std::string sweep_variable;
  std::vector<double> sweep;
  /// One column per measured quantity, one entry per sweep value.
  std::deque<std::pair<std::string, std::vector<double>>> measured;
  std::vector<std::pair<std::string, double>> slopes;
  /// Single measured values that do not depend on the sweep variable.
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<Inequality> inequalities;
  std::vector<std::string> notes;
  bool applicable = true;
  double wall_seconds = 0.0;

  /// Column by name, created empty on first use. References stay valid.
  std::vector<double>& column(const std::string& name);
  const std::vector<double>* find(const std::string& name) const;
  double slope(const std::string& name) const;
  double scalar(const std::string& name) const;
  const Inequality& check(const std::string& name, double lhs, const std::string& relation, double rhs,
                          double tolerance = 0.0);
  bool passed() const;
  std::vector<const Inequality*> failures() const;
};

nlohmann::ordered_json to_json(const ExperimentReport& report);

/// Sweep variable followed by every measured column; 17 significant digits.
void write_sweep_csv(std::ostream& os, const ExperimentReport& report);

/// Two whitespace-separated columns (sweep value, measured value) with a
/// '#' header line.
void write_plot_data(std::ostream& os, const ExperimentReport& report, const std::string& column);

/// Least-squares slope of log y against log x over the pairs with both
/// entries positive and finite; NaN when fewer than two such pairs remain.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace malab

#endif
