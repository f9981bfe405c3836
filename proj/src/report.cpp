#include "malab/report.hpp"

#include "malab/errors.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace malab {

namespace {

// JSON has no NaN or infinity; keep them readable instead of silently null
nlohmann::ordered_json number(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

} // namespace

bool evaluate_relation(double lhs, const std::string& relation, double rhs, double tolerance)
{
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  if (relation == "<=") return lhs <= rhs + tolerance;
  if (relation == "<") return lhs < rhs + tolerance;
  if (relation == ">=") return lhs >= rhs - tolerance;
  if (relation == ">") return lhs > rhs - tolerance;
  if (relation == "~=") return std::abs(lhs - rhs) <= tolerance * std::abs(rhs);
  throw InvalidArgument("unknown relation '" + relation + "'");
}

std::vector<double>& ExperimentReport::column(const std::string& name)
{
  for (auto& [n, v] : measured)
    if (n == name) return v;
  measured.emplace_back(name, std::vector<double>{});
  return measured.back().second;
}

const std::vector<double>* ExperimentReport::find(const std::string& name) const
{
  for (const auto& [n, v] : measured)
    if (n == name) return &v;
  return nullptr;
}

double ExperimentReport::slope(const std::string& name) const
{
  for (const auto& [n, v] : slopes)
    if (n == name) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

double ExperimentReport::scalar(const std::string& name) const
{
  for (const auto& [n, v] : scalars)
    if (n == name) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

const Inequality& ExperimentReport::check(const std::string& name, double lhs, const std::string& relation,
                                          double rhs, double tolerance)
{
  inequalities.push_back({name, lhs, relation, rhs, tolerance, evaluate_relation(lhs, relation, rhs, tolerance)});
  return inequalities.back();
}

bool ExperimentReport::passed() const
{
  for (const auto& q : inequalities)
    if (!q.passed) return false;
  return true;
}

std::vector<const Inequality*> ExperimentReport::failures() const
{
  std::vector<const Inequality*> out;
  for (const auto& q : inequalities)
    if (!q.passed) out.push_back(&q);
  return out;
}

nlohmann::ordered_json to_json(const ExperimentReport& r)
{
  nlohmann::ordered_json j;
  j["experiment"] = r.id;
  j["passed"] = r.passed();
  j["applicable"] = r.applicable;
  j["config"] = r.config;
  j["sweep_variable"] = r.sweep_variable;
  auto& sw = j["sweep"] = nlohmann::ordered_json::array();
  for (double v : r.sweep) sw.push_back(number(v));
  auto& m = j["measured"] = nlohmann::ordered_json::object();
  for (const auto& [name, values] : r.measured) {
    auto& col = m[name] = nlohmann::ordered_json::array();
    for (double v : values) col.push_back(number(v));
  }
  auto& s = j["slopes"] = nlohmann::ordered_json::object();
  for (const auto& [name, v] : r.slopes) s[name] = number(v);
  auto& sc = j["scalars"] = nlohmann::ordered_json::object();
  for (const auto& [name, v] : r.scalars) sc[name] = number(v);
  auto& ineq = j["inequalities"] = nlohmann::ordered_json::array();
  for (const auto& q : r.inequalities)
    ineq.push_back({{"name", q.name},
                    {"lhs", number(q.lhs)},
                    {"relation", q.relation},
                    {"rhs", number(q.rhs)},
                    {"tolerance", number(q.tolerance)},
                    {"passed", q.passed}});
  j["notes"] = r.notes;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

void write_sweep_csv(std::ostream& os, const ExperimentReport& r)
{
  os << (r.sweep_variable.empty() ? "index" : r.sweep_variable);
  for (const auto& [name, values] : r.measured) os << ',' << name;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < r.sweep.size(); ++i) {
    os << r.sweep[i];
    for (const auto& [name, values] : r.measured) {
      os << ',';
      if (i < values.size()) os << values[i];
    }
    os << '\n';
  }
}

void write_plot_data(std::ostream& os, const ExperimentReport& r, const std::string& column)
{
  const auto* values = r.find(column);
  if (!values) throw InvalidArgument("report " + r.id + " has no column '" + column + "'");
  os << "# " << (r.sweep_variable.empty() ? "index" : r.sweep_variable) << ' ' << column << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < r.sweep.size() && i < values->size(); ++i) os << r.sweep[i] << ' ' << (*values)[i] << '\n';
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

} // namespace malab
