#include "malab/config.hpp"

#include "malab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace malab {

std::string to_string(SourceKind kind)
{
  switch (kind) {
  case SourceKind::standard: return "default";
  case SourceKind::smooth: return "smooth";
  case SourceKind::singular: return "singular";
  case SourceKind::zero: return "zero";
  }
  return "default";
}

const std::vector<std::string>& experiment_names()
{
  static const std::vector<std::string> names{
      "solve_ma",           "solve_lma",    "sections",    "cover",       "maximal",
      "goodsets",           "barrier",      "cofactor_stability", "sobolev_stability",
      "approximation",      "convex_w21e",  "contact_set", "w2p_ratio",   "geometric_iteration",
      "suite"};
  return names;
}

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// strips a trailing comment that is not inside quotes
std::string strip_comment(const std::string& line)
{
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

struct Item
{
  std::string text;
  bool quoted = false;
};

using Items = std::vector<Item>;

// comma-separated items, optionally wrapped in brackets
bool split_items(std::string value, Items& out, std::string& error)
{
  value = trim(value);
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = trim(value.substr(1, value.size() - 2));
  if (value.empty()) {
    error = "empty value";
    return false;
  }
  std::string current;
  bool quoted = false, was_quoted = false;
  auto flush = [&] {
    const std::string t = was_quoted ? current : trim(current);
    out.push_back({t, was_quoted});
    current.clear();
    was_quoted = false;
  };
  for (char c : value) {
    if (c == '"') {
      if (!quoted && !trim(current).empty()) {
        error = "stray quote";
        return false;
      }
      if (!quoted) current.clear();
      quoted = !quoted;
      was_quoted = true;
      continue;
    }
    if (c == ',' && !quoted) {
      flush();
      continue;
    }
    if (!quoted && was_quoted) {
      if (c != ' ' && c != '\t') {
        error = "text after closing quote";
        return false;
      }
      continue;
    }
    current += c;
  }
  if (quoted) {
    error = "unterminated string";
    return false;
  }
  flush();
  for (const auto& it : out)
    if (it.text.empty() && !it.quoted) {
      error = "empty list entry";
      return false;
    }
  return true;
}

std::optional<double> plain_number(const std::string& s)
{
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<double> number(const Item& item)
{
  if (item.quoted) return std::nullopt;
  const auto slash = item.text.find('/');
  if (slash == std::string::npos) return plain_number(item.text);
  const auto a = plain_number(trim(item.text.substr(0, slash)));
  const auto b = plain_number(trim(item.text.substr(slash + 1)));
  if (!a || !b || *b == 0.0) return std::nullopt;
  return *a / *b;
}

std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

std::string quote(const std::string& s) { return '"' + s + '"'; }

struct Context
{
  ExperimentConfig& config;
  int line;
  std::string key;
  std::vector<ConfigError>& errors;

  void fail(const std::string& message) const { errors.push_back({line, key, message}); }
};

using Setter = std::function<void(const Items&, const Context&)>;

bool single(const Items& v, const Context& c)
{
  if (v.size() != 1) {
    c.fail("expected a single value, got " + std::to_string(v.size()));
    return false;
  }
  return true;
}

std::optional<double> scalar(const Items& v, const Context& c)
{
  if (!single(v, c)) return std::nullopt;
  const auto x = number(v[0]);
  if (!x) c.fail("malformed number '" + v[0].text + "'");
  return x;
}

std::optional<std::vector<double>> numbers(const Items& v, const Context& c)
{
  std::vector<double> out;
  for (const auto& it : v) {
    const auto x = number(it);
    if (!x) {
      c.fail("malformed number '" + it.text + "'");
      return std::nullopt;
    }
    out.push_back(*x);
  }
  return out;
}

std::optional<std::string> word(const Items& v, const Context& c)
{
  if (!single(v, c)) return std::nullopt;
  return v[0].text;
}

Setter positive(double ExperimentConfig::*field)
{
  return [field](const Items& v, const Context& c) {
    if (const auto x = scalar(v, c)) {
      if (*x <= 0.0)
        c.fail("must be positive, got " + v[0].text);
      else
        c.config.*field = *x;
    }
  };
}

Setter positive_check(double CheckSettings::*field)
{
  return [field](const Items& v, const Context& c) {
    if (const auto x = scalar(v, c)) {
      if (*x <= 0.0)
        c.fail("must be positive, got " + v[0].text);
      else
        c.config.checks.*field = *x;
    }
  };
}

Setter in_range(double ExperimentConfig::*field, double lo, double hi, bool lo_open, bool hi_open)
{
  return [=](const Items& v, const Context& c) {
    if (const auto x = scalar(v, c)) {
      const bool ok = (lo_open ? *x > lo : *x >= lo) && (hi_open ? *x < hi : *x <= hi);
      if (!ok)
        c.fail("must lie in " + std::string(lo_open ? "(" : "[") + format_double(lo) + ", " + format_double(hi) +
               (hi_open ? ")" : "]") + ", got " + v[0].text);
      else
        c.config.*field = *x;
    }
  };
}

Setter integer(int ExperimentConfig::*field, int lo)
{
  return [=](const Items& v, const Context& c) {
    if (const auto x = scalar(v, c)) {
      if (*x != std::floor(*x) || *x < lo || *x > 1e6)
        c.fail("must be an integer >= " + std::to_string(lo) + ", got " + v[0].text);
      else
        c.config.*field = static_cast<int>(*x);
    }
  };
}

Setter domain_length(double DomainParams::*field)
{
  return [field](const Items& v, const Context& c) {
    if (const auto x = scalar(v, c)) {
      if (*x <= 0.0)
        c.fail("must be positive, got " + v[0].text);
      else
        c.config.domain.*field = *x;
    }
  };
}

std::optional<Vec2> point(const Items& v, const Context& c)
{
  const auto xs = numbers(v, c);
  if (!xs) return std::nullopt;
  if (xs->size() != 2) {
    c.fail("expected two coordinates");
    return std::nullopt;
  }
  return Vec2{(*xs)[0], (*xs)[1]};
}

struct Key
{
  std::string section;
  std::string name;
  Setter set;
};

const std::vector<Key>& keys()
{
  using C = ExperimentConfig;
  static const std::vector<Key> table{
      {"experiment", "name",
       [](const Items& v, const Context& c) {
         if (const auto w = word(v, c)) {
           const auto& names = experiment_names();
           if (std::find(names.begin(), names.end(), *w) == names.end())
             c.fail("unknown experiment '" + *w + "'");
           else
             c.config.experiment = *w;
         }
       }},
      {"domain", "kind",
       [](const Items& v, const Context& c) {
         if (const auto w = word(v, c)) {
           try {
             c.config.domain.kind = domain_kind_from_string(*w);
           } catch (const InvalidArgument& e) {
             c.fail(e.what());
           }
         }
       }},
      {"domain", "center",
       [](const Items& v, const Context& c) {
         if (const auto p = point(v, c)) c.config.domain.center = *p;
       }},
      {"domain", "radius", domain_length(&DomainParams::radius)},
      {"domain", "semi_a", domain_length(&DomainParams::semi_a)},
      {"domain", "semi_b", domain_length(&DomainParams::semi_b)},
      {"domain", "side", domain_length(&DomainParams::side)},
      {"domain", "exponent",
       [](const Items& v, const Context& c) {
         if (const auto x = scalar(v, c)) {
           if (*x < 2.0)
             c.fail("must be at least 2, got " + v[0].text);
           else
             c.config.domain.exponent = *x;
         }
       }},
      {"domain", "vertices",
       [](const Items& v, const Context& c) {
         const auto xs = numbers(v, c);
         if (!xs) return;
         if (xs->size() % 2 != 0 || xs->size() < 6) {
           c.fail("expected x, y pairs for at least three vertices");
           return;
         }
         c.config.domain.vertices.clear();
         for (std::size_t i = 0; i < xs->size(); i += 2) c.config.domain.vertices.push_back({(*xs)[i], (*xs)[i + 1]});
       }},
      {"grid", "spacing", positive(&C::spacing)},
      {"density", "eps",
       [](const Items& v, const Context& c) {
         const auto xs = numbers(v, c);
         if (!xs) return;
         for (std::size_t i = 0; i < xs->size(); ++i)
           if ((*xs)[i] < 0.0 || (*xs)[i] >= 1.0) {
             c.fail("entries must lie in [0, 1), got " + v[i].text);
             return;
           }
         c.config.eps = *xs;
       }},
      {"density", "g0",
       [](const Items& v, const Context& c) {
         if (const auto w = word(v, c)) {
           try {
             c.config.g0 = density_form_from_string(*w);
           } catch (const InvalidArgument& e) {
             c.fail(e.what());
           }
         }
       }},
      {"density", "source",
       [](const Items& v, const Context& c) {
         if (const auto w = word(v, c)) {
           for (auto k : {SourceKind::standard, SourceKind::smooth, SourceKind::singular, SourceKind::zero})
             if (to_string(k) == *w) {
               c.config.source = k;
               return;
             }
           c.fail("unknown source '" + *w + "' (default, smooth, singular, zero)");
         }
       }},
      {"density", "lambda", in_range(&C::lambda, 0.0, 1.0, false, true)},
      {"density", "Lambda",
       [](const Items& v, const Context& c) {
         if (const auto x = scalar(v, c)) {
           if (*x != 0.0 && *x < 1.0)
             c.fail("must be 0 or at least 1, got " + v[0].text);
           else
             c.config.Lambda = *x;
         }
       }},
      {"solver", "tol_ma", positive(&C::tol_ma)},
      {"solver", "tol_lma", positive(&C::tol_lma)},
      {"solver", "tol_convex", positive(&C::tol_convex)},
      {"solver", "max_iter", integer(&C::max_iter, 1)},
      {"sweep", "p", positive(&C::p)},
      {"sweep", "q", positive(&C::q)},
      {"sweep", "cofactor_q", in_range(&C::cofactor_q, 1.0, 1e300, false, true)},
      {"sweep", "gamma",
       [](const Items& v, const Context& c) {
         const auto xs = numbers(v, c);
         if (!xs) return;
         for (std::size_t i = 0; i < xs->size(); ++i)
           if ((*xs)[i] <= 1.0) {
             c.fail("entries must exceed 1, got " + v[i].text);
             return;
           }
         c.config.gamma = *xs;
       }},
      {"sweep", "sobolev_gamma", in_range(&C::sobolev_gamma, 1.0, 1e300, true, true)},
      {"sweep", "sigma", positive(&C::sigma)},
      {"sweep", "section_height", positive(&C::section_height)},
      {"sweep", "inner_radius", positive(&C::inner_radius)},
      {"sweep", "M", in_range(&C::M, 1.0, 1e300, true, true)},
      {"sweep", "levels", integer(&C::levels, 1)},
      {"sweep", "seed",
       [](const Items& v, const Context& c) {
         if (!single(v, c)) return;
         std::uint64_t s = 0;
         const auto& t = v[0].text;
         const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
         if (v[0].quoted || ec != std::errc() || ptr != t.data() + t.size())
           c.fail("malformed seed '" + t + "'");
         else
           c.config.seed = s;
       }},
      {"sweep", "delta",
       [](const Items& v, const Context& c) {
         const auto xs = numbers(v, c);
         if (!xs) return;
         for (std::size_t i = 0; i < xs->size(); ++i)
           if ((*xs)[i] <= 0.0 || (*xs)[i] > 1.0) {
             c.fail("entries must lie in (0, 1], got " + v[i].text);
             return;
           }
         c.config.delta = *xs;
       }},
      {"sweep", "point",
       [](const Items& v, const Context& c) {
         if (const auto p = point(v, c)) c.config.point = *p;
       }},
      {"sweep", "small_p", in_range(&C::small_p, 0.0, 1.0, true, true)},
      {"sweep", "wide_eps", in_range(&C::wide_eps, 0.0, 1.0, true, true)},
      {"checks", "sup_factor", positive_check(&CheckSettings::sup_factor)},
      {"checks", "refinement_factor", positive_check(&CheckSettings::refinement_factor)},
      {"checks", "scaling_tol", positive_check(&CheckSettings::scaling_tol)},
      {"checks", "small", positive_check(&CheckSettings::small)},
      {"output", "dir",
       [](const Items& v, const Context& c) {
         if (const auto w = word(v, c)) {
           if (w->empty())
             c.fail("empty directory");
           else
             c.config.out = *w;
         }
       }},
      {"suite", "experiments",
       [](const Items& v, const Context& c) {
         std::vector<std::string> list;
         const auto& names = experiment_names();
         for (const auto& it : v) {
           if (it.text == "suite" || std::find(names.begin(), names.end(), it.text) == names.end()) {
             c.fail("unknown suite experiment '" + it.text + "'");
             return;
           }
           list.push_back(it.text);
         }
         c.config.suite = list;
       }},
  };
  return table;
}

// keys accepted before the first section header
const std::map<std::string, std::string>& shortcuts()
{
  static const std::map<std::string, std::string> m{{"experiment", "experiment.name"},
                                                    {"domain", "domain.kind"},
                                                    {"eps", "density.eps"},
                                                    {"spacing", "grid.spacing"},
                                                    {"out", "output.dir"}};
  return m;
}

const Key* find_key(const std::string& canonical)
{
  for (const auto& k : keys())
    if (k.section + "." + k.name == canonical) return &k;
  return nullptr;
}

bool known_section(const std::string& s)
{
  for (const auto& k : keys())
    if (k.section == s) return true;
  return false;
}

} // namespace

ConfigParse parse_config(const std::string& text)
{
  ConfigParse result;
  ExperimentConfig config;
  std::map<std::string, int> seen;
  std::string section;
  bool skipping = false;
  int line_no = 0;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        result.errors.push_back({line_no, "", "malformed section header '" + line + "'"});
        skipping = true;
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      skipping = !known_section(section);
      if (skipping) result.errors.push_back({line_no, section, "unknown section [" + section + "]"});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      result.errors.push_back({line_no, "", "expected 'key = value', got '" + line + "'"});
      continue;
    }
    if (skipping) continue;
    const std::string name = trim(line.substr(0, eq));
    std::string canonical;
    if (section.empty()) {
      const auto it = shortcuts().find(name);
      if (it == shortcuts().end()) {
        result.errors.push_back({line_no, name, "unknown key '" + name + "' before the first section"});
        continue;
      }
      canonical = it->second;
    } else {
      canonical = section + "." + name;
    }
    const Key* key = find_key(canonical);
    if (!key) {
      result.errors.push_back({line_no, canonical, "unknown key '" + name + "' in [" + section + "]"});
      continue;
    }
    if (const auto prev = seen.find(canonical); prev != seen.end()) {
      result.errors.push_back({line_no, canonical,
                               "duplicate key, set on lines " + std::to_string(prev->second) + " and " +
                                   std::to_string(line_no)});
      continue;
    }
    seen[canonical] = line_no;
    Items items;
    std::string error;
    const Context ctx{config, line_no, canonical, result.errors};
    if (!split_items(line.substr(eq + 1), items, error)) {
      ctx.fail(error);
      continue;
    }
    key->set(items, ctx);
  }

  const int end_line = std::max(line_no, 1);
  for (const char* required : {"experiment.name", "domain.kind"})
    if (!seen.count(required))
      result.errors.push_back({end_line, required, "missing required key"});
  if (config.experiment == "suite" && config.suite.empty() && !seen.count("suite.experiments"))
    result.errors.push_back({end_line, "suite.experiments", "suite needs a list of experiments"});

  if (seen.count("domain.kind")) {
    try {
      ConvexDomain::build(config.domain);
    } catch (const Error& e) {
      result.errors.push_back({seen["domain.kind"], "domain", e.what()});
    }
  }

  if (result.errors.empty()) result.config = std::move(config);
  std::stable_sort(result.errors.begin(), result.errors.end(),
                   [](const ConfigError& a, const ConfigError& b) { return a.line < b.line; });
  return result;
}

std::string format_errors(const std::vector<ConfigError>& errors)
{
  std::string s;
  for (const auto& e : errors)
    s += "line " + std::to_string(e.line) + ": " + (e.key.empty() ? "" : e.key + ": ") + e.message + "\n";
  return s;
}

std::string emit_config(const ExperimentConfig& c)
{
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [&](const std::string& k, double v) { kv(k, format_double(v)); };
  auto pt = [&](const std::string& k, const Vec2& p) { kv(k, format_double(p.x) + ", " + format_double(p.y)); };

  os << "[experiment]\n";
  kv("name", quote(c.experiment));
  os << "\n[domain]\n";
  kv("kind", to_string(c.domain.kind));
  pt("center", c.domain.center);
  num("radius", c.domain.radius);
  num("semi_a", c.domain.semi_a);
  num("semi_b", c.domain.semi_b);
  num("side", c.domain.side);
  num("exponent", c.domain.exponent);
  if (!c.domain.vertices.empty()) {
    std::vector<double> flat;
    for (const auto& v : c.domain.vertices) {
      flat.push_back(v.x);
      flat.push_back(v.y);
    }
    kv("vertices", join_doubles(flat));
  }
  os << "\n[grid]\n";
  num("spacing", c.spacing);
  os << "\n[density]\n";
  kv("eps", join_doubles(c.eps));
  kv("g0", to_string(c.g0));
  kv("source", to_string(c.source));
  num("lambda", c.lambda);
  num("Lambda", c.Lambda);
  os << "\n[solver]\n";
  num("tol_ma", c.tol_ma);
  num("tol_lma", c.tol_lma);
  num("tol_convex", c.tol_convex);
  kv("max_iter", std::to_string(c.max_iter));
  os << "\n[sweep]\n";
  num("p", c.p);
  num("q", c.q);
  num("cofactor_q", c.cofactor_q);
  kv("gamma", join_doubles(c.gamma));
  num("sobolev_gamma", c.sobolev_gamma);
  num("sigma", c.sigma);
  num("section_height", c.section_height);
  num("inner_radius", c.inner_radius);
  num("M", c.M);
  kv("levels", std::to_string(c.levels));
  kv("seed", std::to_string(c.seed));
  kv("delta", join_doubles(c.delta));
  pt("point", c.point);
  num("small_p", c.small_p);
  num("wide_eps", c.wide_eps);
  os << "\n[checks]\n";
  num("sup_factor", c.checks.sup_factor);
  num("refinement_factor", c.checks.refinement_factor);
  num("scaling_tol", c.checks.scaling_tol);
  num("small", c.checks.small);
  os << "\n[output]\n";
  kv("dir", quote(c.out));
  if (!c.suite.empty()) {
    os << "\n[suite]\n";
    std::string list;
    for (std::size_t i = 0; i < c.suite.size(); ++i) list += (i ? ", " : "") + c.suite[i];
    kv("experiments", list);
  }
  return os.str();
}

} // namespace malab
