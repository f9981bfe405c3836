#ifndef MALAB_CONFIG_HPP
#define MALAB_CONFIG_HPP

#include "malab/domain.hpp"
#include "malab/stability.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace malab {

/// Source term f for the experiments that solve a linear problem.
/// `standard` picks the per-experiment default.
enum class SourceKind { standard, smooth, singular, zero };

std::string to_string(SourceKind kind);

struct CheckSettings
{
  double sup_factor = 3.0;
  double refinement_factor = 2.0;
  double scaling_tol = 1e-6;
  double small = 0.1; ///< contact-set defect bound at the smallest eps

  bool operator==(const CheckSettings&) const = default;
};

struct ExperimentConfig
{
  std::string experiment;
  DomainParams domain;
  double spacing = 1.0 / 32;
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025}; ///< single-eps experiments use the first entry
  DensityForm g0 = DensityForm::sine;
  SourceKind source = SourceKind::standard;
  double lambda = 0.0; ///< 0 means 1 - eps
  double Lambda = 0.0; ///< 0 means 1 + eps

  double tol_ma = 1e-8;
  double tol_lma = 1e-8;
  double tol_convex = 1e-6;
  int max_iter = 50;

  double p = 2.0;
  double q = 4.0;
  double cofactor_q = 2.0;
  std::vector<double> gamma{1.05, 1.1, 1.25};
  double sobolev_gamma = 1.5;
  double sigma = 0.4;
  double section_height = 0.1;
  double inner_radius = 0.5;
  double M = 1.25;
  int levels = 6;
  std::uint64_t seed = 7;
  std::vector<double> delta{0.5, 0.25};
  Vec2 point{0.0, -1.0};
  double small_p = 0.25;
  double wide_eps = 0.8;

  CheckSettings checks;
  std::string out = "out";
  std::vector<std::string> suite; ///< experiments run by `suite`

  bool operator==(const ExperimentConfig&) const = default;
};

/// Every experiment name accepted in configs, `suite` included.
const std::vector<std::string>& experiment_names();

struct ConfigError
{
  int line = 0; ///< 1-based; end-of-input line for missing keys
  std::string key;
  std::string message;
};

struct ConfigParse
{
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;
  bool ok() const { return errors.empty(); }
};

/// Sections [experiment] [domain] [grid] [density] [solver] [sweep] [checks]
/// [output] [suite] of `key = value` lines; `experiment`, `domain`, `eps`,
/// `spacing` and `out` are also accepted before the first section. Values are
/// numbers (a/b rationals allowed), bare or quoted words, and comma lists.
/// '#' starts a comment. Collects every error instead of stopping at the first.
ConfigParse parse_config(const std::string& text);

/// One "line N: key: message" per error.
std::string format_errors(const std::vector<ConfigError>& errors);

/// Canonical text with every field spelled out; parse_config inverts it exactly.
std::string emit_config(const ExperimentConfig& config);

} // namespace malab

#endif
