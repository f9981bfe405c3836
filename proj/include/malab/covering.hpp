#ifndef MALAB_COVERING_HPP
#define MALAB_COVERING_HPP

#include "malab/sections.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace malab {

struct VitaliOptions
{
  double delta0 = 0.1;
  double delta_min = 0.0125; ///< delta0 is halved down to this value until coverage holds
};

/// Greedy cover of a region by maximal interior sections: selected centers
/// y_i have pairwise disjoint cores S(y_i, delta0 hbar_i) and the sections
/// S(y_i, hbar_i / 2) cover the region.
struct CoveringResult
{
  std::vector<std::size_t> centers;
  std::vector<double> heights; ///< hbar(y_i), non-increasing
  double delta0 = 0.0;
  int attempts = 0;               ///< delta0 values tried
  double coverage_defect = 0.0;   ///< measure of region nodes left uncovered
  std::size_t uncovered = 0;
  std::size_t disjointness_violations = 0; ///< cells claimed by two or more cores
  double region_measure = 0.0;
  double union_measure = 0.0; ///< measure of the union of the half-height sections

  bool passed() const { return disjointness_violations == 0 && uncovered == 0; }
};

/// Throws InvalidArgument for an empty region or a region node that is not
/// inside the domain or has no positive maximal height.
CoveringResult vitali_cover(const PotentialField& potential, const std::vector<std::size_t>& region,
                            const VitaliOptions& options = {});

/// Recounts core overlaps of a result from scratch (exact cell check).
std::size_t count_core_overlaps(const PotentialField& potential, const CoveringResult& result);

/// CSV rows: x, y, hbar, delta0.
void write_covering_csv(std::ostream& os, const PotentialField& potential, const CoveringResult& result);

struct DensityHeight
{
  std::size_t node = 0;
  double t = 0.0;
  double density = 0.0; ///< |S(x, t) inter O| / |S(x, t)|
};

/// For each x in O, a height t_x in (0, t_max] whose section has density
/// closest to eps among the section's distinct sizes (exact search over the
/// nested family).
std::vector<DensityHeight> density_heights(const PotentialField& potential, const std::vector<std::size_t>& set,
                                           double eps, double t_max);

struct CoveringVerification
{
  double set_measure = 0.0;   ///< |O|
  double union_measure = 0.0; ///< |union S(x_k, t_k)|
  double slack = 0.0;         ///< measure of the two outermost cell layers of the union
  double ratio = 0.0;         ///< |O| / |union|
  std::size_t uncovered = 0;  ///< admitted points of O outside the union
  bool covered = false;
  bool bound_holds = false;   ///< |O| <= sqrt(eps) |union| + slack

  bool passed() const { return covered && bound_holds; }
};

/// Checks O inside the union of the family and the measure bound.
CoveringVerification verify_covering(const PotentialField& potential, const std::vector<std::size_t>& set,
                                     const std::vector<DensityHeight>& family, double eps,
                                     const std::vector<std::size_t>& must_cover);

struct CoveringSelection
{
  std::vector<DensityHeight> selected;
  std::vector<DensityHeight> rejected; ///< density outside [0.9 eps, 1.1 eps]
  CoveringVerification verification;
};

/// Greedy subfamily: admitted points are visited by decreasing t_x and a
/// point not yet covered by the selected sections contributes its own
/// section. The covering and measure conclusions are then verified.
CoveringSelection covering_select(const PotentialField& potential, const std::vector<std::size_t>& set,
                                  const std::vector<DensityHeight>& heights, double eps);

/// Heights log-spaced in [t_min, c_cap] (12 values), t_min the smallest
/// height whose section has 8 cells; only c_cap when that exceeds c_cap.
std::vector<double> maximal_function_heights(const PotentialField& potential, std::size_t node, double c_cap);

/// M(f)(x) = max over the height grid of the section average of |f|, at
/// every inside node (NaN elsewhere).
ScalarField maximal_function(const PotentialField& potential, const ScalarField& f, double c_cap);

/// Section average of |f| over S(x, t), weighted by quadrature weights.
double section_average(const PotentialField& potential, const ScalarField& f, std::size_t node, double t);

struct StrongTypeReport
{
  double p = 0.0;
  double maximal_norm = 0.0;
  double f_norm = 0.0;
  double ratio = 0.0;
};

/// ||M(f)||_p / ||f||_p over inside nodes. Throws InvalidArgument for
/// p <= 1 or ||f||_p = 0.
StrongTypeReport strong_type_ratio(const PotentialField& potential, const ScalarField& f, double p, double c_cap);

} // namespace malab

#endif
