#ifndef MALAB_GOOD_SETS_HPP
#define MALAB_GOOD_SETS_HPP

#include "malab/sections.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace malab {

struct GoodSetOptions
{
  double d_min_factor = 2.0;          ///< pairs with d^2 < d_min_factor * spacing^2 are skipped
  std::size_t full_scan_limit = 10000; ///< above this many interior nodes, centers use every 2nd node per axis
};

/// M*(x) = 2 sup |u(y) - u(x) - grad u(x).(y - x)| / d(y, x)^2 over inside
/// nodes y with d(y, x)^2 >= d_min; x lies in G_M(u) iff M*(x) <= M.
/// Throws InvalidArgument when no node qualifies.
double minimal_opening(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                       std::size_t node, double d_min);

/// Minimal openings over a set of interior centers.
struct OpeningField
{
  std::vector<std::size_t> centers;
  std::vector<double> opening;
  double d_min = 0.0;
  double center_weight = 1.0; ///< cells represented by one center (4 when subsampled)
};

OpeningField compute_openings(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                              const GoodSetOptions& options = {});
/// Openings at given interior nodes (no subsampling).
OpeningField compute_openings(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                              const std::vector<std::size_t>& centers, double d_min);

/// Centers with M* <= M.
NodeMask good_set_mask(const Grid& grid, const OpeningField& openings, double M);

/// Extreme quasi-Euclidean ratios d(y, x)^2 / |y - x|^2 per interior node x
/// over inside nodes y within the neighbourhood, and the instance constant
/// c = min_x (r_min r_max)^{-1/2} for which r_min >= sigma forces
/// r_max <= 1 / (c^2 sigma) at every node with r_min > 0.
struct QuasiEuclideanRatios
{
  ScalarField r_min;
  ScalarField r_max;
  double radius = 0.0; ///< neighbourhood radius, infinite for the full domain
  double c = 0.0;
};

/// `cells` is the neighbourhood radius in grid spacings; 0 selects the
/// whole domain.
QuasiEuclideanRatios quasi_euclidean_ratios(const PotentialField& potential, int cells = 5);

/// A_sigma: interior nodes whose r_min is at least sigma, up to a relative
/// rounding slack of 1e-12.
NodeMask local_quasi_euclidean_mask(const QuasiEuclideanRatios& ratios, double sigma);
NodeMask local_quasi_euclidean_mask(const PotentialField& potential, double sigma, int cells = 5);

/// Full-domain r_min at the given nodes, taken over interior targets y with
/// |y - x| >= min_separation. Closer pairs and closure-valued boundary
/// nodes only measure discretization noise in the tangent gap.
std::vector<double> quasi_euclidean_min_ratio(const PotentialField& potential, const std::vector<std::size_t>& nodes,
                                              double min_separation);

/// sigma(beta) = (c beta^{(m-1)/2})^{-2}.
double inclusion_sigma(double c, double beta, double m);

struct InclusionReport
{
  double beta = 0.0;
  double m = 0.0;
  double sigma = 0.0;
  std::size_t evaluated = 0;  ///< centers checked
  std::size_t large_hessian = 0; ///< centers with max |D_ij u| > beta^m
  std::vector<std::size_t> violations; ///< large Hessian, yet in A_sigma and G_beta
  double violation_fraction = 0.0;
};

/// Node-wise check of {|D_ij u| > beta^m} inside (Omega \ A_sigma) u (Omega \ G_beta)
/// over the opening centers, with central-difference Hessians.
InclusionReport inclusion_check(const ScalarField& u, const OpeningField& openings, const QuasiEuclideanRatios& ratios,
                                double beta, double m);

struct DistributionSample
{
  double beta = 0.0;
  double F = 0.0;  ///< |{max |D_ij u| > beta^m}|
  double F1 = 0.0; ///< |Omega \ A_sigma(beta)|
  double F2 = 0.0; ///< |Omega \ G_beta|
};

/// Distribution functions over the opening centers, each center weighted by
/// its cell area times center_weight.
std::vector<DistributionSample> distribution_functions(const ScalarField& u, const OpeningField& openings,
                                                       const QuasiEuclideanRatios& ratios,
                                                       const std::vector<double>& betas, double m);

/// Log-spaced betas from the median opening to the sixth largest, the
/// range where the measure of Omega \ G_beta stays above five centers.
std::vector<double> tail_betas(const OpeningField& openings, std::size_t count = 12);

void write_distribution_csv(std::ostream& os, const std::vector<DistributionSample>& samples);

struct DecayFit
{
  double tau = 0.0;
  double C = 0.0;
  double residual = 0.0; ///< weighted RMS of the log residuals
  std::size_t used = 0;
};

/// Fits measure = C beta^{-tau} by least squares in log-log space, weighting
/// each sample by its measure in cells. Samples at or below 5 cells are
/// dropped; throws InvalidArgument when fewer than 5 remain.
DecayFit decay_fit(const std::vector<std::pair<double, double>>& samples, double cell_area);

/// |G_{N/t} inter S| / |S| over the interior cells of the section.
double density_in_section(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                          const Section& section, double N, double d_min);

} // namespace malab

#endif
