#ifndef MALAB_STABILITY_HPP
#define MALAB_STABILITY_HPP

#include "malab/lma_solver.hpp"
#include "malab/report.hpp"

#include <string>
#include <vector>

namespace malab {

/// g0 in the perturbed density 1 + eps * g0.
enum class DensityForm { sine, constant };

std::string to_string(DensityForm form);
DensityForm density_form_from_string(const std::string& name);

/// 1 + eps * g0 with g0 = sin(pi x') sin(pi y') on the bounding box mapped to
/// [-1, 1]^2, or g0 = 1.
ScalarField perturbed_density(const GridPtr& grid, double eps, DensityForm form);

struct StabilityOptions
{
  MaSolverOptions ma;
  LmaOptions lma;
};

/// Solves det D^2 phi = 1 + eps g0 with zero boundary data.
PotentialField solve_perturbed(const GridPtr& grid, double eps, DensityForm form, const StabilityOptions& options = {});

/// Interior nodes of a grid as a mask.
NodeMask interior_mask(const Grid& grid);

/// ||Phi - W||_{L^q} of the cofactor matrices (Frobenius norm per node) over
/// the interior nodes. Throws InvalidArgument for potentials on different grids.
double cofactor_distance(const PotentialField& phi, const PotentialField& w, double q);

/// For each eps in [0, 0.5): solves the perturbed and the unit-density
/// problems and records ||Phi - W||_{L^q}. Asserts strict decrease as eps
/// shrinks and a positive log-log slope. With DensityForm::constant the
/// scaling oracle |sqrt(1 + eps) - 1| ||W||_{L^q} is also asserted to 5%.
ExperimentReport cofactor_stability_sweep(const GridPtr& grid, std::vector<double> eps, double q,
                                          DensityForm form = DensityForm::sine, const StabilityOptions& options = {});

struct SobolevPair
{
  double hessian_distance = 0.0; ///< ||D^2 phi1 - D^2 phi2||_{L^gamma}
  double density_l1 = 0.0;       ///< ||g1 - g2||_{L^1}
};

SobolevPair sobolev_stability(const PotentialField& phi1, const PotentialField& phi2, double gamma);

/// Pairs g1 = 1 + eps g0 against g2 = 1 over the eps list; asserts the
/// Hessian distance decreases with eps and reports its log-log slope against
/// ||g1 - g2||_{L^1}. DensityForm::constant adds the scaling oracle.
ExperimentReport sobolev_stability_sweep(const GridPtr& grid, std::vector<double> eps, double gamma,
                                         DensityForm form = DensityForm::sine, const StabilityOptions& options = {});

struct ApproximationMeasure
{
  double sup_difference = 0.0; ///< max |u - h| over the inner region
  double cofactor_l2 = 0.0;    ///< ||Phi - W||_{L^2}
  double f_l2 = 0.0;
  ScalarField u;
  ScalarField h;
};

/// u solves trace(Phi D^2 u) = f and h solves trace(W D^2 h) = 0, both with
/// Dirichlet datum `boundary`; the difference is measured on the inside
/// nodes within `inner_radius` of the centre of the bounding box.
ApproximationMeasure approximation_instance(const PotentialField& phi, const PotentialField& w, const ScalarField& f,
                                            const PointFunction& boundary, double inner_radius,
                                            const StabilityOptions& options = {});

/// Sweeps eps with phi = solve_perturbed(eps) against w = solve_perturbed(0).
/// For f = 0 asserts ||u - h||_inf strictly decreasing and, when eps = 0 is
/// swept, below 1e-8. For f != 0 reports C = ||u - h||_inf / ||f||_{L^2} at
/// eps = 0.
ExperimentReport approximation_experiment(const GridPtr& grid, std::vector<double> eps, const ScalarField& f,
                                          const PointFunction& boundary, double inner_radius,
                                          const StabilityOptions& options = {});

struct ConvexRatios
{
  bool applicable = false; ///< v certified convex
  bool degenerate = false; ///< f vanishes identically
  double min_eigenvalue = 0.0;
  double f_sup = 0.0;
  std::vector<double> gammas;
  std::vector<double> ratios; ///< ||D^2 v||_{L^gamma} / ||f||_inf
  ScalarField v;
};

/// Solves trace(Phi D^2 v) = f with zero data and, when v is convex
/// (smallest Hessian eigenvalue >= -1e-6 times the largest), measures the
/// ratios.
ConvexRatios convex_w21e_ratios(const PotentialField& potential, const ScalarField& f,
                                const std::vector<double>& gammas, const StabilityOptions& options = {});

/// f = 2 (1 + eps g0) on spacings h and h/2; asserts every ratio finite and
/// the two spacings within a factor 2.
ExperimentReport convex_w21e_check(const ConvexDomain& domain, double spacing, double eps,
                                   const std::vector<double>& gammas, const StabilityOptions& options = {});

struct ContactDefect
{
  std::size_t cells = 0;
  double section_measure = 0.0; ///< interior part of the section
  double defect_measure = 0.0;  ///< interior section cells outside A_sigma
  double fraction = 0.0;
};

/// Boundary section S(p, t) against the full-domain quasi-Euclidean mask,
/// with ratios over pairs at least two spacings apart.
/// Throws InvalidArgument when the section holds fewer than 8 interior cells.
ContactDefect contact_defect(const PotentialField& potential, const BoundarySample& at, double t, double sigma);

/// Sweeps eps at the boundary sample nearest `point`; asserts the defect
/// fraction non-increasing as eps shrinks and at most `small` at the
/// smallest eps.
ExperimentReport contact_set_experiment(const GridPtr& grid, std::vector<double> eps, double sigma, double t,
                                        const Vec2& point, double small = 0.1, const StabilityOptions& options = {});

struct W2pMeasure
{
  double hessian_norm = 0.0; ///< ||D^2 u||_{L^p}, a quasi-norm for p < 1
  double f_norm = 0.0;       ///< ||f||_{L^q}
  double ratio = 0.0;
};

/// ||D^2 u||_{L^p} / ||f||_{L^q} over the interior nodes for a given u.
W2pMeasure w2p_measure(const ScalarField& u, const ScalarField& f, double p, double q);

/// Solves trace(A D^2 u) = f with zero data and measures it.
W2pMeasure w2p_ratio(const MatrixField& coefficient, const ScalarField& f, double p, double q,
                     const StabilityOptions& options = {});

struct W2pSweepOptions
{
  double sup_factor = 3.0;        ///< sup R <= sup_factor * median R
  double refinement_factor = 2.0; ///< R(h) / R(h/2) within this factor
  double scaling = 10.0;          ///< f -> scaling * f leaves R unchanged
  double scaling_tol = 1e-6;
  double small_p = 0.25;          ///< exponent of the small-exponent regime
  double wide_eps = 0.8;          ///< pinching of that regime, lambda = 1 - wide_eps
};

/// Needs 1 < p < q and q > 2. Runs every eps at spacing h and h/2.
ExperimentReport w2p_ratio_sweep(const ConvexDomain& domain, double spacing, std::vector<double> eps, double p,
                                 double q, const PointFunction& f, const W2pSweepOptions& sweep = {},
                                 const StabilityOptions& options = {});

struct GeometricIteration
{
  double ratio = 0.0; ///< sqrt(2 eps0)
  double s = 0.0;     ///< M^q sqrt(2 eps0)
  /// bound[k - 1] bounds a_k: bound[0] = a1 and
  /// a_{k+1} <= r^k a1 + sum_{i=1}^{k} r^{k+1-i} b_i.
  std::vector<double> bound;
  double weighted_partial = 0.0; ///< sum_k M^{kq} bound[k - 1]
  /// (a1 / r) s / (1 - s) + s / (1 - s) sum_i M^{iq} b_i, the limit of the
  /// weighted sum for an infinite sequence; a1 / r + sum M^{iq} b_i at s = 1/2.
  double weighted_closed_form = 0.0;
};

/// `b` holds b_1, ..., b_K; the result bounds a_1, ..., a_{K+1}. Throws
/// InvalidArgument for eps0 outside (0, 1/2) or M^q sqrt(2 eps0) > 1/2.
GeometricIteration geometric_iteration_check(double a1, const std::vector<double>& b, double eps0, double M,
                                             double q);

struct IterationAudit
{
  std::vector<std::size_t> violations; ///< 1-based k with a_k above its bound
  double weighted_sum = 0.0;           ///< sum_k M^{kq} a_k
  bool passed() const { return violations.empty(); }
};

/// Compares measured a_1, a_2, ... with the bounds (relative slack `tol`).
IterationAudit audit_iteration(const GeometricIteration& bound, const std::vector<double>& a, double M, double q,
                               double tol = 1e-12);

/// a_k = |Omega \ G_{M^k}(u / c)| for the LMA solution with the pinched
/// density, c its median opening, and b_k = |{M(f^2) > c^2 M^{2(k+1)}}|. Asserts a_k non-increasing and the
/// weighted sum finite; the recursion audit with eps0 chosen by
/// M^q sqrt(2 eps0) = 1/2 is reported without assertion.
ExperimentReport geometric_iteration_experiment(const GridPtr& grid, double eps, const PointFunction& f, double M,
                                                double q, std::size_t levels, const StabilityOptions& options = {});

} // namespace malab

#endif
