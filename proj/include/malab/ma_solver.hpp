#ifndef MALAB_MA_SOLVER_HPP
#define MALAB_MA_SOLVER_HPP

#include "malab/calculus.hpp"
#include "malab/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace malab {

using GradientFunction = std::function<Vec2(const Vec2&)>;

/// Boundary point carrying the potential's value and gradient there.
struct BoundarySample
{
  Vec2 point;
  Vec2 normal; ///< outward
  double phi = 0.0;
  Vec2 grad;
};

/// Grid-sampled convex potential with its derivatives.
struct PotentialField
{
  GridPtr grid;
  ScalarField phi;
  VectorField grad;
  MatrixField hess;
  /// Monge-Ampere density det D^2 phi as prescribed (solved potentials) or
  /// as measured by the discrete Hessian (analytic potentials).
  ScalarField g;
  double lambda = 0.0;
  double Lambda = 0.0;
  /// Minimum Hessian eigenvalue over interior nodes.
  double convexity_margin = 0.0;
  std::vector<BoundarySample> boundary;

  // solver diagnostics (zero for analytic potentials)
  int newton_iterations = 0;
  double residual = 0.0;

  /// Bilinear interpolation of phi.
  double value(const Vec2& p) const { return interpolate(phi, p); }

  /// Potential given in closed form. When `gradient` is empty, boundary
  /// gradients come from central differences of `phi`.
  static PotentialField from_function(const GridPtr& grid, const PointFunction& phi,
                                      const GradientFunction& gradient = {}, std::size_t boundary_count = 0);
};

/// Cofactor matrix field Phi = (det D^2 phi) (D^2 phi)^{-1}.
struct CofactorField
{
  MatrixField cof;
  const PotentialField* source = nullptr;
};

struct MaSolverOptions
{
  double tol_ma = 1e-8;      ///< max-norm residual target
  int max_iter = 50;
  double damping_min = 1e-4; ///< smallest Newton step fraction tried
  double tol_convex = 1e-6;  ///< relative to Lambda
  std::size_t boundary_count = 0; ///< boundary samples; 0 picks from spacing
  std::size_t direct_limit = 257 * 257;
};

/// Damped Newton solve of det D^2 phi = g, phi = boundary on the boundary,
/// iterating on the convex branch so every linearization stays elliptic.
/// Throws InvalidArgument when g <= 0 at an interior node and SolverError
/// (carrying the last residual) on non-convergence or failed certification.
PotentialField solve_ma(const GridPtr& grid, const ScalarField& g, const PointFunction& boundary,
                        const MaSolverOptions& options = {});

/// Max-norm residual of det(D^2 u) - g over interior nodes.
double ma_residual(const ScalarField& u, const ScalarField& g);

CofactorField cofactor_field(const PotentialField& potential);

/// Row divergence sum_j D_j Phi^{ij} by central differences, at interior
/// nodes whose neighbours are all interior (NaN elsewhere).
VectorField cofactor_divergence(const CofactorField& cofactor);

struct ConvexityReport
{
  double min_eigenvalue = 0.0;
  std::size_t node = 0;
  Vec2 location;
  bool passed = false;
};

/// Minimum Hessian eigenvalue over interior nodes; passes iff >= -tol.
ConvexityReport certify_convexity(const PotentialField& potential, double tol);

struct SeparationReport
{
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double coarse_min_ratio = 0.0; ///< min ratio over every other sample
  double rho0 = 0.0;
  std::size_t pairs = 0;
  bool passed = false;
  std::string warning;
};

/// Quadratic separation on the boundary: over all pairs (x, x0) of boundary
/// samples, r = [phi(x) - phi(x0) - grad phi(x0).(x - x0)] / |x - x0|^2.
/// Passes iff min r > 0, max r is finite, and min r does not collapse under
/// sample refinement: doubling the sample density must keep min r above
/// `collapse_factor` times its value on every other sample. A ratio that
/// tends to zero as samples crowd a flat stretch therefore fails.
SeparationReport quadratic_separation_check(const PotentialField& potential, double collapse_factor = 0.5);

/// Pinched density 1 + eps * sin(pi x') sin(pi y'), where (x', y') maps the
/// domain's bounding box onto [-1, 1]^2.
ScalarField pinched_density(const GridPtr& grid, double eps);

/// Default number of boundary samples for a grid.
std::size_t default_boundary_count(const Grid& grid);

/// Tangent-plane gap phi(y) - phi(a) - grad phi(a).(y - a) for node y.
inline double tangent_gap(const PotentialField& pot, const Vec2& apoint, double aphi, const Vec2& agrad,
                          std::size_t y)
{
  return pot.phi[y] - aphi - dot(agrad, pot.grid->coords(y) - apoint);
}

} // namespace malab

#endif
