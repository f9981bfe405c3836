#ifndef MALAB_LMA_SOLVER_HPP
#define MALAB_LMA_SOLVER_HPP

#include "malab/ma_solver.hpp"

namespace malab {

struct LmaOptions
{
  double tol_lma = 1e-8;     ///< bound on the reported node residual
  double tol_psd = 1e-10;    ///< relative eigenvalue slack for the PSD check
  std::size_t direct_limit = 257 * 257;
};

/// Solution of trace(Phi D^2 u) = f with Dirichlet data.
struct LmaSolution
{
  ScalarField u;
  ScalarField f;
  PointFunction boundary;
  /// max |trace(Phi D^2 u) - f| over interior nodes
  double residual_max = 0.0;
  const CofactorField* cofactor = nullptr;
};

/// `f` must be finite at every inside node.
/// Solves the non-divergence system sum Phi^{ij} D_ij u = f at interior nodes
/// (centred 9-point stencil) with u = boundary through the Dirichlet closure.
/// Throws InvalidArgument when Phi is indefinite at some node and
/// SolverError when the system is singular; both messages name the smallest
/// coefficient eigenvalue and its location.
LmaSolution solve_lma(const CofactorField& cofactor, const ScalarField& f, const PointFunction& boundary,
                      const LmaOptions& options = {});

/// Same, for an arbitrary symmetric coefficient field.
LmaSolution solve_nondivergence(const MatrixField& coefficient, const ScalarField& f, const PointFunction& boundary,
                                const LmaOptions& options = {});

/// trace(A D^2 u) at interior nodes (central differences), NaN elsewhere.
ScalarField apply_operator(const MatrixField& coefficient, const ScalarField& u);

struct AbpReport
{
  double u_sup = 0.0;
  double f_l2 = 0.0;
  double diameter = 0.0;
  double ratio = 0.0; ///< u_sup / (diameter * f_l2), 0 when u and f vanish
  bool passed = false;
};

/// ABP-type ratio ||u||_inf / (diam(Omega) ||f||_{L^2}).
AbpReport abp_check(const LmaSolution& solution);

} // namespace malab

#endif
