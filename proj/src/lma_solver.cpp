#include "malab/lma_solver.hpp"

#include "malab/errors.hpp"
#include "malab/linear_system.hpp"

#include <cmath>
#include <sstream>

namespace malab {

namespace {

struct SmallestEigen
{
  double value = kInfinity;
  double scale = 0.0;
  Vec2 where;
};

SmallestEigen smallest_eigenvalue(const MatrixField& a)
{
  SmallestEigen s;
  const Grid& g = *a.grid;
  for (auto k : g.interior_nodes()) {
    const double e = a[k].min_eig();
    s.scale = std::max(s.scale, std::abs(a[k].max_eig()));
    if (e < s.value) {
      s.value = e;
      s.where = g.coords(k);
    }
  }
  return s;
}

std::string describe(const SmallestEigen& s)
{
  std::ostringstream os;
  os << "smallest coefficient eigenvalue " << s.value << " at (" << s.where.x << ", " << s.where.y << ")";
  return os.str();
}

} // namespace

ScalarField apply_operator(const MatrixField& coefficient, const ScalarField& u)
{
  ScalarField out(u.grid, std::numeric_limits<double>::quiet_NaN());
  for (auto k : u.grid->interior_nodes()) out[k] = trace_product(coefficient[k], central_hessian(u, k));
  return out;
}

LmaSolution solve_nondivergence(const MatrixField& coefficient, const ScalarField& f, const PointFunction& boundary,
                                const LmaOptions& options)
{
  const GridPtr& grid = coefficient.grid;
  const Grid& g = *grid;
  const SmallestEigen low = smallest_eigenvalue(coefficient);
  if (low.value < -options.tol_psd * std::max(1.0, low.scale))
    throw InvalidArgument("coefficient matrix is indefinite: " + describe(low));
  for (auto k : g.inside_nodes()) {
    if (!std::isfinite(f[k])) {
      std::ostringstream os;
      os << "right-hand side is not finite at (" << g.coords(k).x << ", " << g.coords(k).y << ")";
      throw InvalidArgument(os.str());
    }
    if (g.interior(k) && !(coefficient[k].trace() > 0.0))
      throw SolverError("linearized system is singular (vanishing coefficient row): " + describe(low), kInfinity);
  }

  const UnknownMap unknowns(g);
  const DirichletClosure closure(grid);
  const SparseMatrix a = assemble_operator(g, unknowns, closure, [&](std::size_t k) { return coefficient[k]; });
  Eigen::VectorXd x;
  try {
    x = solve_sparse(a, assemble_rhs(g, unknowns, closure, f, boundary), options.direct_limit);
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + "; " + describe(low), e.last_residual());
  }

  LmaSolution sol;
  sol.u = to_field(grid, unknowns, x);
  sol.f = f;
  sol.boundary = boundary;
  const ScalarField lu = apply_operator(coefficient, sol.u);
  for (auto k : g.interior_nodes()) sol.residual_max = std::max(sol.residual_max, std::abs(lu[k] - f[k]));
  if (!(sol.residual_max <= options.tol_lma * std::max(1.0, lp_norm(f, kInfinity, g.mask(NodeKind::interior))))) {
    std::ostringstream os;
    os << "linearized solve residual " << sol.residual_max << " exceeds tolerance; " << describe(low);
    throw SolverError(os.str(), sol.residual_max);
  }
  return sol;
}

LmaSolution solve_lma(const CofactorField& cofactor, const ScalarField& f, const PointFunction& boundary,
                      const LmaOptions& options)
{
  LmaSolution sol = solve_nondivergence(cofactor.cof, f, boundary, options);
  sol.cofactor = &cofactor;
  return sol;
}

AbpReport abp_check(const LmaSolution& solution)
{
  AbpReport r;
  const Grid& g = *solution.u.grid;
  r.u_sup = lp_norm(solution.u, kInfinity);
  r.f_l2 = lp_norm(solution.f, 2.0);
  r.diameter = g.domain().diameter();
  if (r.f_l2 > 0.0)
    r.ratio = r.u_sup / (r.diameter * r.f_l2);
  else
    r.ratio = r.u_sup > 0.0 ? kInfinity : 0.0;
  r.passed = std::isfinite(r.ratio);
  return r;
}

} // namespace malab
