#include "malab/ma_solver.hpp"

#include "malab/errors.hpp"
#include "malab/linear_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

namespace malab {

std::size_t default_boundary_count(const Grid& grid)
{
  const double per = grid.domain().perimeter() / grid.spacing();
  return std::max<std::size_t>(256, static_cast<std::size_t>(std::ceil(2.0 * per)));
}

ScalarField pinched_density(const GridPtr& grid, double eps)
{
  const Box b = grid->domain().bounding_box();
  const Vec2 mid = (b.lo + b.hi) * 0.5, half = (b.hi - b.lo) * 0.5;
  return sample_field(grid, [=](const Vec2& p) {
    const double x = (p.x - mid.x) / half.x, y = (p.y - mid.y) / half.y;
    return 1.0 + eps * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
  });
}

namespace {

void finish_derivatives(PotentialField& pot)
{
  auto [grad, hess] = fd_derivatives(pot.phi);
  pot.grad = std::move(grad);
  pot.hess = std::move(hess);
  pot.convexity_margin = kInfinity;
  for (auto k : pot.grid->interior_nodes()) pot.convexity_margin = std::min(pot.convexity_margin, pot.hess[k].min_eig());
}

void density_bounds(PotentialField& pot)
{
  pot.lambda = kInfinity;
  pot.Lambda = -kInfinity;
  for (auto k : pot.grid->interior_nodes()) {
    pot.lambda = std::min(pot.lambda, pot.g[k]);
    pot.Lambda = std::max(pot.Lambda, pot.g[k]);
  }
}

// gradient at a boundary point: tangential part from the datum, normal part
// from a second-order one-sided difference of the interpolated solution
Vec2 boundary_gradient(const PotentialField& pot, const PointFunction& datum, const BoundaryPoint& bp)
{
  const double h = pot.grid->spacing();
  const Vec2 t = perp(bp.normal);
  const double eps = 1e-4 * h;
  const double dt = (datum(bp.point + t * eps) - datum(bp.point - t * eps)) / (2.0 * eps);
  const Vec2 inward = -bp.normal;
  const double s = 2.0 * h;
  const double f0 = datum(bp.point);
  const double f1 = pot.value(bp.point + inward * s);
  const double f2 = pot.value(bp.point + inward * (2.0 * s));
  const double dn_in = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * s);
  return t * dt + inward * dn_in;
}

// Convex-branch form of det D^2 u = g in two dimensions:
//   F(u) = tr D^2 u - sqrt((u_xx - u_yy)^2 + 4 u_xy^2 + 4 g).
// F = 0 iff det D^2 u = g with tr D^2 u > 0, and its linearization
// tr(A D^2 v) has A positive definite for every u.
double convex_branch(const Sym2& d2, double g)
{
  const double d = d2.xx - d2.yy;
  return d2.trace() - std::sqrt(d * d + 4.0 * d2.xy * d2.xy + 4.0 * g);
}

Sym2 convex_branch_linearization(const Sym2& d2, double g)
{
  const double d = d2.xx - d2.yy;
  const double s = std::sqrt(d * d + 4.0 * d2.xy * d2.xy + 4.0 * g);
  return {1.0 - d / s, -2.0 * d2.xy / s, 1.0 + d / s};
}

double closure_mismatch(const BoundaryClosure& row, const ScalarField& u, const PointFunction& datum)
{
  double v = u[row.node];
  for (int c = 0; c < row.corner_count; ++c) v -= row.theta * row.weights[c] * u[row.corners[c]];
  return v - (1.0 - row.theta) * datum(row.boundary_point);
}

struct Residuals
{
  double branch = 0.0; ///< merit used by the line search
  double det = 0.0;    ///< max |det D^2 u - g| over interior nodes
};

Residuals residuals(const Grid& g, const DirichletClosure& closure, const ScalarField& u, const ScalarField& density,
                    const PointFunction& datum)
{
  Residuals r;
  for (auto k : g.interior_nodes()) {
    const Sym2 d2 = central_hessian(u, k);
    r.branch = std::max(r.branch, std::abs(convex_branch(d2, density[k])));
    r.det = std::max(r.det, std::abs(d2.det() - density[k]));
  }
  for (const auto& row : closure.rows()) {
    const double m = std::abs(closure_mismatch(row, u, datum));
    r.branch = std::max(r.branch, m);
    r.det = std::max(r.det, m);
  }
  if (!std::isfinite(r.branch) || !std::isfinite(r.det)) r.branch = r.det = kInfinity;
  return r;
}

} // namespace

PotentialField PotentialField::from_function(const GridPtr& grid, const PointFunction& phi,
                                             const GradientFunction& gradient, std::size_t boundary_count)
{
  PotentialField pot;
  pot.grid = grid;
  pot.phi = sample_field(grid, phi);
  finish_derivatives(pot);
  pot.g = ScalarField(grid, std::numeric_limits<double>::quiet_NaN());
  for (auto k : grid->inside_nodes()) pot.g[k] = pot.hess[k].det();
  density_bounds(pot);
  const std::size_t count = boundary_count ? boundary_count : default_boundary_count(*grid);
  const double eps = 1e-5 * std::max(1.0, grid->domain().diameter());
  for (const auto& bp : grid->domain().boundary_samples(count)) {
    BoundarySample s{bp.point, bp.normal, phi(bp.point), {}};
    if (gradient) {
      s.grad = gradient(bp.point);
    } else {
      const Vec2 ex{eps, 0.0}, ey{0.0, eps};
      s.grad = {(phi(bp.point + ex) - phi(bp.point - ex)) / (2 * eps),
                (phi(bp.point + ey) - phi(bp.point - ey)) / (2 * eps)};
    }
    pot.boundary.push_back(s);
  }
  return pot;
}

double ma_residual(const ScalarField& u, const ScalarField& g)
{
  double r = 0.0;
  for (auto k : u.grid->interior_nodes()) r = std::max(r, std::abs(central_hessian(u, k).det() - g[k]));
  return r;
}

PotentialField solve_ma(const GridPtr& grid, const ScalarField& g, const PointFunction& boundary,
                        const MaSolverOptions& options)
{
  const Grid& gr = *grid;
  for (auto k : gr.interior_nodes()) {
    if (!(g[k] > 0.0)) {
      std::ostringstream os;
      const Vec2 p = gr.coords(k);
      os << "Monge-Ampere density must be positive; g = " << g[k] << " at (" << p.x << ", " << p.y << ")";
      throw InvalidArgument(os.str());
    }
  }
  const UnknownMap unknowns(gr);
  const DirichletClosure closure(grid);

  // initial guess: Laplacian of phi0 equals 2 sqrt(g)
  ScalarField rhs(grid, 0.0);
  for (auto k : gr.interior_nodes()) rhs[k] = 2.0 * std::sqrt(g[k]);
  const SparseMatrix lap = assemble_operator(gr, unknowns, closure, [](std::size_t) { return Sym2{1.0, 0.0, 1.0}; });
  Eigen::VectorXd x = solve_sparse(lap, assemble_rhs(gr, unknowns, closure, rhs, boundary), options.direct_limit);
  ScalarField u = to_field(grid, unknowns, x);

  Residuals res = residuals(gr, closure, u, g, boundary);
  int iter = 0;
  while (res.det > options.tol_ma) {
    if (iter >= options.max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << options.max_iter << " iterations; residual " << res.det;
      throw SolverError(os.str(), res.det);
    }
    ++iter;
    Eigen::VectorXd f(static_cast<long>(unknowns.size()));
    for (auto k : gr.interior_nodes()) f[unknowns[k]] = convex_branch(central_hessian(u, k), g[k]);
    for (const auto& row : closure.rows()) f[unknowns[row.node]] = closure_mismatch(row, u, boundary);
    const SparseMatrix jac = assemble_operator(
        gr, unknowns, closure, [&](std::size_t k) { return convex_branch_linearization(central_hessian(u, k), g[k]); });
    Eigen::VectorXd step;
    try {
      // inexact Newton: early steps only need a loose iterative solve
      const double tol = std::clamp(1e-3 * res.branch, 1e-13, 1e-6);
      step = solve_sparse(jac, -f, options.direct_limit, tol);
    } catch (const SolverError& e) {
      throw SolverError(std::string("Newton linear solve failed: ") + e.what(), res.det);
    }
    bool accepted = false;
    for (double alpha = 1.0; alpha >= options.damping_min; alpha *= 0.5) {
      Eigen::VectorXd trial = x + alpha * step;
      ScalarField tu = to_field(grid, unknowns, trial);
      const Residuals tr = residuals(gr, closure, tu, g, boundary);
      if (tr.branch < res.branch) {
        x = std::move(trial);
        u = std::move(tu);
        res = tr;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "Newton line search exhausted (damping below " << options.damping_min << "); residual " << res.det;
      throw SolverError(os.str(), res.det);
    }
  }

  PotentialField pot;
  pot.grid = grid;
  pot.phi = std::move(u);
  pot.g = g;
  pot.newton_iterations = iter;
  pot.residual = res.det;
  finish_derivatives(pot);
  density_bounds(pot);

  const std::size_t count = options.boundary_count ? options.boundary_count : default_boundary_count(gr);
  for (const auto& bp : gr.domain().boundary_samples(count))
    pot.boundary.push_back({bp.point, bp.normal, boundary(bp.point), boundary_gradient(pot, boundary, bp)});

  const ConvexityReport cert = certify_convexity(pot, options.tol_convex * pot.Lambda);
  if (!cert.passed) {
    std::ostringstream os;
    os << "solved potential failed convexity certification: min Hessian eigenvalue " << cert.min_eigenvalue
       << " at (" << cert.location.x << ", " << cert.location.y << ")";
    throw SolverError(os.str(), res.det);
  }
  return pot;
}

CofactorField cofactor_field(const PotentialField& potential)
{
  CofactorField out{MatrixField(potential.grid, Sym2{}), &potential};
  for (std::size_t k = 0; k < potential.hess.size(); ++k) out.cof[k] = potential.hess[k].cofactor();
  return out;
}

VectorField cofactor_divergence(const CofactorField& cofactor)
{
  const MatrixField& c = cofactor.cof;
  const Grid& g = *c.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  VectorField out(c.grid, Vec2{nan, nan});
  const double h2 = 2.0 * g.spacing();
  for (auto k : g.interior_nodes()) {
    const int i = g.col(k), j = g.row(k);
    const std::size_t e = g.index(i + 1, j), w = g.index(i - 1, j), n = g.index(i, j + 1), s = g.index(i, j - 1);
    if (!g.interior(e) || !g.interior(w) || !g.interior(n) || !g.interior(s)) continue;
    out[k] = {(c[e].xx - c[w].xx) / h2 + (c[n].xy - c[s].xy) / h2, (c[e].xy - c[w].xy) / h2 + (c[n].yy - c[s].yy) / h2};
  }
  return out;
}

ConvexityReport certify_convexity(const PotentialField& potential, double tol)
{
  ConvexityReport r;
  r.min_eigenvalue = kInfinity;
  for (auto k : potential.grid->interior_nodes()) {
    const double e = potential.hess[k].min_eig();
    if (e < r.min_eigenvalue) {
      r.min_eigenvalue = e;
      r.node = k;
    }
  }
  r.location = potential.grid->coords(r.node);
  r.passed = r.min_eigenvalue >= -tol;
  return r;
}

namespace {

std::pair<double, double> separation_range(const std::vector<BoundarySample>& b, std::size_t stride, double tiny,
                                           std::size_t* pairs)
{
  double lo = kInfinity, hi = -kInfinity;
  for (std::size_t a = 0; a < b.size(); a += stride) {
    for (std::size_t c = 0; c < b.size(); c += stride) {
      const double d2 = norm2(b[c].point - b[a].point);
      if (d2 <= tiny * tiny) continue;
      const double r = (b[c].phi - b[a].phi - dot(b[a].grad, b[c].point - b[a].point)) / d2;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      if (pairs) ++*pairs;
    }
  }
  return {lo, hi};
}

} // namespace

SeparationReport quadratic_separation_check(const PotentialField& potential, double collapse_factor)
{
  SeparationReport rep;
  const auto& b = potential.boundary;
  const double tiny = 1e-12 * std::max(1.0, potential.grid->domain().diameter());
  std::tie(rep.min_ratio, rep.max_ratio) = separation_range(b, 1, tiny, &rep.pairs);
  rep.coarse_min_ratio = separation_range(b, 2, tiny, nullptr).first;
  if (potential.grid->domain().uniform_convexity_modulus() == 0.0)
    rep.warning = "domain is not uniformly convex; quadratic separation may degenerate";
  rep.rho0 = std::min(rep.min_ratio, 1.0 / rep.max_ratio);
  rep.passed = std::isfinite(rep.max_ratio) && rep.min_ratio > 0.0 &&
               rep.min_ratio >= collapse_factor * rep.coarse_min_ratio;
  return rep;
}

} // namespace malab
