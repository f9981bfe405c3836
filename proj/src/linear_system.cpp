#include "malab/linear_system.hpp"

#include "malab/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace malab {

DirichletClosure::DirichletClosure(const GridPtr& grid)
{
  const Grid& g = *grid;
  const double h = g.spacing();
  for (auto k : g.inside_nodes()) {
    if (g.kind(k) != NodeKind::boundary_adjacent) continue;
    const Vec2 x = g.coords(k);
    const BoundaryPoint bp = g.domain().project(x);
    BoundaryClosure row;
    row.node = k;
    row.boundary_point = bp.point;
    row.normal = bp.normal;
    row.distance = norm(x - bp.point);
    if (row.distance > 1e-9 * h) {
      const Vec2 inward = (x - bp.point) * (1.0 / row.distance);
      const double s = row.distance + 2.0 * h;
      const Vec2 q = bp.point + inward * s;
      const double fx = (q.x - g.origin().x) / h, fy = (q.y - g.origin().y) / h;
      const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
      const double tx = fx - i, ty = fy - j;
      const int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
      const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
      bool ok = true;
      for (int c = 0; c < 4; ++c) {
        if (!g.inside(i + di[c], j + dj[c])) {
          ok = false;
          break;
        }
        row.corners[c] = g.index(i + di[c], j + dj[c]);
        row.weights[c] = w[c];
      }
      if (ok) {
        row.corner_count = 4;
        row.theta = row.distance / s;
      } else {
        ++fallbacks_;
      }
    }
    rows_.push_back(row);
  }
}

UnknownMap::UnknownMap(const Grid& grid) : index_(grid.size(), -1)
{
  for (auto k : grid.inside_nodes()) {
    index_[k] = static_cast<long>(nodes_.size());
    nodes_.push_back(k);
  }
}

SparseMatrix assemble_operator(const Grid& g, const UnknownMap& u, const DirichletClosure& closure,
                               const std::function<Sym2(std::size_t)>& coefficient)
{
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.interior_nodes().size() * 9 + closure.rows().size() * 5);
  const double h2 = g.cell_area();
  for (auto k : g.interior_nodes()) {
    const Sym2 a = coefficient(k);
    const long r = u[k];
    const int i = g.col(k), j = g.row(k);
    auto add = [&](int di, int dj, double v) {
      if (v != 0.0) trip.emplace_back(r, u[g.index(i + di, j + dj)], v);
    };
    add(0, 0, -2.0 * (a.xx + a.yy) / h2);
    add(1, 0, a.xx / h2);
    add(-1, 0, a.xx / h2);
    add(0, 1, a.yy / h2);
    add(0, -1, a.yy / h2);
    const double c = 2.0 * a.xy / (4.0 * h2);
    add(1, 1, c);
    add(-1, -1, c);
    add(1, -1, -c);
    add(-1, 1, -c);
  }
  for (const auto& row : closure.rows()) {
    const long r = u[row.node];
    trip.emplace_back(r, r, 1.0);
    for (int c = 0; c < row.corner_count; ++c)
      if (row.weights[c] != 0.0) trip.emplace_back(r, u[row.corners[c]], -row.theta * row.weights[c]);
  }
  SparseMatrix a(static_cast<long>(u.size()), static_cast<long>(u.size()));
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

Eigen::VectorXd assemble_rhs(const Grid& g, const UnknownMap& u, const DirichletClosure& closure,
                             const ScalarField& values, const PointFunction& datum)
{
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<long>(u.size()));
  for (auto k : g.interior_nodes()) b[u[k]] = values[k];
  for (const auto& row : closure.rows()) b[u[row.node]] = (1.0 - row.theta) * datum(row.boundary_point);
  return b;
}

Eigen::VectorXd solve_sparse(const SparseMatrix& a, const Eigen::VectorXd& b, std::size_t direct_limit,
                             double iterative_tol)
{
  if (static_cast<std::size_t>(a.rows()) <= direct_limit) {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
      std::ostringstream os;
      os << "sparse LU factorization failed (" << lu.lastErrorMessage() << ")";
      throw SolverError(os.str(), std::numeric_limits<double>::quiet_NaN());
    }
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
      throw SolverError("sparse LU solve produced a non-finite result", std::numeric_limits<double>::quiet_NaN());
    return x;
  }
  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> it;
  it.setTolerance(iterative_tol);
  it.setMaxIterations(std::max<long>(2000, 20 * static_cast<long>(std::sqrt(static_cast<double>(a.rows())))));
  it.compute(a);
  Eigen::VectorXd x = it.solve(b);
  if (it.info() != Eigen::Success && !(it.error() < 1e-9)) {
    std::ostringstream os;
    os << "BiCGSTAB did not converge: relative residual " << it.error() << " after " << it.iterations()
       << " iterations";
    throw SolverError(os.str(), it.error());
  }
  return x;
}

ScalarField to_field(const GridPtr& grid, const UnknownMap& u, const Eigen::VectorXd& x)
{
  ScalarField f(grid, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = 0; n < u.size(); ++n) f[u.node(n)] = x[static_cast<long>(n)];
  return f;
}

Eigen::VectorXd from_field(const UnknownMap& u, const ScalarField& field)
{
  Eigen::VectorXd x(static_cast<long>(u.size()));
  for (std::size_t n = 0; n < u.size(); ++n) x[static_cast<long>(n)] = field[u.node(n)];
  return x;
}

} // namespace malab
