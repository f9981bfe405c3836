#ifndef MALAB_LINEAR_SYSTEM_HPP
#define MALAB_LINEAR_SYSTEM_HPP

#include "malab/calculus.hpp"
#include "malab/grid.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <vector>

namespace malab {

/// Dirichlet closure of one boundary-adjacent node.
///
/// The node value is the linear interpolant, along the inward normal,
/// between the boundary datum at the nearest boundary point p and the
/// bilinear sample of the solution at q = p + (d + 2h) n, n the unit vector
/// from p towards the node:
///   u(x) - theta * sum_c w_c u(c) = (1 - theta) * datum(p),
/// theta = d / (d + 2h). Nodes on the boundary (d = 0) or whose q cell
/// leaves the domain use the datum directly (theta = 0).
struct BoundaryClosure
{
  std::size_t node = 0;
  Vec2 boundary_point{};
  Vec2 normal{}; ///< outward
  double distance = 0.0;
  double theta = 0.0;
  std::array<std::size_t, 4> corners{};
  std::array<double, 4> weights{};
  int corner_count = 0;
};

/// Closure rows for every boundary-adjacent node of a grid.
class DirichletClosure
{
public:
  explicit DirichletClosure(const GridPtr& grid);

  const std::vector<BoundaryClosure>& rows() const { return rows_; }
  /// Nodes that fell back to direct (first-order) imposition off the boundary.
  std::size_t fallback_count() const { return fallbacks_; }

private:
  std::vector<BoundaryClosure> rows_;
  std::size_t fallbacks_ = 0;
};

/// Maps inside nodes to unknown indices.
class UnknownMap
{
public:
  explicit UnknownMap(const Grid& grid);
  long operator[](std::size_t node) const { return index_[node]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t node(std::size_t unknown) const { return nodes_[unknown]; }

private:
  std::vector<long> index_;
  std::vector<std::size_t> nodes_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Assembles the non-divergence operator u -> trace(A(x) D^2 u) at interior
/// nodes (centred 9-point stencil) plus the boundary closure rows.
SparseMatrix assemble_operator(const Grid& grid, const UnknownMap& unknowns, const DirichletClosure& closure,
                               const std::function<Sym2(std::size_t)>& coefficient);

/// Right-hand side: f at interior nodes, (1 - theta) * datum(p) at closure rows.
Eigen::VectorXd assemble_rhs(const Grid& grid, const UnknownMap& unknowns, const DirichletClosure& closure,
                             const ScalarField& interior_values, const PointFunction& boundary_datum);

/// Sparse solve: direct LU up to `direct_limit` unknowns, BiCGSTAB with a
/// diagonal preconditioner above. Throws SolverError on failure.
Eigen::VectorXd solve_sparse(const SparseMatrix& a, const Eigen::VectorXd& b, std::size_t direct_limit = 257 * 257,
                             double iterative_tol = 1e-13);

/// Scatter an unknown vector into a field (exterior NaN).
ScalarField to_field(const GridPtr& grid, const UnknownMap& unknowns, const Eigen::VectorXd& x);
Eigen::VectorXd from_field(const UnknownMap& unknowns, const ScalarField& field);

} // namespace malab

#endif
