#ifndef MALAB_GRID_HPP
#define MALAB_GRID_HPP

#include "malab/domain.hpp"
#include "malab/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace malab {

enum class NodeKind : std::uint8_t { interior, boundary_adjacent, exterior };

/// Per-node boolean selection over a grid.
using NodeMask = std::vector<std::uint8_t>;

/// Uniform Cartesian discretization of a convex domain.
///
/// A node is `interior` when it and its eight neighbours lie in the closed
/// domain, `boundary_adjacent` when it lies in the domain but some neighbour
/// does not, and `exterior` otherwise. Node coordinates are integer
/// multiples of the spacing, so lattice-aligned domains put nodes exactly on
/// their boundary.
class Grid
{
public:
  /// Throws InvalidArgument for non-positive spacing or when fewer than
  /// 16 interior nodes result.
  static std::shared_ptr<const Grid> discretize(const ConvexDomain& domain, double spacing);

  const ConvexDomain& domain() const { return domain_; }
  double spacing() const { return h_; }
  double cell_area() const { return h_ * h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return kinds_.size(); }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  int col(std::size_t k) const { return static_cast<int>(k % nx_); }
  int row(std::size_t k) const { return static_cast<int>(k / nx_); }
  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
  Vec2 coords(std::size_t k) const { return {origin_.x + col(k) * h_, origin_.y + row(k) * h_}; }
  Vec2 coords(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
  Vec2 origin() const { return origin_; }

  NodeKind kind(std::size_t k) const { return kinds_[k]; }
  bool inside(std::size_t k) const { return kinds_[k] != NodeKind::exterior; }
  bool inside(int i, int j) const { return in_range(i, j) && inside(index(i, j)); }
  bool interior(std::size_t k) const { return kinds_[k] == NodeKind::interior; }

  /// Quadrature weight: area of the node's cell that lies in the domain.
  /// Equals cell_area() for interior nodes, 0 for exterior nodes.
  double weight(std::size_t k) const { return weights_[k]; }

  std::size_t count(NodeKind kind) const;
  const std::vector<std::size_t>& interior_nodes() const { return interior_nodes_; }
  const std::vector<std::size_t>& inside_nodes() const { return inside_nodes_; }

  NodeMask mask(NodeKind kind) const;
  NodeMask inside_mask() const;

  /// Nearest inside node to a point, or size() when none within two cells.
  std::size_t nearest_inside(const Vec2& p) const;

private:
  Grid() = default;

  ConvexDomain domain_ = ConvexDomain::build({});
  double h_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  Vec2 origin_{};
  std::vector<NodeKind> kinds_;
  std::vector<double> weights_;
  std::vector<std::size_t> interior_nodes_;
  std::vector<std::size_t> inside_nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Per-node values on a grid. Exterior nodes hold NaN unless set otherwise.
template <typename T>
struct Field
{
  GridPtr grid;
  std::vector<T> values;

  Field() = default;
  Field(GridPtr g, T fill) : grid(std::move(g)), values(grid->size(), fill) {}

  T& operator[](std::size_t k) { return values[k]; }
  const T& operator[](std::size_t k) const { return values[k]; }
  std::size_t size() const { return values.size(); }
};

using ScalarField = Field<double>;
using VectorField = Field<Vec2>;
using MatrixField = Field<Sym2>;

} // namespace malab

#endif
