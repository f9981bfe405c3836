#ifndef MALAB_CALCULUS_HPP
#define MALAB_CALCULUS_HPP

#include "malab/grid.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>

namespace malab {

using PointFunction = std::function<double(const Vec2&)>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Seeded smooth random function: a sum of `modes` plane waves with
/// wavenumbers up to `max_wavenumber` and amplitudes summing to one.
PointFunction random_smooth_function(std::uint64_t seed, int modes = 6, double max_wavenumber = 6.0);

/// Samples `f` at every inside node; exterior nodes are NaN.
ScalarField sample_field(const GridPtr& grid, const PointFunction& f);

/// Gradient and Hessian by central differences at interior nodes and
/// one-sided stencils at boundary-adjacent nodes. Quadratics are
/// differentiated exactly at interior nodes.
std::pair<VectorField, MatrixField> fd_derivatives(const ScalarField& field);

/// Discrete Hessian at one interior node (central differences).
Sym2 central_hessian(const ScalarField& field, std::size_t node);

/// (sum |v|^p w)^(1/p) over the masked nodes, w the quadrature weights;
/// max |v| for p = infinity. Throws on p < 1 or an empty region.
double lp_norm(const ScalarField& field, double p, const NodeMask& region);
/// Same over all inside nodes.
double lp_norm(const ScalarField& field, double p);
/// Normalized-measure variant: (mean of |v|^p)^(1/p).
double mean_lp_norm(const ScalarField& field, double p, const NodeMask& region);
/// The p-th power sum without the root, allowed for any p > 0.
double power_integral(const ScalarField& field, double p, const NodeMask& region);

/// Measure (sum of weights) of a mask.
double measure(const Grid& grid, const NodeMask& region);

/// Node-wise Frobenius norm of a matrix field.
ScalarField frobenius(const MatrixField& m);
/// Node-wise difference of two matrix fields on the same grid.
MatrixField difference(const MatrixField& a, const MatrixField& b);

/// Bilinear interpolation; cells with outside corners are handled by
/// renormalizing over the inside corners. NaN far outside the domain.
double interpolate(const ScalarField& field, const Vec2& p);

/// Cubic convolution (Keys, a = -1/2) on the 4x4 node block around p, which
/// reproduces quadratics exactly; falls back to `interpolate` when the block
/// leaves the domain.
double interpolate_cubic(const ScalarField& field, const Vec2& p);

/// CSV export: x, y, then one column per field. Inside nodes only.
void write_fields_csv(std::ostream& os, const std::vector<std::string>& names,
                      const std::vector<const ScalarField*>& fields);

} // namespace malab

#endif
