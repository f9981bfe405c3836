#ifndef MALAB_SECTIONS_HPP
#define MALAB_SECTIONS_HPP

#include "malab/ma_solver.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace malab {

/// Center of a section: a point with the potential's value and gradient
/// there. Interior anchors sit on nodes; boundary anchors on boundary
/// samples, with `node` the nearest inside node.
struct Anchor
{
  Vec2 point;
  double phi = 0.0;
  Vec2 grad;
  std::size_t node = 0;
  bool on_boundary = false;
};

Anchor node_anchor(const PotentialField& potential, std::size_t node);
Anchor boundary_anchor(const PotentialField& potential, const BoundarySample& sample);

/// Squared quasi-distance phi(x) - phi(a) - grad phi(a).(x - a), with phi
/// evaluated by bilinear interpolation off the nodes.
double quasi_distance(const PotentialField& potential, const Anchor& anchor, const Vec2& x);
/// Same at a node, using the stored node value.
inline double quasi_distance(const PotentialField& potential, const Anchor& anchor, std::size_t node)
{
  return tangent_gap(potential, anchor.point, anchor.phi, anchor.grad, node);
}

/// Second-moment ellipse of a cell set: a uniform ellipse with semi-axes a, b
/// has covariance eigenvalues a^2/4 and b^2/4.
struct EllipsoidFit
{
  Vec2 center;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;    ///< major axis direction, radians in (-pi/2, pi/2]
  double residual = 0.0; ///< symmetric-difference measure relative to the set measure
};

EllipsoidFit fit_ellipsoid(const Grid& grid, const std::vector<std::size_t>& cells);

/// Sub-level set S(x, t) = {y : phi(y) < phi(x) + grad phi(x).(y - x) + t} as
/// the 8-connected component of inside nodes containing the anchor.
struct Section
{
  Anchor anchor;
  double height = 0.0;
  std::vector<std::size_t> cells; ///< ascending node indices
  double measure = 0.0;           ///< sum of quadrature weights
  Vec2 centroid;
  bool touches_boundary = false;  ///< some cell is boundary-adjacent
  bool is_interior = false;       ///< S(x, 2t) has no boundary-adjacent cell
  std::optional<Vec2> tangency_point;
  EllipsoidFit ellipsoid;
  bool degenerate = false;        ///< at most one cell
};

/// Flood-filled section. Throws InvalidArgument for t <= 0.
Section section(const PotentialField& potential, const Anchor& anchor, double t);
/// Cell set only (no classification, fit or doubled section).
std::vector<std::size_t> section_cells(const PotentialField& potential, const Anchor& anchor, double t);

NodeMask to_mask(const Grid& grid, const std::vector<std::size_t>& cells);

/// All sections S(x, t), t < t_max, of a node anchor at once: S(x, t) is
/// the set of nodes[i] with level[i] < t, where level is the smallest height
/// at which the node joins the anchor's flood-fill component. Levels are
/// non-decreasing.
struct NestedSections
{
  std::vector<std::size_t> nodes;
  std::vector<double> level;

  /// Number of cells of S(x, t).
  std::size_t count_below(double t) const;
};

NestedSections nested_sections(const PotentialField& potential, std::size_t node, double t_max);

struct MaximalHeight
{
  double height = 0.0;
  Vec2 tangency_point;
  std::size_t sample = 0; ///< index of the touching boundary sample
};

/// Largest t with S(x, t) inside the domain: bisection on t over [0, range]
/// (40 halvings) for the first height at which the section reaches a
/// boundary sample.
MaximalHeight maximal_height(const PotentialField& potential, std::size_t node);

struct TangentSectionReport
{
  double k0 = 0.0;
  double min_ratio = 0.0; ///< min dist(x, boundary) / sqrt(hbar(x))
  double max_ratio = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0; ///< nodes whose discrete maximal height is not positive
};

/// Proportionality constant between dist(x, boundary) and sqrt(hbar(x)):
/// k0 = min(min ratio, 1 / max ratio) over the given nodes.
TangentSectionReport tangent_section_constant(const PotentialField& potential, const std::vector<std::size_t>& nodes);

/// Boundary point moved to the origin with inner normal along the second axis.
struct BoundaryFrame
{
  Vec2 origin;
  Vec2 tangent;
  Vec2 inner_normal;
  double phi0 = 0.0;
  Vec2 grad0;

  Vec2 to_local(const Vec2& z) const { return {dot(z - origin, tangent), dot(z - origin, inner_normal)}; }
  Vec2 to_global(const Vec2& y) const { return origin + tangent * y.x + inner_normal * y.y; }
  /// Columns (tangent, inner normal): to_global(y) = origin + rotation() y.
  Mat2 rotation() const { return Mat2::from_columns(tangent, inner_normal); }
  /// phi with its tangent plane at the origin subtracted.
  double normalized(double phi, const Vec2& z) const { return phi - phi0 - dot(grad0, z - origin); }
};

BoundaryFrame boundary_frame(const BoundarySample& sample);

/// Section equivalence with an ellipsoid. For boundary anchors the map is the
/// shear A(y) = (y1 - tau y2, y2) in the boundary frame; for interior anchors
/// it is the determinant-one map rounding the section's second moments.
struct LocalizationFit
{
  bool valid = false;
  bool boundary = false;
  Anchor anchor;
  Mat2 rotation = Mat2::identity(); ///< local frame, identity for interior anchors
  double height = 0.0;
  double tau = 0.0;
  Mat2 A = Mat2::identity(); ///< det A = 1
  double radius = 0.0;       ///< volume-matched radius of the reference (half-)ball
  double k_inner = 0.0;      ///< k_inner E inter closure(Omega) inside S
  double k_outer = 0.0;      ///< S inside k_outer E
  Section section;
};

/// Boundary localization at a sample point. Throws InvalidArgument when the
/// section has fewer than 8 cells.
LocalizationFit localization_fit(const PotentialField& potential, const BoundarySample& sample, double h);
/// Tangent interior section S(y, hbar(y)) fitted by its second moments
/// (h = hbar(y) unless a positive override is given).
LocalizationFit tangent_section_fit(const PotentialField& potential, std::size_t node, double h = 0.0);

/// Rescaled configuration x = h^{-1/2} A R^T (z - origin).
struct RescaledTriple
{
  Vec2 origin;
  Mat2 linear; ///< h^{-1/2} A R^T
  Mat2 A;
  double h = 0.0;
  double norm_A = 0.0;
  double norm_A_inv = 0.0;
  double k = 0.0; ///< B_k inter Omega_h inside U_h inside B_{1/k}
  GridPtr grid;   ///< grid of Omega_h, same node density as the original
  PotentialField potential; ///< phi_h
  NodeMask section;         ///< U_h = S_{phi_h}(0, 1)

  Vec2 to_rescaled(const Vec2& z) const { return linear.apply(z - origin); }
  Vec2 to_original(const Vec2& x) const { return origin + linear.inverse().apply(x); }
};

RescaledTriple rescale_domain(const PotentialField& potential, const LocalizationFit& fit);

enum class RescaleMode { linf, w2inf };

struct RescaledFields
{
  RescaledTriple triple;
  ScalarField u;
  ScalarField f;
};

/// L-infinity mode: u_h = u(z(x)), f_h = h f(z(x)). W2-infinity mode:
/// u_h = u(z(x)) / h, f_h = f(z(x)). Fields are resampled by cubic
/// convolution. Throws InvalidArgument when the fit is not valid.
RescaledFields rescale(const PotentialField& potential, const ScalarField& u, const ScalarField& f,
                       const LocalizationFit& fit, RescaleMode mode);

/// Engulfing sample: y in S(x, t).
struct EngulfingSample
{
  std::size_t x = 0;
  double t = 0.0;
  std::size_t y = 0;
};

/// Seeded samples with x interior, t log-uniform in [t_min, min(c_cap, hbar(x))]
/// and y uniform among the cells of S(x, t).
std::vector<EngulfingSample> engulfing_samples(const PotentialField& potential, std::size_t count, double c_cap,
                                               std::uint64_t seed);

/// theta(x, t, y) = max over z in S(x, t) of quasi_distance_y(z) / t.
double engulfing_theta(const PotentialField& potential, const EngulfingSample& sample);

struct EngulfingReport
{
  double theta = 0.0; ///< sup over samples
  std::vector<double> per_sample;
};

EngulfingReport engulfing_constant(const PotentialField& potential, const std::vector<EngulfingSample>& samples);

struct VolumeSample
{
  Anchor anchor;
  double t = 0.0;
};

struct VolumeScaling
{
  double exponent = 0.0; ///< least-squares slope of log |S| against log t
  double c1 = 0.0;       ///< min |S| / t
  double c2 = 0.0;       ///< max |S| / t
  std::size_t used = 0;
};

/// Sections with fewer than 20 cells are skipped; throws InvalidArgument
/// when fewer than 4 samples remain.
VolumeScaling volume_scaling(const PotentialField& potential, const std::vector<VolumeSample>& samples);

struct Dichotomy
{
  bool interior = false;
  Vec2 z;             ///< boundary point for the boundary-dominated case
  double c_bar = 0.0; ///< minimal c with S(x, 2t) inside S(z, c t)
};

Dichotomy dichotomy_classify(const PotentialField& potential, std::size_t node, double t);

/// Default height cap: 0.05 times the largest maximal height over interior
/// nodes (sampled on a stride when the grid is large).
double default_c_cap(const PotentialField& potential);

} // namespace malab

#endif
