#ifndef MALAB_DOMAIN_HPP
#define MALAB_DOMAIN_HPP

#include "malab/geometry.hpp"

#include <memory>
#include <string>
#include <vector>

namespace malab {

enum class DomainKind { disc, ellipse, square, superellipse, polygon, affine_image };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Shape parameters. Only the fields relevant to `kind` are read.
struct DomainParams
{
  DomainKind kind = DomainKind::disc;
  Vec2 center{};
  double radius = 1.0;   ///< disc
  double semi_a = 1.0;   ///< ellipse / superellipse, x semi-axis
  double semi_b = 1.0;   ///< ellipse / superellipse, y semi-axis
  double side = 2.0;     ///< square side length
  double exponent = 4.0; ///< superellipse |x/a|^p + |y/b|^p <= 1, p >= 2
  std::vector<Vec2> vertices; ///< polygon, counter-clockwise or clockwise

  bool operator==(const DomainParams&) const = default;
};

/// A point of the boundary together with its outward unit normal.
struct BoundaryPoint
{
  Vec2 point;
  Vec2 normal;
};

/// Bounded convex planar domain.
///
/// The normalization of the regularity theory asks for an interior tangent
/// ball of radius rho at every boundary point and for the domain to sit in
/// B_{1/rho}. The two radii are stored separately and `rho()` is their
/// combination min(interior_ball_radius, 1 / enclosing_radius).
class ConvexDomain
{
public:
  /// Validates the parameters and measures the geometric constants.
  /// Throws NonConvexPolygon for a polygon that turns the wrong way.
  static ConvexDomain build(const DomainParams& params);

  /// Image of `base` under x -> linear * (x - shift).
  static ConvexDomain affine_image(const ConvexDomain& base, const Mat2& linear, const Vec2& shift);

  DomainKind kind() const { return params_.kind; }
  const DomainParams& params() const { return params_; }

  /// Closed-set membership with a small absolute slack.
  bool contains(const Vec2& p, double slack = 1e-12) const;

  /// Nearest boundary point and outward normal there.
  BoundaryPoint project(const Vec2& p) const;

  /// Boundary samples roughly equispaced in arclength.
  std::vector<BoundaryPoint> boundary_samples(std::size_t count) const;

  Box bounding_box() const;
  double perimeter() const { return perimeter_; }
  double area() const { return area_; }
  double diameter() const { return diameter_; }

  double interior_ball_radius() const { return interior_ball_radius_; }
  double enclosing_radius() const { return enclosing_radius_; }
  /// Lower bound of the boundary curvature, 0 when some part is flat.
  double uniform_convexity_modulus() const { return uniform_convexity_modulus_; }
  double rho() const;

private:
  ConvexDomain() = default;

  Vec2 parametric_point(double s) const; // s in [0, 1)
  Vec2 implicit_gradient(const Vec2& p) const;
  void measure_constants();

  DomainParams params_;
  // affine_image only
  std::shared_ptr<const ConvexDomain> base_;
  Mat2 linear_{};
  Vec2 shift_{};

  std::vector<Vec2> polyline_; // dense boundary polyline used for projection and lengths
  double perimeter_ = 0.0;
  double area_ = 0.0;
  double diameter_ = 0.0;
  double interior_ball_radius_ = 0.0;
  double enclosing_radius_ = 0.0;
  double uniform_convexity_modulus_ = 0.0;
};

} // namespace malab

#endif
