#include "malab/domain.hpp"

#include "malab/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace malab {

namespace {

constexpr std::size_t kPolylineSize = 4096;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sgn_pow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }

Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double& t)
{
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return a + ab * t;
}

double polygon_signed_area(const std::vector<Vec2>& v)
{
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

double distance_to_polyline(const Vec2& p, const std::vector<Vec2>& poly)
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    double t = 0.0;
    const Vec2 q = closest_on_segment(p, poly[i], poly[(i + 1) % poly.size()], t);
    best = std::min(best, norm2(p - q));
  }
  return std::sqrt(best);
}

} // namespace

std::string to_string(DomainKind kind)
{
  switch (kind) {
  case DomainKind::disc: return "disc";
  case DomainKind::ellipse: return "ellipse";
  case DomainKind::square: return "square";
  case DomainKind::superellipse: return "superellipse";
  case DomainKind::polygon: return "polygon";
  case DomainKind::affine_image: return "affine_image";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name)
{
  if (name == "disc") return DomainKind::disc;
  if (name == "ellipse") return DomainKind::ellipse;
  if (name == "square") return DomainKind::square;
  if (name == "superellipse") return DomainKind::superellipse;
  if (name == "polygon") return DomainKind::polygon;
  throw InvalidArgument("unknown domain kind '" + name + "'");
}

ConvexDomain ConvexDomain::build(const DomainParams& params)
{
  ConvexDomain d;
  d.params_ = params;
  switch (params.kind) {
  case DomainKind::disc:
    if (!(params.radius > 0.0)) throw InvalidArgument("disc radius must be positive");
    break;
  case DomainKind::ellipse:
    if (!(params.semi_a > 0.0 && params.semi_b > 0.0))
      throw InvalidArgument("ellipse semi-axes must be positive");
    break;
  case DomainKind::square:
    if (!(params.side > 0.0)) throw InvalidArgument("square side must be positive");
    d.params_.vertices = {params.center + Vec2{-0.5 * params.side, -0.5 * params.side},
                          params.center + Vec2{0.5 * params.side, -0.5 * params.side},
                          params.center + Vec2{0.5 * params.side, 0.5 * params.side},
                          params.center + Vec2{-0.5 * params.side, 0.5 * params.side}};
    break;
  case DomainKind::superellipse:
    if (!(params.semi_a > 0.0 && params.semi_b > 0.0))
      throw InvalidArgument("superellipse semi-axes must be positive");
    if (!(params.exponent >= 2.0)) throw InvalidArgument("superellipse exponent must be >= 2 for convexity");
    break;
  case DomainKind::polygon: {
    const auto& v = params.vertices;
    if (v.size() < 3) throw InvalidArgument("polygon needs at least 3 vertices");
    const double orient = polygon_signed_area(v) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2& prev = v[(i + v.size() - 1) % v.size()];
      const Vec2& next = v[(i + 1) % v.size()];
      if (orient * cross(v[i] - prev, next - v[i]) <= 0.0) {
        std::ostringstream os;
        os << "polygon is not strictly convex at vertex " << i << " (" << v[i].x << ", " << v[i].y << ")";
        throw NonConvexPolygon(i, os.str());
      }
    }
    if (orient < 0.0) d.params_.vertices.assign(v.rbegin(), v.rend());
    Vec2 c{};
    for (const auto& p : d.params_.vertices) c += p;
    d.params_.center = c / static_cast<double>(v.size());
    break;
  }
  case DomainKind::affine_image:
    throw InvalidArgument("affine images are built with ConvexDomain::affine_image");
  }
  d.measure_constants();
  return d;
}

ConvexDomain ConvexDomain::affine_image(const ConvexDomain& base, const Mat2& linear, const Vec2& shift)
{
  if (!(std::abs(linear.det()) > 0.0)) throw InvalidArgument("affine image needs an invertible map");
  ConvexDomain d;
  d.params_.kind = DomainKind::affine_image;
  d.base_ = std::make_shared<const ConvexDomain>(base);
  d.linear_ = linear;
  d.shift_ = shift;
  d.params_.center = linear.apply(base.params().center - shift);
  d.measure_constants();
  return d;
}

bool ConvexDomain::contains(const Vec2& p, double slack) const
{
  const Vec2 q = p - params_.center;
  switch (params_.kind) {
  case DomainKind::disc: return norm(q) <= params_.radius + slack;
  case DomainKind::ellipse: {
    const double a = params_.semi_a, b = params_.semi_b;
    return (q.x * q.x) / (a * a) + (q.y * q.y) / (b * b) <= 1.0 + slack;
  }
  case DomainKind::superellipse: {
    const double e = params_.exponent;
    return std::pow(std::abs(q.x) / params_.semi_a, e) + std::pow(std::abs(q.y) / params_.semi_b, e) <= 1.0 + slack;
  }
  case DomainKind::square:
  case DomainKind::polygon: {
    const auto& v = params_.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 e = v[(i + 1) % v.size()] - v[i];
      if (cross(e, p - v[i]) < -slack * norm(e)) return false;
    }
    return true;
  }
  case DomainKind::affine_image: return base_->contains(linear_.inverse().apply(p) + shift_, slack);
  }
  return false;
}

Vec2 ConvexDomain::parametric_point(double s) const
{
  const double t = kTwoPi * s;
  const Vec2& c = params_.center;
  switch (params_.kind) {
  case DomainKind::disc: return c + Vec2{std::cos(t), std::sin(t)} * params_.radius;
  case DomainKind::ellipse: return c + Vec2{params_.semi_a * std::cos(t), params_.semi_b * std::sin(t)};
  case DomainKind::superellipse: {
    const double e = 2.0 / params_.exponent;
    return c + Vec2{params_.semi_a * sgn_pow(std::cos(t), e), params_.semi_b * sgn_pow(std::sin(t), e)};
  }
  case DomainKind::square:
  case DomainKind::polygon: {
    // perimeter parametrization
    const auto& v = params_.vertices;
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) total += norm(v[(i + 1) % v.size()] - v[i]);
    double target = s * total;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 e = v[(i + 1) % v.size()] - v[i];
      const double len = norm(e);
      if (target <= len) return v[i] + e * (target / len);
      target -= len;
    }
    return v.front();
  }
  case DomainKind::affine_image: return linear_.apply(base_->parametric_point(s) - shift_);
  }
  return c;
}

Vec2 ConvexDomain::implicit_gradient(const Vec2& p) const
{
  const Vec2 q = p - params_.center;
  switch (params_.kind) {
  case DomainKind::disc: return q;
  case DomainKind::ellipse: return {q.x / (params_.semi_a * params_.semi_a), q.y / (params_.semi_b * params_.semi_b)};
  case DomainKind::superellipse: {
    const double e = params_.exponent;
    return {sgn_pow(q.x / params_.semi_a, e - 1.0) / params_.semi_a,
            sgn_pow(q.y / params_.semi_b, e - 1.0) / params_.semi_b};
  }
  case DomainKind::affine_image: {
    const Mat2 inv = linear_.inverse();
    const Vec2 base_normal = base_->implicit_gradient(inv.apply(p) + shift_);
    return inv.transpose().apply(base_normal);
  }
  default: return {};
  }
}

namespace {

/// Radial snap of a point onto a level-one set of a degree-e homogeneous gauge.
Vec2 snap_gauge(const Vec2& c, const Vec2& p, double a, double b, double e)
{
  const Vec2 q = p - c;
  const double g = std::pow(std::abs(q.x) / a, e) + std::pow(std::abs(q.y) / b, e);
  if (!(g > 0.0)) return p;
  return c + q / std::pow(g, 1.0 / e);
}

} // namespace

BoundaryPoint ConvexDomain::project(const Vec2& p) const
{
  const Vec2& c = params_.center;
  if (params_.kind == DomainKind::disc) {
    Vec2 dir = p - c;
    if (norm(dir) == 0.0) dir = {1.0, 0.0};
    const Vec2 n = normalized(dir);
    return {c + n * params_.radius, n};
  }
  if (params_.kind == DomainKind::square || params_.kind == DomainKind::polygon) {
    const auto& v = params_.vertices;
    double best = std::numeric_limits<double>::infinity();
    BoundaryPoint out{};
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 a = v[i], b = v[(i + 1) % v.size()];
      double t = 0.0;
      const Vec2 q = closest_on_segment(p, a, b, t);
      const double d = norm2(p - q);
      if (d < best) {
        best = d;
        const Vec2 e = normalized(b - a);
        out = {q, Vec2{e.y, -e.x}};
      }
    }
    return out;
  }
  // smooth kinds: nearest polyline point, then snapped back onto the curve
  double best = std::numeric_limits<double>::infinity();
  Vec2 nearest = polyline_.front();
  for (std::size_t i = 0; i < polyline_.size(); ++i) {
    double t = 0.0;
    const Vec2 q = closest_on_segment(p, polyline_[i], polyline_[(i + 1) % polyline_.size()], t);
    const double d = norm2(p - q);
    if (d < best) {
      best = d;
      nearest = q;
    }
  }
  Vec2 on_curve = nearest;
  if (params_.kind == DomainKind::ellipse)
    on_curve = snap_gauge(c, nearest, params_.semi_a, params_.semi_b, 2.0);
  else if (params_.kind == DomainKind::superellipse)
    on_curve = snap_gauge(c, nearest, params_.semi_a, params_.semi_b, params_.exponent);
  else if (params_.kind == DomainKind::affine_image) {
    const BoundaryPoint base_bp = base_->project(linear_.inverse().apply(nearest) + shift_);
    on_curve = linear_.apply(base_bp.point - shift_);
    return {on_curve, normalized(linear_.inverse().transpose().apply(base_bp.normal))};
  }
  return {on_curve, normalized(implicit_gradient(on_curve))};
}

std::vector<BoundaryPoint> ConvexDomain::boundary_samples(std::size_t count) const
{
  std::vector<BoundaryPoint> out;
  out.reserve(count);
  if (params_.kind == DomainKind::disc) {
    for (std::size_t i = 0; i < count; ++i) {
      const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(count);
      const Vec2 n{std::cos(t), std::sin(t)};
      out.push_back({params_.center + n * params_.radius, n});
    }
    return out;
  }
  if (params_.kind == DomainKind::affine_image) {
    for (const auto& bp : base_->boundary_samples(count))
      out.push_back({linear_.apply(bp.point - shift_), normalized(linear_.inverse().transpose().apply(bp.normal))});
    return out;
  }
  // arclength walk along the polyline
  const std::size_t n = polyline_.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + norm(polyline_[(i + 1) % n] - polyline_[i]);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = cum[n] * static_cast<double>(k) / static_cast<double>(count);
    while (seg + 1 < n && cum[seg + 1] < target) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    const Vec2 a = polyline_[seg], b = polyline_[(seg + 1) % n];
    Vec2 p = a + (b - a) * t;
    if (params_.kind == DomainKind::square || params_.kind == DomainKind::polygon) {
      const Vec2 e = normalized(b - a);
      out.push_back({p, Vec2{e.y, -e.x}});
    } else {
      const double e = params_.kind == DomainKind::ellipse ? 2.0 : params_.exponent;
      p = snap_gauge(params_.center, p, params_.semi_a, params_.semi_b, e);
      out.push_back({p, normalized(implicit_gradient(p))});
    }
  }
  return out;
}

Box ConvexDomain::bounding_box() const
{
  Box b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
        {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  if (params_.kind == DomainKind::disc) {
    const Vec2 r{params_.radius, params_.radius};
    return {params_.center - r, params_.center + r};
  }
  if (params_.kind == DomainKind::ellipse || params_.kind == DomainKind::superellipse) {
    const Vec2 r{params_.semi_a, params_.semi_b};
    return {params_.center - r, params_.center + r};
  }
  for (const auto& p : polyline_) {
    b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
    b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
  }
  return b;
}

double ConvexDomain::rho() const { return std::min(interior_ball_radius_, 1.0 / enclosing_radius_); }

void ConvexDomain::measure_constants()
{
  const bool polygonal = params_.kind == DomainKind::square || params_.kind == DomainKind::polygon;
  if (polygonal) {
    polyline_ = params_.vertices;
  } else {
    polyline_.resize(kPolylineSize);
    for (std::size_t i = 0; i < kPolylineSize; ++i)
      polyline_[i] = parametric_point(static_cast<double>(i) / static_cast<double>(kPolylineSize));
  }
  const std::size_t n = polyline_.size();

  perimeter_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) perimeter_ += norm(polyline_[(i + 1) % n] - polyline_[i]);
  area_ = std::abs(polygon_signed_area(polyline_));

  const std::size_t stride = std::max<std::size_t>(1, n / 512);
  diameter_ = 0.0;
  enclosing_radius_ = 0.0;
  for (std::size_t i = 0; i < n; i += (polygonal ? 1 : stride)) {
    enclosing_radius_ = std::max(enclosing_radius_, norm(polyline_[i] - params_.center));
    for (std::size_t j = i + 1; j < n; j += (polygonal ? 1 : stride))
      diameter_ = std::max(diameter_, norm(polyline_[i] - polyline_[j]));
  }

  // largest inscribed disc by pattern search on the distance to the boundary
  auto depth = [&](const Vec2& p) { return contains(p) ? distance_to_polyline(p, polyline_) : -1.0; };
  Vec2 best = params_.center;
  double best_depth = depth(best);
  const Box bb = bounding_box();
  double step = 0.25 * std::max(bb.hi.x - bb.lo.x, bb.hi.y - bb.lo.y);
  while (step > 1e-7 * std::max(1.0, diameter_)) {
    bool moved = false;
    for (const Vec2 dir : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}, Vec2{1, 1}, Vec2{-1, 1}, Vec2{1, -1},
                           Vec2{-1, -1}}) {
      const Vec2 cand = best + dir * step;
      const double dd = depth(cand);
      if (dd > best_depth) {
        best = cand;
        best_depth = dd;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  const double inradius = best_depth;

  switch (params_.kind) {
  case DomainKind::disc:
    interior_ball_radius_ = params_.radius;
    enclosing_radius_ = params_.radius;
    uniform_convexity_modulus_ = 1.0 / params_.radius;
    diameter_ = 2.0 * params_.radius;
    area_ = std::numbers::pi * params_.radius * params_.radius;
    perimeter_ = kTwoPi * params_.radius;
    return;
  case DomainKind::ellipse: {
    const double a = params_.semi_a, b = params_.semi_b;
    interior_ball_radius_ = std::min(b * b / a, a * a / b);
    uniform_convexity_modulus_ = std::min(b / (a * a), a / (b * b));
    area_ = std::numbers::pi * a * b;
    return;
  }
  case DomainKind::square:
  case DomainKind::polygon:
    interior_ball_radius_ = inradius;
    uniform_convexity_modulus_ = 0.0;
    return;
  case DomainKind::superellipse:
  case DomainKind::affine_image: {
    // discrete curvature through consecutive triples of the polyline
    double kmax = 0.0, kmin = std::numeric_limits<double>::infinity();
    bool has_corner = params_.kind == DomainKind::affine_image &&
                      (base_->kind() == DomainKind::square || base_->kind() == DomainKind::polygon);
    if (!has_corner) {
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polyline_[(i + n - 1) % n], b = polyline_[i], c = polyline_[(i + 1) % n];
        const double twice_area = std::abs(cross(b - a, c - a));
        const double denom = norm(b - a) * norm(c - b) * norm(c - a);
        const double k = denom > 0.0 ? 2.0 * twice_area / denom : 0.0;
        kmax = std::max(kmax, k);
        kmin = std::min(kmin, k);
      }
      interior_ball_radius_ = std::min(inradius, kmax > 0.0 ? 1.0 / kmax : inradius);
    } else {
      interior_ball_radius_ = inradius;
      kmin = 0.0;
    }
    if (params_.kind == DomainKind::superellipse && params_.exponent > 2.0) kmin = 0.0;
    uniform_convexity_modulus_ = kmin;
    return;
  }
  }
}

} // namespace malab
