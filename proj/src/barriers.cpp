#include "malab/barriers.hpp"

#include "malab/errors.hpp"
#include "malab/lma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace malab {

BoundaryNormalization normalize_at_boundary(const PotentialField& potential, const BoundarySample& sample)
{
  BoundaryNormalization n;
  n.frame = boundary_frame(sample);
  n.phi = ScalarField(potential.grid, std::numeric_limits<double>::quiet_NaN());
  const Grid& g = *potential.grid;
  for (auto k : g.inside_nodes()) n.phi[k] = n.frame.normalized(potential.phi[k], g.coords(k));
  n.valid = true;
  return n;
}

double Barrier::evaluate(const Vec2& z, double phi_normalized) const
{
  const Vec2 y = normalization.frame.to_local(z);
  return M_delta * y.y + phi_normalized - delta_tilde * y.x * y.x - xn2_coefficient * y.y * y.y;
}

Barrier build_supersolution(const PotentialField& potential, const BoundaryNormalization& normalization,
                            double lambda, double Lambda, double delta)
{
  if (!normalization.valid || normalization.phi.grid != potential.grid)
    throw InvalidArgument("barrier needs the potential normalized at a boundary point of the same grid");
  if (!(lambda > 0.0) || !(Lambda >= lambda)) throw InvalidArgument("need 0 < lambda <= Lambda");
  const double rho = potential.grid->domain().rho();
  if (!(delta > 0.0) || delta > rho * (1 + 1e-12)) {
    std::ostringstream os;
    os << "delta = " << delta << " must lie in (0, rho], rho = " << rho;
    throw InvalidArgument(os.str());
  }
  Barrier b;
  b.lambda = lambda;
  b.Lambda = Lambda;
  b.delta = delta;
  b.delta_tilde = delta * delta * delta / 2.0;
  b.M_delta = 2.0 * Lambda * Lambda / lambda / (delta * delta * delta);
  b.xn2_coefficient = Lambda * Lambda / (lambda * b.delta_tilde);
  b.normalization = normalization;
  const Grid& g = *potential.grid;
  b.w = ScalarField(potential.grid, std::numeric_limits<double>::quiet_NaN());
  b.ball = NodeMask(g.size(), 0);
  const Vec2 p = normalization.frame.origin;
  for (auto k : g.inside_nodes()) {
    b.w[k] = b.evaluate(g.coords(k), normalization.phi[k]);
    if (norm(g.coords(k) - p) < delta) b.ball[k] = 1;
  }
  return b;
}

BarrierReport verify_supersolution(const Barrier& barrier, const PotentialField& potential)
{
  const Grid& g = *potential.grid;
  if (barrier.w.grid != potential.grid) throw InvalidArgument("barrier was built on a different grid");
  BarrierReport r;
  r.tol_barrier = 0.1 * 2.0 * barrier.Lambda;
  r.operator_bound = -2.0 * barrier.Lambda + r.tol_barrier;
  const auto Lw = apply_operator(cofactor_field(potential).cof, barrier.w);
  r.max_operator = -kInfinity;
  r.min_operator = kInfinity;
  double hess_max = 0.0;
  for (auto k : g.interior_nodes()) {
    hess_max = std::max(hess_max, potential.hess[k].max_eig());
    if (!barrier.ball[k]) continue;
    r.max_operator = std::max(r.max_operator, Lw[k]);
    r.min_operator = std::min(r.min_operator, Lw[k]);
    ++r.operator_nodes;
  }
  r.operator_ok = r.operator_nodes > 0 && r.max_operator <= r.operator_bound;

  r.interpolation_tol = 0.25 * g.cell_area() * hess_max;
  const auto& frame = barrier.normalization.frame;
  const Vec2 p = frame.origin;
  r.boundary_min = kInfinity;
  for (const auto& s : potential.boundary) {
    if (!(norm(s.point - p) < barrier.delta)) continue;
    r.boundary_min = std::min(r.boundary_min, barrier.evaluate(s.point, frame.normalized(s.phi, s.point)));
  }
  r.boundary_ok = r.boundary_min >= -r.interpolation_tol;

  r.sphere_target = barrier.delta * barrier.delta * barrier.delta / 2.0;
  r.sphere_min = kInfinity;
  constexpr int kAngles = 720;
  for (int i = 0; i < kAngles; ++i) {
    const double a = 2.0 * std::numbers::pi * i / kAngles;
    const Vec2 z = p + Vec2{std::cos(a), std::sin(a)} * barrier.delta;
    if (!g.domain().contains(z)) continue;
    const double phi = interpolate(potential.phi, z);
    if (!std::isfinite(phi)) continue;
    r.sphere_min = std::min(r.sphere_min, barrier.evaluate(z, frame.normalized(phi, z)));
  }
  r.sphere_ok = std::isfinite(r.sphere_min) && r.sphere_min >= r.sphere_target - r.interpolation_tol;
  return r;
}

HolderModulus boundary_holder_modulus(const ScalarField& u, const Vec2& x0, double u0, double radius)
{
  const Grid& g = *u.grid;
  HolderModulus m;
  constexpr int kAngles = 256;
  for (double r = radius; r >= 4.0 * g.spacing(); r *= 0.5) {
    double sup = -1.0;
    for (int i = 0; i < kAngles; ++i) {
      const double a = 2.0 * std::numbers::pi * i / kAngles;
      const Vec2 z = x0 + Vec2{std::cos(a), std::sin(a)} * r;
      if (!g.domain().contains(z)) continue;
      const double v = interpolate(u, z);
      if (std::isfinite(v)) sup = std::max(sup, std::abs(v - u0));
    }
    if (sup > 0.0) {
      m.radii.push_back(r);
      m.oscillation.push_back(sup);
    }
  }
  if (m.radii.size() < 4) {
    std::ostringstream os;
    os << "only " << m.radii.size() << " radii resolvable between " << radius << " and four grid spacings";
    throw InvalidArgument(os.str());
  }
  const std::size_t n = m.radii.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(m.radii[i]) / n;
    my += std::log(m.oscillation[i]) / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(m.radii[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(m.oscillation[i]) - my);
  }
  m.exponent = sxy / sxx;
  m.constant = std::exp(my - m.exponent * mx);
  return m;
}

} // namespace malab
