#include "doctest.h"
#include "support.hpp"

#include "malab/barriers.hpp"
#include "malab/errors.hpp"
#include "malab/lma_solver.hpp"

#include <cmath>

using namespace malab;

namespace {

double zero(const Vec2&) { return 0.0; }

const BoundarySample& sample_near(const PotentialField& pot, const Vec2& p)
{
  const BoundarySample* best = &pot.boundary.front();
  for (const auto& b : pot.boundary)
    if (norm(b.point - p) < norm(best->point - p)) best = &b;
  return *best;
}

PotentialField shifted_bowl(const GridPtr& g)
{
  return PotentialField::from_function(
      g, [](const Vec2& p) { return 0.5 * (norm2(p) - 1.0); }, [](const Vec2& p) { return p; });
}

} // namespace

TEST_CASE("barrier constants follow the closed forms")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 32);
  const auto pot = shifted_bowl(g);
  const auto n = normalize_at_boundary(pot, sample_near(pot, {0, -1}));
  const auto half = build_supersolution(pot, n, 1.0, 1.0, 0.5);
  CHECK(half.delta_tilde == 0.0625);
  CHECK(half.M_delta == 16.0);
  CHECK(half.xn2_coefficient == 16.0);
  const auto one = build_supersolution(pot, n, 1.0, 1.0, 1.0);
  CHECK(one.delta_tilde == 0.5);
  CHECK(one.M_delta == 2.0);
  CHECK(one.xn2_coefficient == 2.0);
  const auto pinched = build_supersolution(pot, n, 0.9, 1.1, 0.5);
  CHECK(pinched.M_delta == doctest::Approx(2 * 1.21 / 0.9 / 0.125).epsilon(1e-15));
  CHECK(pinched.xn2_coefficient == doctest::Approx(1.21 / (0.9 * 0.0625)).epsilon(1e-15));
  CHECK(build_supersolution(pot, n, 0.9, 1.2, 0.5).M_delta > pinched.M_delta);
}

TEST_CASE("barrier preconditions")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 32);
  const auto pot = shifted_bowl(g);
  CHECK_THROWS_AS(build_supersolution(pot, BoundaryNormalization{}, 1.0, 1.0, 0.5), InvalidArgument);
  const auto n = normalize_at_boundary(pot, sample_near(pot, {0, -1}));
  CHECK_THROWS_AS(build_supersolution(pot, n, 1.0, 1.0, 1.5), InvalidArgument);
  CHECK_THROWS_AS(build_supersolution(pot, n, 1.0, 0.5, 0.5), InvalidArgument);
  const auto& s = sample_near(pot, {0, -1});
  CHECK(n.frame.normalized(s.phi, s.point) == 0.0);
  CHECK(n.frame.to_local(s.point - s.normal) == Vec2{0.0, 1.0});
}

TEST_CASE("supersolution of the paraboloid")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = shifted_bowl(g);
  const auto b = build_supersolution(pot, normalize_at_boundary(pot, sample_near(pot, {0, -1})), 1.0, 1.0, 0.5);
  const auto r = verify_supersolution(b, pot);
  MESSAGE("L w in [" << r.min_operator << ", " << r.max_operator << "] boundary " << r.boundary_min << " sphere "
                     << r.sphere_min);
  CHECK(r.operator_nodes > 100);
  CHECK(r.max_operator <= -2.0 + 0.2);
  CHECK(r.boundary_min >= 0.0);
  CHECK(r.sphere_min >= 0.0625 - r.interpolation_tol);
  CHECK(r.passed());
}

TEST_CASE("supersolution of a pinched potential")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  for (Vec2 at : {Vec2{0, -1}, Vec2{1, 0}, Vec2{-0.6, 0.8}})
    for (double delta : {0.5, 0.25}) {
      const auto b = build_supersolution(pot, normalize_at_boundary(pot, sample_near(pot, at)), 0.9, 1.1, delta);
      const auto r = verify_supersolution(b, pot);
      MESSAGE("delta " << delta << " max L w " << r.max_operator << " boundary " << r.boundary_min << " sphere "
                       << r.sphere_min << " target " << r.sphere_target);
      CHECK(r.max_operator <= -2.0 * 1.1 + 0.1 * 2.0 * 1.1);
      CHECK(r.passed());
    }
}

TEST_CASE("boundary inequality tracks quadratic separation")
{
  const auto disc = Grid::discretize(testing::unit_disc(), 1.0 / 32);
  const auto round = solve_ma(disc, ScalarField(disc, 1.0), zero);
  const auto rb = verify_supersolution(
      build_supersolution(round, normalize_at_boundary(round, sample_near(round, {0, -1})), 1.0, 1.0, 0.5), round);
  CHECK(quadratic_separation_check(round).passed);
  CHECK(rb.boundary_ok);

  // flat edge: phi vanishes along it, so w = -dtilde |x'|^2 < 0 there
  const auto sq = Grid::discretize(testing::square(2.0), 1.0 / 32);
  const auto flat = solve_ma(sq, ScalarField(sq, 1.0), zero);
  const auto fb = verify_supersolution(
      build_supersolution(flat, normalize_at_boundary(flat, sample_near(flat, {0, -1})), 1.0, 1.0, 0.5), flat);
  CHECK_FALSE(quadratic_separation_check(flat).passed);
  CHECK_FALSE(fb.boundary_ok);
  CHECK(fb.boundary_min < 0.0);
}

TEST_CASE("boundary Hoelder modulus")
{
  const auto g = Grid::discretize(testing::square(2.0, {0.0, 1.0}), 1.0 / 128);
  const auto affine = sample_field(g, [](const Vec2& p) { return 2.0 * p.x - p.y + 3.0; });
  const auto lin = boundary_holder_modulus(affine, {0, 0}, 3.0, 0.5);
  CHECK(lin.radii.size() >= 4);
  CHECK(lin.exponent == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lin.constant == doctest::Approx(std::sqrt(5.0)).epsilon(1e-3));

  const auto root = sample_field(g, [](const Vec2& p) { return std::sqrt(norm(p)) * (1.0 + 0.3 * std::cos(p.x)); });
  const auto half = boundary_holder_modulus(root, {0, 0}, 0.0, 0.5);
  MESSAGE("sqrt exponent " << half.exponent);
  CHECK(std::abs(half.exponent - 0.5) <= 0.05);
  CHECK_THROWS_AS(boundary_holder_modulus(root, {0, 0}, 0.0, 0.05), InvalidArgument);

  const auto dg = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(dg, pinched_density(dg, 0.1), zero);
  const auto f = sample_field(dg, random_smooth_function(21));
  const auto sol = solve_lma(cofactor_field(pot), f, zero);
  const auto m = boundary_holder_modulus(sol.u, {0, -1}, 0.0, 0.5);
  MESSAGE("LMA boundary exponent " << m.exponent);
  CHECK(m.exponent > 0.0);
}
