#include "doctest.h"
#include "support.hpp"

#include "malab/calculus.hpp"
#include "malab/errors.hpp"

#include <random>

using namespace malab;
using testing::square;
using testing::unit_disc;

TEST_CASE("unit disc has rho 1")
{
  const auto d = unit_disc();
  CHECK(d.interior_ball_radius() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(d.enclosing_radius() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.rho() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(d.uniform_convexity_modulus() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("ellipse rho is the minimal curvature radius b^2/a")
{
  const auto d = testing::ellipse(1.0, 0.5);
  CHECK(d.interior_ball_radius() == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(d.rho() == doctest::Approx(0.25).epsilon(1e-3));
  // minimal curvature b/a^2 at the ends of the major axis
  CHECK(d.uniform_convexity_modulus() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("square side 2 is not uniformly convex and has rho 1/sqrt2")
{
  const auto d = square(2.0);
  CHECK(d.uniform_convexity_modulus() == 0.0);
  CHECK(d.interior_ball_radius() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d.enclosing_radius() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(d.rho() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("non-convex polygon is rejected with the offending vertex")
{
  DomainParams p;
  p.kind = DomainKind::polygon;
  p.vertices = {{0, 0}, {2, 0}, {2, 2}, {1, 0.5}, {0, 2}};
  try {
    ConvexDomain::build(p);
    FAIL("expected rejection");
  } catch (const NonConvexPolygon& e) {
    CHECK(e.vertex() == 3);
  }
}

TEST_CASE("convex polygon accepted and membership is convex")
{
  DomainParams p;
  p.kind = DomainKind::polygon;
  p.vertices = {{-1, -1}, {1, -1}, {1.2, 0.5}, {0, 1.3}, {-1.1, 0.4}};
  const auto d = ConvexDomain::build(p);
  CHECK(d.rho() > 0.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.3, 1.3);
  int pairs = 0;
  while (pairs < 2000) {
    const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    if (!d.contains(a) || !d.contains(b)) continue;
    ++pairs;
    REQUIRE(d.contains((a + b) * 0.5));
  }
}

TEST_CASE("every boundary sample of a smooth domain admits an interior tangent ball")
{
  for (const auto& d : {unit_disc(), testing::ellipse(1.0, 0.5), testing::disc(0.5, {0.2, -0.1})}) {
    const double r = d.interior_ball_radius();
    for (const auto& bp : d.boundary_samples(200)) {
      const Vec2 c = bp.point - bp.normal * r;
      for (int a = 0; a < 64; ++a) {
        const double th = 2.0 * std::numbers::pi * a / 64;
        REQUIRE(d.contains(c + Vec2{std::cos(th), std::sin(th)} * (r * 0.999), 1e-9));
      }
    }
  }
}

TEST_CASE("too coarse a spacing is rejected")
{
  CHECK_THROWS_AS(Grid::discretize(unit_disc(), 0.5), InvalidArgument);
  CHECK_THROWS_AS(Grid::discretize(unit_disc(), 0.0), InvalidArgument);
  CHECK_THROWS_AS(Grid::discretize(unit_disc(), -0.1), InvalidArgument);
}

TEST_CASE("interior node count approaches pi/h^2")
{
  const double h = 1.0 / 64;
  const auto g = Grid::discretize(unit_disc(), h);
  const double expected = std::numbers::pi / (h * h);
  CHECK(std::abs(g->count(NodeKind::interior) - expected) / expected < 0.05);
  for (auto k : g->interior_nodes()) REQUIRE(norm(g->coords(k)) <= 1.0);
}

TEST_CASE("square of side 2 at spacing 1/4 has 7x7 interior nodes")
{
  const auto g = Grid::discretize(square(2.0), 0.25);
  CHECK(g->count(NodeKind::interior) == 49);
}

TEST_CASE("node classes partition the grid and interior stencils stay inside")
{
  const auto g = Grid::discretize(testing::ellipse(1.0, 0.5), 1.0 / 32);
  const std::size_t total =
      g->count(NodeKind::interior) + g->count(NodeKind::boundary_adjacent) + g->count(NodeKind::exterior);
  CHECK(total == g->size());
  for (auto k : g->interior_nodes()) {
    const int i = g->col(k), j = g->row(k);
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) REQUIRE(g->inside(i + di, j + dj));
  }
  for (std::size_t k = 0; k < g->size(); ++k)
    REQUIRE(g->inside(k) == g->domain().contains(g->coords(k), 1e-10 * g->spacing()));
}

TEST_CASE("finite differences are exact on quadratics")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 16);
  auto [grad, hess] = fd_derivatives(sample_field(g, [](const Vec2& p) { return p.x * p.x + 3 * p.y * p.y; }));
  for (auto k : g->interior_nodes()) {
    REQUIRE(hess[k].xx == doctest::Approx(2.0).epsilon(1e-9));
    REQUIRE(hess[k].yy == doctest::Approx(6.0).epsilon(1e-9));
    REQUIRE(std::abs(hess[k].xy) < 1e-9);
    const Vec2 p = g->coords(k);
    REQUIRE(grad[k].x == doctest::Approx(2 * p.x).epsilon(1e-9));
  }
  auto [g2, h2] = fd_derivatives(sample_field(g, [](const Vec2& p) { return p.x * p.y; }));
  for (auto k : g->interior_nodes()) {
    REQUIRE(h2[k].xy == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(std::abs(h2[k].xx) < 1e-9);
  }
}

TEST_CASE("Hessian of sin x sin y converges at second order")
{
  auto err = [](double h) {
    const auto g = Grid::discretize(unit_disc(), h);
    auto [grad, hess] = fd_derivatives(sample_field(g, [](const Vec2& p) { return std::sin(p.x) * std::sin(p.y); }));
    double e = 0.0;
    for (auto k : g->interior_nodes()) {
      const Vec2 p = g->coords(k);
      const Sym2 exact{-std::sin(p.x) * std::sin(p.y), std::cos(p.x) * std::cos(p.y), -std::sin(p.x) * std::sin(p.y)};
      e = std::max(e, (hess[k] - exact).max_abs_entry());
    }
    return e;
  };
  const double e1 = err(1.0 / 16), e2 = err(1.0 / 32);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e2 < 1e-3);
}

TEST_CASE("lp norms")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 64);
  const ScalarField one(g, 1.0);
  CHECK(lp_norm(one, 2.0) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(0.02));

  const auto sq = Grid::discretize(square(1.0, {0.5, 0.5}), 1.0 / 64);
  const ScalarField x = sample_field(sq, [](const Vec2& p) { return p.x; });
  CHECK(lp_norm(x, 1.0) == doctest::Approx(0.5).epsilon(0.02));

  NodeMask none(g->size(), 0);
  CHECK_THROWS_AS(lp_norm(one, 2.0, none), InvalidArgument);
  CHECK_THROWS_AS(lp_norm(one, 0.5), InvalidArgument);
}

TEST_CASE("lp norms are homogeneous and mean norms are monotone in p")
{
  const auto g = Grid::discretize(testing::ellipse(1.0, 0.6), 1.0 / 32);
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    ScalarField f(g, std::numeric_limits<double>::quiet_NaN());
    for (auto k : g->inside_nodes()) f[k] = n(rng);
    const double c = n(rng) * 3.0;
    ScalarField cf = f;
    for (auto k : g->inside_nodes()) cf[k] = c * f[k];
    const NodeMask all = g->inside_mask();
    double prev = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0, 7.0, kInfinity}) {
      CHECK(lp_norm(cf, p) == doctest::Approx(std::abs(c) * lp_norm(f, p)).epsilon(1e-13));
      const double m = mean_lp_norm(f, p, all);
      CHECK(m >= prev * (1 - 1e-14));
      prev = m;
    }
  }
}

TEST_CASE("cell-count measure converges to the area at first order or better")
{
  double prev = kInfinity;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto g = Grid::discretize(testing::ellipse(1.0, 0.5), h);
    const double e = std::abs(measure(*g, g->inside_mask()) - std::numbers::pi * 0.5);
    CHECK(e <= 2.0 * h);
    CHECK(e <= prev);
    prev = e;
  }
}
