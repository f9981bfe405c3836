#include "doctest.h"
#include "support.hpp"

#include "malab/errors.hpp"
#include "malab/sections.hpp"

#include <numbers>
#include <random>

using namespace malab;
using std::numbers::pi;

namespace {

double zero(const Vec2&) { return 0.0; }

PotentialField bowl(const GridPtr& g)
{
  return PotentialField::from_function(g, testing::half_norm2, [](const Vec2& p) { return p; });
}

std::size_t node_at(const Grid& g, const Vec2& p)
{
  const std::size_t k = g.nearest_inside(p);
  REQUIRE(k < g.size());
  REQUIRE(norm(g.coords(k) - p) < 1e-12);
  return k;
}

const BoundarySample& sample_near(const PotentialField& pot, const Vec2& p)
{
  const BoundarySample* best = &pot.boundary.front();
  for (const auto& b : pot.boundary)
    if (norm(b.point - p) < norm(best->point - p)) best = &b;
  return *best;
}

// half-plane patch {x2 >= 0} near the origin
GridPtr half_plane_patch(double h) { return Grid::discretize(testing::square(2.0, {0.0, 1.0}), h); }

BoundarySample flat_origin_sample(double phi = 0.0, Vec2 grad = {})
{
  return {{0.0, 0.0}, {0.0, -1.0}, phi, grad};
}

} // namespace

TEST_CASE("quasi-distance of the paraboloid is half the squared distance")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 20);
  const auto pot = bowl(g);
  const Anchor a = node_anchor(pot, node_at(*g, {0, 0}));
  CHECK(quasi_distance(pot, a, Vec2{0.6, 0.8}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(quasi_distance(pot, a, node_at(*g, {0.6, 0.8})) == doctest::Approx(0.5).epsilon(1e-12));
  for (auto k : g->interior_nodes())
    for (auto y : g->inside_nodes()) {
      if (y == k) continue;
      const double r = quasi_distance(pot, node_anchor(pot, k), y) / norm2(g->coords(y) - g->coords(k));
      REQUIRE(std::abs(r - 0.5) <= 1e-6);
    }
}

TEST_CASE("quasi-distance, sections and maximal heights ignore added affine functions")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 32);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  PotentialField tilted = pot;
  for (auto k : g->inside_nodes()) {
    const Vec2 p = g->coords(k);
    tilted.phi[k] += 0.7 * p.x - 1.3 * p.y + 2.0;
    tilted.grad[k] += Vec2{0.7, -1.3};
  }
  for (auto& b : tilted.boundary) {
    b.phi += 0.7 * b.point.x - 1.3 * b.point.y + 2.0;
    b.grad += Vec2{0.7, -1.3};
  }
  for (std::size_t i = 0; i < g->interior_nodes().size(); i += 97) {
    const std::size_t k = g->interior_nodes()[i];
    for (std::size_t y = 0; y < g->size(); y += 13) {
      if (!g->inside(y)) continue;
      REQUIRE(std::abs(quasi_distance(pot, node_anchor(pot, k), y) - quasi_distance(tilted, node_anchor(tilted, k), y)) <=
              1e-12);
    }
    CHECK(section_cells(pot, node_anchor(pot, k), 0.02) == section_cells(tilted, node_anchor(tilted, k), 0.02));
    CHECK(maximal_height(pot, k).height == doctest::Approx(maximal_height(tilted, k).height).epsilon(1e-9));
  }
}

TEST_CASE("quasi-distance of a solved potential matches the closed form")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 128);
  const auto pot = solve_ma(g, ScalarField(g, 1.0), zero);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  double worst = 0.0;
  for (auto center : {Vec2{0, 0}, Vec2{0.5, 0.25}, Vec2{-0.375, -0.5}}) {
    const Anchor a = node_anchor(pot, node_at(*g, center));
    for (int s = 0; s < 200; ++s) {
      const Vec2 x = center + Vec2{u(rng), u(rng)};
      worst = std::max(worst, std::abs(quasi_distance(pot, a, x) - 0.5 * norm2(x - center)));
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("sections of the paraboloid are discs of radius sqrt(2t)")
{
  const auto g = Grid::discretize(testing::square(4.0), 1.0 / 128);
  const auto pot = bowl(g);
  const Anchor a = node_anchor(pot, node_at(*g, {0, 0}));
  const auto big = section(pot, a, 0.5);
  CHECK(big.measure == doctest::Approx(pi).epsilon(0.02));
  const auto small = section(pot, a, 0.125);
  CHECK(small.measure == doctest::Approx(pi / 4).epsilon(0.02));
  CHECK(small.ellipsoid.semi_major == doctest::Approx(0.5).epsilon(0.02));
  CHECK(small.ellipsoid.semi_minor == doctest::Approx(0.5).epsilon(0.02));
  CHECK(small.ellipsoid.residual < 0.05);
  CHECK(small.is_interior);
  CHECK_FALSE(small.touches_boundary);
  CHECK(std::binary_search(small.cells.begin(), small.cells.end(), a.node));
  const auto tiny = section(pot, a, 1e-6);
  CHECK(tiny.degenerate);
  CHECK_THROWS_AS(section(pot, a, 0.0), InvalidArgument);
}

TEST_CASE("flood fill agrees with brute-force enumeration and is monotone in t")
{
  const auto g = Grid::discretize(testing::ellipse(1.0, 0.7), 1.0 / 32);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  for (std::size_t i = 0; i < g->interior_nodes().size(); i += 53) {
    const Anchor a = node_anchor(pot, g->interior_nodes()[i]);
    std::vector<std::size_t> prev;
    for (double t : {0.005, 0.02, 0.08, 0.3}) {
      const auto cells = section_cells(pot, a, t);
      std::vector<std::size_t> brute;
      for (auto k : g->inside_nodes())
        if (quasi_distance(pot, a, k) < t) brute.push_back(k);
      REQUIRE(cells == brute);
      REQUIRE(std::includes(cells.begin(), cells.end(), prev.begin(), prev.end()));
      prev = cells;
    }
  }
}

TEST_CASE("maximal heights on the unit disc")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = PotentialField::from_function(
      g, [](const Vec2& p) { return (norm2(p) - 1.0) / 2.0; }, [](const Vec2& p) { return p; });
  const auto off = maximal_height(pot, node_at(*g, {0.5, 0}));
  CHECK(off.height == doctest::Approx(0.125).epsilon(1e-3));
  CHECK(norm(off.tangency_point - Vec2{1, 0}) < 0.05);
  CHECK(maximal_height(pot, node_at(*g, {0, 0})).height == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("distance to the boundary is comparable to sqrt of the maximal height")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g->interior_nodes().size(); i += 31) nodes.push_back(g->interior_nodes()[i]);
  const auto rep = tangent_section_constant(pot, nodes);
  MESSAGE("k0 " << rep.k0 << " ratio range " << rep.min_ratio << " " << rep.max_ratio);
  CHECK(rep.samples + rep.skipped == nodes.size());
  CHECK(rep.skipped * 50 <= nodes.size());
  CHECK(rep.k0 > 0.0);
  CHECK(rep.k0 <= 1.0);
}

TEST_CASE("boundary sections of the paraboloid on a half-plane are half discs")
{
  const auto g = half_plane_patch(1.0 / 128);
  const auto pot = bowl(g);
  const auto fit = localization_fit(pot, flat_origin_sample(), 0.125);
  CHECK(std::abs(fit.tau) <= 1e-9);
  CHECK(fit.radius == doctest::Approx(0.5).epsilon(0.02));
  CHECK(fit.k_inner == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit.k_outer == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit.A.det() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sheared quadratic recovers the analytic shear")
{
  // phi = |x|^2/2 + q x1 x2 has sections whose y1-centre line is y1 = -q y2
  const double q = 0.5;
  const auto g = half_plane_patch(1.0 / 128);
  const auto pot = PotentialField::from_function(
      g, [q](const Vec2& p) { return 0.5 * norm2(p) + q * p.x * p.y; },
      [q](const Vec2& p) { return Vec2{p.x + q * p.y, p.y + q * p.x}; });
  const auto fit = localization_fit(pot, flat_origin_sample(), 0.1);
  CHECK(std::abs(fit.tau - (-q)) <= 0.05);
  CHECK(fit.A.det() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("localization constants of a solved disc potential stay bounded")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 128);
  for (double eps : {0.0, 0.1}) {
    const auto pot = solve_ma(g, pinched_density(g, eps), zero);
    const auto& b = sample_near(pot, {0, -1});
    for (double h : {0.04, 0.02, 0.01}) {
      const auto fit = localization_fit(pot, b, h);
      MESSAGE("eps " << eps << " h " << h << " tau " << fit.tau << " k " << fit.k_inner << " " << fit.k_outer);
      CHECK(fit.k_inner > 0.0);
      CHECK(fit.k_outer / fit.k_inner <= 4.0);
    }
  }
  const auto pot = solve_ma(g, ScalarField(g, 1.0), zero);
  CHECK_THROWS_AS(localization_fit(pot, sample_near(pot, {0, -1}), 1e-6), InvalidArgument);
}

TEST_CASE("L-infinity rescaling preserves the sup norm")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  const auto u = sample_field(g, [](const Vec2& p) { return std::sin(2 * p.x) * (1 - norm2(p)) + 0.3 * p.y; });
  const auto f = sample_field(g, random_smooth_function(3));
  const auto fit = localization_fit(pot, sample_near(pot, {0, -1}), 0.04);
  const auto r = rescale(pot, u, f, fit, RescaleMode::linf);
  CHECK(r.triple.linear.det() == doctest::Approx(1.0 / 0.04).epsilon(1e-12));
  CHECK(r.triple.A.det() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.triple.k > 0.0);
  CHECK(std::abs(lp_norm(r.u, kInfinity) - lp_norm(u, kInfinity)) <= 1e-3);
  // f_h = h f: sup scales by h
  CHECK(lp_norm(r.f, kInfinity) == doctest::Approx(0.04 * lp_norm(f, kInfinity)).epsilon(1e-2));
}

TEST_CASE("W2-infinity rescaling with the identity map preserves Hessians")
{
  const auto g = half_plane_patch(1.0 / 64);
  const auto pot = bowl(g);
  auto quad = [](const Vec2& p) { return p.x * p.x + 3 * p.x * p.y - p.y * p.y + p.x; };
  const auto u = sample_field(g, quad);
  const auto f = sample_field(g, [](const Vec2& p) { return std::cos(3 * p.x) + p.y; });
  const auto fit = localization_fit(pot, flat_origin_sample(), 0.125);
  REQUIRE(fit.tau == 0.0);
  const auto r = rescale(pot, u, f, fit, RescaleMode::w2inf);
  const Grid& gh = *r.triple.grid;
  auto [grad, hess] = fd_derivatives(r.u);
  std::size_t checked = 0;
  for (auto k : gh.interior_nodes()) {
    if (norm(gh.coords(k) - gh.domain().project(gh.coords(k)).point) < 6 * gh.spacing()) continue;
    REQUIRE(std::abs(hess[k].xx - 2.0) <= 1e-6);
    REQUIRE(std::abs(hess[k].xy - 3.0) <= 1e-6);
    REQUIRE(std::abs(hess[k].yy + 2.0) <= 1e-6);
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("W2-infinity rescaling preserves the mean L^2 norm of f")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  const auto f = sample_field(g, random_smooth_function(9));
  const auto u = ScalarField(g, 0.0);
  for (double h : {0.04, 0.01}) {
    const auto fit = localization_fit(pot, sample_near(pot, {0.6, -0.8}), h);
    const auto r = rescale(pot, u, f, fit, RescaleMode::w2inf);
    const double a = mean_lp_norm(r.f, 2.0, r.triple.grid->inside_mask());
    const double b = mean_lp_norm(f, 2.0, g->inside_mask());
    CHECK(a / b == doctest::Approx(1.0).epsilon(0.01));
  }
  LocalizationFit none;
  CHECK_THROWS_AS(rescale(pot, u, f, none, RescaleMode::linf), InvalidArgument);
}

TEST_CASE("interior tangent sections rescale to unit-size sections")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  const auto fit = tangent_section_fit(pot, node_at(*g, {0.5, 0.25}));
  CHECK(fit.A.det() == doctest::Approx(1.0).epsilon(1e-12));
  const auto t = rescale_domain(pot, fit);
  CHECK(t.k > 0.2);
  double min_phi = kInfinity;
  for (auto k : t.grid->inside_nodes())
    if (t.section[k]) min_phi = std::min(min_phi, t.potential.phi[k]);
  CHECK(min_phi == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("engulfing constant of the paraboloid is four")
{
  const auto g = Grid::discretize(testing::square(4.0), 1.0 / 64);
  const auto pot = bowl(g);
  const double cap = default_c_cap(pot);
  CHECK(cap == doctest::Approx(0.1).epsilon(0.01));
  const auto samples = engulfing_samples(pot, 120, cap, 17);
  REQUIRE(samples.size() == 120);
  const auto rep = engulfing_constant(pot, samples);
  CHECK(rep.theta >= 3.8);
  CHECK(rep.theta <= 4.2);
  double running = 0.0;
  for (double v : rep.per_sample) {
    REQUIRE(std::max(running, v) >= running);
    running = std::max(running, v);
  }
}

TEST_CASE("engulfing constant of a pinched potential is finite and closes under re-check")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  const auto samples = engulfing_samples(pot, 60, default_c_cap(pot), 23);
  const auto rep = engulfing_constant(pot, samples);
  MESSAGE("theta " << rep.theta);
  CHECK(rep.theta <= 10.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto outer = section_cells(pot, node_anchor(pot, s.y), (rep.per_sample[i] + 1e-9) * s.t);
    for (auto z : section_cells(pot, node_anchor(pot, s.x), s.t))
      REQUIRE(std::binary_search(outer.begin(), outer.end(), z));
  }
}

TEST_CASE("section volume scales linearly in t")
{
  {
    const auto g = Grid::discretize(testing::square(4.0), 1.0 / 64);
    const auto pot = bowl(g);
    std::vector<VolumeSample> s;
    for (double t : {0.01, 0.02, 0.04, 0.08, 0.16})
      for (Vec2 c : {Vec2{0, 0}, Vec2{0.5, -0.25}}) s.push_back({node_anchor(pot, node_at(*g, c)), t});
    const auto v = volume_scaling(pot, s);
    CHECK(v.exponent == doctest::Approx(1.0).epsilon(0.05));
    CHECK(v.c1 == doctest::Approx(2 * pi).epsilon(0.05));
    CHECK(v.c2 == doctest::Approx(2 * pi).epsilon(0.05));
  }
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pinched = solve_ma(g, pinched_density(g, 0.1), zero);
  std::vector<VolumeSample> s;
  for (double t : {0.002, 0.004, 0.008, 0.016, 0.032})
    for (Vec2 c : {Vec2{0, 0}, Vec2{0.25, 0.25}, Vec2{-0.25, 0.125}})
      s.push_back({node_anchor(pinched, node_at(*g, c)), t});
  const auto v = volume_scaling(pinched, s);
  CHECK(v.exponent >= 0.9);
  CHECK(v.exponent <= 1.1);

  const auto solved = solve_ma(g, ScalarField(g, 1.0), zero);
  std::vector<VolumeSample> bs;
  for (double t : {0.005, 0.01, 0.02, 0.04})
    for (std::size_t i = 0; i < solved.boundary.size(); i += solved.boundary.size() / 5)
      bs.push_back({boundary_anchor(solved, solved.boundary[i]), t});
  const auto bv = volume_scaling(solved, bs);
  CHECK(bv.exponent >= 0.85);
  CHECK(bv.exponent <= 1.15);

  std::vector<VolumeSample> few(s.begin(), s.begin() + 3);
  CHECK_THROWS_AS(volume_scaling(pinched, few), InvalidArgument);
}

TEST_CASE("dichotomy")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  CHECK(dichotomy_classify(pot, node_at(*g, {0, 0}), 0.001).interior);
  const std::size_t near = node_at(*g, {0.90625, 0});
  const auto d = dichotomy_classify(pot, near, 0.05);
  CHECK_FALSE(d.interior);
  CHECK(std::isfinite(d.c_bar));
  CHECK(d.c_bar > 0.0);
  CHECK(norm(d.z - Vec2{1, 0}) < 0.05);
  for (std::size_t i = 0; i < g->interior_nodes().size(); i += 41) {
    const std::size_t k = g->interior_nodes()[i];
    for (double t : {0.2, 0.05, 0.0125})
      if (dichotomy_classify(pot, k, t).interior) REQUIRE(dichotomy_classify(pot, k, t / 2).interior);
  }
}
