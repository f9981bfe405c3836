#include "doctest.h"
#include "support.hpp"

#include "malab/errors.hpp"
#include "malab/ma_solver.hpp"

#include <numbers>

using namespace malab;
using testing::unit_disc;

namespace {

double zero(const Vec2&) { return 0.0; }

double disc_error(double h)
{
  const auto g = Grid::discretize(unit_disc(), h);
  const auto pot = solve_ma(g, ScalarField(g, 1.0), zero);
  double e = 0.0;
  for (auto k : g->inside_nodes()) e = std::max(e, std::abs(pot.phi[k] - (norm2(g->coords(k)) - 1.0) / 2.0));
  return e;
}

ScalarField wavy_density(const GridPtr& g, double amp)
{
  return sample_field(g, [amp](const Vec2& p) {
    return 1.0 + amp * std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y);
  });
}

} // namespace

TEST_CASE("disc with unit density recovers the paraboloid at second order")
{
  const double e32 = disc_error(1.0 / 32), e64 = disc_error(1.0 / 64);
  CHECK(e64 <= 1e-3);
  CHECK(e32 / e64 >= 3.5);
}

TEST_CASE("oscillating density is matched to 1e-6 pointwise")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 64);
  const auto rho = wavy_density(g, 0.1);
  const auto pot = solve_ma(g, rho, zero);
  CHECK(pot.residual <= 1e-8);
  CHECK(ma_residual(pot.phi, rho) <= 1e-6);
  CHECK(pot.lambda == doctest::Approx(0.9).epsilon(0.01));
  CHECK(pot.Lambda == doctest::Approx(1.1).epsilon(0.01));
  const auto cert = certify_convexity(pot, 0.0);
  CHECK(cert.passed);
  CHECK(cert.min_eigenvalue > 0.0);
}

TEST_CASE("non-positive density is rejected")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 16);
  ScalarField rho(g, 1.0);
  rho[g->interior_nodes()[10]] = 0.0;
  CHECK_THROWS_AS(solve_ma(g, rho, zero), InvalidArgument);
}

TEST_CASE("iteration cap surfaces the last residual")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 16);
  MaSolverOptions opt;
  opt.max_iter = 1;
  opt.tol_ma = 1e-14;
  try {
    solve_ma(g, wavy_density(g, 0.3), zero, opt);
    FAIL("expected non-convergence");
  } catch (const SolverError& e) {
    CHECK(e.last_residual() > 0.0);
    CHECK(std::isfinite(e.last_residual()));
  }
}

TEST_CASE("cofactor of explicit Hessians")
{
  CHECK(Sym2{2, 0, 3}.cofactor().xx == 3);
  CHECK(Sym2{2, 0, 3}.cofactor().yy == 2);
  const Sym2 c = Sym2{2, 1, 2}.cofactor();
  CHECK(c.xx == 2);
  CHECK(c.xy == -1);
  CHECK(c.yy == 2);

  const auto g = Grid::discretize(unit_disc(), 1.0 / 32);
  const auto pot = PotentialField::from_function(g, testing::half_norm2);
  const auto cof = cofactor_field(pot);
  for (auto k : g->interior_nodes()) {
    REQUIRE(cof.cof[k].xx == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(cof.cof[k].yy == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(std::abs(cof.cof[k].xy) < 1e-9);
  }
  CHECK(cof.source == &pot);
}

TEST_CASE("cofactor identity holds node-wise to rounding")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 32);
  const auto pot = solve_ma(g, wavy_density(g, 0.1), zero);
  const auto cof = cofactor_field(pot);
  for (auto k : g->interior_nodes()) {
    const Sym2& a = pot.hess[k];
    const Sym2& c = cof.cof[k];
    const double d = a.det();
    // (c * a) entries
    REQUIRE(std::abs(c.xx * a.xx + c.xy * a.xy - d) <= 1e-12 * (1 + std::abs(d)));
    REQUIRE(std::abs(c.xx * a.xy + c.xy * a.yy) <= 1e-12 * (1 + std::abs(d)));
    REQUIRE(std::abs(c.xy * a.xx + c.yy * a.xy) <= 1e-12 * (1 + std::abs(d)));
    REQUIRE(std::abs(c.xy * a.xy + c.yy * a.yy - d) <= 1e-12 * (1 + std::abs(d)));
    REQUIRE(c.min_eig() >= 0.0);
  }
}

TEST_CASE("cofactor rows are discretely divergence free in the limit")
{
  auto worst = [](double h) {
    const auto g = Grid::discretize(unit_disc(), h);
    const auto pot = solve_ma(g, wavy_density(g, 0.1), zero);
    const auto div = cofactor_divergence(cofactor_field(pot));
    double m = 0.0;
    for (auto k : g->interior_nodes())
      if (std::isfinite(div[k].x) && norm(g->coords(k)) < 0.8) m = std::max({m, std::abs(div[k].x), std::abs(div[k].y)});
    return m;
  };
  const double a = worst(1.0 / 32), b = worst(1.0 / 64);
  CHECK(b < a);
  CHECK(a / b >= 1.8);
}

TEST_CASE("convexity certificate")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 32);
  const auto bowl = certify_convexity(PotentialField::from_function(g, testing::half_norm2), 1e-6);
  CHECK(bowl.passed);
  CHECK(bowl.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-9));
  const auto saddle =
      certify_convexity(PotentialField::from_function(g, [](const Vec2& p) { return p.x * p.x - p.y * p.y; }), 1e-6);
  CHECK_FALSE(saddle.passed);
  CHECK(saddle.min_eigenvalue == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("quadratic separation of the paraboloid is exactly one half")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 32);
  const auto pot = PotentialField::from_function(g, testing::half_norm2, [](const Vec2& p) { return p; }, 128);
  const auto rep = quadratic_separation_check(pot);
  CHECK(rep.min_ratio == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.max_ratio == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.rho0 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.passed);
  CHECK(rep.warning.empty());
}

TEST_CASE("quadratic separation of a solved disc potential")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 64);
  const auto pot = solve_ma(g, ScalarField(g, 1.0), zero);
  const auto rep = quadratic_separation_check(pot);
  CHECK(rep.passed);
  CHECK(rep.min_ratio > 0.1);
  CHECK(rep.rho0 > 0.0);
  CHECK(rep.rho0 <= 1.0);
}

TEST_CASE("quartic on the square degenerates at flat sides")
{
  const auto g = Grid::discretize(testing::square(2.0), 1.0 / 32);
  auto quartic = [](const Vec2& p) { return std::pow(p.x, 4) + std::pow(p.y, 4); };
  auto grad = [](const Vec2& p) { return Vec2{4 * std::pow(p.x, 3), 4 * std::pow(p.y, 3)}; };
  double prev = kInfinity;
  for (std::size_t count : {64u, 256u, 1024u}) {
    const auto rep = quadratic_separation_check(PotentialField::from_function(g, quartic, grad, count));
    CHECK_FALSE(rep.passed);
    CHECK_FALSE(rep.warning.empty());
    CHECK(rep.min_ratio < prev);
    prev = rep.min_ratio;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("comparison principle")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 32);
  MaSolverOptions opt;
  const auto high = solve_ma(g, ScalarField(g, 1.1), zero, opt);
  const auto low = solve_ma(g, ScalarField(g, 1.0), zero, opt);
  for (auto k : g->inside_nodes()) REQUIRE(high.phi[k] <= low.phi[k] + 10 * opt.tol_ma);
}

TEST_CASE("scaling the density by c^2 scales the solution by c")
{
  const auto g = Grid::discretize(unit_disc(), 1.0 / 32);
  MaSolverOptions opt;
  const auto base = solve_ma(g, wavy_density(g, 0.1), zero, opt);
  const double c = 1.7;
  ScalarField scaled = wavy_density(g, 0.1);
  for (auto k : g->inside_nodes()) scaled[k] *= c * c;
  const auto big = solve_ma(g, scaled, zero, opt);
  for (auto k : g->inside_nodes()) REQUIRE(std::abs(big.phi[k] - c * base.phi[k]) <= 10 * opt.tol_ma);
}
