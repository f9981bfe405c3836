#include "doctest.h"
#include "support.hpp"

#include "malab/errors.hpp"
#include "malab/lma_solver.hpp"

#include <numbers>

using namespace malab;
using std::numbers::pi;

namespace {

double zero(const Vec2&) { return 0.0; }

double manufactured_error(double h)
{
  const auto g = Grid::discretize(testing::square(1.0, {0.5, 0.5}), h);
  const auto pot = PotentialField::from_function(g, testing::half_norm2);
  const auto cof = cofactor_field(pot);
  const auto f = sample_field(g, [](const Vec2& p) { return -2 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y); });
  const auto sol = solve_lma(cof, f, zero);
  double e = 0.0;
  for (auto k : g->inside_nodes()) {
    const Vec2 p = g->coords(k);
    e = std::max(e, std::abs(sol.u[k] - std::sin(pi * p.x) * std::sin(pi * p.y)));
  }
  return e;
}

} // namespace

TEST_CASE("identity coefficients reproduce the manufactured Laplace solution")
{
  const double e32 = manufactured_error(1.0 / 32), e64 = manufactured_error(1.0 / 64);
  CHECK(e64 <= 1e-3);
  CHECK(e32 / e64 >= 3.5);
}

TEST_CASE("affine data with zero source is reproduced exactly")
{
  const auto g = Grid::discretize(testing::ellipse(1.0, 0.7), 1.0 / 32);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  const auto cof = cofactor_field(pot);
  auto ell = [](const Vec2& p) { return 0.3 - 1.2 * p.x + 0.7 * p.y; };
  const auto sol = solve_lma(cof, ScalarField(g, 0.0), ell);
  for (auto k : g->inside_nodes()) REQUIRE(std::abs(sol.u[k] - ell(g->coords(k))) <= 1e-11);
  CHECK(sol.cofactor == &cof);
}

TEST_CASE("source n g with the potential's boundary data recovers the potential")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  auto datum = [](const Vec2& p) { return 0.2 * p.x + 0.1 * p.x * p.y; };
  MaSolverOptions mopt;
  const auto rho = pinched_density(g, 0.1);
  const auto pot = solve_ma(g, rho, datum, mopt);
  const auto cof = cofactor_field(pot);
  ScalarField f = rho;
  for (auto k : g->inside_nodes()) f[k] = 2.0 * rho[k];
  const auto sol = solve_lma(cof, f, datum);
  double e = 0.0;
  for (auto k : g->inside_nodes()) e = std::max(e, std::abs(sol.u[k] - pot.phi[k]));
  CHECK(e <= 10 * mopt.tol_ma);
}

TEST_CASE("L_phi phi = 2 det D^2 phi up to second-order error")
{
  auto phi = [](const Vec2& p) { return 0.5 * norm2(p) + 0.1 * (std::pow(p.x, 4) + std::pow(p.y, 4)) + 0.05 * p.x * p.y; };
  auto exact_det = [](const Vec2& p) {
    const double a = 1 + 1.2 * p.x * p.x, c = 1 + 1.2 * p.y * p.y, b = 0.05;
    return a * c - b * b;
  };
  auto err = [&](double h) {
    const auto g = Grid::discretize(testing::unit_disc(), h);
    const auto pot = PotentialField::from_function(g, phi);
    const auto lphi = apply_operator(cofactor_field(pot).cof, pot.phi);
    double e = 0.0;
    for (auto k : g->interior_nodes()) e = std::max(e, std::abs(lphi[k] - 2.0 * exact_det(g->coords(k))));
    return e;
  };
  const double a = err(1.0 / 32), b = err(1.0 / 64);
  CHECK(a / b >= 3.5);
  CHECK(b < 1e-3);
}

TEST_CASE("ABP ratio")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 64);
  const auto cof = cofactor_field(PotentialField::from_function(g, testing::half_norm2));

  const auto trivial = solve_lma(cof, ScalarField(g, 0.0), zero);
  CHECK(lp_norm(trivial.u, kInfinity) == 0.0);
  const auto r0 = abp_check(trivial);
  CHECK(r0.ratio == 0.0);
  CHECK(r0.passed);

  const auto sol = solve_lma(cof, ScalarField(g, 1.0), zero);
  const auto r = abp_check(sol);
  CHECK(r.u_sup == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(r.f_l2 == doctest::Approx(std::sqrt(pi)).epsilon(0.02));
  CHECK(r.ratio == doctest::Approx(1.0 / (8.0 * std::sqrt(pi))).epsilon(0.02));
}

TEST_CASE("ABP ratio for a random source under pinched coefficients is stable")
{
  const auto src = random_smooth_function(20241, 6, 6.0);
  auto ratio = [&](double h) {
    const auto g = Grid::discretize(testing::unit_disc(), h);
    const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
    const auto cof = cofactor_field(pot);
    return abp_check(solve_lma(cof, sample_field(g, src), zero)).ratio;
  };
  const double a = ratio(1.0 / 32), b = ratio(1.0 / 64);
  MESSAGE("ABP ratios " << a << " " << b);
  CHECK(a <= 0.2);
  CHECK(b <= 0.2);
  CHECK(std::max(a, b) / std::min(a, b) <= 1.5);
}

TEST_CASE("linearity and maximum principle")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 32);
  const auto pot = solve_ma(g, pinched_density(g, 0.1), zero);
  const auto cof = cofactor_field(pot);
  const auto f1 = sample_field(g, random_smooth_function(1));
  const auto f2 = sample_field(g, random_smooth_function(2));
  ScalarField comb = f1;
  for (auto k : g->inside_nodes()) comb[k] = 2.5 * f1[k] - 0.75 * f2[k];
  const auto u1 = solve_lma(cof, f1, zero), u2 = solve_lma(cof, f2, zero), uc = solve_lma(cof, comb, zero);
  for (auto k : g->inside_nodes()) REQUIRE(std::abs(uc.u[k] - (2.5 * u1.u[k] - 0.75 * u2.u[k])) <= 1e-10);

  ScalarField pos = f1;
  for (auto k : g->inside_nodes()) pos[k] = f1[k] * f1[k] + 0.01;
  const auto up = solve_lma(cof, pos, zero);
  const double tol = 1e-6 * lp_norm(pos, kInfinity);
  for (auto k : g->inside_nodes()) REQUIRE(up.u[k] <= tol);
}

TEST_CASE("degenerate coefficients are reported")
{
  const auto g = Grid::discretize(testing::unit_disc(), 1.0 / 16);
  MatrixField a(g, Sym2{1, 0, 1});
  const std::size_t k = g->interior_nodes()[20];
  a[k] = Sym2{1, 0, -0.5};
  try {
    solve_nondivergence(a, ScalarField(g, 1.0), zero);
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("-0.5") != std::string::npos);
  }
  a[k] = Sym2{0, 0, 0};
  CHECK_THROWS_AS(solve_nondivergence(a, ScalarField(g, 1.0), zero), SolverError);
}
