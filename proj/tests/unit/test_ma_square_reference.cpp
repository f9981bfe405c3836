#include "doctest.h"
#include "support.hpp"

#include "malab/ma_solver.hpp"

using namespace malab;

TEST_CASE("square with unit density converges to the fine-grid reference")
{
  const auto dom = testing::square(2.0);
  auto zero = [](const Vec2&) { return 0.0; };
  const auto fine = Grid::discretize(dom, 1.0 / 256);
  const auto ref = solve_ma(fine, ScalarField(fine, 1.0), zero);
  CHECK(ref.convexity_margin >= 0.0);
  double prev = kInfinity;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const auto g = Grid::discretize(dom, h);
    const auto pot = solve_ma(g, ScalarField(g, 1.0), zero);
    double e = 0.0;
    for (auto k : g->inside_nodes()) e = std::max(e, std::abs(pot.phi[k] - ref.value(g->coords(k))));
    MESSAGE("spacing " << h << " deviation " << e);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev <= 5e-3);
}
