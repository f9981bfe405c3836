#ifndef MALAB_TESTS_SUPPORT_HPP
#define MALAB_TESTS_SUPPORT_HPP

#include "malab/domain.hpp"
#include "malab/grid.hpp"

#include <cmath>
#include <numbers>

namespace testing {

inline malab::ConvexDomain unit_disc()
{
  malab::DomainParams p;
  p.kind = malab::DomainKind::disc;
  p.radius = 1.0;
  return malab::ConvexDomain::build(p);
}

inline malab::ConvexDomain disc(double r, malab::Vec2 c = {})
{
  malab::DomainParams p;
  p.kind = malab::DomainKind::disc;
  p.radius = r;
  p.center = c;
  return malab::ConvexDomain::build(p);
}

inline malab::ConvexDomain square(double side, malab::Vec2 c = {})
{
  malab::DomainParams p;
  p.kind = malab::DomainKind::square;
  p.side = side;
  p.center = c;
  return malab::ConvexDomain::build(p);
}

inline malab::ConvexDomain ellipse(double a, double b)
{
  malab::DomainParams p;
  p.kind = malab::DomainKind::ellipse;
  p.semi_a = a;
  p.semi_b = b;
  return malab::ConvexDomain::build(p);
}

inline double half_norm2(const malab::Vec2& p) { return 0.5 * (p.x * p.x + p.y * p.y); }

} // namespace testing

#endif
