#ifndef MALAB_BARRIERS_HPP
#define MALAB_BARRIERS_HPP

#include "malab/sections.hpp"

namespace malab {

/// Potential with its tangent plane at a boundary point subtracted, seen in
/// the boundary frame (origin at the point, inner normal along the second
/// local axis).
struct BoundaryNormalization
{
  bool valid = false;
  BoundaryFrame frame;
  ScalarField phi; ///< phi - phi(p) - grad phi(p).(z - p) at inside nodes
};

BoundaryNormalization normalize_at_boundary(const PotentialField& potential, const BoundarySample& sample);

/// w(x', x_n) = M x_n + phi - dtilde |x'|^2 - K x_n^2 on the inside nodes of
/// Omega inter B_delta, with dtilde = delta^3 / 2, M = 2 Lambda^2 / (lambda delta^3)
/// and K = Lambda^2 / (lambda dtilde).
struct Barrier
{
  double lambda = 0.0;
  double Lambda = 0.0;
  double delta = 0.0;
  double delta_tilde = 0.0;
  double M_delta = 0.0;
  double xn2_coefficient = 0.0;
  BoundaryNormalization normalization;
  ScalarField w;  ///< formula values at every inside node
  NodeMask ball;  ///< inside nodes with |z - p| < delta

  /// w at an arbitrary point given the normalized potential value there.
  double evaluate(const Vec2& z, double phi_normalized) const;
};

/// Throws InvalidArgument when the normalization was not applied, for
/// 0 < lambda <= Lambda violated, or for delta outside (0, rho].
Barrier build_supersolution(const PotentialField& potential, const BoundaryNormalization& normalization,
                            double lambda, double Lambda, double delta);

struct BarrierReport
{
  double max_operator = 0.0;     ///< max of the discrete L_phi w over interior nodes of the ball
  double min_operator = 0.0;
  double operator_bound = 0.0;   ///< -2 Lambda + tol_barrier
  double tol_barrier = 0.0;      ///< 0.1 * 2 Lambda
  std::size_t operator_nodes = 0;
  double boundary_min = 0.0;     ///< min w over boundary samples inside the ball
  double sphere_min = 0.0;       ///< min w on Omega inter the sphere |z - p| = delta
  double sphere_target = 0.0;    ///< delta^3 / 2
  double interpolation_tol = 0.0;
  bool operator_ok = false;
  bool boundary_ok = false;
  bool sphere_ok = false;

  bool passed() const { return operator_ok && boundary_ok && sphere_ok; }
};

BarrierReport verify_supersolution(const Barrier& barrier, const PotentialField& potential);

struct HolderModulus
{
  std::vector<double> radii;
  std::vector<double> oscillation; ///< sup over the circle of |u - u(x0)|
  double exponent = 0.0;           ///< least-squares slope in log-log space
  double constant = 0.0;
};

/// Fits sup_{|x - x0| = r} |u(x) - u0| ~ C r^beta over dyadic radii
/// radius, radius/2, ... down to four grid spacings, sampling each circle at
/// 256 angles inside the domain. Throws InvalidArgument when fewer than four
/// radii are resolvable.
HolderModulus boundary_holder_modulus(const ScalarField& u, const Vec2& x0, double u0, double radius);

} // namespace malab

#endif
