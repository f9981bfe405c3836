#include "malab/calculus.hpp"

#include "malab/errors.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <ostream>

namespace malab {

PointFunction random_smooth_function(std::uint64_t seed, int modes, double max_wavenumber)
{
  struct Wave
  {
    Vec2 k;
    double phase;
    double amp;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Wave> waves;
  double total = 0.0;
  for (int m = 0; m < modes; ++m) {
    const double r = max_wavenumber * unit(rng), a = 2.0 * std::numbers::pi * unit(rng);
    waves.push_back({{r * std::cos(a), r * std::sin(a)}, 2.0 * std::numbers::pi * unit(rng), 0.2 + unit(rng)});
    total += waves.back().amp;
  }
  for (auto& w : waves) w.amp /= total;
  return [waves](const Vec2& p) {
    double s = 0.0;
    for (const auto& w : waves) s += w.amp * std::cos(dot(w.k, p) + w.phase);
    return s;
  };
}

ScalarField sample_field(const GridPtr& grid, const PointFunction& f)
{
  ScalarField out(grid, std::numeric_limits<double>::quiet_NaN());
  for (auto k : grid->inside_nodes()) out[k] = f(grid->coords(k));
  return out;
}

Sym2 central_hessian(const ScalarField& field, std::size_t k)
{
  const Grid& g = *field.grid;
  const int i = g.col(k), j = g.row(k);
  const double h2 = g.cell_area();
  auto v = [&](int di, int dj) { return field[g.index(i + di, j + dj)]; };
  const double c = v(0, 0);
  return {(v(1, 0) - 2.0 * c + v(-1, 0)) / h2, (v(1, 1) + v(-1, -1) - v(1, -1) - v(-1, 1)) / (4.0 * h2),
          (v(0, 1) - 2.0 * c + v(0, -1)) / h2};
}

namespace {

struct Axis1D
{
  double d1;
  double d2;
};

// first and second derivative along one axis using whatever neighbours exist
Axis1D axis_derivatives(const Grid& g, const ScalarField& f, int i, int j, int di, int dj)
{
  const double h = g.spacing();
  const double c = f[g.index(i, j)];
  const bool fwd = g.inside(i + di, j + dj);
  const bool bwd = g.inside(i - di, j - dj);
  if (fwd && bwd) {
    const double p = f[g.index(i + di, j + dj)], m = f[g.index(i - di, j - dj)];
    return {(p - m) / (2.0 * h), (p - 2.0 * c + m) / (h * h)};
  }
  const int s = fwd ? 1 : -1;
  if (!fwd && !bwd) return {0.0, 0.0};
  const double p1 = f[g.index(i + s * di, j + s * dj)];
  if (g.inside(i + 2 * s * di, j + 2 * s * dj)) {
    const double p2 = f[g.index(i + 2 * s * di, j + 2 * s * dj)];
    return {s * (-3.0 * c + 4.0 * p1 - p2) / (2.0 * h), (c - 2.0 * p1 + p2) / (h * h)};
  }
  return {s * (p1 - c) / h, 0.0};
}

double one_sided_cross(const Grid& g, const ScalarField& f, int i, int j, bool& ok)
{
  const double h2 = g.cell_area();
  if (g.inside(i + 1, j + 1) && g.inside(i - 1, j - 1) && g.inside(i + 1, j - 1) && g.inside(i - 1, j + 1)) {
    ok = true;
    return (f[g.index(i + 1, j + 1)] + f[g.index(i - 1, j - 1)] - f[g.index(i + 1, j - 1)] -
            f[g.index(i - 1, j + 1)]) /
           (4.0 * h2);
  }
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      if (g.inside(i + sx, j) && g.inside(i, j + sy) && g.inside(i + sx, j + sy)) {
        ok = true;
        return sx * sy *
               (f[g.index(i + sx, j + sy)] - f[g.index(i + sx, j)] - f[g.index(i, j + sy)] + f[g.index(i, j)]) / h2;
      }
  ok = false;
  return 0.0;
}

} // namespace

std::pair<VectorField, MatrixField> fd_derivatives(const ScalarField& field)
{
  const Grid& g = *field.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  VectorField grad(field.grid, Vec2{nan, nan});
  MatrixField hess(field.grid, Sym2{nan, nan, nan});
  std::vector<std::size_t> pending;
  for (auto k : g.inside_nodes()) {
    const int i = g.col(k), j = g.row(k);
    const Axis1D ax = axis_derivatives(g, field, i, j, 1, 0);
    const Axis1D ay = axis_derivatives(g, field, i, j, 0, 1);
    grad[k] = {ax.d1, ay.d1};
    if (g.interior(k)) {
      hess[k] = central_hessian(field, k);
      continue;
    }
    bool ok = false;
    const double xy = one_sided_cross(g, field, i, j, ok);
    hess[k] = {ax.d2, xy, ay.d2};
    if (!ok) pending.push_back(k);
  }
  // isolated corners: borrow the cross term of the nearest interior node
  for (auto k : pending) {
    const Vec2 p = g.coords(k);
    double best = kInfinity;
    for (auto q : g.interior_nodes()) {
      const double d = norm2(g.coords(q) - p);
      if (d < best) {
        best = d;
        hess[k].xy = hess[q].xy;
      }
    }
  }
  return {std::move(grad), std::move(hess)};
}

double power_integral(const ScalarField& field, double p, const NodeMask& region)
{
  const Grid& g = *field.grid;
  double s = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!region[k] || !g.inside(k)) continue;
    any = true;
    s += std::pow(std::abs(field[k]), p) * g.weight(k);
  }
  if (!any) throw InvalidArgument("norm over an empty region");
  return s;
}

double lp_norm(const ScalarField& field, double p, const NodeMask& region)
{
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm requires p >= 1");
  const Grid& g = *field.grid;
  if (std::isinf(p)) {
    double m = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!region[k] || !g.inside(k)) continue;
      any = true;
      m = std::max(m, std::abs(field[k]));
    }
    if (!any) throw InvalidArgument("norm over an empty region");
    return m;
  }
  return std::pow(power_integral(field, p, region), 1.0 / p);
}

double lp_norm(const ScalarField& field, double p) { return lp_norm(field, p, field.grid->inside_mask()); }

double mean_lp_norm(const ScalarField& field, double p, const NodeMask& region)
{
  if (std::isinf(p)) return lp_norm(field, p, region);
  const double m = measure(*field.grid, region);
  if (!(m > 0.0)) throw InvalidArgument("norm over an empty region");
  return std::pow(power_integral(field, p, region) / m, 1.0 / p);
}

double measure(const Grid& grid, const NodeMask& region)
{
  double s = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (region[k]) s += grid.weight(k);
  return s;
}

ScalarField frobenius(const MatrixField& m)
{
  ScalarField out(m.grid, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < m.size(); ++k) out[k] = m[k].frobenius();
  return out;
}

MatrixField difference(const MatrixField& a, const MatrixField& b)
{
  if (a.grid.get() != b.grid.get() && a.size() != b.size()) throw InvalidArgument("matrix fields on different grids");
  MatrixField out(a.grid, Sym2{});
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

double interpolate(const ScalarField& field, const Vec2& p)
{
  const Grid& g = *field.grid;
  const double fx = (p.x - g.origin().x) / g.spacing();
  const double fy = (p.y - g.origin().y) / g.spacing();
  int i = static_cast<int>(std::floor(fx));
  int j = static_cast<int>(std::floor(fy));
  // nodes on the last row/column still interpolate inside the final cell
  if (i == g.nx() - 1) --i;
  if (j == g.ny() - 1) --j;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (i < 0 || j < 0 || i + 1 >= g.nx() || j + 1 >= g.ny()) return nan;
  const double tx = fx - i, ty = fy - j;
  const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  const int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
  double s = 0.0, ws = 0.0;
  for (int c = 0; c < 4; ++c) {
    const std::size_t k = g.index(i + di[c], j + dj[c]);
    if (!g.inside(k)) continue;
    s += w[c] * field[k];
    ws += w[c];
  }
  if (ws > 1e-12) return s / ws;
  const std::size_t k = g.nearest_inside(p);
  return k < g.size() ? field[k] : nan;
}

namespace {

double keys_weight(double s)
{
  s = std::abs(s);
  if (s < 1.0) return (1.5 * s - 2.5) * s * s + 1.0;
  if (s < 2.0) return ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0;
  return 0.0;
}

} // namespace

double interpolate_cubic(const ScalarField& field, const Vec2& p)
{
  const Grid& g = *field.grid;
  const double fx = (p.x - g.origin().x) / g.spacing();
  const double fy = (p.y - g.origin().y) / g.spacing();
  const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
  double wx[4], wy[4];
  for (int c = 0; c < 4; ++c) {
    wx[c] = keys_weight(fx - (i - 1 + c));
    wy[c] = keys_weight(fy - (j - 1 + c));
  }
  double s = 0.0;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const double w = wx[a] * wy[b];
      if (w == 0.0) continue;
      if (!g.inside(i - 1 + a, j - 1 + b)) return interpolate(field, p);
      s += w * field[g.index(i - 1 + a, j - 1 + b)];
    }
  }
  return s;
}

void write_fields_csv(std::ostream& os, const std::vector<std::string>& names,
                      const std::vector<const ScalarField*>& fields)
{
  if (fields.empty()) return;
  const Grid& g = *fields.front()->grid;
  os << "x,y";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  os << std::setprecision(17);
  for (auto k : g.inside_nodes()) {
    const Vec2 p = g.coords(k);
    os << p.x << ',' << p.y;
    for (const auto* f : fields) os << ',' << (*f)[k];
    os << '\n';
  }
}

} // namespace malab
