#include "malab/sections.hpp"

#include "malab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

namespace malab {

Anchor node_anchor(const PotentialField& potential, std::size_t node)
{
  return {potential.grid->coords(node), potential.phi[node], potential.grad[node], node, false};
}

Anchor boundary_anchor(const PotentialField& potential, const BoundarySample& sample)
{
  const std::size_t k = potential.grid->nearest_inside(sample.point);
  if (k >= potential.grid->size()) throw InvalidArgument("boundary sample has no inside node within two cells");
  return {sample.point, sample.phi, sample.grad, k, true};
}

double quasi_distance(const PotentialField& potential, const Anchor& anchor, const Vec2& x)
{
  return potential.value(x) - anchor.phi - dot(anchor.grad, x - anchor.point);
}

NodeMask to_mask(const Grid& grid, const std::vector<std::size_t>& cells)
{
  NodeMask m(grid.size(), 0);
  for (auto k : cells) m[k] = 1;
  return m;
}

namespace {

// eigen-decomposition based power of a positive definite symmetric matrix
Sym2 sym_power(const Sym2& s, double p)
{
  const double l1 = s.max_eig(), l2 = s.min_eig();
  const double angle = 0.5 * std::atan2(2.0 * s.xy, s.xx - s.yy);
  const double c = std::cos(angle), sn = std::sin(angle);
  const double p1 = std::pow(l1, p), p2 = std::pow(l2, p);
  return {p1 * c * c + p2 * sn * sn, (p1 - p2) * c * sn, p1 * sn * sn + p2 * c * c};
}

Sym2 second_moments(const Grid& g, const std::vector<std::size_t>& cells, const Vec2& about, double* mass)
{
  Sym2 m{0, 0, 0};
  double w = 0.0;
  for (auto k : cells) {
    const double wk = g.weight(k);
    const Vec2 d = g.coords(k) - about;
    m = m + Sym2{d.x * d.x, d.x * d.y, d.y * d.y} * wk;
    w += wk;
  }
  if (mass) *mass = w;
  return w > 0.0 ? m * (1.0 / w) : m;
}

std::size_t seed_node(const PotentialField& pot, const Anchor& a, double t)
{
  const Grid& g = *pot.grid;
  if (g.inside(a.node) && quasi_distance(pot, a, a.node) < t) return a.node;
  const int i0 = g.col(a.node), j0 = g.row(a.node);
  std::size_t best = g.size();
  double best_gap = t;
  for (int dj = -2; dj <= 2; ++dj)
    for (int di = -2; di <= 2; ++di) {
      if (!g.inside(i0 + di, j0 + dj)) continue;
      const std::size_t k = g.index(i0 + di, j0 + dj);
      const double gap = quasi_distance(pot, a, k);
      if (gap < best_gap) {
        best_gap = gap;
        best = k;
      }
    }
  return best;
}

} // namespace

std::vector<std::size_t> section_cells(const PotentialField& potential, const Anchor& anchor, double t)
{
  const Grid& g = *potential.grid;
  std::vector<std::size_t> cells;
  const std::size_t seed = seed_node(potential, anchor, t);
  if (seed >= g.size()) return cells;
  thread_local std::vector<std::uint32_t> seen;
  thread_local std::uint32_t stamp = 0;
  if (seen.size() != g.size() || ++stamp == 0) {
    seen.assign(g.size(), 0);
    stamp = 1;
  }
  std::vector<std::size_t> stack{seed};
  seen[seed] = stamp;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    cells.push_back(k);
    const int i = g.col(k), j = g.row(k);
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if ((di == 0 && dj == 0) || !g.inside(i + di, j + dj)) continue;
        const std::size_t n = g.index(i + di, j + dj);
        if (seen[n] == stamp) continue;
        seen[n] = stamp;
        if (quasi_distance(potential, anchor, n) < t) stack.push_back(n);
      }
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

std::size_t NestedSections::count_below(double t) const
{
  return static_cast<std::size_t>(std::lower_bound(level.begin(), level.end(), t) - level.begin());
}

NestedSections nested_sections(const PotentialField& potential, std::size_t node, double t_max)
{
  const Grid& g = *potential.grid;
  const Anchor a = node_anchor(potential, node);
  NestedSections out;
  const double start = quasi_distance(potential, a, node);
  if (!(start < t_max)) return out;
  thread_local std::vector<double> best;
  thread_local std::vector<std::uint32_t> seen;
  thread_local std::uint32_t stamp = 0;
  if (seen.size() != g.size() || ++stamp == 0) {
    seen.assign(g.size(), 0);
    best.assign(g.size(), 0.0);
    stamp = 1;
  }
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.emplace(start, node);
  seen[node] = stamp;
  best[node] = start;
  while (!queue.empty()) {
    const auto [lv, k] = queue.top();
    queue.pop();
    if (lv > best[k]) continue;
    out.nodes.push_back(k);
    out.level.push_back(lv);
    best[k] = -kInfinity;
    const int i = g.col(k), j = g.row(k);
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if ((di == 0 && dj == 0) || !g.inside(i + di, j + dj)) continue;
        const std::size_t n = g.index(i + di, j + dj);
        if (seen[n] == stamp && best[n] <= lv) continue;
        const double v = std::max(lv, quasi_distance(potential, a, n));
        if (!(v < t_max)) continue;
        if (seen[n] == stamp && best[n] <= v) continue;
        seen[n] = stamp;
        best[n] = v;
        queue.emplace(v, n);
      }
  }
  return out;
}

EllipsoidFit fit_ellipsoid(const Grid& g, const std::vector<std::size_t>& cells)
{
  EllipsoidFit fit;
  if (cells.empty()) return fit;
  double mass = 0.0;
  Vec2 c{};
  for (auto k : cells) {
    c += g.coords(k) * g.weight(k);
    mass += g.weight(k);
  }
  if (!(mass > 0.0)) return fit;
  c = c * (1.0 / mass);
  const Sym2 cov = second_moments(g, cells, c, nullptr);
  fit.center = c;
  fit.semi_major = 2.0 * std::sqrt(std::max(0.0, cov.max_eig()));
  fit.semi_minor = 2.0 * std::sqrt(std::max(0.0, cov.min_eig()));
  fit.angle = 0.5 * std::atan2(2.0 * cov.xy, cov.xx - cov.yy);
  if (!(fit.semi_minor > 0.0)) {
    fit.residual = 1.0;
    return fit;
  }
  const Vec2 u{std::cos(fit.angle), std::sin(fit.angle)}, v = perp(u);
  auto in_ellipse = [&](const Vec2& p) {
    const Vec2 d = p - c;
    const double a = dot(d, u) / fit.semi_major, b = dot(d, v) / fit.semi_minor;
    return a * a + b * b <= 1.0;
  };
  const NodeMask member = to_mask(g, cells);
  double xor_mass = 0.0;
  for (auto k : cells)
    if (!in_ellipse(g.coords(k))) xor_mass += g.weight(k);
  const double r = fit.semi_major;
  const int i0 = static_cast<int>(std::floor((c.x - r - g.origin().x) / g.spacing()));
  const int i1 = static_cast<int>(std::ceil((c.x + r - g.origin().x) / g.spacing()));
  const int j0 = static_cast<int>(std::floor((c.y - r - g.origin().y) / g.spacing()));
  const int j1 = static_cast<int>(std::ceil((c.y + r - g.origin().y) / g.spacing()));
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      if (!g.inside(i, j)) continue;
      const std::size_t k = g.index(i, j);
      if (!member[k] && in_ellipse(g.coords(k))) xor_mass += g.weight(k);
    }
  fit.residual = xor_mass / mass;
  return fit;
}

Section section(const PotentialField& potential, const Anchor& anchor, double t)
{
  if (!(t > 0.0)) throw InvalidArgument("section height must be positive");
  const Grid& g = *potential.grid;
  Section s;
  s.anchor = anchor;
  s.height = t;
  s.cells = section_cells(potential, anchor, t);
  s.degenerate = s.cells.size() <= 1;
  Vec2 c{};
  double best_gap = kInfinity;
  std::size_t touch = g.size();
  for (auto k : s.cells) {
    s.measure += g.weight(k);
    c += g.coords(k) * g.weight(k);
    if (!g.interior(k)) {
      s.touches_boundary = true;
      const double gap = quasi_distance(potential, anchor, k);
      if (gap < best_gap) {
        best_gap = gap;
        touch = k;
      }
    }
  }
  s.centroid = s.measure > 0.0 ? c * (1.0 / s.measure) : anchor.point;
  if (touch < g.size()) s.tangency_point = g.domain().project(g.coords(touch)).point;
  const auto doubled = section_cells(potential, anchor, 2.0 * t);
  s.is_interior = !doubled.empty() && std::all_of(doubled.begin(), doubled.end(), [&](auto k) { return g.interior(k); });
  s.ellipsoid = fit_ellipsoid(g, s.cells);
  return s;
}

MaximalHeight maximal_height(const PotentialField& potential, std::size_t node)
{
  const Anchor a = node_anchor(potential, node);
  const auto& b = potential.boundary;
  if (b.empty()) throw InvalidArgument("potential carries no boundary samples");
  std::vector<double> gaps(b.size());
  double hi = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    gaps[i] = b[i].phi - a.phi - dot(a.grad, b[i].point - a.point);
    hi = std::max(hi, gaps[i]);
  }
  hi = hi * (1.0 + 1e-12) + 1e-300;
  // the section reaches the boundary at height t iff some sample has gap < t
  auto reaches = [&](double t) { return std::any_of(gaps.begin(), gaps.end(), [t](double v) { return v < t; }); };
  double lo = 0.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (reaches(mid))
      hi = mid;
    else
      lo = mid;
  }
  MaximalHeight r;
  r.height = lo;
  double best = kInfinity;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (gaps[i] < best) {
      best = gaps[i];
      r.tangency_point = b[i].point;
      r.sample = i;
    }
  return r;
}

TangentSectionReport tangent_section_constant(const PotentialField& potential, const std::vector<std::size_t>& nodes)
{
  TangentSectionReport r;
  r.min_ratio = kInfinity;
  r.max_ratio = 0.0;
  const Grid& g = *potential.grid;
  for (auto k : nodes) {
    const double hb = maximal_height(potential, k).height;
    if (!(hb > 0.0)) {
      ++r.skipped;
      continue;
    }
    const double dist = norm(g.coords(k) - g.domain().project(g.coords(k)).point);
    const double ratio = dist / std::sqrt(hb);
    r.min_ratio = std::min(r.min_ratio, ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
    ++r.samples;
  }
  r.k0 = r.samples ? std::min(r.min_ratio, 1.0 / r.max_ratio) : 0.0;
  return r;
}

BoundaryFrame boundary_frame(const BoundarySample& sample)
{
  BoundaryFrame f;
  f.origin = sample.point;
  f.inner_normal = -normalized(sample.normal);
  f.tangent = {f.inner_normal.y, -f.inner_normal.x};
  f.phi0 = sample.phi;
  f.grad0 = sample.grad;
  return f;
}

namespace {

// dilation constants of a cell set against the ball of radius r under y -> A (z - o)
void inclusion_constants(const PotentialField& pot, const std::vector<std::size_t>& cells, const Mat2& map,
                         const Vec2& o, double r, double& k_inner, double& k_outer)
{
  const Grid& g = *pot.grid;
  const NodeMask member = to_mask(g, cells);
  k_outer = 0.0;
  for (auto k : cells) k_outer = std::max(k_outer, norm(map.apply(g.coords(k) - o)) / r);
  k_inner = kInfinity;
  for (auto k : g.inside_nodes())
    if (!member[k]) k_inner = std::min(k_inner, norm(map.apply(g.coords(k) - o)) / r);
}

} // namespace

LocalizationFit localization_fit(const PotentialField& potential, const BoundarySample& sample, double h)
{
  const Grid& g = *potential.grid;
  LocalizationFit fit;
  fit.boundary = true;
  fit.anchor = boundary_anchor(potential, sample);
  fit.height = h;
  fit.section = section(potential, fit.anchor, h);
  if (fit.section.cells.size() < 8) {
    std::ostringstream os;
    os << "boundary section of height " << h << " has " << fit.section.cells.size()
       << " cells; the height is too small for the grid";
    throw InvalidArgument(os.str());
  }
  const BoundaryFrame frame = boundary_frame(sample);
  fit.rotation = frame.rotation();
  double s12 = 0.0, s22 = 0.0;
  for (auto k : fit.section.cells) {
    const Vec2 y = frame.to_local(g.coords(k));
    s12 += g.weight(k) * y.x * y.y;
    s22 += g.weight(k) * y.y * y.y;
  }
  fit.tau = s22 > 0.0 ? s12 / s22 : 0.0;
  fit.A = {1.0, -fit.tau, 0.0, 1.0};
  fit.radius = std::sqrt(2.0 * fit.section.measure / std::numbers::pi);
  inclusion_constants(potential, fit.section.cells, fit.A * fit.rotation.transpose(), frame.origin, fit.radius,
                      fit.k_inner, fit.k_outer);
  fit.valid = true;
  return fit;
}

LocalizationFit tangent_section_fit(const PotentialField& potential, std::size_t node, double h)
{
  LocalizationFit fit;
  fit.anchor = node_anchor(potential, node);
  fit.height = h > 0.0 ? h : maximal_height(potential, node).height;
  if (!(fit.height > 0.0)) throw InvalidArgument("tangent section has zero height");
  fit.section = section(potential, fit.anchor, fit.height);
  if (fit.section.cells.size() < 8) throw InvalidArgument("tangent section has fewer than 8 cells");
  double mass = 0.0;
  const Sym2 cov = second_moments(*potential.grid, fit.section.cells, fit.anchor.point, &mass);
  const Sym2 root = sym_power(cov, -0.5) * std::pow(cov.det(), 0.25);
  fit.A = {root.xx, root.xy, root.xy, root.yy};
  fit.radius = std::sqrt(fit.section.measure / std::numbers::pi);
  inclusion_constants(potential, fit.section.cells, fit.A, fit.anchor.point, fit.radius, fit.k_inner, fit.k_outer);
  fit.valid = true;
  return fit;
}

RescaledTriple rescale_domain(const PotentialField& potential, const LocalizationFit& fit)
{
  if (!fit.valid) throw InvalidArgument("rescaling needs a valid localization fit");
  const Grid& g = *potential.grid;
  RescaledTriple r;
  r.origin = fit.anchor.point;
  r.h = fit.height;
  r.A = fit.A;
  const Mat2 lin = fit.A * fit.rotation.transpose();
  const double s = 1.0 / std::sqrt(fit.height);
  r.linear = {lin.a * s, lin.b * s, lin.c * s, lin.d * s};
  r.norm_A = fit.A.norm();
  r.norm_A_inv = fit.A.inverse().norm();
  r.grid = Grid::discretize(ConvexDomain::affine_image(g.domain(), r.linear, r.origin), g.spacing() * s);

  const Anchor a = fit.anchor;
  const double shift = fit.boundary ? 0.0 : 1.0;
  const double h = fit.height;
  const Mat2 back = r.linear.inverse();
  const Vec2 origin = r.origin;
  auto phi_h = [&potential, a, shift, h, back, origin](const Vec2& x) {
    const Vec2 z = origin + back.apply(x);
    return (interpolate_cubic(potential.phi, z) - a.phi - dot(a.grad, z - a.point)) / h - shift;
  };
  r.potential = PotentialField::from_function(r.grid, phi_h);

  const Anchor center{{0.0, 0.0}, -shift, {0.0, 0.0}, r.grid->nearest_inside({0.0, 0.0}), fit.boundary};
  if (center.node >= r.grid->size()) throw InvalidArgument("rescaled origin has no nearby node");
  const auto cells = section_cells(r.potential, center, 1.0);
  r.section = to_mask(*r.grid, cells);

  // B_k inter Omega_h inside U_h inside B_{1/k}, measured on the original nodes
  const NodeMask member = to_mask(g, fit.section.cells);
  double r_out = 0.0, r_in = kInfinity;
  for (auto k : g.inside_nodes()) {
    const double d = norm(r.to_rescaled(g.coords(k)));
    if (member[k])
      r_out = std::max(r_out, d);
    else
      r_in = std::min(r_in, d);
  }
  r.k = std::min(r_in, 1.0 / r_out);
  return r;
}

RescaledFields rescale(const PotentialField& potential, const ScalarField& u, const ScalarField& f,
                       const LocalizationFit& fit, RescaleMode mode)
{
  RescaledFields out;
  out.triple = rescale_domain(potential, fit);
  const RescaledTriple& t = out.triple;
  const double h = t.h;
  out.u = sample_field(t.grid, [&](const Vec2& x) {
    const double v = interpolate_cubic(u, t.to_original(x));
    return mode == RescaleMode::linf ? v : v / h;
  });
  out.f = sample_field(t.grid, [&](const Vec2& x) {
    const double v = interpolate_cubic(f, t.to_original(x));
    return mode == RescaleMode::linf ? h * v : v;
  });
  return out;
}

std::vector<EngulfingSample> engulfing_samples(const PotentialField& potential, std::size_t count, double c_cap,
                                               std::uint64_t seed)
{
  const Grid& g = *potential.grid;
  const auto& interior = g.interior_nodes();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, interior.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<EngulfingSample> out;
  const double t_lo = c_cap / 16.0;
  std::size_t attempts = 0;
  while (out.size() < count && attempts < 50 * count) {
    ++attempts;
    const std::size_t x = interior[pick(rng)];
    const double t = t_lo * std::pow(c_cap / t_lo, unit(rng));
    const auto cells = section_cells(potential, node_anchor(potential, x), t);
    if (cells.size() < 8) continue;
    std::uniform_int_distribution<std::size_t> in(0, cells.size() - 1);
    out.push_back({x, t, cells[in(rng)]});
  }
  return out;
}

double engulfing_theta(const PotentialField& potential, const EngulfingSample& s)
{
  const auto cells = section_cells(potential, node_anchor(potential, s.x), s.t);
  const Anchor ay = node_anchor(potential, s.y);
  double m = 0.0;
  for (auto z : cells) m = std::max(m, quasi_distance(potential, ay, z));
  return m / s.t;
}

EngulfingReport engulfing_constant(const PotentialField& potential, const std::vector<EngulfingSample>& samples)
{
  EngulfingReport r;
  for (const auto& s : samples) {
    r.per_sample.push_back(engulfing_theta(potential, s));
    r.theta = std::max(r.theta, r.per_sample.back());
  }
  return r;
}

VolumeScaling volume_scaling(const PotentialField& potential, const std::vector<VolumeSample>& samples)
{
  const Grid& g = *potential.grid;
  std::vector<double> lx, ly;
  VolumeScaling v;
  v.c1 = kInfinity;
  for (const auto& s : samples) {
    const auto cells = section_cells(potential, s.anchor, s.t);
    if (cells.size() < 20) continue;
    double m = 0.0;
    for (auto k : cells) m += g.weight(k);
    lx.push_back(std::log(s.t));
    ly.push_back(std::log(m));
    v.c1 = std::min(v.c1, m / s.t);
    v.c2 = std::max(v.c2, m / s.t);
  }
  v.used = lx.size();
  if (v.used < 4) {
    std::ostringstream os;
    os << "volume scaling needs at least 4 sections with 20 or more cells, got " << v.used;
    throw InvalidArgument(os.str());
  }
  const double n = static_cast<double>(v.used);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  v.exponent = sxx > 0 ? sxy / sxx : 0.0;
  return v;
}

Dichotomy dichotomy_classify(const PotentialField& potential, std::size_t node, double t)
{
  const Grid& g = *potential.grid;
  const Anchor a = node_anchor(potential, node);
  const auto cells = section_cells(potential, a, 2.0 * t);
  Dichotomy d;
  d.interior = std::all_of(cells.begin(), cells.end(), [&](auto k) { return g.interior(k); });
  if (d.interior) return d;
  const MaximalHeight mh = maximal_height(potential, node);
  const Anchor z = boundary_anchor(potential, potential.boundary[mh.sample]);
  d.z = z.point;
  for (auto k : cells) d.c_bar = std::max(d.c_bar, quasi_distance(potential, z, k) / t);
  return d;
}

double default_c_cap(const PotentialField& potential)
{
  const auto& nodes = potential.grid->interior_nodes();
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 4000);
  double m = 0.0;
  for (std::size_t i = 0; i < nodes.size(); i += stride) m = std::max(m, maximal_height(potential, nodes[i]).height);
  return 0.05 * m;
}

} // namespace malab
