#include "malab/good_sets.hpp"

#include "malab/errors.hpp"
#include "malab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace malab {

double minimal_opening(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                       std::size_t node, double d_min)
{
  const Grid& g = *potential.grid;
  const Anchor a = node_anchor(potential, node);
  double sup = -1.0;
  for (auto y : g.inside_nodes()) {
    if (y == node) continue;
    const double d2 = quasi_distance(potential, a, y);
    if (!(d2 >= d_min) || !(d2 > 0.0)) continue;
    const double gap = u[y] - u[node] - dot(grad_u[node], g.coords(y) - g.coords(node));
    sup = std::max(sup, std::abs(gap) / d2);
  }
  if (sup < 0.0) {
    std::ostringstream os;
    os << "no node at quasi-distance^2 >= " << d_min << " from (" << a.point.x << ", " << a.point.y
       << "); the grid is too coarse there";
    throw InvalidArgument(os.str());
  }
  return 2.0 * sup;
}

OpeningField compute_openings(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                              const std::vector<std::size_t>& centers, double d_min)
{
  OpeningField out;
  out.centers = centers;
  out.d_min = d_min;
  out.opening.resize(centers.size());
  parallel_for(centers.size(),
               [&](std::size_t i) { out.opening[i] = minimal_opening(potential, u, grad_u, centers[i], d_min); });
  return out;
}

OpeningField compute_openings(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                              const GoodSetOptions& options)
{
  const Grid& g = *potential.grid;
  const auto& interior = g.interior_nodes();
  std::vector<std::size_t> centers;
  double weight = 1.0;
  if (interior.size() > options.full_scan_limit) {
    for (auto k : interior)
      if (g.col(k) % 2 == 0 && g.row(k) % 2 == 0) centers.push_back(k);
    weight = 4.0;
  } else {
    centers = interior;
  }
  auto out = compute_openings(potential, u, grad_u, centers, options.d_min_factor * g.cell_area());
  out.center_weight = weight;
  return out;
}

NodeMask good_set_mask(const Grid& grid, const OpeningField& openings, double M)
{
  NodeMask m(grid.size(), 0);
  for (std::size_t i = 0; i < openings.centers.size(); ++i)
    if (openings.opening[i] <= M) m[openings.centers[i]] = 1;
  return m;
}

QuasiEuclideanRatios quasi_euclidean_ratios(const PotentialField& potential, int cells)
{
  const Grid& g = *potential.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  QuasiEuclideanRatios r{ScalarField(potential.grid, nan), ScalarField(potential.grid, nan),
                         cells > 0 ? cells * g.spacing() : kInfinity, 0.0};
  const auto& interior = g.interior_nodes();
  parallel_for(interior.size(), [&](std::size_t n) {
    const std::size_t x = interior[n];
    const Anchor a = node_anchor(potential, x);
    double lo = kInfinity, hi = -kInfinity;
    auto visit = [&](std::size_t y) {
      const double e2 = norm2(g.coords(y) - a.point);
      const double q = quasi_distance(potential, a, y) / e2;
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    };
    if (cells > 0) {
      const int i0 = g.col(x), j0 = g.row(x);
      for (int dj = -cells; dj <= cells; ++dj)
        for (int di = -cells; di <= cells; ++di) {
          if ((di == 0 && dj == 0) || di * di + dj * dj > cells * cells || !g.inside(i0 + di, j0 + dj)) continue;
          visit(g.index(i0 + di, j0 + dj));
        }
    } else {
      for (auto y : g.inside_nodes())
        if (y != x) visit(y);
    }
    r.r_min[x] = lo;
    r.r_max[x] = hi;
  });
  double c = kInfinity;
  for (auto x : interior)
    if (r.r_min[x] > 0.0) c = std::min(c, 1.0 / std::sqrt(r.r_min[x] * r.r_max[x]));
  r.c = std::isfinite(c) ? c : 0.0;
  return r;
}

NodeMask local_quasi_euclidean_mask(const QuasiEuclideanRatios& ratios, double sigma)
{
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const Grid& g = *ratios.r_min.grid;
  NodeMask m(g.size(), 0);
  for (auto x : g.interior_nodes())
    if (ratios.r_min[x] >= sigma * (1.0 - 1e-12)) m[x] = 1;
  return m;
}

NodeMask local_quasi_euclidean_mask(const PotentialField& potential, double sigma, int cells)
{
  return local_quasi_euclidean_mask(quasi_euclidean_ratios(potential, cells), sigma);
}

std::vector<double> quasi_euclidean_min_ratio(const PotentialField& potential, const std::vector<std::size_t>& nodes,
                                              double min_separation)
{
  const Grid& g = *potential.grid;
  const double sep2 = min_separation * min_separation * (1.0 - 1e-12);
  std::vector<double> out(nodes.size(), kInfinity);
  parallel_for(nodes.size(), [&](std::size_t n) {
    const Anchor a = node_anchor(potential, nodes[n]);
    for (auto y : g.interior_nodes()) {
      const double e2 = norm2(g.coords(y) - a.point);
      if (y == nodes[n] || e2 < sep2) continue;
      out[n] = std::min(out[n], quasi_distance(potential, a, y) / e2);
    }
  });
  return out;
}

double inclusion_sigma(double c, double beta, double m)
{
  const double s = c * std::pow(beta, 0.5 * (m - 1.0));
  return 1.0 / (s * s);
}

namespace {

double max_abs_hessian(const ScalarField& u, std::size_t k) { return central_hessian(u, k).max_abs_entry(); }

} // namespace

InclusionReport inclusion_check(const ScalarField& u, const OpeningField& openings, const QuasiEuclideanRatios& ratios,
                                double beta, double m)
{
  if (!(m > 1.0) || !(beta > 0.0)) throw InvalidArgument("inclusion check needs m > 1 and beta > 0");
  if (!(ratios.c > 0.0)) throw InvalidArgument("quasi-Euclidean constant is not positive");
  InclusionReport r;
  r.beta = beta;
  r.m = m;
  r.sigma = inclusion_sigma(ratios.c, beta, m);
  const double level = std::pow(beta, m);
  for (std::size_t i = 0; i < openings.centers.size(); ++i) {
    const std::size_t x = openings.centers[i];
    ++r.evaluated;
    if (!(max_abs_hessian(u, x) > level)) continue;
    ++r.large_hessian;
    const bool in_a = ratios.r_min[x] >= r.sigma * (1.0 - 1e-12);
    const bool in_g = openings.opening[i] <= beta;
    if (in_a && in_g) r.violations.push_back(x);
  }
  r.violation_fraction = r.evaluated ? static_cast<double>(r.violations.size()) / r.evaluated : 0.0;
  return r;
}

std::vector<DistributionSample> distribution_functions(const ScalarField& u, const OpeningField& openings,
                                                       const QuasiEuclideanRatios& ratios,
                                                       const std::vector<double>& betas, double m)
{
  const Grid& g = *u.grid;
  std::vector<double> hess(openings.centers.size());
  for (std::size_t i = 0; i < hess.size(); ++i) hess[i] = max_abs_hessian(u, openings.centers[i]);
  std::vector<DistributionSample> out;
  for (double beta : betas) {
    DistributionSample s;
    s.beta = beta;
    const double level = std::pow(beta, m);
    const double sigma = inclusion_sigma(ratios.c, beta, m);
    for (std::size_t i = 0; i < hess.size(); ++i) {
      const std::size_t x = openings.centers[i];
      const double w = g.weight(x) * openings.center_weight;
      if (hess[i] > level) s.F += w;
      if (!(ratios.r_min[x] >= sigma * (1.0 - 1e-12))) s.F1 += w;
      if (openings.opening[i] > beta) s.F2 += w;
    }
    out.push_back(s);
  }
  return out;
}

std::vector<double> tail_betas(const OpeningField& openings, std::size_t count)
{
  if (openings.opening.size() < 12 || count < 2) throw InvalidArgument("too few openings for a tail grid");
  auto sorted = openings.opening;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted[sorted.size() / 2], hi = sorted[sorted.size() - 6];
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("openings have no tail");
  std::vector<double> b(count);
  for (std::size_t i = 0; i < count; ++i) b[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return b;
}

void write_distribution_csv(std::ostream& os, const std::vector<DistributionSample>& samples)
{
  os << "beta,F,F1,F2\n";
  os.precision(17);
  for (const auto& s : samples) os << s.beta << ',' << s.F << ',' << s.F1 << ',' << s.F2 << '\n';
}

DecayFit decay_fit(const std::vector<std::pair<double, double>>& samples, double cell_area)
{
  std::vector<double> x, y, w;
  for (const auto& [beta, m] : samples)
    if (beta > 0.0 && m > 5.0 * cell_area) {
      x.push_back(std::log(beta));
      y.push_back(std::log(m));
      w.push_back(m / cell_area);
    }
  if (x.size() < 5) {
    std::ostringstream os;
    os << "decay fit needs 5 samples above 5 cells, got " << x.size();
    throw InvalidArgument(os.str());
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("decay fit needs at least two distinct beta values");
  DecayFit f;
  const double slope = sxy / sxx;
  f.tau = -slope;
  f.C = std::exp(my - slope * mx);
  double rr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + slope * (x[i] - mx));
    rr += w[i] * e * e;
  }
  f.residual = std::sqrt(rr / sw);
  f.used = x.size();
  return f;
}

double density_in_section(const PotentialField& potential, const ScalarField& u, const VectorField& grad_u,
                          const Section& section, double N, double d_min)
{
  const Grid& g = *potential.grid;
  if (!(N > 0.0)) throw InvalidArgument("N must be positive");
  std::vector<std::size_t> cells;
  for (auto k : section.cells)
    if (g.interior(k)) cells.push_back(k);
  if (cells.empty()) throw InvalidArgument("section has no interior cells");
  const auto op = compute_openings(potential, u, grad_u, cells, d_min);
  const double M = N / section.height;
  double good = 0.0, all = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    all += g.weight(cells[i]);
    if (op.opening[i] <= M) good += g.weight(cells[i]);
  }
  return good / all;
}

} // namespace malab
