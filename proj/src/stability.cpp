#include "malab/stability.hpp"

#include "malab/covering.hpp"
#include "malab/errors.hpp"
#include "malab/good_sets.hpp"
#include "malab/parallel.hpp"
#include "malab/sections.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace malab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v)
{
  std::ostringstream os;
  os << v;
  return os.str();
}

double zero_datum(const Vec2&) { return 0.0; }

void sort_descending(std::vector<double>& eps, double upper)
{
  if (eps.empty()) throw InvalidArgument("empty eps sweep");
  std::sort(eps.begin(), eps.end(), std::greater<>());
  if (std::adjacent_find(eps.begin(), eps.end()) != eps.end()) throw InvalidArgument("eps sweep repeats a value");
  for (double e : eps)
    if (!(e >= 0.0) || !(e < upper)) throw InvalidArgument("eps = " + fmt(e) + " outside [0, " + fmt(upper) + ")");
}

nlohmann::ordered_json grid_echo(const Grid& g)
{
  return {{"domain", to_string(g.domain().kind())}, {"spacing", g.spacing()}};
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double root_norm(const ScalarField& field, double p, const NodeMask& region)
{
  return std::pow(power_integral(field, p, region), 1.0 / p);
}

void same_grid(const GridPtr& a, const GridPtr& b)
{
  if (a != b) throw InvalidArgument("potentials live on different grids");
}

// strict decrease along a descending eps list
void check_decreasing(ExperimentReport& r, const std::string& quantity, const std::vector<double>& eps,
                      const std::vector<double>& values, bool strict)
{
  for (std::size_t i = 1; i < values.size(); ++i)
    r.check(quantity + "(eps=" + fmt(eps[i]) + ") vs eps=" + fmt(eps[i - 1]), values[i], strict ? "<" : "<=",
            values[i - 1]);
}

} // namespace

std::string to_string(DensityForm form) { return form == DensityForm::sine ? "sin" : "constant"; }

DensityForm density_form_from_string(const std::string& name)
{
  if (name == "sin") return DensityForm::sine;
  if (name == "constant") return DensityForm::constant;
  throw InvalidArgument("unknown density form '" + name + "' (sin, constant)");
}

ScalarField perturbed_density(const GridPtr& grid, double eps, DensityForm form)
{
  if (form == DensityForm::sine) return pinched_density(grid, eps);
  return sample_field(grid, [eps](const Vec2&) { return 1.0 + eps; });
}

PotentialField solve_perturbed(const GridPtr& grid, double eps, DensityForm form, const StabilityOptions& options)
{
  return solve_ma(grid, perturbed_density(grid, eps, form), zero_datum, options.ma);
}

NodeMask interior_mask(const Grid& grid) { return grid.mask(NodeKind::interior); }

double cofactor_distance(const PotentialField& phi, const PotentialField& w, double q)
{
  same_grid(phi.grid, w.grid);
  const auto diff = frobenius(difference(cofactor_field(phi).cof, cofactor_field(w).cof));
  return lp_norm(diff, q, interior_mask(*phi.grid));
}

ExperimentReport cofactor_stability_sweep(const GridPtr& grid, std::vector<double> eps, double q, DensityForm form,
                                          const StabilityOptions& options)
{
  const auto t0 = Clock::now();
  sort_descending(eps, 0.5);
  if (!(q >= 1.0)) throw InvalidArgument("q must be at least 1");
  ExperimentReport r;
  r.id = "cofactor_stability";
  r.config = grid_echo(*grid);
  r.config["q"] = q;
  r.config["g0"] = to_string(form);
  r.config["eps"] = eps;
  r.sweep_variable = "eps";
  r.sweep = eps;

  const auto w = solve_perturbed(grid, 0.0, form, options);
  std::vector<double> norms(eps.size());
  parallel_for(eps.size(), [&](std::size_t i) {
    norms[i] = eps[i] == 0.0 ? cofactor_distance(w, w, q)
                             : cofactor_distance(solve_perturbed(grid, eps[i], form, options), w, q);
  });
  r.column("norm") = norms;
  check_decreasing(r, "norm", eps, norms, true);
  const double slope = loglog_slope(eps, norms);
  r.slopes.emplace_back("log_norm_vs_log_eps", slope);
  r.check("log-log slope of norm against eps", slope, ">", 0.0);

  if (form == DensityForm::constant) {
    ScalarField wn = frobenius(cofactor_field(w).cof);
    const double w_norm = lp_norm(wn, q, interior_mask(*grid));
    r.scalars.emplace_back("W_norm", w_norm);
    auto& oracle = r.column("oracle");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      oracle.push_back(std::abs(std::sqrt(1.0 + eps[i]) - 1.0) * w_norm);
      if (eps[i] > 0.0) r.check("norm ~ |sqrt(1+eps)-1| ||W|| at eps=" + fmt(eps[i]), norms[i], "~=", oracle[i], 0.05);
    }
  }
  r.wall_seconds = seconds_since(t0);
  return r;
}

SobolevPair sobolev_stability(const PotentialField& phi1, const PotentialField& phi2, double gamma)
{
  same_grid(phi1.grid, phi2.grid);
  const Grid& g = *phi1.grid;
  SobolevPair s;
  s.hessian_distance = lp_norm(frobenius(difference(phi1.hess, phi2.hess)), gamma, interior_mask(g));
  ScalarField dg(phi1.grid, std::numeric_limits<double>::quiet_NaN());
  for (auto k : g.inside_nodes()) dg[k] = phi1.g[k] - phi2.g[k];
  s.density_l1 = lp_norm(dg, 1.0);
  return s;
}

ExperimentReport sobolev_stability_sweep(const GridPtr& grid, std::vector<double> eps, double gamma, DensityForm form,
                                         const StabilityOptions& options)
{
  const auto t0 = Clock::now();
  sort_descending(eps, 0.5);
  if (!(gamma >= 1.0)) throw InvalidArgument("gamma must be at least 1");
  ExperimentReport r;
  r.id = "sobolev_stability";
  r.config = grid_echo(*grid);
  r.config["gamma"] = gamma;
  r.config["g0"] = to_string(form);
  r.config["eps"] = eps;
  r.sweep_variable = "eps";
  r.sweep = eps;

  const auto w = solve_perturbed(grid, 0.0, form, options);
  std::vector<SobolevPair> pairs(eps.size());
  parallel_for(eps.size(), [&](std::size_t i) {
    pairs[i] = eps[i] == 0.0 ? sobolev_stability(w, w, gamma)
                             : sobolev_stability(solve_perturbed(grid, eps[i], form, options), w, gamma);
  });
  auto& lhs = r.column("hessian_distance");
  auto& l1 = r.column("density_l1");
  for (const auto& p : pairs) {
    lhs.push_back(p.hessian_distance);
    l1.push_back(p.density_l1);
  }
  check_decreasing(r, "hessian_distance", eps, lhs, true);
  const double slope = loglog_slope(l1, lhs);
  r.slopes.emplace_back("log_hessian_distance_vs_log_density_l1", slope);
  r.check("log-log slope of hessian distance against density L1", slope, ">", 0.0);

  if (form == DensityForm::constant) {
    const double w_norm = lp_norm(frobenius(w.hess), gamma, interior_mask(*grid));
    r.scalars.emplace_back("hessian_w_norm", w_norm);
    auto& oracle = r.column("oracle");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      oracle.push_back(std::abs(std::sqrt(1.0 + eps[i]) - 1.0) * w_norm);
      if (eps[i] > 0.0)
        r.check("distance ~ |sqrt(1+eps)-1| ||D2w|| at eps=" + fmt(eps[i]), lhs[i], "~=", oracle[i], 0.05);
    }
  }
  r.wall_seconds = seconds_since(t0);
  return r;
}

ApproximationMeasure approximation_instance(const PotentialField& phi, const PotentialField& w, const ScalarField& f,
                                            const PointFunction& boundary, double inner_radius,
                                            const StabilityOptions& options)
{
  same_grid(phi.grid, w.grid);
  if (f.grid != phi.grid) throw InvalidArgument("source lives on a different grid");
  if (!(inner_radius > 0.0)) throw InvalidArgument("inner radius must be positive");
  const Grid& g = *phi.grid;
  ApproximationMeasure m;
  m.u = solve_lma(cofactor_field(phi), f, boundary, options.lma).u;
  ScalarField none(phi.grid, std::numeric_limits<double>::quiet_NaN());
  for (auto k : g.inside_nodes()) none[k] = 0.0;
  m.h = solve_lma(cofactor_field(w), none, boundary, options.lma).u;
  const Box b = g.domain().bounding_box();
  const Vec2 mid = (b.lo + b.hi) * 0.5;
  std::size_t count = 0;
  for (auto k : g.inside_nodes()) {
    if (norm(g.coords(k) - mid) > inner_radius) continue;
    m.sup_difference = std::max(m.sup_difference, std::abs(m.u[k] - m.h[k]));
    ++count;
  }
  if (count == 0) throw InvalidArgument("inner region holds no node");
  m.cofactor_l2 = cofactor_distance(phi, w, 2.0);
  m.f_l2 = lp_norm(f, 2.0);
  return m;
}

ExperimentReport approximation_experiment(const GridPtr& grid, std::vector<double> eps, const ScalarField& f,
                                          const PointFunction& boundary, double inner_radius,
                                          const StabilityOptions& options)
{
  const auto t0 = Clock::now();
  sort_descending(eps, 0.5);
  ExperimentReport r;
  r.id = "approximation";
  r.config = grid_echo(*grid);
  r.config["eps"] = eps;
  r.config["inner_radius"] = inner_radius;
  r.sweep_variable = "eps";
  r.sweep = eps;

  bool homogeneous = true;
  for (auto k : grid->inside_nodes())
    if (f[k] != 0.0) homogeneous = false;
  r.config["f"] = homogeneous ? "zero" : "given";

  const auto w = solve_perturbed(grid, 0.0, DensityForm::sine, options);
  std::vector<ApproximationMeasure> m(eps.size());
  parallel_for(eps.size(), [&](std::size_t i) {
    m[i] = eps[i] == 0.0
               ? approximation_instance(w, w, f, boundary, inner_radius, options)
               : approximation_instance(solve_perturbed(grid, eps[i], DensityForm::sine, options), w, f, boundary,
                                        inner_radius, options);
  });
  auto& sup = r.column("sup_difference");
  auto& cof = r.column("cofactor_l2");
  for (const auto& x : m) {
    sup.push_back(x.sup_difference);
    cof.push_back(x.cofactor_l2);
  }
  r.slopes.emplace_back("log_sup_difference_vs_log_eps", loglog_slope(eps, sup));
  r.slopes.emplace_back("log_sup_difference_vs_log_cofactor_l2", loglog_slope(cof, sup));

  if (homogeneous) {
    check_decreasing(r, "sup|u-h|", eps, sup, true);
    if (eps.back() == 0.0) r.check("sup|u-h| at eps=0", sup.back(), "<=", 0.0, 1e-8);
  } else if (eps.back() == 0.0) {
    const double c = sup.back() / m.back().f_l2;
    r.scalars.emplace_back("C", c);
    r.check("sup|u-h| / ||f||_L2 at eps=0 finite", c, "<", kInfinity);
  }
  r.wall_seconds = seconds_since(t0);
  return r;
}

ConvexRatios convex_w21e_ratios(const PotentialField& potential, const ScalarField& f,
                                const std::vector<double>& gammas, const StabilityOptions& options)
{
  const Grid& g = *potential.grid;
  ConvexRatios c;
  c.gammas = gammas;
  for (auto k : g.inside_nodes()) c.f_sup = std::max(c.f_sup, std::abs(f[k]));
  c.v = solve_lma(cofactor_field(potential), f, zero_datum, options.lma).u;
  const auto hess = fd_derivatives(c.v).second;
  double hi = 0.0;
  c.min_eigenvalue = kInfinity;
  for (auto k : g.interior_nodes()) {
    c.min_eigenvalue = std::min(c.min_eigenvalue, hess[k].min_eig());
    hi = std::max(hi, hess[k].max_eig());
  }
  c.degenerate = c.f_sup == 0.0;
  c.applicable = c.min_eigenvalue >= -1e-6 * hi;
  const auto fro = frobenius(hess);
  const auto mask = interior_mask(g);
  for (double gamma : gammas) {
    if (!(gamma >= 1.0)) throw InvalidArgument("gamma must be at least 1");
    c.ratios.push_back(c.degenerate ? std::numeric_limits<double>::quiet_NaN() : lp_norm(fro, gamma, mask) / c.f_sup);
  }
  return c;
}

ExperimentReport convex_w21e_check(const ConvexDomain& domain, double spacing, double eps,
                                   const std::vector<double>& gammas, const StabilityOptions& options)
{
  const auto t0 = Clock::now();
  if (gammas.empty()) throw InvalidArgument("empty gamma list");
  ExperimentReport r;
  r.id = "convex_w21e";
  r.config = {{"domain", to_string(domain.kind())}, {"spacing", spacing}, {"eps", eps}, {"gamma", gammas}};
  r.sweep_variable = "gamma";
  r.sweep = gammas;

  const double spacings[2] = {spacing, 0.5 * spacing};
  ConvexRatios c[2];
  parallel_for(2, [&](std::size_t i) {
    const auto grid = Grid::discretize(domain, spacings[i]);
    const auto pot = solve_perturbed(grid, eps, DensityForm::sine, options);
    auto f = perturbed_density(grid, eps, DensityForm::sine);
    for (auto k : grid->inside_nodes()) f[k] *= 2.0;
    c[i] = convex_w21e_ratios(pot, f, gammas, options);
  });
  r.column("ratio_h") = c[0].ratios;
  r.column("ratio_h2") = c[1].ratios;
  r.scalars.emplace_back("min_eigenvalue_h", c[0].min_eigenvalue);
  r.scalars.emplace_back("min_eigenvalue_h2", c[1].min_eigenvalue);
  if (!c[0].applicable || !c[1].applicable || c[0].degenerate || c[1].degenerate) {
    r.applicable = false;
    r.notes.push_back(c[0].degenerate || c[1].degenerate ? "f vanishes identically; ratio degenerate"
                                                         : "solution not certified convex; check not applicable");
    r.wall_seconds = seconds_since(t0);
    return r;
  }
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double a = c[0].ratios[i], b = c[1].ratios[i];
    r.check("ratio finite at gamma=" + fmt(gammas[i]), std::max(a, b), "<", kInfinity);
    r.check("refinement factor at gamma=" + fmt(gammas[i]), std::max(a, b) / std::min(a, b), "<=", 2.0);
  }
  r.wall_seconds = seconds_since(t0);
  return r;
}

ContactDefect contact_defect(const PotentialField& potential, const BoundarySample& at, double t, double sigma)
{
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const Grid& g = *potential.grid;
  const auto s = section(potential, boundary_anchor(potential, at), t);
  std::vector<std::size_t> cells;
  for (auto k : s.cells)
    if (g.interior(k)) cells.push_back(k);
  if (cells.size() < 8) {
    std::ostringstream os;
    os << "boundary section at height " << t << " holds " << cells.size() << " interior cells, need 8";
    throw InvalidArgument(os.str());
  }
  const auto r_min = quasi_euclidean_min_ratio(potential, cells, 2.0 * g.spacing());
  ContactDefect d;
  d.cells = cells.size();
  for (std::size_t n = 0; n < cells.size(); ++n) {
    d.section_measure += g.weight(cells[n]);
    if (!(r_min[n] >= sigma * (1.0 - 1e-12))) d.defect_measure += g.weight(cells[n]);
  }
  d.fraction = d.defect_measure / d.section_measure;
  return d;
}

ExperimentReport contact_set_experiment(const GridPtr& grid, std::vector<double> eps, double sigma, double t,
                                        const Vec2& point, double small, const StabilityOptions& options)
{
  const auto t0 = Clock::now();
  sort_descending(eps, 0.5);
  ExperimentReport r;
  r.id = "contact_set";
  r.config = grid_echo(*grid);
  r.config["eps"] = eps;
  r.config["sigma"] = sigma;
  r.config["section_height"] = t;
  r.config["point"] = {point.x, point.y};
  r.config["small"] = small;
  r.sweep_variable = "eps";
  r.sweep = eps;

  std::vector<ContactDefect> d(eps.size());
  parallel_for(eps.size(), [&](std::size_t i) {
    const auto pot = solve_perturbed(grid, eps[i], DensityForm::sine, options);
    const BoundarySample* at = &pot.boundary.front();
    for (const auto& b : pot.boundary)
      if (norm(b.point - point) < norm(at->point - point)) at = &b;
    d[i] = contact_defect(pot, *at, t, sigma);
  });
  auto& frac = r.column("fraction");
  auto& sm = r.column("section_measure");
  auto& dm = r.column("defect_measure");
  for (const auto& x : d) {
    frac.push_back(x.fraction);
    sm.push_back(x.section_measure);
    dm.push_back(x.defect_measure);
  }
  check_decreasing(r, "defect fraction", eps, frac, false);
  r.check("defect fraction at eps=" + fmt(eps.back()), frac.back(), "<=", small);
  r.slopes.emplace_back("log_fraction_vs_log_eps", loglog_slope(eps, frac));
  r.wall_seconds = seconds_since(t0);
  return r;
}

W2pMeasure w2p_measure(const ScalarField& u, const ScalarField& f, double p, double q)
{
  if (!(p > 0.0) || !(q >= 1.0)) throw InvalidArgument("need p > 0 and q >= 1");
  const Grid& g = *u.grid;
  W2pMeasure m;
  m.hessian_norm = root_norm(frobenius(fd_derivatives(u).second), p, interior_mask(g));
  m.f_norm = lp_norm(f, q);
  m.ratio = m.hessian_norm / m.f_norm;
  return m;
}

W2pMeasure w2p_ratio(const MatrixField& coefficient, const ScalarField& f, double p, double q,
                     const StabilityOptions& options)
{
  return w2p_measure(solve_nondivergence(coefficient, f, zero_datum, options.lma).u, f, p, q);
}

ExperimentReport w2p_ratio_sweep(const ConvexDomain& domain, double spacing, std::vector<double> eps, double p,
                                 double q, const PointFunction& f, const W2pSweepOptions& sweep,
                                 const StabilityOptions& options)
{
  const auto t0 = Clock::now();
  if (!(p > 1.0) || !(q > p) || !(q > 2.0)) throw InvalidArgument("need 1 < p < q and q > 2");
  if (!(sweep.small_p > 0.0) || !(sweep.small_p < 0.5)) throw InvalidArgument("small exponent must lie in (0, 1/2)");
  sort_descending(eps, 0.5);
  ExperimentReport r;
  r.id = "w2p_ratio";
  r.config = {{"domain", to_string(domain.kind())}, {"spacing", spacing}, {"eps", eps}, {"p", p}, {"q", q},
              {"sup_factor", sweep.sup_factor}, {"refinement_factor", sweep.refinement_factor},
              {"small_p", sweep.small_p}, {"wide_eps", sweep.wide_eps}};
  r.sweep_variable = "eps";
  r.sweep = eps;

  const GridPtr grids[2] = {Grid::discretize(domain, spacing), Grid::discretize(domain, 0.5 * spacing)};
  const std::size_t n = eps.size();
  std::vector<W2pMeasure> m(2 * n);
  parallel_for(2 * n, [&](std::size_t job) {
    const auto& grid = grids[job / n];
    const auto pot = solve_perturbed(grid, eps[job % n], DensityForm::sine, options);
    m[job] = w2p_ratio(cofactor_field(pot).cof, sample_field(grid, f), p, q, options);
  });
  std::vector<double> rh(n), rh2(n);
  auto& hn = r.column("hessian_norm_h");
  auto& fn = r.column("f_norm_h");
  for (std::size_t i = 0; i < n; ++i) {
    rh[i] = m[i].ratio;
    rh2[i] = m[n + i].ratio;
    hn.push_back(m[i].hessian_norm);
    fn.push_back(m[i].f_norm);
  }
  r.column("R_h") = rh;
  r.column("R_h2") = rh2;
  r.slopes.emplace_back("log_R_vs_log_eps", loglog_slope(eps, rh));

  for (const auto* rs : {&rh, &rh2}) {
    const std::string tag = rs == &rh ? "h" : "h/2";
    const double sup = *std::max_element(rs->begin(), rs->end());
    r.check("sup R <= " + fmt(sweep.sup_factor) + " median R at " + tag, sup, "<=", sweep.sup_factor * median(*rs));
  }
  for (std::size_t i = 0; i < n; ++i)
    r.check("R(h)/R(h/2) within factor at eps=" + fmt(eps[i]), std::max(rh[i], rh2[i]) / std::min(rh[i], rh2[i]),
            "<=", sweep.refinement_factor);

  {
    const auto pot = solve_perturbed(grids[0], eps.front(), DensityForm::sine, options);
    const auto scaled = w2p_ratio(cofactor_field(pot).cof,
                                  sample_field(grids[0], [&](const Vec2& x) { return sweep.scaling * f(x); }), p, q,
                                  options);
    r.scalars.emplace_back("R_scaled_f", scaled.ratio);
    r.check("R invariant under f -> " + fmt(sweep.scaling) + " f", scaled.ratio, "~=", rh.front(), sweep.scaling_tol);
  }
  {
    const auto pot = solve_perturbed(grids[0], sweep.wide_eps, DensityForm::sine, options);
    const auto small = w2p_ratio(cofactor_field(pot).cof, sample_field(grids[0], f), sweep.small_p, q, options);
    r.scalars.emplace_back("small_exponent_lambda", pot.lambda);
    r.scalars.emplace_back("small_exponent_Lambda", pot.Lambda);
    r.scalars.emplace_back("R_small_exponent", small.ratio);
    r.check("small-exponent ratio positive", small.ratio, ">", 0.0);
    r.check("small-exponent ratio finite", small.ratio, "<", kInfinity);
  }
  r.wall_seconds = seconds_since(t0);
  return r;
}

GeometricIteration geometric_iteration_check(double a1, const std::vector<double>& b, double eps0, double M, double q)
{
  if (!(eps0 > 0.0) || !(eps0 < 0.5)) throw InvalidArgument("eps0 = " + fmt(eps0) + " must lie in (0, 1/2)");
  if (!(M > 0.0) || !(q > 0.0)) throw InvalidArgument("need M > 0 and q > 0");
  GeometricIteration it;
  it.ratio = std::sqrt(2.0 * eps0);
  const double Mq = std::pow(M, q);
  it.s = Mq * it.ratio;
  if (it.s > 0.5 * (1.0 + 1e-12))
    throw InvalidArgument("M^q sqrt(2 eps0) = " + fmt(it.s) + " exceeds 1/2");
  const double r = it.ratio;
  it.bound.push_back(a1);
  for (std::size_t k = 1; k <= b.size(); ++k) {
    double v = std::pow(r, k) * a1;
    for (std::size_t i = 1; i <= k; ++i) v += std::pow(r, k + 1 - i) * b[i - 1];
    it.bound.push_back(v);
  }
  for (std::size_t k = 1; k <= it.bound.size(); ++k) it.weighted_partial += std::pow(Mq, k) * it.bound[k - 1];
  double bsum = 0.0;
  for (std::size_t i = 1; i <= b.size(); ++i) bsum += std::pow(Mq, i) * b[i - 1];
  const double geo = it.s / (1.0 - it.s);
  it.weighted_closed_form = a1 / r * geo + geo * bsum;
  return it;
}

IterationAudit audit_iteration(const GeometricIteration& bound, const std::vector<double>& a, double M, double q,
                               double tol)
{
  IterationAudit audit;
  const double Mq = std::pow(M, q);
  for (std::size_t k = 1; k <= a.size(); ++k) {
    audit.weighted_sum += std::pow(Mq, k) * a[k - 1];
    if (k <= bound.bound.size() && a[k - 1] > bound.bound[k - 1] * (1.0 + tol)) audit.violations.push_back(k);
  }
  return audit;
}

ExperimentReport geometric_iteration_experiment(const GridPtr& grid, double eps, const PointFunction& f, double M,
                                                double q, std::size_t levels, const StabilityOptions& options)
{
  const auto t0 = Clock::now();
  if (!(M > 1.0) || !(q > 0.0) || levels < 2) throw InvalidArgument("need M > 1, q > 0 and at least two levels");
  const Grid& g = *grid;
  ExperimentReport r;
  r.id = "geometric_iteration";
  r.config = grid_echo(g);
  r.config["eps"] = eps;
  r.config["M"] = M;
  r.config["q"] = q;
  r.config["levels"] = levels;
  r.sweep_variable = "k";

  const auto pot = solve_perturbed(grid, eps, DensityForm::sine, options);
  const auto fs = sample_field(grid, f);
  const auto u = solve_lma(cofactor_field(pot), fs, zero_datum, options.lma).u;
  const auto grad = fd_derivatives(u).first;
  const auto op = compute_openings(pot, u, grad);
  ScalarField f2(grid, std::numeric_limits<double>::quiet_NaN());
  for (auto k : g.inside_nodes()) f2[k] = fs[k] * fs[k];
  const auto mf = maximal_function(pot, f2, default_c_cap(pot));

  // G_M(u / c) = G_{cM}(u): dividing u and f by the median opening c puts
  // the opening scale at one whatever the size of f
  const double c = median(op.opening);
  if (!(c > 0.0)) throw InvalidArgument("openings of the solution vanish");
  r.scalars.emplace_back("median_opening", c);
  std::vector<double> a(levels), b(levels);
  for (std::size_t k = 1; k <= levels; ++k) {
    r.sweep.push_back(static_cast<double>(k));
    const double Mk = std::pow(M, static_cast<double>(k));
    for (std::size_t i = 0; i < op.centers.size(); ++i)
      if (op.opening[i] > c * Mk) a[k - 1] += g.weight(op.centers[i]) * op.center_weight;
    const double level = c * c * std::pow(M, 2.0 * (k + 1));
    for (auto n : g.inside_nodes())
      if (mf[n] > level) b[k - 1] += g.weight(n);
  }
  const double eps0 = std::pow(0.5 / std::pow(M, q), 2) / 2.0;
  const auto bound = geometric_iteration_check(a[0], std::vector<double>(b.begin(), b.end() - 1), eps0, M, q);
  const auto audit = audit_iteration(bound, a, M, q);
  r.column("a") = a;
  r.column("b") = b;
  r.column("bound") = bound.bound;
  r.scalars.emplace_back("eps0", eps0);
  r.scalars.emplace_back("weighted_sum", audit.weighted_sum);
  r.scalars.emplace_back("weighted_bound", bound.weighted_closed_form);
  r.scalars.emplace_back("bound_violations", static_cast<double>(audit.violations.size()));
  for (auto k : audit.violations) r.notes.push_back("a_" + std::to_string(k) + " exceeds the recursion bound");
  for (std::size_t k = 1; k < levels; ++k)
    r.check("a_" + std::to_string(k + 1) + " <= a_" + std::to_string(k), a[k], "<=", a[k - 1]);
  r.check("weighted sum finite", audit.weighted_sum, "<", kInfinity);
  r.wall_seconds = seconds_since(t0);
  return r;
}

} // namespace malab
