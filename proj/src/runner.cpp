#include "malab/runner.hpp"

#include "malab/barriers.hpp"
#include "malab/covering.hpp"
#include "malab/errors.hpp"
#include "malab/good_sets.hpp"
#include "malab/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace malab {

namespace {

using Clock = std::chrono::steady_clock;

// covering theorem densities and the inner/outer scale of the covered ring
constexpr double kCoverEps[] = {0.25, 0.16};
constexpr double kRingInner = 0.5;
constexpr double kRingOuter = 0.55;
constexpr double kCoverTmax = 0.03;
constexpr double kVitaliScale = 0.7;
constexpr double kIndicatorRadius = 0.2;
constexpr double kInclusionBetas[] = {0.5, 0.75, 1.0, 1.5, 2.0, 4.0};
constexpr double kInclusionTolerance = 0.005;
constexpr double kHessianPower = 2.0;
constexpr std::size_t kEngulfingSamples = 60;
constexpr int kSectionLevels = 5;

class IoError : public Error
{
public:
  using Error::Error;
};

std::string fmt(double v)
{
  std::ostringstream os;
  os << v;
  return os.str();
}

double zero_datum(const Vec2&) { return 0.0; }

StabilityOptions solver_options(const ExperimentConfig& c)
{
  StabilityOptions o;
  o.ma.tol_ma = c.tol_ma;
  o.ma.tol_convex = c.tol_convex;
  o.ma.max_iter = c.max_iter;
  o.lma.tol_lma = c.tol_lma;
  return o;
}

nlohmann::ordered_json config_json(const ExperimentConfig& c)
{
  nlohmann::ordered_json j;
  j["experiment"] = c.experiment;
  j["domain"] = to_string(c.domain.kind);
  j["center"] = {c.domain.center.x, c.domain.center.y};
  j["spacing"] = c.spacing;
  j["eps"] = c.eps;
  j["g0"] = to_string(c.g0);
  j["source"] = to_string(c.source);
  j["tol_ma"] = c.tol_ma;
  j["tol_lma"] = c.tol_lma;
  j["tol_convex"] = c.tol_convex;
  j["max_iter"] = c.max_iter;
  j["p"] = c.p;
  j["q"] = c.q;
  j["seed"] = c.seed;
  return j;
}

PointFunction source_function(const ExperimentConfig& c, SourceKind fallback)
{
  const SourceKind kind = c.source == SourceKind::standard ? fallback : c.source;
  switch (kind) {
  case SourceKind::smooth: return random_smooth_function(c.seed);
  case SourceKind::singular: {
    const Vec2 s = c.domain.center + Vec2{0.3, 0.2};
    const double floor = 0.5 * c.spacing;
    return [s, floor](const Vec2& p) { return 1.0 / std::sqrt(std::max(norm(p - s), floor)); };
  }
  default: return zero_datum;
  }
}

// nodes of `region` that fall inside the domain shrunk by `scale` about its centre
std::vector<std::size_t> scaled_region(const Grid& g, double scale, const Vec2& centre)
{
  std::vector<std::size_t> out;
  for (auto k : g.interior_nodes())
    if (g.domain().contains(centre + (g.coords(k) - centre) / scale)) out.push_back(k);
  return out;
}

const BoundarySample& sample_near(const PotentialField& pot, const Vec2& p)
{
  const BoundarySample* best = &pot.boundary.front();
  for (const auto& b : pot.boundary)
    if (norm(b.point - p) < norm(best->point - p)) best = &b;
  return *best;
}

std::string fields_csv(const std::vector<std::string>& names, const std::vector<const ScalarField*>& fields)
{
  std::ostringstream os;
  write_fields_csv(os, names, fields);
  return os.str();
}

double max_abs_difference(const ScalarField& a, const ScalarField& b, const std::vector<std::size_t>& nodes)
{
  double e = 0.0;
  for (auto k : nodes) e = std::max(e, std::abs(a[k] - b[k]));
  return e;
}

void check_non_increasing(ExperimentReport& r, const std::string& name, const std::vector<double>& values)
{
  for (std::size_t i = 1; i < values.size(); ++i)
    r.check(name + "[" + std::to_string(i) + "] vs [" + std::to_string(i - 1) + "]", values[i], "<=", values[i - 1]);
}

ExperimentOutput solve_ma_experiment(const ExperimentConfig& c, const GridPtr& grid)
{
  ExperimentOutput out;
  auto& r = out.report;
  r.id = "solve_ma";
  r.sweep_variable = "eps";
  r.sweep = c.eps;
  const auto opts = solver_options(c);
  std::vector<PotentialField> pots(c.eps.size());
  std::vector<ConvexityReport> conv(c.eps.size());
  parallel_for(c.eps.size(), [&](std::size_t i) {
    pots[i] = solve_perturbed(grid, c.eps[i], c.g0, opts);
    conv[i] = certify_convexity(pots[i], c.tol_convex);
  });
  auto& iters = r.column("newton_iterations");
  auto& res = r.column("residual");
  auto& mins = r.column("min_eigenvalue");
  auto& lo = r.column("density_min");
  auto& hi = r.column("density_max");
  for (std::size_t i = 0; i < pots.size(); ++i) {
    iters.push_back(pots[i].newton_iterations);
    res.push_back(pots[i].residual);
    mins.push_back(conv[i].min_eigenvalue);
    lo.push_back(pots[i].lambda);
    hi.push_back(pots[i].Lambda);
    const std::string at = "(eps=" + fmt(c.eps[i]) + ")";
    r.check("residual" + at, pots[i].residual, "<=", c.tol_ma);
    r.check("min Hessian eigenvalue" + at, conv[i].min_eigenvalue, ">=", -c.tol_convex * pots[i].Lambda);
  }
  const auto& first = pots.front();
  out.tables.emplace_back("potential.csv", fields_csv({"phi", "g"}, {&first.phi, &first.g}));
  return out;
}

ExperimentOutput solve_lma_experiment(const ExperimentConfig& c, const GridPtr& grid)
{
  ExperimentOutput out;
  auto& r = out.report;
  r.id = "solve_lma";
  r.sweep_variable = "eps";
  r.sweep = c.eps;
  const auto opts = solver_options(c);
  const auto f = sample_field(grid, source_function(c, SourceKind::smooth));
  std::vector<LmaSolution> sols(c.eps.size());
  std::vector<AbpReport> abp(c.eps.size());
  std::vector<double> identity(c.eps.size()), min_eig(c.eps.size());
  parallel_for(c.eps.size(), [&](std::size_t i) {
    const auto pot = solve_perturbed(grid, c.eps[i], c.g0, opts);
    const auto cof = cofactor_field(pot);
    sols[i] = solve_lma(cof, f, zero_datum, opts.lma);
    sols[i].cofactor = nullptr;
    abp[i] = abp_check(sols[i]);
    const auto lphi = apply_operator(cof.cof, pot.phi);
    double e = 0.0;
    for (auto k : grid->interior_nodes()) e = std::max(e, std::abs(lphi[k] - 2.0 * pot.g[k]));
    identity[i] = e;
    double m = kInfinity;
    for (auto k : grid->interior_nodes()) m = std::min(m, cof.cof[k].min_eig());
    min_eig[i] = m;
  });
  auto& res = r.column("residual_max");
  auto& ratio = r.column("abp_ratio");
  auto& sup = r.column("u_sup");
  auto& id = r.column("identity_error");
  auto& pivot = r.column("min_coefficient_eigenvalue");
  for (std::size_t i = 0; i < sols.size(); ++i) {
    res.push_back(sols[i].residual_max);
    ratio.push_back(abp[i].ratio);
    sup.push_back(abp[i].u_sup);
    id.push_back(identity[i]);
    pivot.push_back(min_eig[i]);
    const std::string at = "(eps=" + fmt(c.eps[i]) + ")";
    r.check("residual" + at, sols[i].residual_max, "<=", c.tol_lma);
    r.check("ABP ratio finite" + at, abp[i].passed ? 1.0 : 0.0, ">=", 1.0);
    // L_phi phi = 2 det D^2 phi holds exactly for the discrete Hessian, up to the MA residual
    r.check("L_phi phi - 2g" + at, identity[i], "<=", 2.0 * c.tol_ma, 1e-10);
  }
  const auto& first = sols.front();
  out.tables.emplace_back("solution.csv", fields_csv({"u", "f"}, {&first.u, &first.f}));
  return out;
}

ExperimentOutput sections_experiment(const ExperimentConfig& c, const GridPtr& grid)
{
  ExperimentOutput out;
  auto& r = out.report;
  r.id = "sections";
  r.sweep_variable = "t";
  const auto pot = solve_perturbed(grid, c.eps.front(), c.g0, solver_options(c));
  const Anchor centre = node_anchor(pot, grid->nearest_inside(c.domain.center));
  std::vector<VolumeSample> samples;
  for (int k = 0; k < kSectionLevels; ++k) {
    const double t = c.section_height * std::ldexp(1.0, -k);
    samples.push_back({centre, t});
    r.sweep.push_back(t);
  }
  std::vector<Section> secs(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { secs[i] = section(pot, centre, samples[i].t); });
  auto& m = r.column("measure");
  auto& mt = r.column("measure_over_t");
  auto& a = r.column("semi_major");
  auto& b = r.column("semi_minor");
  auto& cells = r.column("cells");
  for (std::size_t i = 0; i < secs.size(); ++i) {
    m.push_back(secs[i].measure);
    mt.push_back(secs[i].measure / samples[i].t);
    a.push_back(secs[i].ellipsoid.semi_major);
    b.push_back(secs[i].ellipsoid.semi_minor);
    cells.push_back(static_cast<double>(secs[i].cells.size()));
  }
  check_non_increasing(r, "measure", m);
  const auto v = volume_scaling(pot, samples);
  r.slopes.emplace_back("measure_vs_t", v.exponent);
  r.check("volume exponent", v.exponent, "~=", 1.0, 0.1);
  const auto eng = engulfing_constant(pot, engulfing_samples(pot, kEngulfingSamples, default_c_cap(pot), c.seed));
  r.scalars.emplace_back("engulfing_theta", eng.theta);
  r.scalars.emplace_back("volume_c1", v.c1);
  r.scalars.emplace_back("volume_c2", v.c2);
  r.check("engulfing theta finite", eng.theta, "<", kInfinity);
  r.check("engulfing theta at least 1", eng.theta, ">=", 1.0);

  std::ostringstream os;
  os << "x,y,quasi_distance\n";
  os.precision(17);
  for (auto k : secs.front().cells) {
    const Vec2 p = grid->coords(k);
    os << p.x << ',' << p.y << ',' << quasi_distance(pot, centre, k) << '\n';
  }
  out.tables.emplace_back("section.csv", os.str());
  return out;
}

ExperimentOutput cover_experiment(const ExperimentConfig& c, const GridPtr& grid)
{
  ExperimentOutput out;
  auto& r = out.report;
  r.id = "cover";
  r.sweep_variable = "eps";
  const auto pot = solve_perturbed(grid, c.eps.front(), c.g0, solver_options(c));
  const Vec2 centre = c.domain.center;

  const auto region = scaled_region(*grid, kVitaliScale, centre);
  if (region.empty()) throw InvalidArgument("Vitali region is empty at this spacing");
  const auto vit = vitali_cover(pot, region);
  r.scalars.emplace_back("vitali_centers", static_cast<double>(vit.centers.size()));
  r.scalars.emplace_back("vitali_delta0", vit.delta0);
  r.scalars.emplace_back("vitali_region_measure", vit.region_measure);
  r.scalars.emplace_back("vitali_union_measure", vit.union_measure);
  r.check("Vitali core overlaps", static_cast<double>(vit.disjointness_violations), "<=", 0.0);
  r.check("Vitali uncovered nodes", static_cast<double>(vit.uncovered), "<=", 0.0);
  r.check("Vitali core overlaps (recount)", static_cast<double>(count_core_overlaps(pot, vit)), "<=", 0.0);

  std::vector<std::size_t> ring;
  {
    const auto outer = scaled_region(*grid, kRingOuter, centre);
    const auto inner = scaled_region(*grid, kRingInner, centre);
    std::set_difference(outer.begin(), outer.end(), inner.begin(), inner.end(), std::back_inserter(ring));
  }
  if (ring.empty()) throw InvalidArgument("covering ring is empty at this spacing");
  r.scalars.emplace_back("ring_nodes", static_cast<double>(ring.size()));
  auto& set = r.column("set_measure");
  auto& uni = r.column("union_measure");
  auto& slack = r.column("slack");
  auto& ratio = r.column("ratio");
  auto& selected = r.column("selected");
  auto& rejected = r.column("rejected");
  for (double eps : kCoverEps) {
    const auto heights = density_heights(pot, ring, eps, kCoverTmax);
    const auto sel = covering_select(pot, ring, heights, eps);
    const auto& v = sel.verification;
    r.sweep.push_back(eps);
    set.push_back(v.set_measure);
    uni.push_back(v.union_measure);
    slack.push_back(v.slack);
    ratio.push_back(v.ratio);
    selected.push_back(static_cast<double>(sel.selected.size()));
    rejected.push_back(static_cast<double>(sel.rejected.size()));
    const std::string at = "(eps=" + fmt(eps) + ")";
    r.check("uncovered points" + at, static_cast<double>(v.uncovered), "<=", 0.0);
    r.check("|O| vs sqrt(eps)|union| + slack" + at, v.set_measure, "<=",
            std::sqrt(eps) * v.union_measure + v.slack);
  }
  std::ostringstream os;
  write_covering_csv(os, pot, vit);
  out.tables.emplace_back("covering.csv", os.str());
  return out;
}

ExperimentOutput maximal_experiment(const ExperimentConfig& c, const ConvexDomain& domain)
{
  ExperimentOutput out;
  auto& r = out.report;
  r.id = "maximal";
  r.sweep_variable = "spacing";
  r.sweep = {c.spacing, 0.5 * c.spacing};
  const auto opts = solver_options(c);
  const Vec2 centre = c.domain.center;
  const auto indicator = [centre](const Vec2& p) { return norm(p - centre) < kIndicatorRadius ? 1.0 : 0.0; };

  std::vector<StrongTypeReport> strong(2);
  std::vector<double> one_error(2), homogeneity(2);
  ScalarField f_coarse, m_coarse;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto g = Grid::discretize(domain, r.sweep[i]);
    const auto pot = solve_perturbed(g, c.eps.front(), c.g0, opts);
    const double cap = default_c_cap(pot);
    const auto f = sample_field(g, indicator);
    strong[i] = strong_type_ratio(pot, f, c.p, cap);
    const auto m1 = maximal_function(pot, ScalarField(g, 1.0), cap);
    one_error[i] = max_abs_difference(m1, ScalarField(g, 1.0), g->inside_nodes());
    const auto mf = maximal_function(pot, f, cap);
    auto scaled = f;
    for (auto& v : scaled.values) v *= -4.0;
    auto m4 = maximal_function(pot, scaled, cap);
    for (auto& v : m4.values) v *= 0.25;
    homogeneity[i] = max_abs_difference(m4, mf, g->inside_nodes());
    if (i == 0) {
      f_coarse = f;
      m_coarse = mf;
    }
  }
  auto& ratio = r.column("strong_type_ratio");
  auto& mnorm = r.column("maximal_norm");
  auto& fnorm = r.column("f_norm");
  auto& one = r.column("M1_error");
  auto& hom = r.column("homogeneity_error");
  for (std::size_t i = 0; i < 2; ++i) {
    ratio.push_back(strong[i].ratio);
    mnorm.push_back(strong[i].maximal_norm);
    fnorm.push_back(strong[i].f_norm);
    one.push_back(one_error[i]);
    hom.push_back(homogeneity[i]);
    const std::string at = "(h=" + fmt(r.sweep[i]) + ")";
    r.check("|M(1) - 1|" + at, one_error[i], "<=", 0.0);
    r.check("|M(-4f)/4 - M(f)|" + at, homogeneity[i], "<=", 0.0);
    r.check("strong-type ratio finite" + at, strong[i].ratio, "<", kInfinity);
  }
  r.check("strong-type ratio refinement", std::max(ratio[0], ratio[1]), "<=",
          c.checks.refinement_factor * std::min(ratio[0], ratio[1]));
  out.tables.emplace_back("maximal.csv", fields_csv({"f", "Mf"}, {&f_coarse, &m_coarse}));
  return out;
}

ExperimentOutput goodsets_experiment(const ExperimentConfig& c, const GridPtr& grid)
{
  ExperimentOutput out;
  auto& r = out.report;
  r.id = "goodsets";
  r.sweep_variable = "beta";
  const auto opts = solver_options(c);
  const auto pot = solve_perturbed(grid, c.eps.front(), c.g0, opts);
  const auto f = sample_field(grid, source_function(c, SourceKind::singular));
  const auto sol = solve_lma(cofactor_field(pot), f, zero_datum, opts.lma);
  const auto [grad, hess] = fd_derivatives(sol.u);
  const auto op = compute_openings(pot, sol.u, grad);
  const auto ratios = quasi_euclidean_ratios(pot);

  const auto d = distribution_functions(sol.u, op, ratios, tail_betas(op), kHessianPower);
  auto& F = r.column("F");
  auto& F1 = r.column("F1");
  auto& F2 = r.column("F2");
  std::vector<std::pair<double, double>> tail;
  for (const auto& s : d) {
    r.sweep.push_back(s.beta);
    F.push_back(s.F);
    F1.push_back(s.F1);
    F2.push_back(s.F2);
    tail.push_back({s.beta, s.F2});
  }
  check_non_increasing(r, "F2", F2);
  const auto fit = decay_fit(tail, grid->cell_area());
  r.slopes.emplace_back("F2_decay_tau", fit.tau);
  r.scalars.emplace_back("F2_decay_C", fit.C);
  r.scalars.emplace_back("F2_fit_residual", fit.residual);
  r.check("fitted decay exponent", fit.tau, ">", 0.0);

  const auto self = compute_openings(pot, pot.phi, pot.grad);
  std::size_t self_violations = 0;
  double worst = 0.0;
  for (double beta : kInclusionBetas) {
    self_violations += inclusion_check(pot.phi, self, ratios, beta, kHessianPower).violations.size();
    worst = std::max(worst, inclusion_check(sol.u, op, ratios, beta, kHessianPower).violation_fraction);
  }
  r.scalars.emplace_back("inclusion_violations_phi", static_cast<double>(self_violations));
  r.scalars.emplace_back("inclusion_violation_fraction", worst);
  r.check("inclusion violations for u = phi", static_cast<double>(self_violations), "<=", 0.0);
  r.check("inclusion violation fraction", worst, "<=", kInclusionTolerance);

  std::ostringstream os;
  write_distribution_csv(os, d);
  out.tables.emplace_back("distribution.csv", os.str());
  return out;
}

ExperimentOutput barrier_experiment(const ExperimentConfig& c, const GridPtr& grid)
{
  ExperimentOutput out;
  auto& r = out.report;
  r.id = "barrier";
  r.sweep_variable = "delta";
  r.sweep = c.delta;
  const double eps = c.eps.front();
  const double lambda = c.lambda > 0 ? c.lambda : 1.0 - eps;
  const double Lambda = c.Lambda > 0 ? c.Lambda : 1.0 + eps;
  const auto pot = solve_perturbed(grid, eps, c.g0, solver_options(c));
  r.scalars.emplace_back("lambda_assumed", lambda);
  r.scalars.emplace_back("Lambda_assumed", Lambda);
  r.scalars.emplace_back("density_min", pot.lambda);
  r.scalars.emplace_back("density_max", pot.Lambda);
  const auto norm_at = normalize_at_boundary(pot, sample_near(pot, c.point));

  std::vector<Barrier> barriers(c.delta.size());
  std::vector<BarrierReport> reps(c.delta.size());
  parallel_for(c.delta.size(), [&](std::size_t i) {
    barriers[i] = build_supersolution(pot, norm_at, lambda, Lambda, c.delta[i]);
    reps[i] = verify_supersolution(barriers[i], pot);
  });
  auto& mx = r.column("max_operator");
  auto& bound = r.column("operator_bound");
  auto& bmin = r.column("boundary_min");
  auto& smin = r.column("sphere_min");
  auto& target = r.column("sphere_target");
  auto& nodes = r.column("operator_nodes");
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& b = reps[i];
    mx.push_back(b.max_operator);
    bound.push_back(b.operator_bound);
    bmin.push_back(b.boundary_min);
    smin.push_back(b.sphere_min);
    target.push_back(b.sphere_target);
    nodes.push_back(static_cast<double>(b.operator_nodes));
    const std::string at = "(delta=" + fmt(c.delta[i]) + ")";
    r.check("max L_phi w" + at, b.max_operator, "<=", b.operator_bound);
    r.check("w on the boundary" + at, b.boundary_min, ">=", 0.0);
    r.check("w on the sphere" + at, b.sphere_min, ">=", b.sphere_target, b.interpolation_tol);
  }
  ScalarField w(grid, 0.0);
  for (auto k : grid->inside_nodes())
    if (barriers.front().ball[k]) w[k] = barriers.front().w[k];
  out.tables.emplace_back("barrier.csv", fields_csv({"w"}, {&w}));
  return out;
}

ExperimentOutput stability_experiment(const ExperimentConfig& c, const ConvexDomain& domain, const GridPtr& grid)
{
  const auto opts = solver_options(c);
  ExperimentOutput out;
  const std::string& e = c.experiment;
  if (e == "cofactor_stability") {
    out.report = cofactor_stability_sweep(grid, c.eps, c.cofactor_q, c.g0, opts);
  } else if (e == "sobolev_stability") {
    out.report = sobolev_stability_sweep(grid, c.eps, c.sobolev_gamma, c.g0, opts);
  } else if (e == "approximation") {
    const Vec2 o = c.domain.center;
    const auto psi = [o](const Vec2& p) {
      const Vec2 z = p - o;
      return z.x * z.x - z.y * z.y + 0.5 * z.x * z.y;
    };
    const auto f = sample_field(grid, source_function(c, SourceKind::zero));
    out.report = approximation_experiment(grid, c.eps, f, psi, c.inner_radius, opts);
  } else if (e == "convex_w21e") {
    out.report = convex_w21e_check(domain, c.spacing, c.eps.front(), c.gamma, opts);
  } else if (e == "contact_set") {
    out.report = contact_set_experiment(grid, c.eps, c.sigma, c.section_height, c.point, c.checks.small, opts);
  } else if (e == "w2p_ratio") {
    W2pSweepOptions sweep;
    sweep.sup_factor = c.checks.sup_factor;
    sweep.refinement_factor = c.checks.refinement_factor;
    sweep.scaling_tol = c.checks.scaling_tol;
    sweep.small_p = c.small_p;
    sweep.wide_eps = c.wide_eps;
    out.report = w2p_ratio_sweep(domain, c.spacing, c.eps, c.p, c.q, source_function(c, SourceKind::smooth), sweep,
                                 opts);
  } else if (e == "geometric_iteration") {
    out.report = geometric_iteration_experiment(grid, c.eps.front(), source_function(c, SourceKind::singular), c.M,
                                                c.q, static_cast<std::size_t>(c.levels), opts);
  } else {
    throw InvalidArgument("unknown experiment '" + e + "'");
  }
  return out;
}

std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  os.close();
  if (!os) throw IoError("failed writing " + path.string());
  return path;
}

void make_directory(const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<std::filesystem::path> write_outputs(const ExperimentOutput& o, const std::filesystem::path& dir)
{
  make_directory(dir);
  std::vector<std::filesystem::path> files;
  files.push_back(write_file(dir / "report.json", to_json(o.report).dump(2) + "\n"));
  {
    std::ostringstream os;
    write_sweep_csv(os, o.report);
    files.push_back(write_file(dir / (o.report.id + "_sweep.csv"), os.str()));
  }
  for (const auto& [name, values] : o.report.measured) {
    std::ostringstream os;
    write_plot_data(os, o.report, name);
    files.push_back(write_file(dir / (o.report.id + "_" + name + ".dat"), os.str()));
  }
  for (const auto& [name, text] : o.tables) files.push_back(write_file(dir / name, text));
  return files;
}

void log_report(std::ostream& log, const ExperimentReport& r)
{
  log << r.id << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << r.inequalities.size() << " checks, "
      << fmt(r.wall_seconds) << " s)\n";
  for (const auto* q : r.failures())
    log << "  failed: " << q->name << ": " << fmt(q->lhs) << ' ' << q->relation << ' ' << fmt(q->rhs)
        << " (tolerance " << fmt(q->tolerance) << ")\n";
}

struct Attempt
{
  int exit_code = exit_pass;
  std::optional<ExperimentReport> report;
  std::vector<std::filesystem::path> files;
  std::string error;
};

Attempt attempt(const ExperimentConfig& config, const std::filesystem::path& dir, std::ostream& log)
{
  Attempt a;
  try {
    auto o = run_experiment(config);
    a.files = write_outputs(o, dir);
    log_report(log, o.report);
    a.exit_code = o.report.passed() ? exit_pass : exit_assertion;
    a.report = std::move(o.report);
  } catch (const InvalidArgument& e) {
    a.exit_code = exit_config;
    a.error = e.what();
  } catch (const std::exception& e) {
    a.exit_code = exit_solver;
    a.error = e.what();
  }
  if (!a.error.empty()) log << config.experiment << ": error: " << a.error << '\n';
  return a;
}

} // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config)
{
  const auto t0 = Clock::now();
  if (config.eps.empty()) throw InvalidArgument("eps list is empty");
  const auto domain = ConvexDomain::build(config.domain);
  const auto grid = Grid::discretize(domain, config.spacing);
  const std::string& e = config.experiment;
  ExperimentOutput out;
  if (e == "solve_ma")
    out = solve_ma_experiment(config, grid);
  else if (e == "solve_lma")
    out = solve_lma_experiment(config, grid);
  else if (e == "sections")
    out = sections_experiment(config, grid);
  else if (e == "cover")
    out = cover_experiment(config, grid);
  else if (e == "maximal")
    out = maximal_experiment(config, domain);
  else if (e == "goodsets")
    out = goodsets_experiment(config, grid);
  else if (e == "barrier")
    out = barrier_experiment(config, grid);
  else if (e == "suite")
    throw InvalidArgument("suite is not a single experiment");
  else
    out = stability_experiment(config, domain, grid);
  auto j = config_json(config);
  j["instance"] = out.report.config;
  out.report.config = std::move(j);
  out.report.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

RunResult run(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log)
{
  RunResult result;
  if (config.experiment != "suite") {
    auto a = attempt(config, out, log);
    result.exit_code = a.exit_code;
    result.error = a.error;
    result.files = std::move(a.files);
    if (a.report) result.reports.push_back(std::move(*a.report));
    return result;
  }

  const auto t0 = Clock::now();
  nlohmann::ordered_json summary;
  auto& entries = summary["experiments"] = nlohmann::ordered_json::array();
  for (const auto& name : config.suite) {
    auto sub = config;
    sub.experiment = name;
    auto a = attempt(sub, out / name, log);
    result.exit_code = std::max(result.exit_code, a.exit_code);
    nlohmann::ordered_json e;
    e["experiment"] = name;
    e["exit_code"] = a.exit_code;
    e["passed"] = a.exit_code == exit_pass;
    if (a.report) {
      e["checks"] = a.report->inequalities.size();
      auto& failed = e["failed"] = nlohmann::ordered_json::array();
      for (const auto* q : a.report->failures()) failed.push_back(q->name);
      e["wall_seconds"] = a.report->wall_seconds;
      result.reports.push_back(std::move(*a.report));
    }
    if (!a.error.empty()) {
      e["error"] = a.error;
      if (result.error.empty()) result.error = name + ": " + a.error;
    }
    entries.push_back(std::move(e));
    result.files.insert(result.files.end(), a.files.begin(), a.files.end());
  }
  summary["passed"] = result.exit_code == exit_pass;
  summary["exit_code"] = result.exit_code;
  summary["wall_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  try {
    make_directory(out);
    result.files.push_back(write_file(out / "summary.json", summary.dump(2) + "\n"));
  } catch (const IoError& e) {
    result.exit_code = exit_solver;
    result.error = e.what();
    log << "suite: error: " << e.what() << '\n';
  }
  log << "suite: " << (result.exit_code == exit_pass ? "PASS" : "FAIL") << " (" << config.suite.size()
      << " experiments, " << fmt(summary["wall_seconds"].get<double>()) << " s)\n";
  return result;
}

std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli_out, const ExperimentConfig& config)
{
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (const char* env = std::getenv("MA_LAB_OUT"); env && *env) return env;
  return config.out;
}

} // namespace malab
