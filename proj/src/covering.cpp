#include "malab/covering.hpp"

#include "malab/errors.hpp"
#include "malab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace malab {

namespace {

std::vector<std::size_t> by_decreasing(const std::vector<double>& key)
{
  std::vector<std::size_t> order(key.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return key[a] > key[b]; });
  return order;
}

double mask_measure(const Grid& g, const std::vector<std::size_t>& nodes)
{
  double m = 0.0;
  for (auto k : nodes) m += g.weight(k);
  return m;
}

} // namespace

CoveringResult vitali_cover(const PotentialField& potential, const std::vector<std::size_t>& region,
                            const VitaliOptions& options)
{
  const Grid& g = *potential.grid;
  if (region.empty()) throw InvalidArgument("covering region is empty");
  if (!(options.delta0 > 0.0) || !(options.delta_min > 0.0) || options.delta_min > options.delta0)
    throw InvalidArgument("need 0 < delta_min <= delta0");
  std::vector<double> hbar(region.size());
  for (auto k : region)
    if (k >= g.size() || !g.inside(k)) {
      std::ostringstream os;
      os << "covering region node " << k << " is not inside the domain";
      throw InvalidArgument(os.str());
    }
  parallel_for(region.size(), [&](std::size_t i) { hbar[i] = maximal_height(potential, region[i]).height; });
  for (std::size_t i = 0; i < region.size(); ++i)
    if (!(hbar[i] > 0.0)) {
      std::ostringstream os;
      os << "covering region node " << region[i] << " at (" << g.coords(region[i]).x << ", "
         << g.coords(region[i]).y << ") has no positive maximal height";
      throw InvalidArgument(os.str());
    }
  const auto order = by_decreasing(hbar);

  CoveringResult r;
  r.region_measure = mask_measure(g, region);
  for (double delta = options.delta0; delta >= options.delta_min * (1 - 1e-12); delta *= 0.5) {
    ++r.attempts;
    r.delta0 = delta;
    r.centers.clear();
    r.heights.clear();
    NodeMask core(g.size(), 0);
    for (auto i : order) {
      const auto cells = section_cells(potential, node_anchor(potential, region[i]), delta * hbar[i]);
      if (std::any_of(cells.begin(), cells.end(), [&](auto k) { return core[k] != 0; })) continue;
      for (auto k : cells) core[k] = 1;
      r.centers.push_back(region[i]);
      r.heights.push_back(hbar[i]);
    }
    NodeMask cover(g.size(), 0);
    for (std::size_t s = 0; s < r.centers.size(); ++s)
      for (auto k : section_cells(potential, node_anchor(potential, r.centers[s]), 0.5 * r.heights[s])) cover[k] = 1;
    r.uncovered = 0;
    r.coverage_defect = 0.0;
    for (auto k : region)
      if (!cover[k]) {
        ++r.uncovered;
        r.coverage_defect += g.weight(k);
      }
    r.union_measure = 0.0;
    for (auto k : g.inside_nodes())
      if (cover[k]) r.union_measure += g.weight(k);
    if (r.uncovered == 0) break;
  }
  r.disjointness_violations = count_core_overlaps(potential, r);
  return r;
}

std::size_t count_core_overlaps(const PotentialField& potential, const CoveringResult& result)
{
  std::vector<std::uint32_t> claims(potential.grid->size(), 0);
  for (std::size_t s = 0; s < result.centers.size(); ++s)
    for (auto k : section_cells(potential, node_anchor(potential, result.centers[s]), result.delta0 * result.heights[s]))
      ++claims[k];
  return static_cast<std::size_t>(std::count_if(claims.begin(), claims.end(), [](auto c) { return c > 1; }));
}

void write_covering_csv(std::ostream& os, const PotentialField& potential, const CoveringResult& result)
{
  os << "x,y,hbar,delta0\n";
  os.precision(17);
  for (std::size_t s = 0; s < result.centers.size(); ++s) {
    const Vec2 p = potential.grid->coords(result.centers[s]);
    os << p.x << ',' << p.y << ',' << result.heights[s] << ',' << result.delta0 << '\n';
  }
}

std::vector<DensityHeight> density_heights(const PotentialField& potential, const std::vector<std::size_t>& set,
                                           double eps, double t_max)
{
  const Grid& g = *potential.grid;
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("density target must lie in (0, 1]");
  const NodeMask member = to_mask(g, set);
  std::vector<DensityHeight> out(set.size());
  parallel_for(set.size(), [&](std::size_t i) {
    const auto nest = nested_sections(potential, set[i], t_max);
    DensityHeight best{set[i], t_max, 0.0};
    double best_miss = kInfinity;
    double in = 0.0, all = 0.0;
    const std::size_t n = nest.nodes.size();
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t k = nest.nodes[c];
      all += g.weight(k);
      if (member[k]) in += g.weight(k);
      // prefix c + 1 is a section only where the level strictly increases
      if (c + 1 < n && !(nest.level[c + 1] > nest.level[c])) continue;
      if (c + 1 < 8 || !(all > 0.0)) continue;
      const double d = in / all;
      if (std::abs(d - eps) < best_miss) {
        best_miss = std::abs(d - eps);
        best = {set[i], c + 1 < n ? nest.level[c + 1] : t_max, d};
      }
    }
    out[i] = best;
  });
  return out;
}

CoveringVerification verify_covering(const PotentialField& potential, const std::vector<std::size_t>& set,
                                     const std::vector<DensityHeight>& family, double eps,
                                     const std::vector<std::size_t>& must_cover)
{
  const Grid& g = *potential.grid;
  NodeMask un(g.size(), 0);
  for (const auto& s : family)
    for (auto k : section_cells(potential, node_anchor(potential, s.node), s.t)) un[k] = 1;
  CoveringVerification v;
  v.set_measure = mask_measure(g, set);
  for (auto k : g.inside_nodes()) {
    if (!un[k]) continue;
    v.union_measure += g.weight(k);
    const int i = g.col(k), j = g.row(k);
    bool edge = false;
    for (int dj = -2; dj <= 2 && !edge; ++dj)
      for (int di = -2; di <= 2 && !edge; ++di)
        if (g.inside(i + di, j + dj) && !un[g.index(i + di, j + dj)]) edge = true;
    if (edge) v.slack += g.weight(k);
  }
  for (auto k : must_cover)
    if (!un[k]) ++v.uncovered;
  v.covered = v.uncovered == 0;
  v.ratio = v.union_measure > 0.0 ? v.set_measure / v.union_measure : kInfinity;
  v.bound_holds = v.set_measure <= std::sqrt(eps) * v.union_measure + v.slack;
  return v;
}

CoveringSelection covering_select(const PotentialField& potential, const std::vector<std::size_t>& set,
                                  const std::vector<DensityHeight>& heights, double eps)
{
  const Grid& g = *potential.grid;
  if (set.empty()) throw InvalidArgument("covering set is empty");
  CoveringSelection out;
  std::vector<DensityHeight> admitted;
  for (const auto& h : heights) {
    if (h.density >= 0.9 * eps && h.density <= 1.1 * eps)
      admitted.push_back(h);
    else
      out.rejected.push_back(h);
  }
  std::vector<double> key(admitted.size());
  for (std::size_t i = 0; i < admitted.size(); ++i) key[i] = admitted[i].t;
  NodeMask covered(g.size(), 0);
  for (auto i : by_decreasing(key)) {
    if (covered[admitted[i].node]) continue;
    out.selected.push_back(admitted[i]);
    for (auto k : section_cells(potential, node_anchor(potential, admitted[i].node), admitted[i].t)) covered[k] = 1;
  }
  std::vector<std::size_t> must;
  for (const auto& a : admitted) must.push_back(a.node);
  out.verification = verify_covering(potential, set, out.selected, eps, must);
  return out;
}

std::vector<double> maximal_function_heights(const PotentialField& potential, std::size_t node, double c_cap)
{
  const auto nest = nested_sections(potential, node, c_cap);
  if (nest.nodes.size() < 8) return {c_cap};
  const double t_min = std::nextafter(nest.level[7], kInfinity);
  if (!(t_min < c_cap)) return {c_cap};
  std::vector<double> t(12);
  for (int i = 0; i < 12; ++i) t[i] = t_min * std::pow(c_cap / t_min, i / 11.0);
  t.back() = c_cap;
  return t;
}

ScalarField maximal_function(const PotentialField& potential, const ScalarField& f, double c_cap)
{
  const Grid& g = *potential.grid;
  if (!(c_cap > 0.0)) throw InvalidArgument("maximal function height cap must be positive");
  ScalarField m(potential.grid, std::numeric_limits<double>::quiet_NaN());
  const auto& nodes = g.inside_nodes();
  parallel_for(nodes.size(), [&](std::size_t i) {
    const std::size_t x = nodes[i];
    const auto nest = nested_sections(potential, x, c_cap);
    std::vector<double> num(nest.nodes.size() + 1, 0.0), den(nest.nodes.size() + 1, 0.0);
    for (std::size_t c = 0; c < nest.nodes.size(); ++c) {
      const std::size_t k = nest.nodes[c];
      num[c + 1] = num[c] + g.weight(k) * std::abs(f[k]);
      den[c + 1] = den[c] + g.weight(k);
    }
    double best = 0.0;
    for (double t : maximal_function_heights(potential, x, c_cap)) {
      const std::size_t n = nest.count_below(t);
      if (den[n] > 0.0) best = std::max(best, num[n] / den[n]);
    }
    m[x] = best;
  });
  return m;
}

double section_average(const PotentialField& potential, const ScalarField& f, std::size_t node, double t)
{
  const Grid& g = *potential.grid;
  double num = 0.0, den = 0.0;
  for (auto k : section_cells(potential, node_anchor(potential, node), t)) {
    num += g.weight(k) * std::abs(f[k]);
    den += g.weight(k);
  }
  return den > 0.0 ? num / den : 0.0;
}

StrongTypeReport strong_type_ratio(const PotentialField& potential, const ScalarField& f, double p, double c_cap)
{
  if (!(p > 1.0)) throw InvalidArgument("strong-type exponent must exceed 1");
  StrongTypeReport r;
  r.p = p;
  r.f_norm = lp_norm(f, p);
  if (!(r.f_norm > 0.0)) throw InvalidArgument("strong-type ratio needs a nonzero f");
  r.maximal_norm = lp_norm(maximal_function(potential, f, c_cap), p);
  r.ratio = r.maximal_norm / r.f_norm;
  return r;
}

} // namespace malab
