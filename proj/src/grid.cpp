#include "malab/grid.hpp"

#include "malab/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace malab {

namespace {
constexpr int kWeightSubsamples = 8;
}

std::shared_ptr<const Grid> Grid::discretize(const ConvexDomain& domain, double spacing)
{
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw InvalidArgument("grid spacing must be positive");
  std::shared_ptr<Grid> g(new Grid());
  g->domain_ = domain;
  g->h_ = spacing;
  const Box bb = domain.bounding_box();
  const long i0 = static_cast<long>(std::floor(bb.lo.x / spacing)) - 1;
  const long j0 = static_cast<long>(std::floor(bb.lo.y / spacing)) - 1;
  const long i1 = static_cast<long>(std::ceil(bb.hi.x / spacing)) + 1;
  const long j1 = static_cast<long>(std::ceil(bb.hi.y / spacing)) + 1;
  const long nx = i1 - i0 + 1, ny = j1 - j0 + 1;
  if (nx * ny > 40'000'000L) throw InvalidArgument("grid too fine for the domain");
  g->nx_ = static_cast<int>(nx);
  g->ny_ = static_cast<int>(ny);
  g->origin_ = {static_cast<double>(i0) * spacing, static_cast<double>(j0) * spacing};

  const std::size_t n = static_cast<std::size_t>(nx * ny);
  std::vector<std::uint8_t> in(n, 0);
  const double slack = 1e-10 * spacing;
  for (std::size_t k = 0; k < n; ++k) in[k] = domain.contains(g->coords(k), slack) ? 1 : 0;

  g->kinds_.assign(n, NodeKind::exterior);
  g->weights_.assign(n, 0.0);
  for (int j = 0; j < g->ny_; ++j) {
    for (int i = 0; i < g->nx_; ++i) {
      const std::size_t k = g->index(i, j);
      if (!in[k]) continue;
      bool all = true;
      for (int dj = -1; dj <= 1 && all; ++dj)
        for (int di = -1; di <= 1 && all; ++di)
          if (!g->in_range(i + di, j + dj) || !in[g->index(i + di, j + dj)]) all = false;
      g->kinds_[k] = all ? NodeKind::interior : NodeKind::boundary_adjacent;
    }
  }

  // cell-area fractions by midpoint subsampling of the node's cell
  for (std::size_t k = 0; k < n; ++k) {
    if (g->kinds_[k] == NodeKind::exterior) continue;
    g->inside_nodes_.push_back(k);
    if (g->kinds_[k] == NodeKind::interior) {
      g->interior_nodes_.push_back(k);
      g->weights_[k] = g->cell_area();
      continue;
    }
    const Vec2 c = g->coords(k);
    int hits = 0;
    for (int b = 0; b < kWeightSubsamples; ++b)
      for (int a = 0; a < kWeightSubsamples; ++a) {
        const Vec2 p{c.x + spacing * ((a + 0.5) / kWeightSubsamples - 0.5),
                     c.y + spacing * ((b + 0.5) / kWeightSubsamples - 0.5)};
        if (domain.contains(p, slack)) ++hits;
      }
    g->weights_[k] = g->cell_area() * hits / (kWeightSubsamples * kWeightSubsamples);
  }

  if (g->interior_nodes_.size() < 16) {
    std::ostringstream os;
    os << "grid spacing " << spacing << " too coarse: " << g->interior_nodes_.size()
       << " interior nodes (need at least 16)";
    throw InvalidArgument(os.str());
  }
  return g;
}

std::size_t Grid::count(NodeKind kind) const
{
  std::size_t c = 0;
  for (auto k : kinds_) c += (k == kind);
  return c;
}

NodeMask Grid::mask(NodeKind kind) const
{
  NodeMask m(size(), 0);
  for (std::size_t k = 0; k < size(); ++k) m[k] = kinds_[k] == kind;
  return m;
}

NodeMask Grid::inside_mask() const
{
  NodeMask m(size(), 0);
  for (std::size_t k = 0; k < size(); ++k) m[k] = inside(k);
  return m;
}

std::size_t Grid::nearest_inside(const Vec2& p) const
{
  const int ic = static_cast<int>(std::lround((p.x - origin_.x) / h_));
  const int jc = static_cast<int>(std::lround((p.y - origin_.y) / h_));
  std::size_t best = size();
  double best_d = std::numeric_limits<double>::infinity();
  for (int dj = -2; dj <= 2; ++dj)
    for (int di = -2; di <= 2; ++di) {
      const int i = ic + di, j = jc + dj;
      if (!inside(i, j)) continue;
      const double d = norm2(coords(i, j) - p);
      if (d < best_d) {
        best_d = d;
        best = index(i, j);
      }
    }
  return best;
}

} // namespace malab
