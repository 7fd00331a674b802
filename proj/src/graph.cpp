#include "fairalloc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace fairalloc {

int InterferenceGraph::self_slot(std::size_t i) const {
  const auto& nb = neighbors[i];
  for (std::size_t s = 0; s < nb.size(); ++s) {
    if (nb[s] == static_cast<int>(i)) return static_cast<int>(s);
  }
  return -1;
}

void InterferenceGraph::validate() const {
  const std::size_t n = neighbors.size();
  if (sims.size() != n) throw std::invalid_argument("graph: sims/neighbors size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (neighbors[i].size() != sims[i].size())
      throw std::invalid_argument("graph: ragged neighbor/similarity lists");
    if (neighbors[i].size() > static_cast<std::size_t>(k))
      throw std::invalid_argument("graph: neighbor list longer than k");
    std::unordered_set<int> seen;
    for (std::size_t s = 0; s < neighbors[i].size(); ++s) {
      int j = neighbors[i][s];
      if (j < 0 || static_cast<std::size_t>(j) >= n)
        throw std::invalid_argument("graph: neighbor index out of range");
      if (!seen.insert(j).second)
        throw std::invalid_argument("graph: duplicate neighbor in one list");
      double s_ij = sims[i][s];
      if (!std::isfinite(s_ij) || s_ij < 0.0)
        throw std::invalid_argument("graph: similarity must be finite and >= 0");
    }
    if (include_self && seen.find(static_cast<int>(i)) == seen.end())
      throw std::invalid_argument("graph: include_self set but self missing from N(i)");
  }
}

InterferenceGraph build_knn_graph(const std::vector<Unit>& units, const KnnOptions& opts) {
  const std::size_t n = units.size();
  if (opts.k <= 0) throw std::invalid_argument("build_knn_graph: k must be positive");
  const std::size_t candidates = opts.include_self ? n : (n > 0 ? n - 1 : 0);
  if (static_cast<std::size_t>(opts.k) > candidates)
    throw std::invalid_argument("build_knn_graph: k exceeds available neighbor count");
  for (const auto& u : units) {
    if (!u.coords) throw std::invalid_argument("build_knn_graph: unit '" + u.id + "' has no coordinates");
  }

  InterferenceGraph g;
  g.k = opts.k;
  g.include_self = opts.include_self;
  g.neighbors.resize(n);
  g.sims.resize(n);

  std::vector<std::vector<double>> dist(n);  // aligned with g.neighbors
  double max_finite_sim = 0.0;

  std::vector<std::pair<double, int>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    const auto& ci = *units[i].coords;
    for (std::size_t j = 0; j < n; ++j) {
      if (!opts.include_self && j == i) continue;
      const auto& cj = *units[j].coords;
      const double dx = ci[0] - cj[0];
      const double dy = ci[1] - cj[1];
      cand.emplace_back(std::sqrt(dx * dx + dy * dy), static_cast<int>(j));
    }
    // nearest first; distance ties break toward the lower unit index
    std::sort(cand.begin(), cand.end());
    cand.resize(static_cast<std::size_t>(opts.k));
    for (const auto& [d, j] : cand) {
      g.neighbors[i].push_back(j);
      dist[i].push_back(d);
      if (d > 0.0) max_finite_sim = std::max(max_finite_sim, 1.0 / d);
    }
  }

  // Zero-distance pairs (self, duplicate coordinates) dominate every finite
  // similarity; 1.0 is the fallback when no finite similarity exists at all.
  double s_cap = opts.zero_distance_similarity
                     ? *opts.zero_distance_similarity
                     : (max_finite_sim > 0.0 ? 2.0 * max_finite_sim : 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    g.sims[i].reserve(dist[i].size());
    for (double d : dist[i]) g.sims[i].push_back(d > 0.0 ? 1.0 / d : s_cap);
  }
  return g;
}

NeighborPattern neighbor_pattern(const InterferenceGraph& g, const std::vector<std::uint8_t>& z,
                                 std::size_t i) {
  if (z.size() != g.unit_count())
    throw std::invalid_argument("neighbor_pattern: z length != unit count");
  NeighborPattern p;
  const auto& nb = g.neighbors[i];
  p.bits.resize(nb.size());
  for (std::size_t s = 0; s < nb.size(); ++s) p.bits[s] = z[static_cast<std::size_t>(nb[s])];
  return p;
}

}  // namespace fairalloc
