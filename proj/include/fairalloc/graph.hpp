#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairalloc/types.hpp"

namespace fairalloc {

/// Neighbor structure N(i) plus similarities s(i,j) that define interference.
/// Immutable after build; concurrent reads are safe.
struct InterferenceGraph {
  std::vector<std::vector<int>> neighbors;  // N(i), nearest first
  std::vector<std::vector<double>> sims;    // s(i, N(i)[k]), aligned with neighbors
  int k = 0;                                // neighborhood size bound K
  bool include_self = true;

  std::size_t unit_count() const { return neighbors.size(); }
  std::size_t degree(std::size_t i) const { return neighbors[i].size(); }

  /// Slot of unit i in its own neighbor list, or -1.
  int self_slot(std::size_t i) const;

  void validate() const;
};

struct KnnOptions {
  int k = 5;
  bool include_self = true;
  // Similarity assigned to zero-distance pairs (self, exact duplicates).
  // Unset means 2x the largest finite similarity in the built graph.
  std::optional<double> zero_distance_similarity;
};

/// k-nearest-neighbor graph by Euclidean distance on unit coordinates,
/// s(i,j) = 1/distance. Ties at the k-th neighbor break toward the lower
/// unit index. Every unit must carry coordinates.
InterferenceGraph build_knn_graph(const std::vector<Unit>& units, const KnnOptions& opts);

/// Extracts z_{N(i)} from a global allocation vector.
NeighborPattern neighbor_pattern(const InterferenceGraph& g, const std::vector<std::uint8_t>& z,
                                 std::size_t i);

}  // namespace fairalloc
