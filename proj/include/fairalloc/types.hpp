#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fairalloc {

/// Ordered domain of the protected attribute (group labels).
struct GroupDomain {
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }

  /// Index of `label`, or -1 if absent.
  int index_of(const std::string& label) const;

  /// Throws std::invalid_argument unless there are >= 2 distinct labels.
  void validate() const;
};

/// One individual (a school, a person, ...).
struct Unit {
  std::string id;
  int group = 0;                 // index into the problem's GroupDomain
  std::vector<double> features;
  std::vector<bool> prec_mask;   // marks the features the restricted model may use
  std::optional<std::array<double, 2>> coords;

  void validate(std::size_t group_count) const;
};

/// Intervention bits of one unit's neighbors, in stored neighbor order.
struct NeighborPattern {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
};

/// Rank of a pattern in the lexicographic enumeration of all same-length
/// patterns (slot 0 is the most significant bit; all-zeros ranks 0).
std::size_t pattern_rank(const NeighborPattern& p);

/// Inverse of pattern_rank for patterns of length `len`.
NeighborPattern pattern_from_rank(std::size_t rank, std::size_t len);

/// Per-group coefficients of the max-interference structural equation.
struct SEMParamsByGroup {
  std::vector<double> alpha;  // own/nearby funded-class effect
  std::vector<double> beta;   // nearby AP/IB effect
  std::vector<double> gamma;  // counselor effect
  std::vector<double> theta;  // intercept

  std::size_t group_count() const { return alpha.size(); }

  /// Throws unless all four arrays share one length and are finite.
  void validate() const;
};

}  // namespace fairalloc
