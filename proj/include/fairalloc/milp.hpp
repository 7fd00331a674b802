#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fairalloc/model.hpp"

namespace fairalloc {

/// All K-length binary neighbor-intervention vectors, lexicographic order.
struct PatternMatrix {
  int k = 0;
  std::vector<NeighborPattern> rows;  // rows.size() == 2^k
};

/// Hard cap on the neighborhood size; variable count grows as n * 2^K.
inline constexpr int kMaxPatternBits = 12;

PatternMatrix enumerate_patterns(int k);

enum class RowSense : std::uint8_t { kLessEqual, kEqual };
enum class RowKind : std::uint8_t { kLink, kOneHot, kBudget, kPrivilege };

struct MilpRow {
  RowKind kind;
  int unit = -1;     // owning unit (kLink, kOneHot, kPrivilege)
  int pattern = -1;  // pattern rank (kLink)
  int aux = -1;      // neighbor slot (kLink) or counterfactual group (kPrivilege)
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

/// The exact mixed-integer linear program for an AllocationProblem:
/// maximize sum_{i,j} h_{i,j} E[Y_i(e_j)] subject to linking, one-hot,
/// budget and privilege rows; all variables binary. Variables are laid out
/// z_0..z_{n-1} followed by per-unit blocks of h variables. Units with
/// |N(i)| < K get 2^{|N(i)|} patterns instead of 2^K.
struct MilpProgram {
  std::size_t n_z = 0;
  std::size_t n_h = 0;
  std::vector<double> objective;          // per variable, maximize; z entries are 0
  std::vector<MilpRow> rows;
  std::vector<std::size_t> h_offset;      // per unit, index of its first h variable
  std::vector<int> pattern_count;         // per unit, 2^{|N(i)|}
  std::vector<std::string> unit_ids;
  double tau = 0.0;                       // rhs of the privilege rows (+inf: none emitted)

  std::size_t var_count() const { return n_z + n_h; }
  std::size_t z_index(std::size_t unit) const { return unit; }
  std::size_t h_index(std::size_t unit, int pattern) const {
    return h_offset[unit] + static_cast<std::size_t>(pattern);
  }
  bool is_z(std::size_t var) const { return var < n_z; }
  /// (unit, pattern rank) of an h variable.
  std::pair<std::size_t, int> h_location(std::size_t var) const;

  std::string var_name(std::size_t var) const;
  std::string row_name(const MilpRow& row) const;
};

MilpProgram encode(const AllocationProblem& problem);

struct DecodedPoint {
  std::vector<std::uint8_t> z;
  std::vector<std::vector<std::uint8_t>> h;  // per unit, one-hot over its patterns
};

/// Rounds solver values to exact binaries and verifies the linking and
/// one-hot rows hold. Throws on non-integral values or an inconsistent H.
DecodedPoint decode(const MilpProgram& program, const std::vector<double>& values);

/// Objective value of the program at a binary allocation, using the H
/// implied by z. Sums per-unit coefficients in unit order.
double objective_at(const MilpProgram& program, const InterferenceGraph& graph,
                    const std::vector<std::uint8_t>& z);

/// Plain-text export for cross-checking against external solvers.
void export_text(const MilpProgram& program, std::ostream& out);

}  // namespace fairalloc
