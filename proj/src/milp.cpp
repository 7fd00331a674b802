#include "fairalloc/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace fairalloc {

PatternMatrix enumerate_patterns(int k) {
  if (k <= 0) throw std::invalid_argument("enumerate_patterns: k must be positive");
  if (k > kMaxPatternBits)
    throw std::invalid_argument("enumerate_patterns: k exceeds the cap of " +
                                std::to_string(kMaxPatternBits));
  PatternMatrix m;
  m.k = k;
  const std::size_t count = std::size_t{1} << k;
  m.rows.reserve(count);
  for (std::size_t r = 0; r < count; ++r) m.rows.push_back(pattern_from_rank(r, static_cast<std::size_t>(k)));
  return m;
}

std::pair<std::size_t, int> MilpProgram::h_location(std::size_t var) const {
  if (var < n_z || var >= var_count()) throw std::out_of_range("h_location: not an h variable");
  // h_offset is increasing; find the owning unit.
  auto it = std::upper_bound(h_offset.begin(), h_offset.end(), var);
  const std::size_t unit = static_cast<std::size_t>(it - h_offset.begin()) - 1;
  return {unit, static_cast<int>(var - h_offset[unit])};
}

std::string MilpProgram::var_name(std::size_t var) const {
  if (is_z(var)) return "z_" + unit_ids[var];
  auto [unit, pattern] = h_location(var);
  return "h_" + unit_ids[unit] + "_" + std::to_string(pattern);
}

std::string MilpProgram::row_name(const MilpRow& row) const {
  switch (row.kind) {
    case RowKind::kLink:
      return "link_" + unit_ids[static_cast<std::size_t>(row.unit)] + "_" +
             std::to_string(row.pattern) + "_" + std::to_string(row.aux);
    case RowKind::kOneHot:
      return "onehot_" + unit_ids[static_cast<std::size_t>(row.unit)];
    case RowKind::kBudget:
      return "budget";
    case RowKind::kPrivilege:
      return "priv_" + unit_ids[static_cast<std::size_t>(row.unit)] + "_" +
             std::to_string(row.aux);
  }
  return "row";
}

MilpProgram encode(const AllocationProblem& problem) {
  const std::size_t n = problem.size();
  const std::size_t n_groups = problem.groups.size();

  MilpProgram prog;
  prog.n_z = n;
  prog.tau = problem.tau;
  prog.h_offset.resize(n);
  prog.pattern_count.resize(n);
  prog.unit_ids.reserve(n);
  for (const auto& u : problem.units) prog.unit_ids.push_back(u.id);

  std::size_t next = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto degree = problem.graph.degree(i);
    if (degree > static_cast<std::size_t>(kMaxPatternBits))
      throw std::invalid_argument("encode: |N(i)| exceeds the pattern cap for unit " +
                                  problem.units[i].id);
    prog.h_offset[i] = next;
    prog.pattern_count[i] = degree == 0 ? 1 : (1 << degree);
    next += static_cast<std::size_t>(prog.pattern_count[i]);
  }
  prog.n_h = next - n;
  prog.objective.assign(prog.var_count(), 0.0);

  const bool with_privilege = std::isfinite(problem.tau);

  for (std::size_t i = 0; i < n; ++i) {
    const auto degree = problem.graph.degree(i);
    const int n_pat = prog.pattern_count[i];
    const int a_i = problem.units[i].group;

    MilpRow onehot;
    onehot.kind = RowKind::kOneHot;
    onehot.unit = static_cast<int>(i);
    onehot.sense = RowSense::kEqual;
    onehot.rhs = 1.0;

    std::vector<MilpRow> privilege;
    if (with_privilege) {
      for (std::size_t a = 0; a < n_groups; ++a) {
        if (static_cast<int>(a) == a_i) continue;  // identically 0 <= tau
        MilpRow row;
        row.kind = RowKind::kPrivilege;
        row.unit = static_cast<int>(i);
        row.aux = static_cast<int>(a);
        row.sense = RowSense::kLessEqual;
        row.rhs = problem.tau;
        privilege.push_back(std::move(row));
      }
    }

    for (int j = 0; j < n_pat; ++j) {
      const auto h_var = static_cast<int>(prog.h_index(i, j));
      const NeighborPattern pat = pattern_from_rank(static_cast<std::size_t>(j), degree);

      prog.objective[static_cast<std::size_t>(h_var)] =
          problem.objective_model->expected_outcome(problem.units, i, a_i, pat, problem.graph);

      onehot.terms.emplace_back(h_var, 1.0);

      std::size_t priv_idx = 0;
      for (std::size_t a = 0; a < n_groups && with_privilege; ++a) {
        if (static_cast<int>(a) == a_i) continue;
        const double gap = privilege_gap(problem, i, static_cast<int>(a), pat);
        privilege[priv_idx].terms.emplace_back(h_var, gap);
        ++priv_idx;
      }

      // Linking rows: h_{i,j} <= z_l on active slots, h_{i,j} <= 1 - z_l
      // on inactive ones.
      for (std::size_t s = 0; s < degree; ++s) {
        const int z_var = problem.graph.neighbors[i][s];
        MilpRow link;
        link.kind = RowKind::kLink;
        link.unit = static_cast<int>(i);
        link.pattern = j;
        link.aux = static_cast<int>(s);
        link.sense = RowSense::kLessEqual;
        if (pat.bits[s]) {
          link.terms = {{h_var, 1.0}, {z_var, -1.0}};
          link.rhs = 0.0;
        } else {
          link.terms = {{h_var, 1.0}, {z_var, 1.0}};
          link.rhs = 1.0;
        }
        prog.rows.push_back(std::move(link));
      }
    }

    prog.rows.push_back(std::move(onehot));
    for (auto& row : privilege) prog.rows.push_back(std::move(row));
  }

  MilpRow budget;
  budget.kind = RowKind::kBudget;
  budget.sense = RowSense::kLessEqual;
  budget.rhs = static_cast<double>(problem.budget);
  for (std::size_t i = 0; i < n; ++i) budget.terms.emplace_back(static_cast<int>(i), 1.0);
  prog.rows.push_back(std::move(budget));

  return prog;
}

DecodedPoint decode(const MilpProgram& program, const std::vector<double>& values) {
  if (values.size() != program.var_count())
    throw std::invalid_argument("decode: value vector has wrong length");

  constexpr double kIntegralityTol = 1e-6;
  std::vector<std::uint8_t> bits(values.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    const double x = values[v];
    if (std::abs(x) <= kIntegralityTol)
      bits[v] = 0;
    else if (std::abs(x - 1.0) <= kIntegralityTol)
      bits[v] = 1;
    else
      throw std::invalid_argument("decode: non-integral value for " + program.var_name(v));
  }

  DecodedPoint point;
  point.z.assign(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(program.n_z));
  point.h.resize(program.n_z);
  for (std::size_t i = 0; i < program.n_z; ++i) {
    point.h[i].resize(static_cast<std::size_t>(program.pattern_count[i]));
    int ones = 0;
    for (int j = 0; j < program.pattern_count[i]; ++j) {
      point.h[i][static_cast<std::size_t>(j)] = bits[program.h_index(i, j)];
      ones += bits[program.h_index(i, j)];
    }
    if (ones != 1)
      throw std::invalid_argument("decode: one-hot row violated for unit " + program.unit_ids[i]);
  }

  for (const auto& row : program.rows) {
    if (row.kind != RowKind::kLink) continue;
    double lhs = 0.0;
    for (const auto& [v, c] : row.terms) lhs += c * (bits[static_cast<std::size_t>(v)] ? 1.0 : 0.0);
    if (lhs > row.rhs + kFeasibilityTol)
      throw std::invalid_argument("decode: inconsistent H, violated " + program.row_name(row));
  }
  return point;
}

double objective_at(const MilpProgram& program, const InterferenceGraph& graph,
                    const std::vector<std::uint8_t>& z) {
  if (z.size() != program.n_z) throw std::invalid_argument("objective_at: z length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < program.n_z; ++i) {
    const NeighborPattern pat = neighbor_pattern(graph, z, i);
    const auto j = static_cast<int>(pattern_rank(pat));
    total += program.objective[program.h_index(i, j)];
  }
  return total;
}

void export_text(const MilpProgram& program, std::ostream& out) {
  char buf[64];
  auto coef = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };

  out << "MAXIMIZE\n";
  bool first = true;
  for (std::size_t v = 0; v < program.var_count(); ++v) {
    if (program.objective[v] == 0.0) continue;
    if (!first) out << ' ';
    out << coef(program.objective[v]) << ' ' << program.var_name(v);
    first = false;
  }
  out << '\n';
  for (const auto& row : program.rows) {
    out << program.row_name(row) << ':';
    for (const auto& [v, c] : row.terms)
      out << ' ' << coef(c) << ' ' << program.var_name(static_cast<std::size_t>(v));
    out << (row.sense == RowSense::kLessEqual ? " <= " : " = ") << coef(row.rhs) << '\n';
  }
  out << "BINARY";
  for (std::size_t v = 0; v < program.var_count(); ++v) out << ' ' << program.var_name(v);
  out << '\n';
}

}  // namespace fairalloc
