#include "fairalloc/solver.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "fairalloc/simplex.hpp"

namespace fairalloc {

namespace {

constexpr double kTieTol = 1e-9;  // objective ties resolved lexicographically

const double kNegInf = -std::numeric_limits<double>::infinity();
const double kPosInf = std::numeric_limits<double>::infinity();

bool lex_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// LP relaxation of a MilpProgram with lazily activated <= rows. Equality
/// rows and the budget row stay active from the start; linking and privilege
/// rows join the working set when the current LP point violates them, which
/// keeps the basis small on large instances without changing the optimum.
class RelaxationSolver {
 public:
  explicit RelaxationSolver(const MilpProgram& prog)
      : prog_(prog), simplex_(prog.objective), row_active_(prog.rows.size(), 0) {
    // Neighbor z variable per (unit, slot), recovered from the linking rows.
    slot_z_.resize(prog.n_z);
    degree_.resize(prog.n_z);
    for (std::size_t i = 0; i < prog_.n_z; ++i) {
      const auto count = static_cast<unsigned>(prog_.pattern_count[i]);
      degree_[i] = std::countr_zero(count);
      slot_z_[i].assign(static_cast<std::size_t>(degree_[i]), -1);
    }
    for (const auto& row : prog_.rows) {
      if (row.kind != RowKind::kLink) continue;
      for (const auto& [var, coef] : row.terms) {
        if (static_cast<std::size_t>(var) < prog_.n_z)
          slot_z_[static_cast<std::size_t>(row.unit)][static_cast<std::size_t>(row.aux)] = var;
      }
    }
    for (std::size_t r = 0; r < prog_.rows.size(); ++r) {
      const auto kind = prog_.rows[r].kind;
      if (kind == RowKind::kOneHot || kind == RowKind::kBudget) activate(r);
    }
  }

  /// z_fixed: one entry per z variable, -1 free / 0 / 1. h bounds follow by
  /// propagation; explicit h fixings (public solve_lp) are applied on top.
  lp::Status solve(const std::vector<std::int8_t>& z_fixed,
                   const std::vector<std::pair<std::size_t, std::uint8_t>>& h_fixed = {}) {
    for (std::size_t i = 0; i < prog_.n_z; ++i) {
      if (z_fixed[i] < 0)
        simplex_.set_bounds(static_cast<int>(i), 0.0, 1.0);
      else
        simplex_.set_bounds(static_cast<int>(i), z_fixed[i], z_fixed[i]);
    }
    for (std::size_t i = 0; i < prog_.n_z; ++i) {
      const int deg = degree_[i];
      for (int j = 0; j < prog_.pattern_count[i]; ++j) {
        bool consistent = true;
        bool all_fixed = true;
        for (int s = 0; s < deg; ++s) {
          const int zv = slot_z_[i][static_cast<std::size_t>(s)];
          const std::int8_t f = z_fixed[static_cast<std::size_t>(zv)];
          const int bit = (j >> (deg - 1 - s)) & 1;
          if (f < 0)
            all_fixed = false;
          else if (f != bit) {
            consistent = false;
            break;
          }
        }
        const auto h = static_cast<int>(prog_.h_index(i, j));
        if (!consistent)
          simplex_.set_bounds(h, 0.0, 0.0);
        else if (all_fixed)
          simplex_.set_bounds(h, 1.0, 1.0);
        else
          simplex_.set_bounds(h, 0.0, 1.0);
      }
    }
    for (const auto& [var, value] : h_fixed) {
      const auto v = static_cast<int>(var);
      if (simplex_.lower(v) > value || simplex_.upper(v) < value) return lp::Status::kInfeasible;
      simplex_.set_bounds(v, value, value);
    }

    while (true) {
      const lp::Status st = simplex_.solve();
      if (st != lp::Status::kOptimal) return st;
      if (!activate_violated_rows()) return lp::Status::kOptimal;
    }
  }

  double objective() const { return simplex_.objective_value(); }
  double value(std::size_t var) const { return simplex_.value(static_cast<int>(var)); }

 private:
  void activate(std::size_t row_index) {
    const auto& row = prog_.rows[row_index];
    simplex_.add_row(row.terms, row.sense == RowSense::kEqual ? lp::Sense::kEqual : lp::Sense::kLessEqual,
                     row.rhs);
    row_active_[row_index] = 1;
  }

  bool activate_violated_rows() {
    bool added = false;
    for (std::size_t r = 0; r < prog_.rows.size(); ++r) {
      if (row_active_[r]) continue;
      const auto& row = prog_.rows[r];
      double activity = 0.0;
      for (const auto& [var, coef] : row.terms) activity += coef * value(static_cast<std::size_t>(var));
      if (activity > row.rhs + kFeasibilityTol) {
        activate(r);
        added = true;
      }
    }
    return added;
  }

  const MilpProgram& prog_;
  lp::BoundedSimplex simplex_;
  std::vector<char> row_active_;
  std::vector<std::vector<int>> slot_z_;  // per unit, z variable per neighbor slot
  std::vector<int> degree_;
};

LpStatus map_status(lp::Status st) {
  switch (st) {
    case lp::Status::kOptimal:
      return LpStatus::kOptimal;
    case lp::Status::kInfeasible:
      return LpStatus::kInfeasible;
    default:
      return LpStatus::kCycleGuard;  // cycling guard / numerical failure
  }
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "Optimal";
    case SolveStatus::kInfeasible:
      return "Infeasible";
    case SolveStatus::kLimitReached:
      return "LimitReached";
  }
  return "Unknown";
}

LpResult solve_lp(const MilpProgram& program,
                  const std::vector<std::pair<std::size_t, std::uint8_t>>& fixed) {
  std::unordered_set<std::size_t> seen;
  for (const auto& [var, value] : fixed) {
    if (var >= program.var_count()) throw std::invalid_argument("solve_lp: variable out of range");
    if (value > 1) throw std::invalid_argument("solve_lp: fixings must be binary");
    if (!seen.insert(var).second)
      throw std::invalid_argument("solve_lp: variable fixed twice");
  }

  std::vector<std::int8_t> z_fixed(program.n_z, -1);
  std::vector<std::pair<std::size_t, std::uint8_t>> h_fixed;
  for (const auto& [var, value] : fixed) {
    if (program.is_z(var))
      z_fixed[var] = static_cast<std::int8_t>(value);
    else
      h_fixed.emplace_back(var, value);
  }

  RelaxationSolver relax(program);
  LpResult result;
  result.status = map_status(relax.solve(z_fixed, h_fixed));
  if (result.status == LpStatus::kOptimal) {
    result.values.resize(program.var_count());
    for (std::size_t v = 0; v < program.var_count(); ++v) result.values[v] = relax.value(v);
    result.objective = relax.objective();
  }
  return result;
}

namespace {

struct BnbNode {
  double bound = kPosInf;
  int depth = 0;
  long seq = 0;
  std::vector<std::pair<int, std::uint8_t>> fixings;  // z variable fixings
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // best bound first
    if (a.depth != b.depth) return a.depth < b.depth;  // then deepest
    return a.seq > b.seq;                              // then creation order
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const AllocationProblem& problem, const MilpProgram& program,
                 const SolverConfig& config)
      : problem_(problem), program_(program), config_(config), relax_(program) {
    if (program_.n_z != problem_.size())
      throw std::invalid_argument("branch_and_bound: program does not match problem");
    if (!config_.branch_rule.empty() && config_.branch_rule != "most-fractional")
      throw std::invalid_argument("branch_and_bound: unknown branch rule '" +
                                  config_.branch_rule + "'");
    // Worst privilege gap per (unit, pattern), for exact candidate checks.
    max_gap_.resize(program_.n_z);
    for (std::size_t i = 0; i < program_.n_z; ++i)
      max_gap_[i].assign(static_cast<std::size_t>(program_.pattern_count[i]), kNegInf);
    for (const auto& row : program_.rows) {
      if (row.kind != RowKind::kPrivilege) continue;
      for (const auto& [var, gap] : row.terms) {
        auto [unit, pattern] = program_.h_location(static_cast<std::size_t>(var));
        auto& cell = max_gap_[unit][static_cast<std::size_t>(pattern)];
        cell = std::max(cell, gap);
      }
    }
  }

  Solution run() {
    const auto start = std::chrono::steady_clock::now();
    const bool exact = config_.abs_gap_tol <= 0.0;

    std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
    open.push(BnbNode{});
    long next_seq = 1;

    while (!open.empty()) {
      if (nodes_explored_ >= config_.node_limit) return finish_limit(open);
      if (config_.time_limit_seconds > 0.0) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (elapsed.count() >= config_.time_limit_seconds) return finish_limit(open);
      }

      BnbNode node = open.top();
      open.pop();
      if (should_prune(node.bound)) {
        note_pruned(node.bound);
        continue;
      }
      ++nodes_explored_;

      std::vector<std::int8_t> z_fixed(program_.n_z, -1);
      int fixed_ones = 0;
      for (const auto& [var, value] : node.fixings) {
        z_fixed[static_cast<std::size_t>(var)] = static_cast<std::int8_t>(value);
        fixed_ones += value;
      }
      if (fixed_ones > problem_.budget) {
        log_node(kNegInf, node);
        continue;
      }

      // Leaf: every z fixed, H follows deterministically.
      if (node.fixings.size() == program_.n_z) {
        std::vector<std::uint8_t> z(program_.n_z, 0);
        for (const auto& [var, value] : node.fixings) z[static_cast<std::size_t>(var)] = value;
        offer_candidate(z);
        log_node(node.bound, node);
        continue;
      }

      const lp::Status st = relax_.solve(z_fixed);
      if (st == lp::Status::kInfeasible) {
        log_node(kNegInf, node);
        continue;
      }
      if (st != lp::Status::kOptimal)
        throw std::runtime_error("branch_and_bound: LP cycling guard exceeded");

      const double node_bound = relax_.objective();
      if (should_prune(node_bound)) {
        note_pruned(node_bound);
        log_node(node_bound, node);
        continue;
      }

      // Branching variable: most fractional z, ties to the lowest index.
      int branch_var = -1;
      double best_score = 1e-6;
      for (std::size_t i = 0; i < program_.n_z; ++i) {
        if (z_fixed[i] >= 0) continue;
        const double x = relax_.value(i);
        const double score = std::min(x, 1.0 - x);
        if (score > best_score) {
          best_score = score;
          branch_var = static_cast<int>(i);
        }
      }

      if (branch_var < 0) {
        // Integral z: the LP optimum resolves this subtree, unless ties must
        // be enumerated (exact search) or the point failed the exact
        // feasibility check right at the tau boundary.
        std::vector<std::uint8_t> z(program_.n_z);
        for (std::size_t i = 0; i < program_.n_z; ++i)
          z[i] = z_fixed[i] >= 0 ? static_cast<std::uint8_t>(z_fixed[i])
                                 : static_cast<std::uint8_t>(relax_.value(i) > 0.5);
        const bool accepted = offer_candidate(z);
        log_node(node_bound, node);
        if (!should_prune(node_bound) && (exact || !accepted)) {
          int free_var = -1;
          for (std::size_t i = 0; i < program_.n_z; ++i) {
            if (z_fixed[i] < 0) {
              free_var = static_cast<int>(i);
              break;
            }
          }
          if (free_var >= 0) {
            push_children(open, node, free_var, node_bound, next_seq);
            continue;
          }
        }
        note_pruned(node_bound);
        continue;
      }

      rounding_heuristic(z_fixed, fixed_ones);
      log_node(node_bound, node);
      push_children(open, node, branch_var, node_bound, next_seq);
    }

    Solution out = base_solution();
    if (!has_incumbent_) {
      out.status = SolveStatus::kInfeasible;
      out.bound = kNegInf;
      out.objective = kNegInf;
      return out;
    }
    out.status = SolveStatus::kOptimal;
    out.bound = std::max(incumbent_value_, pruned_bound_max_);
    finalize_gaps(out);
    return out;
  }

 private:
  bool should_prune(double bound) const {
    if (!has_incumbent_) return false;
    if (config_.abs_gap_tol > 0.0) return bound <= incumbent_value_ + config_.abs_gap_tol;
    return bound < incumbent_value_ - kTieTol;
  }

  void note_pruned(double bound) {
    if (std::isfinite(bound)) pruned_bound_max_ = std::max(pruned_bound_max_, bound);
  }

  std::pair<double, bool> exact_eval(const std::vector<std::uint8_t>& z) const {
    int used = 0;
    for (std::uint8_t b : z) used += b;
    bool feasible = used <= problem_.budget;
    double total = 0.0;
    const bool check_gaps = std::isfinite(program_.tau);
    for (std::size_t i = 0; i < program_.n_z; ++i) {
      const NeighborPattern pat = neighbor_pattern(problem_.graph, z, i);
      const auto rank = pattern_rank(pat);
      total += program_.objective[program_.h_index(i, static_cast<int>(rank))];
      if (check_gaps && max_gap_[i][rank] > program_.tau + kFeasibilityTol) feasible = false;
    }
    return {total, feasible};
  }

  bool offer_candidate(const std::vector<std::uint8_t>& z) {
    const auto [value, feasible] = exact_eval(z);
    if (!feasible) return false;
    if (!has_incumbent_ || value > incumbent_value_ + kTieTol) {
      has_incumbent_ = true;
      incumbent_value_ = value;
      incumbent_z_ = z;
    } else if (value >= incumbent_value_ - kTieTol && lex_less(z, incumbent_z_)) {
      incumbent_value_ = value;
      incumbent_z_ = z;
    }
    return true;
  }

  void rounding_heuristic(const std::vector<std::int8_t>& z_fixed, int fixed_ones) {
    std::vector<std::uint8_t> z(program_.n_z, 0);
    for (std::size_t i = 0; i < program_.n_z; ++i)
      if (z_fixed[i] == 1) z[i] = 1;
    offer_candidate(z);

    if (fixed_ones >= problem_.budget) return;
    std::vector<std::pair<double, int>> free_vars;
    for (std::size_t i = 0; i < program_.n_z; ++i)
      if (z_fixed[i] < 0) free_vars.emplace_back(-relax_.value(i), static_cast<int>(i));
    std::sort(free_vars.begin(), free_vars.end());
    int room = problem_.budget - fixed_ones;
    for (const auto& [neg_value, var] : free_vars) {
      if (room == 0) break;
      if (-neg_value <= 1e-9) break;  // nothing attractive left
      z[static_cast<std::size_t>(var)] = 1;
      --room;
    }
    offer_candidate(z);
  }

  void push_children(std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder>& open,
                     const BnbNode& node, int var, double bound, long& next_seq) {
    for (std::uint8_t value : {std::uint8_t{0}, std::uint8_t{1}}) {
      BnbNode child;
      child.bound = bound;
      child.depth = node.depth + 1;
      child.seq = next_seq++;
      child.fixings = node.fixings;
      child.fixings.emplace_back(var, value);
      open.push(std::move(child));
    }
  }

  void log_node(double bound, const BnbNode& node) const {
    if (!config_.node_log) return;
    auto& out = *config_.node_log;
    out << nodes_explored_ << ' ' << bound << ' ';
    if (has_incumbent_)
      out << incumbent_value_;
    else
      out << "none";
    out << ' ' << node.depth << ' ' << node.fixings.size() << '\n';
  }

  Solution base_solution() const {
    Solution out;
    out.nodes_explored = nodes_explored_;
    if (has_incumbent_) {
      out.z = incumbent_z_;
      out.objective = incumbent_value_;
    }
    return out;
  }

  void finalize_gaps(Solution& out) const {
    const PolicyReport report = evaluate_policy(problem_, out.z);
    out.per_unit_gaps = report.gaps;
  }

  Solution finish_limit(std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder>& open) {
    Solution out = base_solution();
    out.status = SolveStatus::kLimitReached;
    double bound = has_incumbent_ ? incumbent_value_ : kNegInf;
    bound = std::max(bound, pruned_bound_max_);
    if (!open.empty()) bound = std::max(bound, open.top().bound);
    out.bound = bound;
    if (!has_incumbent_) out.objective = kNegInf;
    if (has_incumbent_) finalize_gaps(out);
    return out;
  }

  const AllocationProblem& problem_;
  const MilpProgram& program_;
  const SolverConfig& config_;
  RelaxationSolver relax_;
  std::vector<std::vector<double>> max_gap_;

  bool has_incumbent_ = false;
  double incumbent_value_ = kNegInf;
  std::vector<std::uint8_t> incumbent_z_;
  double pruned_bound_max_ = kNegInf;
  long nodes_explored_ = 0;
};

}  // namespace

Solution branch_and_bound(const AllocationProblem& problem, const MilpProgram& program,
                          const SolverConfig& config) {
  BranchAndBound search(problem, program, config);
  return search.run();
}

Solution solve_problem(const AllocationProblem& problem, const SolverConfig& config) {
  const MilpProgram program = encode(problem);
  return branch_and_bound(problem, program, config);
}

}  // namespace fairalloc
