#pragma once

// Best-first branch and bound over the binaries of a MicpProblem with
// periodic dives, binary-row propagation, a rounding heuristic and an
// optional seed incumbent. Branching picks the most fractional binary within
// the highest priority class.

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "locomip/micp.hpp"

namespace locomip {

enum class SolveStatus { kOptimal, kGapLimit, kInfeasible, kUnbounded, kNodeLimit };

const char* to_string(SolveStatus s);

struct MicpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  bool has_incumbent = false;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  long nodes = 0;
  long convex_solves = 0;
  long numerical_failures = 0;
  double wall_time = 0.0;
  long seed_nodes = 0;
  bool seed_accepted = false;
  std::string seed_message;
};

struct BnbEvent {
  long node = 0;
  int depth = 0;
  double bound = 0.0;       // node bound after inheriting the parent's
  double relaxation = 0.0;  // raw relaxation objective (nan if not solved)
  double global_bound = 0.0;
  double incumbent = 0.0;
  double gap = 0.0;
  int branch_var = -1;  // variable split on, if any
  std::string action;  // branch, incumbent, integral, heuristic,
                       // prune-bound, prune-infeasible, prune-propagation,
                       // numerical, unbounded
};

/// One structured log line: node depth bound incumbent gap action, plus the
/// branching variable when there is one.
std::string format_event(const BnbEvent& e);

struct BnbOptions {
  double gap_tol = 1e-4;
  long node_limit = 1'000'000;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  /// (variable index, value) pairs for binaries; empty means unseeded.
  std::vector<std::pair<int, double>> seed_assignment;
  long seed_node_limit = 20'000;
  std::string backend = "reference";
  int workers = 1;
  /// A depth-first dive starts every dive_period best-first pops.
  int dive_period = 8;
  double integrality_tol = 1e-6;
  /// Fix-and-propagate rounding runs at the root and every
  /// heuristic_period nodes; 0 disables it.
  int heuristic_period = 10;
  std::function<void(const BnbEvent&)> on_event;
};

MicpSolution solve(const MicpProblem& problem, const BnbOptions& opts = {});

/// Solves the convex subproblem of every binary assignment that survives
/// the pure-binary rows. Throws ModelError above max_binaries free binaries.
MicpSolution enumerate_bruteforce(const MicpProblem& problem,
                                  int max_binaries = 20,
                                  const std::string& backend = "reference");

struct SeedResult {
  bool accepted = false;
  std::string reason;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::infinity();
  long nodes = 0;
};

/// Completes a partial binary assignment by branch and bound on the
/// remaining binaries. Rejected if the assignment breaks a pure-binary row
/// or admits no feasible completion.
SeedResult seed_incumbent(const MicpProblem& problem,
                          const std::vector<std::pair<int, double>>& partial,
                          const BnbOptions& opts = {});

}  // namespace locomip
