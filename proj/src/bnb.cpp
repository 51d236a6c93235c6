#include "locomip/bnb.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <thread>

#include "locomip/convex_solver.hpp"

namespace locomip {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRowTol = 1e-9;

using Clock = std::chrono::steady_clock;

// Rows whose variables are all binaries (or fixed), in <= form over binary
// positions. Used for node propagation and enumeration pruning.
class BinaryRows {
 public:
  explicit BinaryRows(const MicpProblem& p) {
    // Binaries pinned by their bounds are constants here.
    std::vector<int> bins;
    for (int v : p.binary_indices()) {
      if (p.vars()[v].lower != p.vars()[v].upper) bins.push_back(v);
    }
    pos_of_var_.assign(p.num_vars(), -1);
    for (int k = 0; k < static_cast<int>(bins.size()); ++k) {
      pos_of_var_[bins[k]] = k;
    }
    var_of_pos_ = bins;
    rows_of_pos_.resize(bins.size());
    for (LinearConstraint c : p.constraints()) {
      c.canonicalize();
      Row row;
      row.rhs = c.rhs;
      bool pure = true;
      for (const Term& t : c.expr.terms()) {
        const Variable& v = p.vars()[t.var];
        if (pos_of_var_[t.var] >= 0) {
          row.terms.emplace_back(pos_of_var_[t.var], t.coef);
        } else if (v.lower == v.upper) {
          row.rhs -= t.coef * v.lower;
        } else {
          pure = false;
          break;
        }
      }
      if (!pure || row.terms.empty()) continue;
      if (c.sense != Sense::kGreaterEqual) add(row);
      if (c.sense != Sense::kLessEqual) {
        for (auto& [_, a] : row.terms) a = -a;
        row.rhs = -row.rhs;
        add(row);
      }
    }
  }

  int num_binaries() const { return static_cast<int>(var_of_pos_.size()); }
  int var_of_pos(int k) const { return var_of_pos_[k]; }
  int pos_of_var(int v) const { return pos_of_var_[v]; }

  /// Fixes binaries forced by the rows. False when a row cannot be met.
  bool propagate(std::vector<int8_t>& fix) const {
    std::vector<char> queued(rows_.size(), 1);
    std::deque<int> q;
    for (int r = 0; r < static_cast<int>(rows_.size()); ++r) q.push_back(r);
    while (!q.empty()) {
      const int r = q.front();
      q.pop_front();
      queued[r] = 0;
      const Row& row = rows_[r];
      const double minact = min_activity(row, fix);
      if (minact > row.rhs + kRowTol) return false;
      const double slack = row.rhs - minact;
      for (const auto& [k, a] : row.terms) {
        if (fix[k] >= 0 || std::abs(a) <= slack + kRowTol) continue;
        fix[k] = a > 0 ? 0 : 1;
        for (int r2 : rows_of_pos_[k]) {
          if (!queued[r2]) {
            queued[r2] = 1;
            q.push_back(r2);
          }
        }
      }
    }
    return true;
  }

  /// Rows that already fail for the fixed part, without deducing anything.
  bool violated(const std::vector<int8_t>& fix) const {
    for (const Row& row : rows_) {
      if (min_activity(row, fix) > row.rhs + kRowTol) return true;
    }
    return false;
  }

 private:
  struct Row {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
  };

  static double min_activity(const Row& row, const std::vector<int8_t>& fix) {
    double m = 0.0;
    for (const auto& [k, a] : row.terms) {
      m += fix[k] < 0 ? std::min(a, 0.0) : a * fix[k];
    }
    return m;
  }

  void add(const Row& row) {
    const int r = static_cast<int>(rows_.size());
    rows_.push_back(row);
    for (const auto& [k, _] : row.terms) rows_of_pos_[k].push_back(r);
  }

  std::vector<int> pos_of_var_;
  std::vector<int> var_of_pos_;
  std::vector<Row> rows_;
  std::vector<std::vector<int>> rows_of_pos_;
};

BoundOverlay overlay_of(const BinaryRows& br, const std::vector<int8_t>& fix) {
  BoundOverlay ov;
  for (int k = 0; k < br.num_binaries(); ++k) {
    if (fix[k] >= 0) ov.fixings.emplace_back(br.var_of_pos(k), fix[k]);
  }
  return ov;
}

double gap_of(double inc, double lb) {
  if (!std::isfinite(inc)) return kInf;
  return std::max(0.0, (inc - lb) / std::max(1.0, std::abs(inc)));
}

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<int8_t> fix;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class Search {
 public:
  Search(const MicpProblem& p, const BnbOptions& o)
      : p_(p), o_(o), rows_(p), backend_(BackendRegistry::global().get(o.backend)),
        start_(Clock::now()) {}

  void install_incumbent(const std::vector<double>& x, double obj) {
    inc_x_ = x;
    inc_obj_ = obj;
    has_inc_ = true;
  }

  MicpSolution run() {
    Node root;
    root.fix.assign(rows_.num_binaries(), -1);
    root.id = next_id_++;
    queue_.push(std::move(root));

    const int nw = std::max(1, o_.workers);
    if (nw == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < nw; ++w) pool.emplace_back([this] { worker(); });
      for (auto& t : pool) t.join();
    }
    return finish();
  }

 private:
  enum class Stop { kNone, kNodeLimit, kTimeLimit, kUnbounded };

  double cutoff() const {
    const double inc = inc_obj_;
    if (!std::isfinite(inc)) return kInf;
    return inc - o_.gap_tol * std::max(1.0, std::abs(inc));
  }

  // Requires mu_.
  double global_bound() {
    double lb = std::min(min_pruned_, inc_obj_.load());
    if (!queue_.empty()) lb = std::min(lb, queue_.top().bound);
    if (!inflight_.empty()) lb = std::min(lb, *inflight_.begin());
    lb_ = std::max(lb_, lb);
    return lb_;
  }

  // Requires mu_.
  void emit(const Node& n, double relaxation, const char* action,
            int branch_var = -1) {
    if (!o_.on_event) return;
    BnbEvent e;
    e.branch_var = branch_var;
    e.node = n.id;
    e.depth = n.depth;
    e.bound = n.bound;
    e.relaxation = relaxation;
    e.global_bound = global_bound();
    e.incumbent = inc_obj_;
    e.gap = gap_of(e.incumbent, e.global_bound);
    e.action = action;
    o_.on_event(e);
  }

  void worker() {
    for (;;) {
      Node node;
      bool dive = false;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] {
          return stop_ != Stop::kNone || !queue_.empty() || busy_ == 0;
        });
        if (stop_ != Stop::kNone || queue_.empty()) {
          cv_.notify_all();
          return;
        }
        if (queue_.top().bound >= cutoff()) {
          // Every open node is within the gap of the incumbent.
          min_pruned_ = std::min(min_pruned_, queue_.top().bound);
          while (!queue_.empty()) queue_.pop();
          cv_.notify_all();
          continue;
        }
        node = queue_.top();
        queue_.pop();
        dive = (pops_++ % std::max(1, o_.dive_period)) == 0;
        ++busy_;
        inflight_.insert(node.bound);
      }
      std::optional<Node> current = std::move(node);
      while (current) {
        const double entry_bound = current->bound;
        std::optional<Node> next = process(*current, dive);
        std::lock_guard lock(mu_);
        inflight_.erase(inflight_.find(entry_bound));
        if (next) inflight_.insert(next->bound);
        current = std::move(next);
      }
      {
        std::lock_guard lock(mu_);
        --busy_;
      }
      cv_.notify_all();
    }
  }

  // Returns the child to dive into, if any; other children are queued.
  std::optional<Node> process(Node& node, bool dive) {
    {
      std::lock_guard lock(mu_);
      if (stop_ != Stop::kNone) {
        queue_.push(node);
        return std::nullopt;
      }
      const double elapsed =
          std::chrono::duration<double>(Clock::now() - start_).count();
      if (nodes_ >= o_.node_limit || elapsed > o_.time_limit) {
        stop_ = nodes_ >= o_.node_limit ? Stop::kNodeLimit : Stop::kTimeLimit;
        queue_.push(node);
        cv_.notify_all();
        return std::nullopt;
      }
      ++nodes_;
      if (node.bound >= cutoff()) {
        min_pruned_ = std::min(min_pruned_, node.bound);
        emit(node, std::nan(""), "prune-bound");
        return std::nullopt;
      }
    }

    if (!rows_.propagate(node.fix)) {
      std::lock_guard lock(mu_);
      emit(node, std::nan(""), "prune-propagation");
      return std::nullopt;
    }
    const ConvexSolution sol =
        backend_->solve(p_.relax(overlay_of(rows_, node.fix)), nullptr);
    {
      std::lock_guard lock(mu_);
      ++solves_;
    }

    if (sol.status == ConvexStatus::kInfeasible) {
      std::lock_guard lock(mu_);
      emit(node, std::nan(""), "prune-infeasible");
      return std::nullopt;
    }
    if (sol.status == ConvexStatus::kUnbounded && node.depth == 0) {
      std::lock_guard lock(mu_);
      stop_ = Stop::kUnbounded;
      emit(node, -kInf, "unbounded");
      cv_.notify_all();
      return std::nullopt;
    }

    int branch_pos = -1;
    double relaxation = std::nan("");
    if (sol.status != ConvexStatus::kOptimal) {
      // Untrusted relaxation: keep the inherited bound and split on the
      // first free binary.
      std::lock_guard lock(mu_);
      ++failures_;
      for (int k = 0; k < rows_.num_binaries(); ++k) {
        if (node.fix[k] < 0) {
          branch_pos = k;
          break;
        }
      }
      emit(node, std::nan(""), "numerical");
      if (branch_pos < 0) return std::nullopt;
    } else {
      relaxation = sol.objective;
      node.bound = std::max(node.bound, relaxation);
      double best_frac = o_.integrality_tol;
      int best_class = std::numeric_limits<int>::min();
      for (int k = 0; k < rows_.num_binaries(); ++k) {
        if (node.fix[k] >= 0) continue;
        const int var = rows_.var_of_pos(k);
        const double v = sol.x[var];
        const double frac = std::min(v, 1.0 - v);
        if (frac <= o_.integrality_tol) continue;
        const int cls = p_.vars()[var].priority;
        if (cls > best_class || (cls == best_class && frac > best_frac)) {
          best_class = cls;
          best_frac = frac;
          branch_pos = k;
        }
      }
      {
        std::lock_guard lock(mu_);
        if (node.bound >= cutoff()) {
          min_pruned_ = std::min(min_pruned_, node.bound);
          emit(node, relaxation, "prune-bound");
          return std::nullopt;
        }
      }
      if (branch_pos < 0) {
        integral(node, sol, relaxation);
        return std::nullopt;
      }
      if (o_.heuristic_period > 0 &&
          (node.depth == 0 || node.id % o_.heuristic_period == 0)) {
        round_and_solve(node, sol, relaxation);
        std::lock_guard lock(mu_);
        if (node.bound >= cutoff()) {
          min_pruned_ = std::min(min_pruned_, node.bound);
          emit(node, relaxation, "prune-bound");
          return std::nullopt;
        }
      }
    }

    Node child[2];
    for (int b = 0; b < 2; ++b) {
      child[b].depth = node.depth + 1;
      child[b].bound = node.bound;
      child[b].fix = node.fix;
      child[b].fix[branch_pos] = static_cast<int8_t>(b);
    }
    const double v = sol.status == ConvexStatus::kOptimal
                         ? sol.x[rows_.var_of_pos(branch_pos)]
                         : 0.0;
    const int preferred = v > 0.5 ? 1 : 0;
    std::lock_guard lock(mu_);
    child[0].id = next_id_++;
    child[1].id = next_id_++;
    emit(node, relaxation, "branch", rows_.var_of_pos(branch_pos));
    if (dive) {
      queue_.push(std::move(child[1 - preferred]));
      cv_.notify_one();
      return std::move(child[preferred]);
    }
    queue_.push(std::move(child[0]));
    queue_.push(std::move(child[1]));
    cv_.notify_all();
    return std::nullopt;
  }

  // Fixes free binaries one at a time, most decided first within the highest
  // priority class, propagating after each fixing.
  void round_and_solve(const Node& node, const ConvexSolution& sol,
                       double relaxation) {
    std::vector<int> order;
    for (int k = 0; k < rows_.num_binaries(); ++k) {
      if (node.fix[k] < 0) order.push_back(k);
    }
    auto key = [&](int k) {
      const int var = rows_.var_of_pos(k);
      return std::make_pair(-p_.vars()[var].priority,
                            std::abs(sol.x[var] - 0.5));
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const auto ka = key(a), kb = key(b);
      if (ka.first != kb.first) return ka.first < kb.first;
      return ka.second > kb.second;
    });
    std::vector<int8_t> fix = node.fix;
    for (int k : order) {
      if (fix[k] >= 0) continue;
      fix[k] = sol.x[rows_.var_of_pos(k)] > 0.5 ? 1 : 0;
      if (!rows_.propagate(fix)) return;
    }
    const ConvexSolution cand =
        backend_->solve(p_.relax(overlay_of(rows_, fix)), nullptr);
    {
      std::lock_guard lock(mu_);
      ++solves_;
    }
    accept(node, cand, fix, relaxation, "heuristic", true);
  }

  // Checks an all-fixed solve and installs it if it improves the incumbent.
  void accept(const Node& node, ConvexSolution cand, const std::vector<int8_t>& fix,
              double relaxation, const char* fallback, bool quiet_infeasible) {
    std::lock_guard lock(mu_);
    if (cand.status != ConvexStatus::kOptimal) {
      if (!quiet_infeasible || cand.status != ConvexStatus::kInfeasible) {
        emit(node, relaxation, "numerical");
      }
      return;
    }
    for (int k = 0; k < rows_.num_binaries(); ++k) {
      cand.x[rows_.var_of_pos(k)] = fix[k];
    }
    if (p_.max_violation(cand.x) > 1e-6) {
      ++failures_;
      emit(node, relaxation, "numerical");
      return;
    }
    const double inc = inc_obj_;
    const double obj = p_.objective(cand.x);
    if (!has_inc_ || obj < inc - 1e-9 * std::max(1.0, std::abs(inc))) {
      install_incumbent(cand.x, obj);
      emit(node, relaxation, "incumbent");
    } else {
      emit(node, relaxation, fallback);
    }
  }

  void integral(const Node& node, const ConvexSolution& sol, double relaxation) {
    std::vector<int8_t> fix = node.fix;
    bool all_fixed = true;
    for (int k = 0; k < rows_.num_binaries(); ++k) {
      if (fix[k] < 0) {
        all_fixed = false;
        fix[k] = sol.x[rows_.var_of_pos(k)] > 0.5 ? 1 : 0;
      }
    }
    ConvexSolution cand = sol;
    if (!all_fixed) {
      cand = rows_.violated(fix)
                 ? ConvexSolution{}
                 : backend_->solve(p_.relax(overlay_of(rows_, fix)), nullptr);
      std::lock_guard lock(mu_);
      ++solves_;
    }
    accept(node, std::move(cand), fix, relaxation, "integral", false);
  }

  MicpSolution finish() {
    MicpSolution out;
    out.nodes = nodes_;
    out.convex_solves = solves_;
    out.numerical_failures = failures_;
    out.has_incumbent = has_inc_;
    out.objective = inc_obj_;
    if (has_inc_) out.x = inc_x_;
    out.lower_bound = global_bound();
    if (stop_ == Stop::kUnbounded) {
      out.status = SolveStatus::kUnbounded;
      out.lower_bound = -kInf;
    } else if (stop_ == Stop::kNodeLimit) {
      out.status = SolveStatus::kNodeLimit;
    } else if (stop_ == Stop::kTimeLimit) {
      out.status = SolveStatus::kGapLimit;
    } else {
      out.status = has_inc_ ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
    }
    if (has_inc_) {
      out.lower_bound = std::min(out.lower_bound, out.objective);
      out.gap = gap_of(out.objective, out.lower_bound);
    }
    out.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    return out;
  }

  const MicpProblem& p_;
  const BnbOptions& o_;
  BinaryRows rows_;
  std::shared_ptr<const ConvexBackend> backend_;
  Clock::time_point start_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue_;
  std::multiset<double> inflight_;
  std::vector<double> inc_x_;
  std::atomic<double> inc_obj_{kInf};
  bool has_inc_ = false;
  double min_pruned_ = kInf;
  double lb_ = -kInf;
  long next_id_ = 0;
  long nodes_ = 0;
  long solves_ = 0;
  long failures_ = 0;
  long pops_ = 0;
  int busy_ = 0;
  Stop stop_ = Stop::kNone;
};

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kGapLimit: return "gap-limit";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNodeLimit: return "node-limit";
  }
  return "?";
}

std::string format_event(const BnbEvent& e) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "node=%ld depth=%d bound=%.10g incumbent=%.10g gap=%.3e "
                "action=%s",
                e.node, e.depth, e.global_bound, e.incumbent, e.gap,
                e.action.c_str());
  std::string out = buf;
  if (e.branch_var >= 0) out += " var=" + std::to_string(e.branch_var);
  return out;
}

SeedResult seed_incumbent(const MicpProblem& problem,
                          const std::vector<std::pair<int, double>>& partial,
                          const BnbOptions& opts) {
  SeedResult out;
  if (partial.empty()) {
    out.reason = "empty seed";
    return out;
  }
  const BinaryRows rows(problem);
  std::vector<int8_t> fix(rows.num_binaries(), -1);
  MicpProblem restricted = problem;
  for (const auto& [var, value] : partial) {
    if (var < 0 || var >= problem.num_vars() || !problem.vars()[var].binary) {
      out.reason = "seed fixes a non-binary variable";
      return out;
    }
    if (value != 0.0 && value != 1.0) {
      out.reason = "seed value is not 0 or 1";
      return out;
    }
    if (rows.pos_of_var(var) < 0) {
      if (problem.vars()[var].lower != value) {
        out.reason = "seed contradicts a fixed binary";
        return out;
      }
      continue;
    }
    fix[rows.pos_of_var(var)] = static_cast<int8_t>(value);
    restricted.set_bounds(VarId{var}, value, value);
  }
  if (rows.violated(fix)) {
    out.reason = "seed violates a binary row";
    return out;
  }
  BnbOptions sub = opts;
  sub.seed_assignment.clear();
  sub.on_event = nullptr;
  sub.node_limit = opts.seed_node_limit;
  // Any feasible completion is useful; do not spend long closing the gap.
  sub.gap_tol = std::max(opts.gap_tol, 1e-2);
  const MicpSolution s = solve(restricted, sub);
  out.nodes = s.nodes;
  if (!s.has_incumbent) {
    out.reason = s.status == SolveStatus::kInfeasible
                     ? "no feasible completion of the seed"
                     : "seed completion hit the node limit";
    return out;
  }
  out.accepted = true;
  out.x = s.x;
  out.objective = s.objective;
  return out;
}

MicpSolution solve(const MicpProblem& problem, const BnbOptions& opts) {
  const auto t0 = Clock::now();
  Search search(problem, opts);
  SeedResult seed;
  if (!opts.seed_assignment.empty()) {
    seed = seed_incumbent(problem, opts.seed_assignment, opts);
    if (seed.accepted) search.install_incumbent(seed.x, seed.objective);
  }
  MicpSolution out = search.run();
  out.seed_nodes = seed.nodes;
  out.seed_accepted = seed.accepted;
  out.seed_message = opts.seed_assignment.empty()
                         ? ""
                         : (seed.accepted ? "accepted" : seed.reason);
  out.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

MicpSolution enumerate_bruteforce(const MicpProblem& problem, int max_binaries,
                                  const std::string& backend) {
  const auto t0 = Clock::now();
  const BinaryRows rows(problem);
  const int nb = rows.num_binaries();
  if (nb > max_binaries) {
    throw ModelError("enumerate_bruteforce: " + std::to_string(nb) +
                     " binaries exceed the limit of " +
                     std::to_string(max_binaries));
  }
  auto solver = BackendRegistry::global().get(backend);
  MicpSolution out;
  std::vector<int8_t> fix(nb, -1);
  bool unbounded = false;

  std::function<void(int)> dfs = [&](int k) {
    if (rows.violated(fix)) return;
    if (k == nb) {
      const ConvexSolution s = solver->solve(problem.relax(overlay_of(rows, fix)), nullptr);
      ++out.convex_solves;
      ++out.nodes;
      if (s.status == ConvexStatus::kUnbounded) unbounded = true;
      if (s.status != ConvexStatus::kOptimal) return;
      std::vector<double> x = s.x;
      for (int i = 0; i < nb; ++i) x[rows.var_of_pos(i)] = fix[i];
      const double obj = problem.objective(x);
      if (!out.has_incumbent ||
          obj < out.objective - 1e-9 * std::max(1.0, std::abs(out.objective))) {
        out.has_incumbent = true;
        out.objective = obj;
        out.x = std::move(x);
      }
      return;
    }
    for (int8_t v : {0, 1}) {
      fix[k] = v;
      dfs(k + 1);
      fix[k] = -1;
    }
  };
  dfs(0);

  if (unbounded) {
    out.status = SolveStatus::kUnbounded;
  } else if (out.has_incumbent) {
    out.status = SolveStatus::kOptimal;
    out.lower_bound = out.objective;
    out.gap = 0.0;
  } else {
    out.status = SolveStatus::kInfeasible;
  }
  out.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

}  // namespace locomip
