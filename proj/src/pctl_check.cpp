#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rlsafe/pctl.hpp"

namespace rlsafe::pctl {

namespace {

/// Backward reachability: states that can reach `targets` while every state
/// on the way (targets excluded) satisfies `through`.
StateSet backward_reach(const dtmc::Dtmc& d, const StateSet& targets,
                        const StateSet& through) {
  const auto preds = d.predecessors();
  StateSet reached(d.n_states, 0);
  std::vector<int> stack;
  for (int s = 0; s < d.n_states; ++s)
    if (targets[s]) {
      reached[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int p : preds[s]) {
      if (!reached[p] && through[p]) {
        reached[p] = 1;
        stack.push_back(p);
      }
    }
  }
  return reached;
}

StateSet set_minus(const StateSet& a, const StateSet& b) {
  StateSet out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && !b[i];
  return out;
}

StateSet complement(const StateSet& a) {
  StateSet out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = !a[i];
  return out;
}

}  // namespace

std::pair<StateSet, StateSet> prob01(const dtmc::Dtmc& d, const StateSet& phi1,
                                     const StateSet& phi2) {
  if (static_cast<int>(phi1.size()) != d.n_states ||
      static_cast<int>(phi2.size()) != d.n_states)
    throw std::invalid_argument("state set size mismatch");

  // Prob0: cannot reach phi2 at all while staying in phi1.
  const StateSet can_reach = backward_reach(d, phi2, set_minus(phi1, phi2));
  const StateSet prob0 = complement(can_reach);

  // Prob1: cannot, while staying in phi1 \ phi2, reach a state that already
  // has reachability probability zero.
  const StateSet reaches_prob0 = backward_reach(d, prob0, set_minus(phi1, phi2));
  const StateSet prob1 = complement(reaches_prob0);
  return {prob0, prob1};
}

std::vector<double> until_prob(const dtmc::Dtmc& d, const StateSet& phi1,
                               const StateSet& phi2, double tol, long max_iter,
                               SolveInfo* info) {
  if (tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  const auto [prob0, prob1] = prob01(d, phi1, phi2);
  std::vector<double> x(d.n_states, 0.0);
  std::vector<int> unknown;
  for (int s = 0; s < d.n_states; ++s) {
    if (prob1[s]) x[s] = 1.0;
    else if (!prob0[s]) unknown.push_back(s);
  }
  if (unknown.empty()) {
    if (info) *info = SolveInfo{0, 0.0};
    return x;
  }

  const auto rows = d.rows();
  long iterations = 0;
  double residual = 0.0;
  for (; iterations < max_iter; ++iterations) {
    residual = 0.0;
    for (int s : unknown) {
      double acc = 0.0;
      double self = 0.0;
      for (const auto& [dst, p] : rows[s]) {
        if (dst == s) self += p;
        else acc += p * x[dst];
      }
      // Gauss-Seidel update of (I - P)x = b restricted to unknown states;
      // prob01 guarantees self < 1 here.
      const double next = acc / (1.0 - self);
      residual = std::max(residual, std::abs(next - x[s]));
      x[s] = next;
    }
    if (residual < tol) break;
  }
  if (residual >= tol) throw ConvergenceError(iterations, residual);
  if (info) *info = SolveInfo{iterations + 1, residual};
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
  return x;
}

std::vector<double> until_prob_direct(const dtmc::Dtmc& d, const StateSet& phi1,
                                      const StateSet& phi2) {
  if (d.n_states > 200)
    throw std::invalid_argument("dense solve reserved for small chains");
  const auto [prob0, prob1] = prob01(d, phi1, phi2);
  std::vector<int> unknown;
  std::vector<int> index(d.n_states, -1);
  for (int s = 0; s < d.n_states; ++s)
    if (!prob0[s] && !prob1[s]) {
      index[s] = static_cast<int>(unknown.size());
      unknown.push_back(s);
    }

  std::vector<double> x(d.n_states, 0.0);
  for (int s = 0; s < d.n_states; ++s)
    if (prob1[s]) x[s] = 1.0;
  if (unknown.empty()) return x;

  const auto rows = d.rows();
  const int m = static_cast<int>(unknown.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    for (const auto& [dst, p] : rows[unknown[i]]) {
      if (index[dst] >= 0) a(i, index[dst]) -= p;
      else if (prob1[dst]) b(i) += p;
    }
  }
  const Eigen::VectorXd sol = a.partialPivLu().solve(b);
  for (int i = 0; i < m; ++i) x[unknown[i]] = std::clamp(sol(i), 0.0, 1.0);
  return x;
}

std::vector<double> bounded_until_prob(const dtmc::Dtmc& d, const StateSet& phi1,
                                       const StateSet& phi2, int k) {
  if (k < 0) throw std::invalid_argument("step bound must be non-negative");
  const auto rows = d.rows();
  std::vector<double> x(d.n_states, 0.0);
  for (int s = 0; s < d.n_states; ++s)
    if (phi2[s]) x[s] = 1.0;
  std::vector<double> next(d.n_states, 0.0);
  for (int step = 0; step < k; ++step) {
    for (int s = 0; s < d.n_states; ++s) {
      if (phi2[s]) { next[s] = 1.0; continue; }
      if (!phi1[s]) { next[s] = 0.0; continue; }
      double acc = 0.0;
      for (const auto& [dst, p] : rows[s]) acc += p * x[dst];
      next[s] = acc;
    }
    x.swap(next);
  }
  return x;
}

std::vector<double> next_prob(const dtmc::Dtmc& d, const StateSet& phi) {
  const auto rows = d.rows();
  std::vector<double> x(d.n_states, 0.0);
  for (int s = 0; s < d.n_states; ++s) {
    double acc = 0.0;
    for (const auto& [dst, p] : rows[s])
      if (phi[dst]) acc += p;
    x[s] = acc;
  }
  return x;
}

std::vector<int> scc_components(const dtmc::Dtmc& d, int* component_count) {
  const auto rowlists = d.rows();
  std::vector<std::vector<int>> succ(d.n_states);
  for (int s = 0; s < d.n_states; ++s)
    for (const auto& [dst, p] : rowlists[s]) succ[s].push_back(dst);

  // Iterative Tarjan; components are numbered in reverse topological order
  // of discovery (a component's successors get smaller numbers).
  std::vector<int> comp(d.n_states, -1), low(d.n_states, 0), disc(d.n_states, -1);
  std::vector<char> on_stack(d.n_states, 0);
  std::vector<int> stack;
  int time = 0, count = 0;

  struct Frame { int state; std::size_t child; };
  std::vector<Frame> call;

  for (int root = 0; root < d.n_states; ++root) {
    if (disc[root] != -1) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      Frame& f = call.back();
      const int s = f.state;
      if (f.child == 0) {
        disc[s] = low[s] = time++;
        stack.push_back(s);
        on_stack[s] = 1;
      }
      bool descended = false;
      while (f.child < succ[s].size()) {
        const int t = succ[s][f.child++];
        if (disc[t] == -1) {
          call.push_back({t, 0});
          descended = true;
          break;
        }
        if (on_stack[t]) low[s] = std::min(low[s], disc[t]);
      }
      if (descended) continue;
      if (low[s] == disc[s]) {
        while (true) {
          const int t = stack.back();
          stack.pop_back();
          on_stack[t] = 0;
          comp[t] = count;
          if (t == s) break;
        }
        ++count;
      }
      call.pop_back();
      if (!call.empty()) {
        const int parent = call.back().state;
        low[parent] = std::min(low[parent], low[s]);
      }
    }
  }
  if (component_count) *component_count = count;
  return comp;
}

StateSet bscc_states(const dtmc::Dtmc& d) {
  int count = 0;
  const std::vector<int> comp = scc_components(d, &count);
  std::vector<char> has_exit(count, 0);
  for (const dtmc::Transition& t : d.transitions)
    if (comp[t.src] != comp[t.dst]) has_exit[comp[t.src]] = 1;
  StateSet out(d.n_states, 0);
  for (int s = 0; s < d.n_states; ++s)
    if (!has_exit[comp[s]]) out[s] = 1;
  return out;
}

StateSet qualitative_gf(const dtmc::Dtmc& d, const StateSet& targets) {
  if (static_cast<int>(targets.size()) != d.n_states)
    throw std::invalid_argument("state set size mismatch");
  int count = 0;
  const std::vector<int> comp = scc_components(d, &count);
  std::vector<char> has_exit(count, 0), has_target(count, 0);
  for (const dtmc::Transition& t : d.transitions)
    if (comp[t.src] != comp[t.dst]) has_exit[comp[t.src]] = 1;
  for (int s = 0; s < d.n_states; ++s)
    if (targets[s]) has_target[comp[s]] = 1;

  // A state fails iff it can reach a bottom component with no target state.
  StateSet bad(d.n_states, 0);
  for (int s = 0; s < d.n_states; ++s)
    if (!has_exit[comp[s]] && !has_target[comp[s]]) bad[s] = 1;
  StateSet everywhere(d.n_states, 1);
  return complement(backward_reach(d, bad, everywhere));
}

namespace {

StateSet eval_states(const dtmc::Dtmc& d, const Formula& f, const CheckOptions& opts,
                     SolveInfo& solver);

std::vector<double> eval_path(const dtmc::Dtmc& d, const PathFormula& p,
                              const CheckOptions& opts, SolveInfo& solver) {
  switch (p.kind) {
    case PathKind::Next:
      return next_prob(d, eval_states(d, *p.right, opts, solver));
    case PathKind::BoundedUntil:
      return bounded_until_prob(d, eval_states(d, *p.left, opts, solver),
                                eval_states(d, *p.right, opts, solver), p.step_bound);
    case PathKind::Until: {
      SolveInfo info;
      auto v = until_prob(d, eval_states(d, *p.left, opts, solver),
                          eval_states(d, *p.right, opts, solver), opts.tol,
                          opts.max_iter, &info);
      solver.iterations += info.iterations;
      solver.residual = std::max(solver.residual, info.residual);
      return v;
    }
    case PathKind::GloballyEventually: {
      // Mass of runs that end up in a bottom component containing a target:
      // reach any such component's state.
      const StateSet targets = eval_states(d, *p.right, opts, solver);
      int count = 0;
      const std::vector<int> comp = scc_components(d, &count);
      std::vector<char> has_exit(count, 0), has_target(count, 0);
      for (const dtmc::Transition& t : d.transitions)
        if (comp[t.src] != comp[t.dst]) has_exit[comp[t.src]] = 1;
      for (int s = 0; s < d.n_states; ++s)
        if (targets[s]) has_target[comp[s]] = 1;
      StateSet good(d.n_states, 0);
      for (int s = 0; s < d.n_states; ++s)
        if (!has_exit[comp[s]] && has_target[comp[s]]) good[s] = 1;
      StateSet everywhere(d.n_states, 1);
      SolveInfo info;
      auto v = until_prob(d, everywhere, good, opts.tol, opts.max_iter, &info);
      solver.iterations += info.iterations;
      solver.residual = std::max(solver.residual, info.residual);
      return v;
    }
  }
  throw std::logic_error("unhandled path kind");
}

bool meets_bound(double p, Bound bound, double value, double tolerance) {
  if (std::abs(p - value) < tolerance) p = value;  // snap before comparing
  switch (bound) {
    case Bound::Less: return p < value;
    case Bound::LessEq: return p <= value;
    case Bound::Greater: return p > value;
    case Bound::GreaterEq: return p >= value;
    case Bound::Query: break;
  }
  throw std::logic_error("query has no bound");
}

StateSet eval_prob_bounded(const dtmc::Dtmc& d, const Formula& f,
                           const CheckOptions& opts, SolveInfo& solver) {
  if (f.path.kind == PathKind::GloballyEventually) {
    // P>=1 [ G F phi ] is decided graph-qualitatively, no numerics involved.
    return qualitative_gf(d, eval_states(d, *f.path.right, opts, solver));
  }
  const std::vector<double> probs = eval_path(d, f.path, opts, solver);
  StateSet out(d.n_states, 0);
  for (int s = 0; s < d.n_states; ++s)
    out[s] = meets_bound(probs[s], f.bound, f.bound_value, opts.bound_tolerance);
  return out;
}

StateSet eval_states(const dtmc::Dtmc& d, const Formula& f, const CheckOptions& opts,
                     SolveInfo& solver) {
  switch (f.kind) {
    case Formula::Kind::True: return StateSet(d.n_states, 1);
    case Formula::Kind::Atom: {
      auto it = d.labels.find(f.atom);
      if (it == d.labels.end())
        throw std::invalid_argument("unknown atom \"" + f.atom + "\"");
      StateSet out(d.n_states, 0);
      for (int s : it->second) out[s] = 1;
      return out;
    }
    case Formula::Kind::Not: return complement(eval_states(d, *f.lhs, opts, solver));
    case Formula::Kind::And: {
      StateSet a = eval_states(d, *f.lhs, opts, solver);
      const StateSet b = eval_states(d, *f.rhs, opts, solver);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && b[i];
      return a;
    }
    case Formula::Kind::Or: {
      StateSet a = eval_states(d, *f.lhs, opts, solver);
      const StateSet b = eval_states(d, *f.rhs, opts, solver);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] || b[i];
      return a;
    }
    case Formula::Kind::Prob:
      if (f.bound == Bound::Query)
        throw std::invalid_argument("P=? cannot be nested inside a state formula");
      return eval_prob_bounded(d, f, opts, solver);
  }
  throw std::logic_error("unhandled formula kind");
}

}  // namespace

CheckResult check(const dtmc::Dtmc& d, const Formula& f, const CheckOptions& opts) {
  CheckResult result;
  if (f.kind == Formula::Kind::Prob && f.bound == Bound::Query) {
    result.is_boolean = false;
    result.probabilities = eval_path(d, f.path, opts, result.solver);
    result.initial_probability = result.probabilities[d.initial];
    result.initial_truth = result.initial_probability >= 1.0 - opts.bound_tolerance;
    return result;
  }
  result.is_boolean = true;
  result.truth = eval_states(d, f, opts, result.solver);
  result.initial_truth = result.truth[d.initial];
  result.initial_probability = result.initial_truth ? 1.0 : 0.0;
  return result;
}

}  // namespace rlsafe::pctl
