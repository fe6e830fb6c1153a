#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rlsafe/dtmc.hpp"

namespace rlsafe::pctl {

/// How a probability operator constrains the computed probability.
enum class Bound { Less, LessEq, GreaterEq, Greater, Query };

enum class PathKind { Next, Until, BoundedUntil, GloballyEventually };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct PathFormula {
  PathKind kind = PathKind::Until;
  FormulaPtr left;    // unused for Next / GloballyEventually
  FormulaPtr right;   // the target subformula
  int step_bound = 0; // BoundedUntil only
};

/// State-formula AST for the supported fragment:
///   Phi ::= true | atom | !Phi | Phi & Phi | Phi | Phi | P~p [ path ]
///   path ::= X Phi | Phi U Phi | Phi U<=k Phi | G F Phi
/// F / F<=k desugar to until from true; G F is only admitted under P>=1
/// or P=?.
struct Formula {
  enum class Kind { True, Atom, Not, And, Or, Prob };

  Kind kind = Kind::True;
  std::string atom;          // Atom
  FormulaPtr lhs, rhs;       // Not (lhs), And/Or
  Bound bound = Bound::Query;
  double bound_value = 0.0;  // Prob with a comparison bound
  PathFormula path;          // Prob
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at offset " + std::to_string(pos) + ")"),
        position(pos) {}
  std::size_t position;
};

/// Parses a property string like "P=? [ F<=100 goal ]". Atoms are label
/// names, optionally double-quoted; "Agent=g" is accepted as an alias for
/// the goal label. Throws ParseError on bad syntax and on G F appearing
/// anywhere other than directly under P>=1 / P=?.
FormulaPtr parse(std::string_view text);

std::string to_string(const Formula& f);
bool equal(const Formula& a, const Formula& b);

using StateSet = std::vector<char>;  // one flag per state

struct SolveInfo {
  long iterations = 0;
  double residual = 0.0;
};

struct ConvergenceError : std::runtime_error {
  ConvergenceError(long iterations, double residual)
      : std::runtime_error("linear solve did not converge after " +
                           std::to_string(iterations) +
                           " iterations (residual " + std::to_string(residual) + ")"),
        iterations(iterations), residual(residual) {}
  long iterations;
  double residual;
};

/// Graph precomputation for unbounded until: states that reach phi2 through
/// phi1 with probability exactly 0, respectively exactly 1.
std::pair<StateSet, StateSet> prob01(const dtmc::Dtmc& d, const StateSet& phi1,
                                     const StateSet& phi2);

/// P(phi1 U phi2) per state via Gauss-Seidel sweeps after prob01 fixes the
/// exact 0/1 states. Throws ConvergenceError past max_iter sweeps.
std::vector<double> until_prob(const dtmc::Dtmc& d, const StateSet& phi1,
                               const StateSet& phi2, double tol = 1e-10,
                               long max_iter = 1000000, SolveInfo* info = nullptr);

/// Same quantity through a dense LU factorization; n_states must stay small
/// (<= 200). Kept as an independent route for cross-checking the iterative
/// solver.
std::vector<double> until_prob_direct(const dtmc::Dtmc& d, const StateSet& phi1,
                                      const StateSet& phi2);

/// P(phi1 U<=k phi2) per state by k backward recurrences.
std::vector<double> bounded_until_prob(const dtmc::Dtmc& d, const StateSet& phi1,
                                       const StateSet& phi2, int k);

/// P(X phi) per state: one matrix-vector product with the indicator.
std::vector<double> next_prob(const dtmc::Dtmc& d, const StateSet& phi);

/// Strongly connected components in topological order (Tarjan, iterative).
/// Returns component ids per state and the component count.
std::vector<int> scc_components(const dtmc::Dtmc& d, int* component_count);

/// States belonging to bottom SCCs (no edge leaving the component).
StateSet bscc_states(const dtmc::Dtmc& d);

/// Almost-sure repeated reachability: true for states from which every
/// reachable bottom SCC intersects the target set.
StateSet qualitative_gf(const dtmc::Dtmc& d, const StateSet& targets);

struct CheckOptions {
  double tol = 1e-10;
  long max_iter = 1000000;
  double bound_tolerance = 1e-9;  // |p - bound| below this snaps to equality
};

struct CheckResult {
  bool is_boolean = false;
  StateSet truth;                    // per state, boolean results
  std::vector<double> probabilities; // per state, query results
  bool initial_truth = false;
  double initial_probability = 0.0;
  SolveInfo solver;
};

/// Evaluates a formula bottom-up over the chain. Unknown atoms raise
/// std::invalid_argument naming the label.
CheckResult check(const dtmc::Dtmc& d, const Formula& f, const CheckOptions& opts = {});

}  // namespace rlsafe::pctl
