#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rlsafe/defense.hpp"
#include "rlsafe/grid.hpp"
#include "rlsafe/qlearn.hpp"
#include "rlsafe/rng.hpp"

namespace rlsafe::dtmc {

struct Transition {
  int src = 0;
  int dst = 0;
  double prob = 0.0;

  bool operator==(const Transition&) const = default;
};

/// Discrete-time Markov chain: a sparse row-stochastic matrix plus a
/// labelling of states with atomic propositions. Rows are kept sorted by
/// (src, dst) with duplicates merged; states without outgoing transitions
/// carry an implicit self-loop made explicit at construction.
struct Dtmc {
  int n_states = 0;
  int initial = 0;
  std::vector<Transition> transitions;
  std::map<std::string, std::set<int>> labels;

  bool operator==(const Dtmc&) const = default;

  /// Successor lists indexed by source state.
  std::vector<std::vector<std::pair<int, double>>> rows() const;
  /// Predecessor lists indexed by destination state.
  std::vector<std::vector<int>> predecessors() const;

  const std::set<int>& label_states(const std::string& name) const;
};

/// Normalizing constructor: merges duplicate (src,dst) entries, sorts, and
/// gives every outdegree-0 state a probability-1 self-loop.
Dtmc make_dtmc(int n_states, int initial, std::vector<Transition> transitions,
               std::map<std::string, std::set<int>> labels);

enum class ViolationKind { RowSum, ProbRange, DanglingTransition, DanglingLabel, BadInitial };

struct Violation {
  ViolationKind kind;
  int state = -1;
  std::string message;
};

/// Structural checks: row sums within 1e-9 of 1, probabilities in (0,1],
/// transition endpoints and labelled states inside [0, n_states), valid
/// initial state. Reports instead of throwing.
std::vector<Violation> validate(const Dtmc& d);

struct ExtractionMode {
  enum class Kind { Empirical, Analytic };
  Kind kind = Kind::Empirical;
  int episodes = 100;     // empirical: number of evaluation episodes
  double epsilon = 0.0;   // analytic: exploration mass spread over actions

  void validate() const;
};

/// A trained agent with learning frozen: tables are read-only from here on
/// (observation-aware selection works on a scratch copy of the overlay).
struct FrozenAgent {
  qlearn::QTable q;
  defense::ObsOverlay q_obs;
  bool observations = false;
  defense::Mechanism mechanism = defense::Mechanism::None;
  double epsilon = 0.0;
  double alpha = 0.1;
  double gamma = 0.9;
  double adv_penalty = -100.0;
};

struct FrozenAdversary {
  qlearn::AdversaryKind kind = qlearn::AdversaryKind::Learning;
  qlearn::QTable q;              // learning kinds only
  double epsilon = 0.0;
  long patrol_tick_origin = 0;   // episode count the patrol route continues from
};

/// Bookkeeping from empirical extraction, used by flow-conservation checks.
struct ExtractionStats {
  std::vector<std::vector<long>> counts;  // [src][dst] observed transitions
  std::vector<long> episode_starts;       // per state
  std::vector<long> episode_ends;         // per state (any termination cause)
};

/// Builds the chain of agent locations induced by a frozen policy.
///
/// Empirical mode co-simulates the frozen agent and adversary for a number
/// of evaluation episodes and normalizes the observed location-to-location
/// counts per source. Analytic mode takes the epsilon-greedy action
/// distribution of the frozen table at each cell and pushes it through the
/// move function, with no adversary involved.
///
/// Labels: "init" on the start cell, "goal" on the goal cell (forced
/// absorbing), "collision" on cells where an evaluation episode ended in a
/// collision. States never left during evaluation become absorbing.
Dtmc extract(const FrozenAgent& agent, const grid::EnvConfig& env,
             const FrozenAdversary& adversary, const ExtractionMode& mode, Rng& rng,
             ExtractionStats* stats = nullptr);

/// Explicit-state export: "<prefix>.tra" holds "<n_states> <n_transitions>"
/// followed by "src dst prob" rows sorted by (src, dst); "<prefix>.lab"
/// declares label ids (0="init" 1="goal" 2="collision", further labels
/// name-sorted from 3) and lists "<state>: <ids...>" for labelled states.
/// Validation failures abort before anything is written.
void export_explicit(const Dtmc& d, const std::string& path_prefix);

/// Reads a .tra/.lab pair back; the initial state is the first "init"
/// labelled state (0 when absent).
Dtmc import_explicit(const std::string& path_prefix);

/// Single-file archival dump (header, transition lines, label lines).
void write_archive(const Dtmc& d, const std::string& path);
Dtmc read_archive(const std::string& path);

/// Shortest-round-trip decimal form, always with a decimal point or
/// exponent so probabilities read back as floating point.
std::string format_probability(double p);

}  // namespace rlsafe::dtmc
