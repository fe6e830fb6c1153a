#pragma once

#include <array>
#include <string>
#include <unordered_set>

#include "rlsafe/grid.hpp"
#include "rlsafe/qlearn.hpp"
#include "rlsafe/rng.hpp"

namespace rlsafe::defense {

using grid::Action;
using grid::GridPos;
using grid::Observation;

enum class PotentialKind { ManhattanToGoal, CollisionFreeProb };

enum class Mechanism { None, PbrsDistance, PbrsCollisionProb, QWithObservations, ModifiedQ };

const char* mechanism_name(Mechanism m);
Mechanism mechanism_from_name(const std::string& name);  // throws on unknown names
bool mechanism_is_pbrs(Mechanism m);
PotentialKind mechanism_potential(Mechanism m);

struct DefenseConfig {
  Mechanism mechanism = Mechanism::None;
  double adv_penalty = -100.0;
  /// Uses the raw distance as potential instead of its negation (the default
  /// potential grows toward the goal so shaping rewards progress).
  bool literal_distance_sign = false;

  void validate() const;
};

/// Per-cell move bookkeeping behind the collision-free-probability potential:
/// p_c(cell) = moves into a cell that did not collide / all moves into it,
/// and 1 for cells never entered.
class CollisionStats {
 public:
  void record_move(GridPos into, bool collided) {
    moves_[into.index()] += 1;
    if (!collided) clean_[into.index()] += 1;
  }

  int moves_into(GridPos cell) const { return moves_[cell.index()]; }
  int clean_moves_into(GridPos cell) const { return clean_[cell.index()]; }

  double collision_free_prob(GridPos cell) const {
    const int total = moves_[cell.index()];
    return total == 0 ? 1.0 : static_cast<double>(clean_[cell.index()]) / total;
  }

 private:
  std::array<int, grid::kCellCount> moves_{};
  std::array<int, grid::kCellCount> clean_{};
};

int manhattan(GridPos a, GridPos b);

/// Potential value of a state. The distance potential is -Manhattan(s, goal)
/// unless literal_sign asks for the unnegated form; the collision potential
/// scales the step's raw reward by the collision-free probability of s.
double potential(PotentialKind kind, GridPos s, GridPos goal, double raw_reward,
                 const CollisionStats& stats, bool literal_sign = false);

/// Potential-based shaping: r' = r + gamma * phi(s') - phi(s).
double shape_reward(double raw_reward, GridPos s, GridPos s_next, double gamma,
                    PotentialKind kind, GridPos goal, const CollisionStats& stats,
                    bool literal_sign = false);

/// Penalty overlay over the base action-value table. Entries not written
/// yet read through to the live base table, so the overlay view stays in
/// step with what the agent keeps learning; a penalty update materializes
/// just the punished entry. A penalty asserts "this move collides", so when
/// the agent later takes that move and survives, the entry relaxes back
/// toward the live value it shadows. Only the avoidance machinery writes
/// here: a fresh agent that never met an adversary has an empty overlay.
class ObsOverlay {
 public:
  double get(const qlearn::QTable& base, int state, Action a) const {
    auto it = rows_.find(state);
    const int idx = static_cast<int>(a);
    if (it == rows_.end() || !it->second.written[idx]) return base.get(state, a);
    return it->second.value[idx];
  }

  void set(int state, Action a, double v) {
    auto& row = rows_[state];
    row.written[static_cast<int>(a)] = 1;
    row.value[static_cast<int>(a)] = v;
  }

  /// Moves a penalized entry toward the live base value; no-op for entries
  /// never penalized.
  void relax(const qlearn::QTable& base, int state, Action a, double rate) {
    auto it = rows_.find(state);
    const int idx = static_cast<int>(a);
    if (it == rows_.end() || !it->second.written[idx]) return;
    it->second.value[idx] += rate * (base.get(state, a) - it->second.value[idx]);
  }

  Action argmax(const qlearn::QTable& base, int state) const {
    int best = 0;
    double best_value = get(base, state, static_cast<Action>(0));
    for (int a = 1; a < grid::kActionCount; ++a) {
      const double v = get(base, state, static_cast<Action>(a));
      if (v > best_value) {
        best_value = v;
        best = a;
      }
    }
    return static_cast<Action>(best);
  }

  double max_value(const qlearn::QTable& base, int state) const {
    return get(base, state, argmax(base, state));
  }

  /// Number of penalized entries; zero means the overlay was never touched.
  std::size_t written_entries() const {
    std::size_t n = 0;
    for (const auto& [state, row] : rows_)
      for (char w : row.written) n += w ? 1 : 0;
    return n;
  }

  bool operator==(const ObsOverlay&) const = default;

 private:
  struct Row {
    std::array<double, grid::kActionCount> value{};
    std::array<char, grid::kActionCount> written{};

    bool operator==(const Row&) const = default;
  };
  std::unordered_map<int, Row> rows_;
};

/// Observation-aware selection: exploration is plain epsilon-greedy; in
/// exploitation, when the greedy action would move into the adversary's
/// observed cell, the overlay entry for that action absorbs one penalty
/// update (reward adv_penalty, lookahead through the overlay view) and the
/// action is re-picked as the overlay view's argmax.
Action select_with_observations(const qlearn::QTable& q, ObsOverlay& q_obs,
                                const Observation& obs, double epsilon, Rng& rng,
                                double alpha, double gamma, double adv_penalty = -100.0);

/// Conservative selection: exploration unchanged; in exploitation the greedy
/// action is swapped for the second-best one when it would move into the
/// adversary's observed cell. Exactly one fallback step, no cascading.
Action select_modified(const qlearn::QTable& q, const Observation& obs, double epsilon,
                       Rng& rng);

/// Dispatches the agent's action choice for a mechanism/observation setting.
/// Observation-aware selection kicks in whenever the agent can see its
/// surroundings, unless the modified-selection mechanism replaces it.
Action select_action(const qlearn::QTable& q, ObsOverlay& q_obs, const Observation& obs,
                     bool observations, Mechanism mechanism, double epsilon, Rng& rng,
                     double alpha, double gamma, double adv_penalty);

}  // namespace rlsafe::defense
