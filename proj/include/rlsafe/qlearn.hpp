#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "rlsafe/grid.hpp"
#include "rlsafe/rng.hpp"

namespace rlsafe::qlearn {

using grid::Action;
using grid::GridPos;

/// Action-value table keyed by an opaque integer state encoding. Entries
/// default to 0 until written, so a fresh table behaves as all-zero.
class QTable {
 public:
  double get(int state, Action a) const {
    auto it = rows_.find(state);
    return it == rows_.end() ? 0.0 : it->second[static_cast<int>(a)];
  }

  void set(int state, Action a, double v) { rows_[state][static_cast<int>(a)] = v; }

  std::array<double, grid::kActionCount> row(int state) const {
    auto it = rows_.find(state);
    return it == rows_.end() ? std::array<double, grid::kActionCount>{} : it->second;
  }

  /// Greedy action; ties go to the lowest action index.
  Action argmax(int state) const {
    auto r = row(state);
    int best = 0;
    for (int i = 1; i < grid::kActionCount; ++i)
      if (r[i] > r[best]) best = i;
    return static_cast<Action>(best);
  }

  double max_value(int state) const {
    auto r = row(state);
    double best = r[0];
    for (int i = 1; i < grid::kActionCount; ++i)
      if (r[i] > best) best = r[i];
    return best;
  }

  std::size_t touched_states() const { return rows_.size(); }

  bool operator==(const QTable&) const = default;

  /// CSV rows of (state_key, action, value), sorted, full precision.
  void save_csv(std::ostream& os) const;
  static QTable load_csv(std::istream& is);

 private:
  std::unordered_map<int, std::array<double, grid::kActionCount>> rows_;
};

struct EpsilonSchedule {
  double initial = 1.0;
  double decay = 0.997;  // multiplicative, applied once per episode
  double floor = 0.01;

  double at(int episode) const;
  void validate() const;
};

struct LearnerConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  EpsilonSchedule epsilon;

  void validate() const;
};

/// With probability epsilon a uniformly random action, otherwise the greedy
/// one (lowest index on ties).
Action select_epsilon_greedy(const QTable& q, int state, double epsilon, Rng& rng);

/// One tabular update: Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
/// When the transition is terminal the lookahead term is 0.
void q_update(QTable& q, int state, Action a, double reward, int next_state,
              bool next_terminal, double alpha, double gamma);

enum class AdversaryKind { Patrol3, Patrol5, Learning, LearningWithObservations };

bool adversary_is_patrol(AdversaryKind kind);
const char* adversary_name(AdversaryKind kind);

/// Position of a patrolling adversary. Patrollers are static adversaries:
/// they advance one cell along their route per episode and hold that cell
/// for the whole episode, so the tick is an episode counter. The route runs
/// back and forth with endpoints visited once per period (period 4 for the
/// 3-cell patrol, 8 for the 5-cell one).
GridPos patrol_position(AdversaryKind kind, long tick);

GridPos adversary_start(AdversaryKind kind);

/// State encoding for a learning adversary: the plain learner sees only its
/// own cell (36 states); with observations the key also packs the 4-bit
/// adjacency mask of the agent around it (36 x 16 states, bit i = action i).
int adversary_state_key(AdversaryKind kind, GridPos own, GridPos agent);

/// Chooses a learning adversary's move (epsilon-greedy on its own table).
/// Patrollers do not act; their position comes from patrol_position.
Action adversary_action(AdversaryKind kind, GridPos own, GridPos agent,
                        const QTable& q, double epsilon, Rng& rng);

/// Finite deterministic MDP, enough to describe the adversary-free grid.
struct DeterministicMdp {
  int n_states = 0;
  std::vector<char> terminal;
  std::vector<std::array<int, grid::kActionCount>> next;
  std::vector<std::array<double, grid::kActionCount>> reward;
};

/// The adversary-free grid task: -1 per move, +100 for the move that enters
/// the goal, goal absorbing.
DeterministicMdp goal_grid_mdp(GridPos goal);

/// Bellman backups to a sup-norm fixed point within tol. Throws on
/// non-convergence within max_iter sweeps.
std::vector<double> value_iteration(const DeterministicMdp& mdp, double gamma,
                                    double tol, int max_iter = 1000000);

/// Greedy policy extraction with a tie tolerance: actions whose backed-up
/// value is within tie_tol of the best count as tied and the lowest index
/// wins.
std::vector<Action> greedy_policy(const DeterministicMdp& mdp,
                                  const std::vector<double>& values, double gamma,
                                  double tie_tol = 1e-6);

}  // namespace rlsafe::qlearn
