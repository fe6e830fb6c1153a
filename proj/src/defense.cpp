#include "rlsafe/defense.hpp"

#include <cmath>
#include <stdexcept>

namespace rlsafe::defense {

const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::None: return "none";
    case Mechanism::PbrsDistance: return "pbrs-distance";
    case Mechanism::PbrsCollisionProb: return "pbrs-collision";
    case Mechanism::QWithObservations: return "q-obs";
    case Mechanism::ModifiedQ: return "modified-q";
  }
  return "?";
}

Mechanism mechanism_from_name(const std::string& name) {
  if (name == "none") return Mechanism::None;
  if (name == "pbrs-distance") return Mechanism::PbrsDistance;
  if (name == "pbrs-collision") return Mechanism::PbrsCollisionProb;
  if (name == "q-obs") return Mechanism::QWithObservations;
  if (name == "modified-q") return Mechanism::ModifiedQ;
  throw std::invalid_argument("unknown defense mechanism: " + name);
}

bool mechanism_is_pbrs(Mechanism m) {
  return m == Mechanism::PbrsDistance || m == Mechanism::PbrsCollisionProb;
}

PotentialKind mechanism_potential(Mechanism m) {
  if (m == Mechanism::PbrsDistance) return PotentialKind::ManhattanToGoal;
  if (m == Mechanism::PbrsCollisionProb) return PotentialKind::CollisionFreeProb;
  throw std::invalid_argument("mechanism has no potential function");
}

void DefenseConfig::validate() const {
  if (adv_penalty >= 0.0) throw std::invalid_argument("adversary penalty must be negative");
}

int manhattan(GridPos a, GridPos b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

double potential(PotentialKind kind, GridPos s, GridPos goal, double raw_reward,
                 const CollisionStats& stats, bool literal_sign) {
  if (!s.on_grid()) throw std::invalid_argument("potential queried off grid");
  switch (kind) {
    case PotentialKind::ManhattanToGoal: {
      const double d = manhattan(s, goal);
      return literal_sign ? d : -d;
    }
    case PotentialKind::CollisionFreeProb:
      return raw_reward * stats.collision_free_prob(s);
  }
  return 0.0;
}

double shape_reward(double raw_reward, GridPos s, GridPos s_next, double gamma,
                    PotentialKind kind, GridPos goal, const CollisionStats& stats,
                    bool literal_sign) {
  const double phi_s = potential(kind, s, goal, raw_reward, stats, literal_sign);
  const double phi_next = potential(kind, s_next, goal, raw_reward, stats, literal_sign);
  return raw_reward + gamma * phi_next - phi_s;
}

Action select_with_observations(const qlearn::QTable& q, ObsOverlay& q_obs,
                                const Observation& obs, double epsilon, Rng& rng,
                                double alpha, double gamma, double adv_penalty) {
  if (rng.uniform() < epsilon)
    return static_cast<Action>(rng.uniform_int(grid::kActionCount));

  const int state = obs.self.index();
  const Action act = q.argmax(state);
  if (!obs.neighbor[static_cast<int>(act)]) return act;

  // The greedy move would step into the adversary: penalize it in the
  // overlay and re-pick from the overlay view.
  const int target = grid::apply_move(obs.self, act).index();
  const double old = q_obs.get(q, state, act);
  const double lookahead = q_obs.max_value(q, target);
  q_obs.set(state, act, old + alpha * (adv_penalty + gamma * lookahead - old));
  return q_obs.argmax(q, state);
}

Action select_modified(const qlearn::QTable& q, const Observation& obs, double epsilon,
                       Rng& rng) {
  if (rng.uniform() < epsilon)
    return static_cast<Action>(rng.uniform_int(grid::kActionCount));

  const int state = obs.self.index();
  const Action act = q.argmax(state);
  if (!obs.neighbor[static_cast<int>(act)]) return act;

  const auto row = q.row(state);
  int second = -1;
  for (int a = 0; a < grid::kActionCount; ++a) {
    if (a == static_cast<int>(act)) continue;
    if (second < 0 || row[a] > row[second]) second = a;
  }
  return static_cast<Action>(second);
}

Action select_action(const qlearn::QTable& q, ObsOverlay& q_obs, const Observation& obs,
                     bool observations, Mechanism mechanism, double epsilon, Rng& rng,
                     double alpha, double gamma, double adv_penalty) {
  if (mechanism == Mechanism::ModifiedQ) return select_modified(q, obs, epsilon, rng);
  if (observations || mechanism == Mechanism::QWithObservations)
    return select_with_observations(q, q_obs, obs, epsilon, rng, alpha, gamma, adv_penalty);
  return qlearn::select_epsilon_greedy(q, obs.self.index(), epsilon, rng);
}

}  // namespace rlsafe::defense
