#include "rlsafe/qlearn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rlsafe::qlearn {

namespace {

void write_double(std::ostream& os, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

void QTable::save_csv(std::ostream& os) const {
  os << "state_key,action,value\n";
  std::map<int, std::array<double, grid::kActionCount>> sorted(rows_.begin(), rows_.end());
  for (const auto& [state, row] : sorted) {
    for (int a = 0; a < grid::kActionCount; ++a) {
      os << state << ',' << a << ',';
      write_double(os, row[a]);
      os << '\n';
    }
  }
}

QTable QTable::load_csv(std::istream& is) {
  QTable q;
  std::string line;
  if (!std::getline(is, line) || line.rfind("state_key", 0) != 0)
    throw std::runtime_error("q-table csv: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string state_s, action_s, value_s;
    if (!std::getline(ls, state_s, ',') || !std::getline(ls, action_s, ',') ||
        !std::getline(ls, value_s))
      throw std::runtime_error("q-table csv: malformed row: " + line);
    int state = std::stoi(state_s);
    int action = std::stoi(action_s);
    if (action < 0 || action >= grid::kActionCount)
      throw std::runtime_error("q-table csv: bad action index");
    q.set(state, static_cast<Action>(action), std::stod(value_s));
  }
  return q;
}

double EpsilonSchedule::at(int episode) const {
  double eps = initial * std::pow(decay, episode);
  return std::max(eps, floor);
}

void EpsilonSchedule::validate() const {
  if (initial < 0.0 || initial > 1.0) throw std::invalid_argument("epsilon initial outside [0,1]");
  if (decay <= 0.0 || decay > 1.0) throw std::invalid_argument("epsilon decay outside (0,1]");
  if (floor < 0.0 || floor > 1.0) throw std::invalid_argument("epsilon floor outside [0,1]");
}

void LearnerConfig::validate() const {
  if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside (0,1]");
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma outside [0,1)");
  epsilon.validate();
}

Action select_epsilon_greedy(const QTable& q, int state, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon)
    return static_cast<Action>(rng.uniform_int(grid::kActionCount));
  return q.argmax(state);
}

void q_update(QTable& q, int state, Action a, double reward, int next_state,
              bool next_terminal, double alpha, double gamma) {
  const double lookahead = next_terminal ? 0.0 : q.max_value(next_state);
  const double old = q.get(state, a);
  q.set(state, a, old + alpha * (reward + gamma * lookahead - old));
}

bool adversary_is_patrol(AdversaryKind kind) {
  return kind == AdversaryKind::Patrol3 || kind == AdversaryKind::Patrol5;
}

const char* adversary_name(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::Patrol3: return "patrol3";
    case AdversaryKind::Patrol5: return "patrol5";
    case AdversaryKind::Learning: return "learning";
    case AdversaryKind::LearningWithObservations: return "learning-obs";
  }
  return "?";
}

namespace {

constexpr std::array<GridPos, 3> kPatrol3Cells{{{5, 4}, {4, 4}, {4, 5}}};
constexpr std::array<GridPos, 5> kPatrol5Cells{{{5, 4}, {4, 4}, {4, 5}, {3, 5}, {3, 4}}};

template <std::size_t N>
GridPos reflect_cycle(const std::array<GridPos, N>& cells, long tick) {
  // Back-and-forth over N cells: period 2(N-1), endpoints hit once.
  const long period = 2 * (static_cast<long>(N) - 1);
  long phase = tick % period;
  if (phase >= static_cast<long>(N)) phase = period - phase;
  return cells[static_cast<std::size_t>(phase)];
}

}  // namespace

GridPos patrol_position(AdversaryKind kind, long tick) {
  if (tick < 0) throw std::invalid_argument("patrol tick must be non-negative");
  switch (kind) {
    case AdversaryKind::Patrol3: return reflect_cycle(kPatrol3Cells, tick);
    case AdversaryKind::Patrol5: return reflect_cycle(kPatrol5Cells, tick);
    default: throw std::invalid_argument("patrol position queried for a learning adversary");
  }
}

GridPos adversary_start(AdversaryKind kind) {
  return adversary_is_patrol(kind) ? patrol_position(kind, 0) : GridPos{0, 0};
}

int adversary_state_key(AdversaryKind kind, GridPos own, GridPos agent) {
  if (!own.on_grid() || !agent.on_grid())
    throw std::invalid_argument("positions must be on grid");
  if (kind == AdversaryKind::Learning) return own.index();
  if (kind == AdversaryKind::LearningWithObservations) {
    const grid::Observation obs = grid::observe(own, agent);
    int mask = 0;
    for (int i = 0; i < grid::kActionCount; ++i)
      if (obs.neighbor[i]) mask |= 1 << i;
    return own.index() * 16 + mask;
  }
  throw std::invalid_argument("state key queried for a patrol adversary");
}

Action adversary_action(AdversaryKind kind, GridPos own, GridPos agent,
                        const QTable& q, double epsilon, Rng& rng) {
  if (adversary_is_patrol(kind))
    throw std::invalid_argument("patrol adversaries do not take actions");
  return select_epsilon_greedy(q, adversary_state_key(kind, own, agent), epsilon, rng);
}

DeterministicMdp goal_grid_mdp(GridPos goal) {
  if (!goal.on_grid()) throw std::invalid_argument("goal off grid");
  DeterministicMdp mdp;
  mdp.n_states = grid::kCellCount;
  mdp.terminal.assign(grid::kCellCount, 0);
  mdp.terminal[goal.index()] = 1;
  mdp.next.resize(grid::kCellCount);
  mdp.reward.resize(grid::kCellCount);
  for (int s = 0; s < grid::kCellCount; ++s) {
    const GridPos pos = GridPos::from_index(s);
    for (int a = 0; a < grid::kActionCount; ++a) {
      const GridPos dst = grid::apply_move(pos, static_cast<Action>(a));
      mdp.next[s][a] = dst.index();
      mdp.reward[s][a] = dst == goal ? grid::kGoalReward : grid::kStepReward;
    }
  }
  return mdp;
}

std::vector<double> value_iteration(const DeterministicMdp& mdp, double gamma,
                                    double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  std::vector<double> values(mdp.n_states, 0.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    double diff = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[s]) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < grid::kActionCount; ++a) {
        const int ns = mdp.next[s][a];
        const double backed = mdp.reward[s][a] + (mdp.terminal[ns] ? 0.0 : gamma * values[ns]);
        best = std::max(best, backed);
      }
      diff = std::max(diff, std::abs(best - values[s]));
      values[s] = best;
    }
    if (diff < tol) return values;
  }
  throw std::runtime_error("value iteration did not converge");
}

std::vector<Action> greedy_policy(const DeterministicMdp& mdp,
                                  const std::vector<double>& values, double gamma,
                                  double tie_tol) {
  std::vector<Action> policy(mdp.n_states, Action::Right);
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.terminal[s]) continue;
    std::array<double, grid::kActionCount> backed{};
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid::kActionCount; ++a) {
      const int ns = mdp.next[s][a];
      backed[a] = mdp.reward[s][a] + (mdp.terminal[ns] ? 0.0 : gamma * values[ns]);
      best = std::max(best, backed[a]);
    }
    for (int a = 0; a < grid::kActionCount; ++a) {
      if (backed[a] >= best - tie_tol) {
        policy[s] = static_cast<Action>(a);
        break;
      }
    }
  }
  return policy;
}

}  // namespace rlsafe::qlearn
