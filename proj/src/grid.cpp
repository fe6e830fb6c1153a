#include "rlsafe/grid.hpp"

#include <sstream>
#include <stdexcept>

namespace rlsafe::grid {

char action_letter(Action a) {
  switch (a) {
    case Action::Right: return 'R';
    case Action::Up: return 'U';
    case Action::Down: return 'D';
    case Action::Left: return 'L';
  }
  return '?';
}

std::optional<Action> action_from_letter(char c) {
  switch (c) {
    case 'R': return Action::Right;
    case 'U': return Action::Up;
    case 'D': return Action::Down;
    case 'L': return Action::Left;
    default: return std::nullopt;
  }
}

std::string to_string(GridPos p) {
  return std::to_string(p.row) + "," + std::to_string(p.col);
}

const char* terminal_name(Terminal t) {
  switch (t) {
    case Terminal::None: return "none";
    case Terminal::Goal: return "goal";
    case Terminal::Collision: return "collision";
    case Terminal::Timeout: return "timeout";
  }
  return "?";
}

void EnvConfig::validate() const {
  if (!agent_start.on_grid()) throw std::invalid_argument("agent start off grid");
  if (!adversary_start.on_grid()) throw std::invalid_argument("adversary start off grid");
  if (!goal.on_grid()) throw std::invalid_argument("goal off grid");
  if (goal == agent_start) throw std::invalid_argument("goal equals agent start");
  if (timeout_steps <= 0) throw std::invalid_argument("timeout must be positive");
}

std::pair<GridPos, GridPos> reset(const EnvConfig& config) {
  config.validate();
  return {config.agent_start, config.adversary_start};
}

Observation observe(GridPos agent, GridPos adversary) {
  Observation obs;
  obs.self = agent;
  for (Action a : kAllActions) {
    GridPos target = apply_move(agent, a);
    if (target == agent) continue;  // wall clamp, nothing to see
    if (target == adversary) {
      obs.neighbor[static_cast<int>(a)] = true;
      obs.adversary_visible = true;
    }
  }
  return obs;
}

StepOutcome step(const EnvConfig& config, GridPos agent, GridPos adversary,
                 Action agent_action, Action adversary_action, int step_index) {
  if (!adversary.on_grid()) throw std::invalid_argument("positions must be on grid");
  return step_to(config, agent, apply_move(adversary, adversary_action), agent_action,
                 step_index);
}

StepOutcome step_to(const EnvConfig& config, GridPos agent, GridPos next_adversary,
                    Action agent_action, int step_index) {
  if (!agent.on_grid() || !next_adversary.on_grid())
    throw std::invalid_argument("positions must be on grid");
  if (step_index < 0 || step_index >= config.timeout_steps)
    throw std::invalid_argument("step index outside episode");

  StepOutcome out;
  out.next_agent = apply_move(agent, agent_action);
  out.next_adversary = next_adversary;

  const bool collision = out.next_agent == out.next_adversary;
  if (collision) {
    out.terminal = Terminal::Collision;
    out.agent_reward = kCollisionReward;
    out.adversary_reward = kAdversaryCollisionReward;
  } else if (out.next_agent == config.goal) {
    out.terminal = Terminal::Goal;
    out.agent_reward = kGoalReward;
  } else {
    out.agent_reward = kStepReward;
  }
  return out;
}

std::string EpisodeRecord::to_string() const {
  std::ostringstream os;
  os << "step agent adversary action raw shaped\n";
  int t = 0;
  for (const EpisodeStep& s : steps) {
    os << t++ << ' ' << grid::to_string(s.agent) << ' '
       << grid::to_string(s.adversary) << ' ' << action_letter(s.agent_action)
       << ' ' << s.raw_reward << ' ' << s.shaped_reward << '\n';
  }
  os << "cause " << terminal_name(cause) << '\n';
  return os.str();
}

}  // namespace rlsafe::grid
