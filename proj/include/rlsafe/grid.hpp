#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace rlsafe::grid {

inline constexpr int kGridSize = 6;
inline constexpr int kCellCount = kGridSize * kGridSize;

inline constexpr double kStepReward = -1.0;
inline constexpr double kGoalReward = 100.0;
inline constexpr double kCollisionReward = -100.0;
inline constexpr double kAdversaryCollisionReward = 100.0;

/// Compass moves with a stable integer encoding used by tables and files.
enum class Action : int { Right = 0, Up = 1, Down = 2, Left = 3 };

inline constexpr int kActionCount = 4;
inline constexpr std::array<Action, kActionCount> kAllActions{
    Action::Right, Action::Up, Action::Down, Action::Left};

char action_letter(Action a);
std::optional<Action> action_from_letter(char c);

/// Cell coordinates, row 0 at the top. (0,0) is the upper-left corner and
/// (5,5) the lower-right one.
struct GridPos {
  int row = 0;
  int col = 0;

  bool on_grid() const {
    return row >= 0 && row < kGridSize && col >= 0 && col < kGridSize;
  }
  /// Row-major cell index in [0, 36).
  int index() const { return row * kGridSize + col; }
  static GridPos from_index(int i) { return {i / kGridSize, i % kGridSize}; }

  auto operator<=>(const GridPos&) const = default;
};

/// Formats as "r,c".
std::string to_string(GridPos p);

/// Moves one cell in direction `a`; a move that would leave the grid keeps
/// the position unchanged.
inline GridPos apply_move(GridPos pos, Action a) {
  GridPos next = pos;
  switch (a) {
    case Action::Right: next.col += 1; break;
    case Action::Up: next.row -= 1; break;
    case Action::Down: next.row += 1; break;
    case Action::Left: next.col -= 1; break;
  }
  return next.on_grid() ? next : pos;
}

/// What the agent sees around itself: a flag per direction telling whether
/// the adversary occupies that adjacent cell. Directions pointing off the
/// grid are always false, and a co-located adversary is not "adjacent".
struct Observation {
  GridPos self;
  std::array<bool, kActionCount> neighbor{};
  bool adversary_visible = false;
};

Observation observe(GridPos agent, GridPos adversary);

enum class Terminal { None, Goal, Collision, Timeout };

const char* terminal_name(Terminal t);

struct StepOutcome {
  GridPos next_agent;
  GridPos next_adversary;
  double agent_reward = 0.0;
  double adversary_reward = 0.0;
  Terminal terminal = Terminal::None;
};

struct EnvConfig {
  GridPos agent_start{0, 0};
  GridPos adversary_start{0, 0};
  GridPos goal{kGridSize - 1, kGridSize - 1};
  int timeout_steps = 100;

  /// Throws std::invalid_argument for off-grid cells, goal == agent start,
  /// or a non-positive timeout.
  void validate() const;
};

/// Returns the (agent, adversary) start positions after validating.
std::pair<GridPos, GridPos> reset(const EnvConfig& config);

/// Advances both actors simultaneously and assigns rewards. Collision means
/// both end up in the same cell; it wins over reaching the goal in the same
/// step. Timeouts are the caller's business (the step itself is oblivious).
StepOutcome step(const EnvConfig& config, GridPos agent, GridPos adversary,
                 Action agent_action, Action adversary_action, int step_index);

/// Same resolution for an adversary whose next position is known directly
/// (a patroller holding its cell rather than taking a compass move).
StepOutcome step_to(const EnvConfig& config, GridPos agent, GridPos next_adversary,
                    Action agent_action, int step_index);

struct EpisodeStep {
  GridPos agent;
  GridPos adversary;
  Action agent_action;
  double raw_reward = 0.0;
  double shaped_reward = 0.0;
};

struct EpisodeRecord {
  std::vector<EpisodeStep> steps;
  Terminal cause = Terminal::None;

  std::string to_string() const;
};

}  // namespace rlsafe::grid
