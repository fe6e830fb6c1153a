#include <doctest.h>

#include "rlsafe/grid.hpp"
#include "rlsafe/rng.hpp"

using namespace rlsafe;
using grid::Action;
using grid::GridPos;

TEST_CASE("moves clamp at the walls") {
  CHECK(grid::apply_move({0, 0}, Action::Left) == GridPos{0, 0});
  CHECK(grid::apply_move({0, 0}, Action::Up) == GridPos{0, 0});
  CHECK(grid::apply_move({0, 0}, Action::Right) == GridPos{0, 1});
  CHECK(grid::apply_move({5, 5}, Action::Down) == GridPos{5, 5});
  CHECK(grid::apply_move({5, 5}, Action::Right) == GridPos{5, 5});
}

TEST_CASE("every move from every cell stays on the grid") {
  for (int i = 0; i < grid::kCellCount; ++i) {
    const GridPos pos = GridPos::from_index(i);
    for (Action a : grid::kAllActions) {
      CHECK(grid::apply_move(pos, a).on_grid());
    }
  }
}

TEST_CASE("reset returns the configured start cells") {
  grid::EnvConfig config;
  auto [agent, adversary] = grid::reset(config);
  CHECK(agent == GridPos{0, 0});
  CHECK(adversary == GridPos{0, 0});
  CHECK(config.goal == GridPos{5, 5});

  config.adversary_start = {5, 4};
  CHECK(grid::reset(config).second == GridPos{5, 4});
}

TEST_CASE("a goal placed on the agent start is rejected") {
  grid::EnvConfig config;
  config.goal = {0, 0};
  CHECK_THROWS_AS(grid::reset(config), std::invalid_argument);
}

TEST_CASE("step rewards: goal, collision, plain move") {
  grid::EnvConfig config;
  config.adversary_start = {2, 2};

  SUBCASE("reaching the goal pays 100") {
    auto out = grid::step(config, {5, 4}, {0, 0}, Action::Right, Action::Right, 3);
    CHECK(out.terminal == grid::Terminal::Goal);
    CHECK(out.agent_reward == 100.0);
    CHECK(out.adversary_reward == 0.0);
  }

  SUBCASE("both actors entering the same cell is a collision") {
    auto out = grid::step(config, {4, 3}, {3, 4}, Action::Right, Action::Down, 0);
    CHECK(out.next_agent == GridPos{4, 4});
    CHECK(out.next_adversary == GridPos{4, 4});
    CHECK(out.terminal == grid::Terminal::Collision);
    CHECK(out.agent_reward == -100.0);
    CHECK(out.adversary_reward == 100.0);
  }

  SUBCASE("an ordinary move costs 1") {
    auto out = grid::step(config, {0, 0}, {5, 4}, Action::Right, Action::Up, 0);
    CHECK(out.terminal == grid::Terminal::None);
    CHECK(out.agent_reward == -1.0);
  }

  SUBCASE("collision at the goal cell counts as a collision") {
    auto out = grid::step(config, {5, 4}, {4, 5}, Action::Right, Action::Down, 0);
    CHECK(out.next_agent == config.goal);
    CHECK(out.terminal == grid::Terminal::Collision);
    CHECK(out.agent_reward == -100.0);
  }

  SUBCASE("swapping cells is not a collision") {
    auto out = grid::step(config, {2, 2}, {2, 3}, Action::Right, Action::Left, 0);
    CHECK(out.next_agent == GridPos{2, 3});
    CHECK(out.next_adversary == GridPos{2, 2});
    CHECK(out.terminal == grid::Terminal::None);
  }
}

TEST_CASE("exactly one reward value per step") {
  grid::EnvConfig config;
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const GridPos agent = GridPos::from_index(rng.uniform_int(grid::kCellCount));
    const GridPos adversary = GridPos::from_index(rng.uniform_int(grid::kCellCount));
    const auto a1 = static_cast<Action>(rng.uniform_int(4));
    const auto a2 = static_cast<Action>(rng.uniform_int(4));
    const auto out = grid::step(config, agent, adversary, a1, a2, 0);
    const bool is_step = out.agent_reward == -1.0;
    const bool is_goal = out.agent_reward == 100.0;
    const bool is_collision = out.agent_reward == -100.0;
    CHECK(int(is_step) + int(is_goal) + int(is_collision) == 1);
    if (is_goal) {
      CHECK(out.next_agent == config.goal);
      CHECK(out.next_agent != out.next_adversary);
    }
  }
}

TEST_CASE("step is a pure function of its inputs") {
  grid::EnvConfig config;
  const auto first = grid::step(config, {2, 2}, {3, 3}, Action::Down, Action::Up, 5);
  const auto second = grid::step(config, {2, 2}, {3, 3}, Action::Down, Action::Up, 5);
  CHECK(first.next_agent == second.next_agent);
  CHECK(first.agent_reward == second.agent_reward);
  CHECK(first.terminal == second.terminal);
}

TEST_CASE("observation flags adjacent adversaries only") {
  SUBCASE("adversary to the right") {
    const auto obs = grid::observe({3, 3}, {3, 4});
    CHECK(obs.neighbor[static_cast<int>(Action::Right)]);
    CHECK_FALSE(obs.neighbor[static_cast<int>(Action::Up)]);
    CHECK_FALSE(obs.neighbor[static_cast<int>(Action::Down)]);
    CHECK_FALSE(obs.neighbor[static_cast<int>(Action::Left)]);
    CHECK(obs.adversary_visible);
  }
  SUBCASE("distant adversary is invisible") {
    const auto obs = grid::observe({3, 3}, {0, 0});
    CHECK_FALSE(obs.adversary_visible);
  }
  SUBCASE("co-located adversary is not an observation") {
    const auto obs = grid::observe({0, 0}, {0, 0});
    CHECK_FALSE(obs.adversary_visible);
    for (bool flag : obs.neighbor) CHECK_FALSE(flag);
  }
}

TEST_CASE("trace serialization uses r,c cells and RUDL letters") {
  CHECK(grid::to_string(GridPos{2, 5}) == "2,5");
  CHECK(grid::action_letter(Action::Right) == 'R');
  CHECK(grid::action_letter(Action::Up) == 'U');
  CHECK(grid::action_letter(Action::Down) == 'D');
  CHECK(grid::action_letter(Action::Left) == 'L');
  CHECK(grid::action_from_letter('D') == Action::Down);
  CHECK_FALSE(grid::action_from_letter('X').has_value());

  grid::EpisodeRecord record;
  record.steps.push_back({{0, 0}, {5, 4}, Action::Right, -1.0, 0.9});
  record.cause = grid::Terminal::Goal;
  const std::string text = record.to_string();
  CHECK(text.find("0,0 5,4 R -1 0.9") != std::string::npos);
  CHECK(text.find("cause goal") != std::string::npos);
}
