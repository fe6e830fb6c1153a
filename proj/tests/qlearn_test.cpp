#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "rlsafe/qlearn.hpp"

using namespace rlsafe;
using grid::Action;
using grid::GridPos;
using qlearn::QTable;

TEST_CASE("epsilon 0 always exploits") {
  QTable q;
  q.set(0, Action::Right, 1.0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i)
    CHECK(qlearn::select_epsilon_greedy(q, 0, 0.0, rng) == Action::Right);
}

TEST_CASE("epsilon 1 is empirically uniform") {
  QTable q;
  q.set(0, Action::Down, 5.0);
  Rng rng(2);
  const int draws = 100000;
  std::array<int, 4> counts{};
  for (int i = 0; i < draws; ++i)
    counts[static_cast<int>(qlearn::select_epsilon_greedy(q, 0, 1.0, rng))]++;
  // 3 sigma around 1/4
  const double sigma = std::sqrt(0.25 * 0.75 / draws);
  for (int a = 0; a < 4; ++a)
    CHECK(std::abs(counts[a] / double(draws) - 0.25) < 3 * sigma);
}

TEST_CASE("epsilon-greedy mixture matches (1-eps) + eps/4") {
  QTable q;
  q.set(0, Action::Up, 2.0);  // unique argmax
  Rng rng(3);
  const int draws = 200000;
  const double eps = 0.2;
  std::array<int, 4> counts{};
  for (int i = 0; i < draws; ++i)
    counts[static_cast<int>(qlearn::select_epsilon_greedy(q, 0, eps, rng))]++;
  const double p_greedy = (1 - eps) + eps / 4;  // 0.85
  const double sigma_g = std::sqrt(p_greedy * (1 - p_greedy) / draws);
  CHECK(std::abs(counts[static_cast<int>(Action::Up)] / double(draws) - p_greedy) <
        3 * sigma_g);
  const double sigma_o = std::sqrt(0.05 * 0.95 / draws);
  CHECK(std::abs(counts[static_cast<int>(Action::Right)] / double(draws) - 0.05) <
        3 * sigma_o);
}

TEST_CASE("argmax ties break toward the lowest action index") {
  QTable q;
  q.set(3, Action::Down, 1.0);
  q.set(3, Action::Up, 1.0);
  CHECK(q.argmax(3) == Action::Up);  // index 1 < index 2
  CHECK(QTable{}.argmax(17) == Action::Right);
}

TEST_CASE("one q-update moves a zero entry to alpha * delta") {
  QTable q;
  qlearn::q_update(q, 4, Action::Left, -1.0, 9, false, 0.1, 0.9);
  CHECK(q.get(4, Action::Left) == doctest::Approx(-0.1));
  CHECK(q.touched_states() == 1);
  CHECK(q.get(9, Action::Left) == 0.0);
}

TEST_CASE("alpha 1 terminal update lands on the reward") {
  QTable q;
  q.set(2, Action::Right, 13.0);
  qlearn::q_update(q, 2, Action::Right, 100.0, 35, true, 1.0, 0.9);
  CHECK(q.get(2, Action::Right) == 100.0);
}

TEST_CASE("q-update touches exactly one entry") {
  QTable q;
  q.set(1, Action::Right, 3.0);
  q.set(1, Action::Up, 2.0);
  q.set(2, Action::Down, 7.0);
  const QTable before = q;
  qlearn::q_update(q, 1, Action::Up, -1.0, 2, false, 0.5, 0.9);
  CHECK(q.get(1, Action::Right) == before.get(1, Action::Right));
  CHECK(q.get(2, Action::Down) == before.get(2, Action::Down));
  CHECK(q.get(1, Action::Up) != before.get(1, Action::Up));
}

TEST_CASE("repeated updates on a two-state chain reach the analytic values") {
  // State 0: Right -> terminal goal (reward 100), Up -> stays (reward -1).
  qlearn::DeterministicMdp mdp;
  mdp.n_states = 2;
  mdp.terminal = {0, 1};
  mdp.next.resize(2);
  mdp.reward.resize(2);
  for (int a = 0; a < 4; ++a) {
    mdp.next[0][a] = a == 0 ? 1 : 0;
    mdp.reward[0][a] = a == 0 ? 100.0 : -1.0;
    mdp.next[1][a] = 1;
    mdp.reward[1][a] = 0.0;
  }
  const auto values = qlearn::value_iteration(mdp, 0.9, 1e-12);
  CHECK(values[0] == doctest::Approx(100.0));

  QTable q;
  for (int sweep = 0; sweep < 2000; ++sweep)
    for (int a = 0; a < 4; ++a)
      qlearn::q_update(q, 0, static_cast<Action>(a), mdp.reward[0][a], mdp.next[0][a],
                       mdp.next[0][a] == 1, 0.5, 0.9);
  CHECK(q.get(0, Action::Right) == doctest::Approx(100.0).epsilon(1e-6));
  // Staying costs a step and discounts the best continuation.
  CHECK(q.get(0, Action::Up) == doctest::Approx(-1.0 + 0.9 * 100.0).epsilon(1e-6));
}

TEST_CASE("patrol positions walk the routes back and forth") {
  using qlearn::AdversaryKind;
  CHECK(qlearn::patrol_position(AdversaryKind::Patrol3, 0) == GridPos{5, 4});
  CHECK(qlearn::patrol_position(AdversaryKind::Patrol3, 2) == GridPos{4, 5});
  CHECK(qlearn::patrol_position(AdversaryKind::Patrol3, 3) == GridPos{4, 4});
  CHECK(qlearn::patrol_position(AdversaryKind::Patrol3, 4) == GridPos{5, 4});
  // Period 8, reflected: (5,4) (4,4) (4,5) (3,5) (3,4) (3,5) (4,5) (4,4).
  CHECK(qlearn::patrol_position(AdversaryKind::Patrol5, 7) == GridPos{4, 4});
  for (long t = 0; t < 32; ++t) {
    CHECK(qlearn::patrol_position(AdversaryKind::Patrol5, t) ==
          qlearn::patrol_position(AdversaryKind::Patrol5, t + 8));
  }
  CHECK_THROWS_AS(qlearn::patrol_position(AdversaryKind::Learning, 0),
                  std::invalid_argument);
}

TEST_CASE("adversary state keys") {
  using qlearn::AdversaryKind;
  CHECK(qlearn::adversary_state_key(AdversaryKind::Learning, {2, 3}, {0, 0}) == 15);
  // Agent adjacent to the right sets bit 0.
  CHECK(qlearn::adversary_state_key(AdversaryKind::LearningWithObservations, {2, 3},
                                    {2, 4}) == 15 * 16 + 0b0001);
  CHECK(qlearn::adversary_state_key(AdversaryKind::LearningWithObservations, {2, 3},
                                    {3, 3}) == 15 * 16 + 0b0100);

  SUBCASE("distinct position-occupancy pairs get distinct keys") {
    std::set<std::pair<int, int>> pairs;  // (own cell, occupancy mask)
    std::set<int> keys;
    for (int own = 0; own < grid::kCellCount; ++own)
      for (int agent = 0; agent < grid::kCellCount; ++agent) {
        const GridPos own_pos = GridPos::from_index(own);
        const GridPos agent_pos = GridPos::from_index(agent);
        const auto obs = grid::observe(own_pos, agent_pos);
        int mask = 0;
        for (int i = 0; i < grid::kActionCount; ++i)
          if (obs.neighbor[i]) mask |= 1 << i;
        pairs.insert({own, mask});
        keys.insert(qlearn::adversary_state_key(AdversaryKind::LearningWithObservations,
                                                own_pos, agent_pos));
      }
    CHECK(keys.size() == pairs.size());
  }
}

TEST_CASE("value iteration on the adversary-free grid") {
  const auto mdp = qlearn::goal_grid_mdp({5, 5});
  const auto values = qlearn::value_iteration(mdp, 0.9, 1e-12);

  SUBCASE("goal-adjacent cells are worth the goal payoff") {
    CHECK(values[GridPos{5, 4}.index()] == doctest::Approx(100.0));
    CHECK(values[GridPos{4, 5}.index()] == doctest::Approx(100.0));
  }

  SUBCASE("values grow along the way to the goal") {
    CHECK(values[GridPos{5, 4}.index()] >= values[GridPos{0, 0}.index()]);
    CHECK(values[GridPos{3, 3}.index()] >= values[GridPos{0, 0}.index()]);
  }

  SUBCASE("full vector matches the shortest-path closed form") {
    for (int s = 0; s < grid::kCellCount; ++s) {
      const GridPos pos = GridPos::from_index(s);
      const int d = (5 - pos.row) + (5 - pos.col);
      if (d == 0) {
        CHECK(values[s] == 0.0);
        continue;
      }
      // d-1 unit step costs, then the goal payoff, all discounted.
      double expected = 100.0 * std::pow(0.9, d - 1);
      for (int i = 0; i < d - 1; ++i) expected -= std::pow(0.9, i);
      CHECK(values[s] == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  SUBCASE("the result is a Bellman fixed point") {
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[s]) continue;
      double best = -1e300;
      for (int a = 0; a < 4; ++a) {
        const int ns = mdp.next[s][a];
        best = std::max(best,
                        mdp.reward[s][a] + (mdp.terminal[ns] ? 0.0 : 0.9 * values[ns]));
      }
      CHECK(std::abs(best - values[s]) < 1e-10);
    }
  }
}

TEST_CASE("greedy walk from the converged values takes 10 steps") {
  const auto mdp = qlearn::goal_grid_mdp({5, 5});
  const auto values = qlearn::value_iteration(mdp, 0.9, 1e-12);
  const auto policy = qlearn::greedy_policy(mdp, values, 0.9);
  GridPos pos{0, 0};
  int steps = 0;
  while (pos != GridPos{5, 5} && steps < 50) {
    pos = grid::apply_move(pos, policy[pos.index()]);
    ++steps;
  }
  CHECK(steps == 10);
}

TEST_CASE("non-convergence raises") {
  const auto mdp = qlearn::goal_grid_mdp({5, 5});
  CHECK_THROWS_AS(qlearn::value_iteration(mdp, 0.9, 1e-12, 3), std::runtime_error);
}

TEST_CASE("q-table CSV round-trips") {
  QTable q;
  q.set(0, Action::Right, 1.5);
  q.set(0, Action::Down, -0.25);
  q.set(35, Action::Left, 1e-17);
  std::ostringstream os;
  q.save_csv(os);
  std::istringstream is(os.str());
  CHECK(QTable::load_csv(is) == q);
  CHECK(os.str().rfind("state_key,action,value\n", 0) == 0);
}

TEST_CASE("learner config bounds are enforced") {
  qlearn::LearnerConfig config;
  CHECK_NOTHROW(config.validate());
  config.alpha = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.alpha = 0.1;
  config.gamma = 1.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.gamma = 0.9;
  config.epsilon.decay = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("epsilon schedule decays to its floor") {
  qlearn::EpsilonSchedule schedule{1.0, 0.9, 0.05};
  CHECK(schedule.at(0) == 1.0);
  CHECK(schedule.at(1) == doctest::Approx(0.9));
  CHECK(schedule.at(1000) == 0.05);
}
