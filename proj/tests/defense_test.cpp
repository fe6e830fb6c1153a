#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlsafe/defense.hpp"

using namespace rlsafe;
using defense::CollisionStats;
using defense::Mechanism;
using defense::ObsOverlay;
using defense::PotentialKind;
using grid::Action;
using grid::GridPos;
using qlearn::QTable;

namespace {

CollisionStats stats_with(GridPos cell, int total, int clean) {
  CollisionStats stats;
  for (int i = 0; i < total; ++i) stats.record_move(cell, i >= clean);
  return stats;
}

}  // namespace

TEST_CASE("distance potential is the negated Manhattan distance") {
  CollisionStats stats;
  CHECK(defense::potential(PotentialKind::ManhattanToGoal, {0, 0}, {5, 5}, -1.0, stats) ==
        -10.0);
  CHECK(defense::potential(PotentialKind::ManhattanToGoal, {5, 5}, {5, 5}, -1.0, stats) ==
        0.0);
  // The literal sign flag restores the unnegated form.
  CHECK(defense::potential(PotentialKind::ManhattanToGoal, {0, 0}, {5, 5}, -1.0, stats,
                           true) == 10.0);
}

TEST_CASE("collision potential scales the raw reward by the clean-move share") {
  const CollisionStats stats = stats_with({2, 2}, 10, 9);
  CHECK(defense::potential(PotentialKind::CollisionFreeProb, {2, 2}, {5, 5}, -1.0,
                           stats) == doctest::Approx(-0.9));
  // Never-entered cells count as collision-free.
  CHECK(defense::potential(PotentialKind::CollisionFreeProb, {4, 4}, {5, 5}, -1.0,
                           stats) == -1.0);
}

TEST_CASE("shaped reward adds the discounted potential difference") {
  CollisionStats stats;
  // phi(s) = -10, phi(s') = -9 at gamma 0.9: -1 + 0.9*(-9) + 10 = 0.9.
  CHECK(defense::shape_reward(-1.0, {0, 0}, {0, 1}, 0.9, PotentialKind::ManhattanToGoal,
                              {5, 5}, stats) == doctest::Approx(0.9));
}

TEST_CASE("a constant-zero potential leaves rewards unchanged") {
  // Collision-free probability of untouched cells is 1 everywhere, so the
  // potential is r at both ends: r' = r + (gamma - 1) * r.
  CollisionStats stats;
  const double r = -1.0;
  const double shaped = defense::shape_reward(r, {1, 1}, {1, 2}, 0.9,
                                              PotentialKind::CollisionFreeProb, {5, 5},
                                              stats);
  CHECK(shaped == doctest::Approx(r + (0.9 - 1.0) * r));
}

TEST_CASE("shaping terms telescope over whole trajectories") {
  Rng rng(11);
  CollisionStats stats;
  const GridPos goal{5, 5};
  for (int trial = 0; trial < 200; ++trial) {
    GridPos pos = GridPos::from_index(rng.uniform_int(grid::kCellCount));
    const GridPos start = pos;
    double discounted_sum = 0.0;
    double discount = 1.0;
    const int length = 1 + rng.uniform_int(60);
    for (int t = 0; t < length; ++t) {
      const auto a = static_cast<Action>(rng.uniform_int(4));
      const GridPos next = grid::apply_move(pos, a);
      const double shaped = defense::shape_reward(
          -1.0, pos, next, 0.9, PotentialKind::ManhattanToGoal, goal, stats);
      discounted_sum += discount * (shaped - -1.0);
      discount *= 0.9;
      pos = next;
    }
    const double expected = discount * -defense::manhattan(pos, goal) -
                            -defense::manhattan(start, goal);
    CHECK(discounted_sum == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("collision statistics stay within bounds") {
  CollisionStats stats;
  CHECK(stats.collision_free_prob({0, 0}) == 1.0);
  stats.record_move({0, 0}, true);
  CHECK(stats.collision_free_prob({0, 0}) == 0.0);
  stats.record_move({0, 0}, false);
  CHECK(stats.collision_free_prob({0, 0}) == doctest::Approx(0.5));
  CHECK(stats.moves_into({0, 0}) == 2);
  CHECK(stats.clean_moves_into({0, 0}) == 1);
  for (int i = 0; i < grid::kCellCount; ++i) {
    const double p = stats.collision_free_prob(GridPos::from_index(i));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("observation-aware selection") {
  const double alpha = 0.1, gamma = 0.9;

  SUBCASE("no adversary in sight behaves like plain greedy") {
    QTable q;
    q.set(GridPos{3, 3}.index(), Action::Down, 2.0);
    ObsOverlay overlay;
    Rng rng(5);
    const auto obs = grid::observe({3, 3}, {0, 0});
    CHECK(defense::select_with_observations(q, overlay, obs, 0.0, rng, alpha, gamma) ==
          Action::Down);
    CHECK(overlay.written_entries() == 0);
  }

  SUBCASE("fresh tables: blocked greedy action takes one penalty and yields") {
    QTable q;
    ObsOverlay overlay;
    Rng rng(5);
    // All-zero table: argmax is Right; adversary sits right of the agent.
    const auto obs = grid::observe({3, 3}, {3, 4});
    const Action act =
        defense::select_with_observations(q, overlay, obs, 0.0, rng, alpha, gamma);
    CHECK(overlay.get(q, GridPos{3, 3}.index(), Action::Right) ==
          doctest::Approx(alpha * -100.0));
    CHECK(act != Action::Right);
    CHECK(act == Action::Up);  // remaining zeros tie, lowest index wins
  }

  SUBCASE("adversary beside a safe greedy action changes nothing") {
    QTable q;
    q.set(GridPos{3, 3}.index(), Action::Down, 5.0);
    ObsOverlay overlay;
    Rng rng(5);
    const auto obs = grid::observe({3, 3}, {3, 4});  // adversary right, greedy down
    CHECK(defense::select_with_observations(q, overlay, obs, 0.0, rng, alpha, gamma) ==
          Action::Down);
    CHECK(overlay.written_entries() == 0);
  }

  SUBCASE("without encounters the overlay stays untouched across episodes") {
    QTable q;
    ObsOverlay overlay;
    Rng rng(6);
    for (int i = 0; i < 500; ++i) {
      const auto pos = GridPos::from_index(rng.uniform_int(grid::kCellCount));
      const auto obs = grid::observe(pos, pos);  // never visible
      defense::select_with_observations(q, overlay, obs, 0.3, rng, alpha, gamma);
    }
    CHECK(overlay.written_entries() == 0);
    CHECK(overlay == ObsOverlay{});
  }

  SUBCASE("penalized entries relax back toward the live value") {
    QTable q;
    q.set(0, Action::Right, 30.0);
    ObsOverlay overlay;
    overlay.set(0, Action::Right, -10.0);
    overlay.relax(q, 0, Action::Right, 0.5);
    CHECK(overlay.get(q, 0, Action::Right) == doctest::Approx(10.0));
    // Entries never penalized read through to the live table and ignore relax.
    overlay.relax(q, 0, Action::Up, 0.5);
    q.set(0, Action::Up, 7.0);
    CHECK(overlay.get(q, 0, Action::Up) == 7.0);
  }
}

TEST_CASE("second-best fallback selection") {
  Rng rng(5);

  SUBCASE("blocked greedy action falls back to the runner-up") {
    QTable q;
    const int s = GridPos{3, 3}.index();
    q.set(s, Action::Right, 5.0);
    q.set(s, Action::Up, 4.0);
    q.set(s, Action::Down, 3.0);
    q.set(s, Action::Left, 2.0);
    const auto obs = grid::observe({3, 3}, {3, 4});
    CHECK(defense::select_modified(q, obs, 0.0, rng) == Action::Up);
  }

  SUBCASE("no adversary keeps the greedy action") {
    QTable q;
    q.set(GridPos{3, 3}.index(), Action::Right, 5.0);
    const auto obs = grid::observe({3, 3}, {0, 0});
    CHECK(defense::select_modified(q, obs, 0.0, rng) == Action::Right);
  }

  SUBCASE("all-equal values fall back by index") {
    QTable q;
    const auto obs = grid::observe({3, 3}, {3, 4});  // adversary right = action 0
    CHECK(defense::select_modified(q, obs, 0.0, rng) == Action::Up);
  }

  SUBCASE("the fallback never walks into the observed adversary") {
    QTable q;
    Rng value_rng(9);
    for (int i = 0; i < 2000; ++i) {
      const auto pos = GridPos::from_index(value_rng.uniform_int(grid::kCellCount));
      GridPos adv = grid::apply_move(pos, static_cast<Action>(value_rng.uniform_int(4)));
      if (adv == pos) continue;
      for (int a = 0; a < 4; ++a)
        q.set(pos.index(), static_cast<Action>(a), value_rng.uniform() * 10);
      const auto obs = grid::observe(pos, adv);
      const Action greedy = q.argmax(pos.index());
      const Action act = defense::select_modified(q, obs, 0.0, value_rng);
      if (obs.neighbor[static_cast<int>(greedy)])
        CHECK(grid::apply_move(pos, act) != adv);
    }
  }
}

TEST_CASE("mechanism names round-trip and validate") {
  for (Mechanism m : {Mechanism::None, Mechanism::PbrsDistance,
                      Mechanism::PbrsCollisionProb, Mechanism::QWithObservations,
                      Mechanism::ModifiedQ})
    CHECK(defense::mechanism_from_name(defense::mechanism_name(m)) == m);
  CHECK_THROWS_AS(defense::mechanism_from_name("shield"), std::invalid_argument);

  defense::DefenseConfig config;
  CHECK_NOTHROW(config.validate());
  config.adv_penalty = 1.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
