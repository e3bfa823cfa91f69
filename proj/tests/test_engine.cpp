#include <random>

#include "doctest.h"
#include "medsched/engine.hpp"
#include "random_models.hpp"

using namespace medsched;

namespace {

Literal lit(VarId v, std::vector<Value> values) { return {v, std::move(values)}; }

ConstraintModel unary_conflict(bool removable) {
  ConstraintModel m;
  VarId x = add_var(m, "x", {0, 1});
  add_constraint(m, {"x=1"}, Implication{{}, lit(x, {1})}, {removable, false});
  add_constraint(m, {"x=0"}, Implication{{}, lit(x, {0})}, {removable, false});
  return m;
}

// Three registrations, one 300-minute shift. Value 0 = in the shift,
// 1 = unassigned; each unassigned registration costs 1 at level 1.
ConstraintModel knapsack_toy() {
  ConstraintModel m;
  std::vector<Cost> durations{120, 120, 90};
  LinearLeq cap;
  cap.bound = 300;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    VarId r = add_var(m, "shift(r" + std::to_string(i + 1) + ")", {0, 1});
    cap.terms.push_back({r, durations[i], std::vector<Value>{0}});
    add_soft(m, {"unassigned", {std::to_string(i + 1)}}, 1, 1, Implication{{}, lit(r, {0})});
  }
  add_constraint(m, {"capacity", {"s1"}}, cap, {true, false});
  return m;
}

}  // namespace

TEST_CASE("solve on trivial models") {
  ConstraintModel m;
  VarId x = add_var(m, "x", {0, 1});
  add_constraint(m, {"x=1"}, Implication{{}, lit(x, {1})});
  auto out = solve(m);
  CHECK(out.status == SolveStatus::Optimal);
  REQUIRE(out.assignment);
  CHECK((*out.assignment)[0] == 1);
  CHECK(out.objective->costs.empty());

  CHECK(solve(unary_conflict(false)).status == SolveStatus::Unsat);
}

TEST_CASE("knapsack toy leaves exactly one registration unassigned") {
  // Oracle: enumerate every subset of registrations that fits the shift.
  std::vector<int> durations{120, 120, 90};
  int best_fit = 0;
  for (int mask = 0; mask < 8; ++mask) {
    int sum = 0, count = 0;
    for (int i = 0; i < 3; ++i)
      if (mask >> i & 1) {
        sum += durations[i];
        ++count;
      }
    if (sum <= 300) best_fit = std::max(best_fit, count);
  }
  REQUIRE(best_fit == 2);

  auto out = solve(knapsack_toy());
  CHECK(out.status == SolveStatus::Optimal);
  CHECK(out.objective->at_level(1) == 3 - best_fit);
  // Lexicographically smallest optimum: the first two are placed.
  CHECK(*out.assignment == Assignment{0, 0, 1});
}

TEST_CASE("solve_decision respects the enabled set") {
  ConstraintModel free_model;
  add_var(free_model, "x", {0, 1});
  CHECK(solve_decision(free_model, {}).status == DecisionStatus::Sat);

  auto m = unary_conflict(true);
  CHECK(solve_decision(m, {"x=1", "x=0"}).status == DecisionStatus::Unsat);
  auto r = solve_decision(m, {"x=1"});
  REQUIRE(r.status == DecisionStatus::Sat);
  CHECK((*r.assignment)[0] == 1);
  CHECK_THROWS_AS(solve_decision(m, {"nope"}), EngineError);
}

TEST_CASE("brute force guards and edge cases") {
  ConstraintModel empty;
  auto out = brute_force(empty);
  CHECK(out.status == SolveStatus::Optimal);
  CHECK(out.assignment->empty());
  CHECK(solve(empty).status == SolveStatus::Optimal);

  ConstraintModel big;
  for (int i = 0; i < 21; ++i) add_var(big, "b" + std::to_string(i), {0, 1});
  CHECK_THROWS_AS(brute_force(big), SpaceTooLarge);
}

TEST_CASE("solve matches brute force on random models") {
  std::mt19937 rng(7);
  int optimal = 0, unsat = 0;
  for (int seed = 0; seed < 400; ++seed) {
    auto m = testing::random_model(rng, {.max_vars = 6, .max_domain = 4, .max_hard = 7, .max_soft = 5, .max_level = 3});
    auto oracle = brute_force(m);
    auto got = solve(m);
    INFO("seed " << seed);
    REQUIRE(got.status == oracle.status);
    if (oracle.status == SolveStatus::Optimal) {
      ++optimal;
      CHECK(*got.objective == *oracle.objective);
      auto check = check_assignment(m, *got.assignment);
      CHECK(check.violations.empty());
      CHECK(check.objective == *got.objective);
    } else {
      ++unsat;
    }
  }
  CHECK(optimal > 50);
  CHECK(unsat > 20);
}

TEST_CASE("a warm start never changes a proven optimum") {
  std::mt19937 rng(99);
  for (int round = 0; round < 150; ++round) {
    auto m = testing::random_model(rng, {.max_vars = 5, .max_domain = 4, .max_hard = 4, .max_soft = 5});
    auto oracle = brute_force(m);
    if (oracle.status != SolveStatus::Optimal) continue;
    // Any feasible assignment works as a hint; take the lexicographically last one.
    std::optional<Assignment> last;
    std::vector<std::size_t> idx(m.vars.size(), 0);
    Assignment a(m.vars.size());
    while (true) {
      for (std::size_t v = 0; v < a.size(); ++v) a[v] = m.vars[v].domain[idx[v]];
      if (check_assignment(m, a).violations.empty()) last = a;
      std::size_t v = a.size();
      bool carry = true;
      while (carry && v > 0) {
        --v;
        if (++idx[v] < m.vars[v].domain.size()) carry = false;
        else idx[v] = 0;
      }
      if (carry) break;
    }
    SolveConfig cfg;
    cfg.hint = last;
    auto got = solve(m, cfg);
    REQUIRE(got.status == SolveStatus::Optimal);
    CHECK(*got.objective == *oracle.objective);
    CHECK(check_assignment(m, *got.assignment).objective == *oracle.objective);
  }
}

TEST_CASE("assumption monotonicity: unsat stays unsat for supersets") {
  std::mt19937 rng(4242);
  for (int round = 0; round < 120; ++round) {
    auto m = testing::random_model(rng, {.max_vars = 4, .max_domain = 3, .max_hard = 6, .max_soft = 0,
                                         .max_level = 1, .all_removable = true});
    std::vector<std::string> labels(m.removable.begin(), m.removable.end());
    std::size_t n = labels.size();
    std::vector<bool> unsat(1u << n);
    for (std::size_t mask = 0; mask < (1u << n); ++mask) {
      std::set<std::string> enabled;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) enabled.insert(labels[i]);
      unsat[mask] = solve_decision(m, enabled).status == DecisionStatus::Unsat;
    }
    for (std::size_t a = 0; a < unsat.size(); ++a)
      for (std::size_t b = 0; b < unsat.size(); ++b)
        if ((a & b) == a && unsat[a]) CHECK(unsat[b]);
  }
}

TEST_CASE("solve is deterministic") {
  std::mt19937 rng(5);
  for (int round = 0; round < 50; ++round) {
    auto m = testing::random_model(rng);
    auto a = solve(m), b = solve(m);
    CHECK(a.status == b.status);
    CHECK(a.assignment == b.assignment);
    CHECK(a.stats.nodes == b.stats.nodes);
  }
}

TEST_CASE("node budget yields anytime incumbents no better than the optimum") {
  // Many free binaries with a soft preference the search order works against.
  ConstraintModel m;
  LinearLeq sum;
  sum.bound = 100;
  for (int i = 0; i < 16; ++i) {
    VarId v = add_var(m, "b" + std::to_string(i), {0, 1});
    add_soft(m, {"want", {std::to_string(i)}}, 1, 1 + i % 3, Implication{{}, lit(v, {1})});
    sum.terms.push_back({v, 7 + i, std::nullopt});
  }
  add_constraint(m, {"budget"}, sum);
  auto full = solve(m);
  REQUIRE(full.status == SolveStatus::Optimal);
  SolveConfig cfg;
  cfg.node_limit = 40;
  auto cut = solve(m, cfg);
  CHECK((cut.status == SolveStatus::FeasibleTimeout || cut.status == SolveStatus::UnknownTimeout));
  if (cut.has_solution()) {
    CHECK(*cut.objective >= *full.objective);
    CHECK(check_assignment(m, *cut.assignment).violations.empty());
  }
  SolveConfig tiny;
  tiny.time_limit_s = 0;
  CHECK(solve(m, tiny).status == SolveStatus::UnknownTimeout);
}
