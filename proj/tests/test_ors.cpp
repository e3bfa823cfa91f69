#include <algorithm>

#include "doctest.h"
#include "domain_oracles.hpp"
#include "medsched/baseline.hpp"
#include "medsched/engine.hpp"
#include "medsched/explain.hpp"
#include "medsched/generate.hpp"
#include "medsched/ors.hpp"

using namespace medsched;

namespace {

OrsRegistration reg(std::string id, int duration, int priority, std::string sp = "gen") {
  return {std::move(id), std::move(sp), duration, priority, std::nullopt};
}

OrsShift shift(std::string id, int length, int day = 0, std::string sp = "gen") {
  return {std::move(id), "or1", day, std::move(sp), length};
}

struct Solved {
  OrsEncoding enc;
  SolveOutcome out;
  OrsSchedule schedule;
};

Solved solve_ors(const OrsInstance& inst) {
  Solved s{encode_ors(inst), {}, {}};
  SolveConfig cfg;
  cfg.time_limit_s = 30;
  s.out = solve(s.enc.model, cfg);
  if (s.out.has_solution()) s.schedule = decode_ors(inst, s.enc, *s.out.assignment);
  return s;
}

void check_round_trip(const OrsInstance& inst, const Solved& s) {
  REQUIRE(s.out.has_solution());
  auto rep = verify_ors(inst, s.schedule);
  CHECK(rep.violations.empty());
  CHECK(rep.objective == s.schedule.objective);
  CHECK(rep.objective == *s.out.objective);
  auto back = ors_assignment(inst, s.enc, s.schedule);
  REQUIRE(back);
  CHECK(*back == *s.out.assignment);
}

bool has(const std::vector<std::string>& v, const std::string& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

TEST_CASE("three p2 registrations and one shift leave one out") {
  OrsInstance inst;
  inst.registrations = {reg("r1", 120, 2), reg("r2", 120, 2), reg("r3", 90, 2)};
  inst.shifts = {shift("s1", 300)};
  auto oracle = testing::ors_optimum(inst);
  REQUIRE(oracle);
  CHECK(*oracle == ObjectiveVector{{1, 0}});
  auto s = solve_ors(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(*s.out.objective == ObjectiveVector{{1, 0}});
  check_round_trip(inst, s);
}

TEST_CASE("urgent registration without a matching shift is unsat") {
  OrsInstance inst;
  inst.registrations = {reg("r1", 60, 1, "cardio"), reg("r2", 60, 2)};
  inst.shifts = {shift("s1", 300)};
  CHECK_FALSE(testing::ors_optimum(inst));
  auto enc = encode_ors(inst);
  CHECK(solve(enc.model).status == SolveStatus::Unsat);
  auto mus = extract_mus(enc.model);
  std::set<std::string> got(mus.labels.begin(), mus.labels.end());
  CHECK(got == std::set<std::string>{"assign-all-p1(r1)", "specialty(r1)"});
  auto check = verify_mus(enc.model, mus.labels);
  CHECK(check.unsat);
  CHECK(check.minimal);
  CHECK(check.calls == static_cast<int>(mus.labels.size()) + 1);
}

TEST_CASE("a single fitting registration is assigned") {
  OrsInstance inst;
  inst.registrations = {reg("r1", 200, 3, "ortho")};
  inst.shifts = {shift("s1", 240, 0, "ortho")};
  auto s = solve_ors(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(*s.out.objective == ObjectiveVector{{0, 0}});
  CHECK(s.schedule.assignments[0].shift == "s1");
  check_round_trip(inst, s);
}

TEST_CASE("empty ORS instance") {
  OrsInstance inst;
  auto s = solve_ors(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(s.schedule.assignments.empty());
  check_round_trip(inst, s);
}

TEST_CASE("ORS verifier examples") {
  OrsInstance inst;
  inst.horizon = 3;
  inst.units = {{"icu", 1}};
  inst.registrations = {reg("r1", 150, 1), reg("r2", 151, 2), reg("r3", 60, 3)};
  inst.shifts = {shift("s1", 300), shift("s2", 300)};

  OrsSchedule over{{{"r1", "s1"}, {"r2", "s1"}, {"r3", std::nullopt}}, {}};
  auto rep = verify_ors(inst, over);
  CHECK(rep.violations == std::vector<std::string>{"capacity(s1)"});
  CHECK(rep.objective == ObjectiveVector{{0, 1}});

  OrsSchedule dropped{{{"r1", std::nullopt}, {"r2", "s1"}, {"r3", "s2"}}, {}};
  CHECK(has(verify_ors(inst, dropped).violations, "assign-all-p1(r1)"));

  inst.registrations[0].scu = ScuNeed{"icu", 2};
  inst.registrations[1].scu = ScuNeed{"icu", 2};
  OrsSchedule beds{{{"r1", "s1"}, {"r2", "s2"}, {"r3", std::nullopt}}, {}};
  rep = verify_ors(inst, beds);
  CHECK(has(rep.violations, "scu(icu,0)"));
  CHECK(has(rep.violations, "scu(icu,1)"));
  CHECK_FALSE(has(rep.violations, "scu(icu,2)"));

  OrsSchedule wrong{{{"r1", "s9"}, {"r2", "s2"}, {"r3", std::nullopt}}, {}};
  CHECK(has(verify_ors(inst, wrong).violations, "unknown-shift(r1)"));
}

TEST_CASE("SCU stays decide the surgery day") {
  OrsInstance inst;
  inst.horizon = 4;
  inst.units = {{"icu", 1}};
  inst.registrations = {reg("r1", 60, 1), reg("r2", 60, 2), reg("r3", 60, 2)};
  for (auto& r : inst.registrations) r.scu = ScuNeed{"icu", 2};
  inst.shifts = {shift("s1", 480, 0), shift("s2", 480, 1), shift("s3", 480, 2)};
  auto oracle = testing::ors_optimum(inst);
  REQUIRE(oracle);
  CHECK(*oracle == ObjectiveVector{{1, 0}});
  auto s = solve_ors(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(*s.out.objective == *oracle);
  check_round_trip(inst, s);

  auto plain = solve_ors(without_scu(inst));
  CHECK(*plain.out.objective == ObjectiveVector{{0, 0}});
}

TEST_CASE("solver matches assignment enumeration on generated instances") {
  int optimal = 0, unsat = 0;
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    OrsGenParams p;
    p.seed = seed;
    p.registrations = 3 + static_cast<int>(seed % 3);
    p.horizon = 2;
    p.specialties = 2;
    p.tightness = 1.0 + 0.25 * static_cast<double>(seed % 3);
    p.scu_percent = 50;
    p.beds = 1;
    p.p1_percent = 35;
    auto inst = generate_ors(p);
    INFO("seed " << seed);
    auto oracle = testing::ors_optimum(inst);
    auto s = solve_ors(inst);
    if (!oracle) {
      ++unsat;
      CHECK(s.out.status == SolveStatus::Unsat);
      auto mus = extract_mus(s.enc.model);
      CHECK(verify_mus(s.enc.model, mus.labels).minimal);
      continue;
    }
    ++optimal;
    REQUIRE(s.out.status == SolveStatus::Optimal);
    CHECK(*s.out.objective == *oracle);
    check_round_trip(inst, s);
  }
  CHECK(optimal >= 40);
  CHECK(unsat >= 5);
}

TEST_CASE("non-binding beds do not change the optimum") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    OrsGenParams p;
    p.seed = seed;
    p.registrations = 12;
    p.scu_percent = 40;
    p.tightness = 1.3;
    auto inst = generate_ors(p);
    auto with = solve_ors(inst);
    auto without = solve_ors(without_scu(inst));
    INFO("seed " << seed);
    REQUIRE(with.out.status == without.out.status);
    if (with.out.has_solution()) CHECK(*with.out.objective == *without.out.objective);
  }
}

TEST_CASE("greedy first fit is feasible and never better than the optimum") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    OrsGenParams p;
    p.seed = seed;
    p.registrations = 10;
    p.tightness = 1.2;
    p.beds = 2;
    auto inst = generate_ors(p);
    auto g = greedy_ors(inst);
    auto rep = verify_ors(inst, g.schedule);
    INFO("seed " << seed);
    if (!g.feasible) continue;
    CHECK(rep.violations.empty());
    CHECK(rep.objective == g.schedule.objective);
    auto s = solve_ors(inst);
    REQUIRE(s.out.has_solution());
    CHECK(*s.out.objective <= g.schedule.objective);
  }
}

TEST_CASE("contrast on ORS: bumping the p2 case costs more") {
  OrsInstance inst;
  inst.registrations = {reg("r1", 120, 2), reg("r2", 120, 3)};
  inst.shifts = {shift("s1", 200)};
  auto s = solve_ors(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(*s.out.objective == ObjectiveVector{{0, 1}});
  auto a = parse_atom(s.enc.model, "shift(r1)=s1");
  auto b = parse_atom(s.enc.model, "shift(r1)=unassigned");
  auto c = contrast(s.enc.model, *s.out.assignment, a, b);
  CHECK(c.verdict == ContrastVerdict::AlternativeWorse);
  CHECK(c.original == ObjectiveVector{{0, 1}});
  CHECK(*c.alternative == ObjectiveVector{{1, 0}});
}

TEST_CASE("ORS validation") {
  OrsInstance inst;
  inst.registrations = {reg("r1", 60, 4)};
  CHECK_THROWS_AS(validate_ors(inst), InstanceError);
  inst.registrations = {reg("r1", 0, 1)};
  CHECK_THROWS_AS(validate_ors(inst), InstanceError);
  inst.registrations = {reg("r1", 60, 1)};
  inst.shifts = {shift("s1", 100, 3)};
  CHECK_THROWS_AS(validate_ors(inst), InstanceError);
  inst.shifts = {shift("unassigned", 100)};
  CHECK_THROWS_AS(validate_ors(inst), InstanceError);
  inst.shifts = {shift("s1", 100)};
  inst.registrations[0].scu = ScuNeed{"nowhere", 1};
  CHECK_THROWS_AS(validate_ors(inst), InstanceError);
}
