#include <map>
#include <set>

#include "doctest.h"
#include "domain_oracles.hpp"
#include "medsched/baseline.hpp"
#include "medsched/cts.hpp"
#include "medsched/engine.hpp"
#include "medsched/generate.hpp"

using namespace medsched;

namespace {

CtsPatient patient(std::string id, std::array<int, 4> d, ResourceType pref = ResourceType::Chair) {
  CtsPatient p;
  p.id = std::move(id);
  p.durations = d;
  p.preferred = pref;
  return p;
}

void add_resource(CtsInstance& inst, std::string id, ResourceType type, std::string room, bool scalp = false) {
  inst.resources.push_back({id, type, room, scalp});
  for (auto& r : inst.rooms)
    if (r.id == room) {
      r.resources.push_back(id);
      return;
    }
  inst.rooms.push_back({room, {id}});
}

struct Solved {
  CtsEncoding enc;
  SolveOutcome out;
  CtsSchedule schedule;
};

Solved solve_cts(const CtsInstance& inst, PeakMetric metric = PeakMetric::Starts) {
  Solved s{encode_cts(inst, metric), {}, {}};
  SolveConfig cfg;
  cfg.time_limit_s = 30;
  s.out = solve(s.enc.model, cfg);
  if (s.out.has_solution()) s.schedule = decode_cts(inst, s.enc, *s.out.assignment);
  return s;
}

// decoded objective == verifier objective == solver objective, and no violations
void check_round_trip(const CtsInstance& inst, const Solved& s, PeakMetric metric = PeakMetric::Starts) {
  REQUIRE(s.out.has_solution());
  auto rep = verify_cts(inst, s.schedule, metric);
  CHECK(rep.violations.empty());
  CHECK(rep.objective == s.schedule.objective);
  CHECK(rep.objective == *s.out.objective);
  auto back = cts_assignment(inst, s.enc, s.schedule);
  REQUIRE(back);
  CHECK(*back == *s.out.assignment);
}

}  // namespace

TEST_CASE("single patient with a preferred resource") {
  CtsInstance inst;
  inst.slots = 6;
  inst.patients.push_back(patient("p1", {1, 1, 1, 2}));
  add_resource(inst, "chair1", ResourceType::Chair, "room1");
  auto s = solve_cts(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(s.out.objective->costs == std::vector<Cost>{0, 1});
  check_round_trip(inst, s);
}

TEST_CASE("two bed patients with one bed and no room to take turns") {
  CtsInstance inst;
  inst.slots = 5;
  inst.staff_capacity = {2, 2, 2};
  inst.patients.push_back(patient("p1", {1, 1, 1, 2}, ResourceType::Bed));
  inst.patients.push_back(patient("p2", {1, 1, 1, 2}, ResourceType::Bed));
  add_resource(inst, "bed1", ResourceType::Bed, "room1");
  add_resource(inst, "chair1", ResourceType::Chair, "room1");
  auto oracle = testing::cts_optimum(inst);
  REQUIRE(oracle);
  CHECK(oracle->at_level(1) == 1);
  auto s = solve_cts(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(*s.out.objective == *oracle);
  check_round_trip(inst, s);
}

TEST_CASE("isolation keeps the room to one patient") {
  CtsInstance inst;
  inst.slots = 7;
  inst.staff_capacity = {2, 2, 2};
  inst.patients.push_back(patient("p1", {1, 1, 1, 2}));
  inst.patients.push_back(patient("p2", {1, 1, 1, 2}));
  inst.patients[0].isolation = true;
  add_resource(inst, "chair1", ResourceType::Chair, "room1");
  add_resource(inst, "chair2", ResourceType::Chair, "room1");

  auto s = solve_cts(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(*s.out.objective == *testing::cts_optimum(inst));
  check_round_trip(inst, s);
  int a = s.schedule.appointments[0].start[3], b = s.schedule.appointments[1].start[3];
  CHECK((a + 2 <= b || b + 2 <= a));

  // Earliest therapy is slot 3 and both need two slots: no way to take turns in 6.
  inst.slots = 6;
  CHECK_FALSE(testing::cts_optimum(inst));
  CHECK(solve_cts(inst).out.status == SolveStatus::Unsat);
}

TEST_CASE("empty instance gives an empty schedule") {
  CtsInstance inst;
  auto s = solve_cts(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(s.schedule.appointments.empty());
  CHECK(*s.out.objective == ObjectiveVector{{0, 0}});
  check_round_trip(inst, s);
  auto hist = phase2_histogram(s.schedule, inst);
  CHECK(hist == std::vector<int>(26, 0));
}

TEST_CASE("verifier on hand-built schedules") {
  CtsInstance inst;
  inst.slots = 10;
  inst.staff_capacity = {3, 3, 3};
  for (int i = 1; i <= 3; ++i) inst.patients.push_back(patient("p" + std::to_string(i), {1, 1, 1, 2}));
  for (int i = 1; i <= 3; ++i) add_resource(inst, "chair" + std::to_string(i), ResourceType::Chair, "room1");

  CtsSchedule ok;
  for (int i = 0; i < 3; ++i) ok.appointments.push_back({inst.patients[i].id, {i, i + 1, i + 2, i + 3}, inst.resources[i].id});
  auto rep = verify_cts(inst, ok);
  CHECK(rep.violations.empty());
  CHECK(rep.objective.costs == std::vector<Cost>{0, 1});

  CtsSchedule swapped = ok;
  swapped.appointments[1].start = {1, 4, 3, 6};
  rep = verify_cts(inst, swapped);
  CHECK(std::find(rep.violations.begin(), rep.violations.end(), "order(p2,2)") != rep.violations.end());

  CtsSchedule stacked;
  for (int i = 0; i < 3; ++i) stacked.appointments.push_back({inst.patients[i].id, {0, 1, 2, 3}, inst.resources[i].id});
  rep = verify_cts(inst, stacked);
  CHECK(rep.violations.empty());
  CHECK(rep.objective.at_level(2) == 3);

  CtsSchedule shared = stacked;
  shared.appointments[1].resource = "chair1";
  rep = verify_cts(inst, shared);
  CHECK(std::find(rep.violations.begin(), rep.violations.end(), "exclusive(chair1,3)") != rep.violations.end());

  CHECK_THROWS_AS(verify_cts(inst, CtsSchedule{}), InstanceError);
}

TEST_CASE("histogram slots and conservation") {
  CtsInstance inst;
  CHECK(slot_label(inst, 0) == "07:40");
  CHECK(slot_label(inst, 25) == "11:50");
  inst.staff_capacity = {5, 5, 5};
  for (int i = 1; i <= 5; ++i) inst.patients.push_back(patient("p" + std::to_string(i), {1, 1, 1, 2}));
  for (int i = 1; i <= 5; ++i) add_resource(inst, "chair" + std::to_string(i), ResourceType::Chair, "room1");
  auto s = solve_cts(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(s.out.objective->at_level(2) == 1);
  auto hist = phase2_histogram(s.schedule, inst);
  REQUIRE(hist.size() == 26);
  int sum = 0;
  for (int h : hist) sum += h;
  CHECK(sum == 5);
  CHECK(*std::max_element(hist.begin(), hist.end()) == 1);
}

TEST_CASE("drug and scalp cooling restrict therapy") {
  CtsInstance inst;
  inst.slots = 8;
  inst.staff_capacity = {2, 2, 2};
  inst.patients.push_back(patient("p1", {1, 1, 1, 2}));
  inst.patients.push_back(patient("p2", {1, 1, 1, 2}));
  inst.patients[0].drug_ready = 5;
  inst.patients[1].scalp_cooling = true;
  add_resource(inst, "chair1", ResourceType::Chair, "room1");
  add_resource(inst, "chair2", ResourceType::Chair, "room2", true);
  auto s = solve_cts(inst);
  REQUIRE(s.out.status == SolveStatus::Optimal);
  CHECK(*s.out.objective == *testing::cts_optimum(inst));
  check_round_trip(inst, s);
  CHECK(s.schedule.appointments[0].start[3] >= 5);
  CHECK(s.schedule.appointments[1].resource == "chair2");

  inst.resources[1].scalp_cooling = false;
  CHECK(solve_cts(inst).out.status == SolveStatus::Unsat);
}

TEST_CASE("solver matches schedule enumeration on small generated instances") {
  int checked = 0, infeasible = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    CtsGenParams p;
    p.seed = seed;
    p.patients = 1 + static_cast<int>(seed % 2);
    p.slots = 5 + static_cast<int>(seed % 3 == 0);
    p.tightness = 1;
    p.max_therapy = 2;
    p.scalp_percent = 30;
    p.isolation_percent = 30;
    p.drug_percent = 30;
    p.room_size = 2;
    auto inst = generate_cts(p);
    inst.staff_capacity = {1, 1, 1};
    INFO("seed " << seed);
    for (auto metric : {PeakMetric::Starts, PeakMetric::Occupancy}) {
      auto oracle = testing::cts_optimum(inst, metric);
      auto s = solve_cts(inst, metric);
      if (!oracle) {
        ++infeasible;
        CHECK(s.out.status == SolveStatus::Unsat);
        continue;
      }
      REQUIRE(s.out.status == SolveStatus::Optimal);
      CHECK(*s.out.objective == *oracle);
      check_round_trip(inst, s, metric);
      ++checked;
    }
  }
  CHECK(checked >= 40);
  CHECK(infeasible >= 4);
}

TEST_CASE("sufficient capacity leaves nobody on the wrong resource") {
  int witnessed = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CtsGenParams p;
    p.seed = seed;
    p.patients = 12;
    p.tightness = 0.5;
    auto inst = generate_cts(p);
    if (!cts_capacity_witness(inst)) continue;
    ++witnessed;
    auto s = solve_cts(inst);
    REQUIRE(s.out.has_solution());
    CHECK(s.out.objective->at_level(1) == 0);
  }
  CHECK(witnessed >= 10);
}

TEST_CASE("peak lower bound never exceeds the optimum") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CtsGenParams p;
    p.seed = seed;
    p.patients = 2;
    p.slots = 6;
    p.max_therapy = 2;
    p.tightness = 1;
    auto inst = generate_cts(p);
    auto oracle = testing::cts_optimum(inst);
    if (oracle) CHECK(cts_peak_lower_bound(inst) <= oracle->at_level(2));
  }
}

TEST_CASE("instance validation names the field") {
  CtsInstance inst;
  inst.patients.push_back(patient("p1", {1, 0, 1, 1}));
  try {
    validate_cts(inst);
    FAIL("expected InstanceError");
  } catch (const InstanceError& e) {
    CHECK(e.field() == "patients[0].durations");
  }
  inst.patients[0].durations = {1, 1, 1, 1};
  inst.patients[0].drug_ready = 26;
  CHECK_THROWS_AS(validate_cts(inst), InstanceError);
  inst.patients[0].drug_ready.reset();
  inst.resources.push_back({"bed1", ResourceType::Bed, "nowhere", false});
  CHECK_THROWS_AS(encode_cts(inst), InstanceError);
}
