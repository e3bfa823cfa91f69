#include <algorithm>

#include "doctest.h"
#include "medsched/baseline.hpp"
#include "medsched/generate.hpp"
#include "medsched/io.hpp"

using namespace medsched;

namespace {

Instance small_poac() {
  PoacInstance inst;
  inst.days = 2;
  inst.areas = {{"lab", 1}, {"xray", 2}};
  inst.exams = {{"blood", "lab"}, {"chest", "xray"}};
  inst.patients = {{"p1", 1, {"blood", "chest"}}, {"p2", 0, {}}};
  return inst;
}

ParseErrc errc_of(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const ParseError& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return ParseErrc::Syntax;
}

std::string where_of(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const ParseError& e) {
    return e.where();
  }
  return {};
}

void replace(std::string& s, const std::string& from, const std::string& to) {
  auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  s.replace(p, from.size(), to);
}

}  // namespace

TEST_CASE("instance documents round-trip for every kind") {
  for (std::uint64_t seed : {1, 2, 3}) {
    CtsGenParams c;
    c.seed = seed;
    c.drug_percent = 50;
    OrsGenParams o;
    o.seed = seed;
    o.scu_percent = 50;
    PoacGenParams q;
    q.seed = seed;
    for (const Instance& inst : {Instance{generate_cts(c)}, Instance{generate_ors(o)}, Instance{generate_poac(q)}}) {
      auto text = write_instance(inst);
      auto back = parse_instance(text);
      CHECK(back == inst);
      CHECK(write_instance(back) == text);
      CHECK(text.back() == '\n');
    }
  }
  Instance empty = CtsInstance{};
  CHECK(parse_instance(write_instance(empty)) == empty);
}

TEST_CASE("same seed gives byte-identical documents") {
  CtsGenParams c;
  c.seed = 7;
  CHECK(write_instance(generate_cts(c)) == write_instance(generate_cts(c)));
  c.seed = 8;
  CHECK(write_instance(generate_cts(c)) != write_instance(generate_cts(CtsGenParams{.seed = 7})));
}

TEST_CASE("exam pointing at a missing area is a semantic error naming the exam") {
  auto text = write_instance(small_poac());
  replace(text, "\"area\": \"xray\"", "\"area\": \"mri\"");
  try {
    parse_instance(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code() == ParseErrc::Semantic);
    CHECK(e.where() == "instance.exams[1].area");
    CHECK(std::string(e.what()).find("chest") != std::string::npos);
  }
}

TEST_CASE("schema errors") {
  auto text = write_instance(small_poac());
  auto wrong_kind = text;
  replace(wrong_kind, "\"kind\": \"poac\"", "\"kind\": \"cts\"");
  CHECK(errc_of(wrong_kind) == ParseErrc::Schema);
  auto bogus_kind = text;
  replace(bogus_kind, "\"kind\": \"poac\"", "\"kind\": \"icu\"");
  CHECK(errc_of(bogus_kind) == ParseErrc::Schema);
  CHECK(where_of(bogus_kind) == "kind");

  auto extra = text;
  replace(extra, "\"due_day\": 1,", "\"due_day\": 1, \"colour\": \"red\",");
  CHECK(errc_of(extra) == ParseErrc::Schema);
  CHECK(where_of(extra) == "instance.patients[0].colour");

  auto bad_type = text;
  replace(bad_type, "\"days\": 2", "\"days\": \"two\"");
  CHECK(where_of(bad_type) == "instance.days");

  auto version = text;
  replace(version, "\"version\": 1", "\"version\": 9");
  CHECK(errc_of(version) == ParseErrc::Schema);
}

TEST_CASE("syntax errors carry line and column") {
  std::string text = "{\n  \"format\": \"medsched-instance\",\n  \"version\": 1,,\n}";
  CHECK(errc_of(text) == ParseErrc::Syntax);
  CHECK(where_of(text) == "line 3, column 16");
}

TEST_CASE("optional CTS flags default to false") {
  std::string text = R"({"format":"medsched-instance","version":1,"kind":"cts","instance":{
    "slots":6,"slot_minutes":10,"day_start":"08:00","staff_capacity":[1,1,1],
    "patients":[{"id":"p1","durations":[1,1,1,1],"preferred":"bed"}],
    "resources":[{"id":"b1","type":"bed","room":"r"}],
    "rooms":[{"id":"r","resources":["b1"]}]}})";
  auto inst = std::get<CtsInstance>(parse_instance(text));
  CHECK_FALSE(inst.patients[0].scalp_cooling);
  CHECK_FALSE(inst.patients[0].drug_ready);
  CHECK(inst.resources[0].type == ResourceType::Bed);
}

TEST_CASE("solution documents round-trip") {
  CtsGenParams c;
  c.seed = 3;
  c.patients = 6;
  auto cts = generate_cts(c);
  auto g = greedy_cts(cts);
  SolutionDoc doc{ProblemKind::Cts, SolveStatus::FeasibleTimeout, g.schedule.objective, Schedule{g.schedule},
                  PeakMetric::Occupancy};
  Instance inst = cts;
  auto text = write_solution(doc, inst);
  CHECK(text.find("\"times\"") != std::string::npos);
  auto back = parse_solution(text, &inst);
  CHECK(back.status == SolveStatus::FeasibleTimeout);
  CHECK(back.metric == PeakMetric::Occupancy);
  CHECK(*back.objective == g.schedule.objective);
  CHECK(std::get<CtsSchedule>(*back.schedule).appointments == g.schedule.appointments);
  CHECK(write_solution(back, inst) == text);

  auto shifted = text;
  replace(shifted, "\"starts\": [\n", "\"starts\": [\n            0,\n");
  CHECK_THROWS_AS(parse_solution(shifted, &inst), ParseError);

  Instance ors = OrsInstance{1, {{"r1", "gen", 60, 2, std::nullopt}}, {}, {}};
  SolutionDoc od{ProblemKind::Ors, SolveStatus::Optimal, ObjectiveVector{{1, 0}},
                 Schedule{OrsSchedule{{{"r1", std::nullopt}}, {}}}, PeakMetric::Starts};
  auto otext = write_solution(od, ors);
  CHECK(otext.find("\"shift\": null") != std::string::npos);
  CHECK(std::get<OrsSchedule>(*parse_solution(otext).schedule).assignments == std::get<OrsSchedule>(*od.schedule).assignments);

  SolutionDoc unsat{ProblemKind::Poac, SolveStatus::Unsat, std::nullopt, std::nullopt, PeakMetric::Starts};
  auto utext = write_solution(unsat, small_poac());
  auto uback = parse_solution(utext);
  CHECK(uback.status == SolveStatus::Unsat);
  CHECK_FALSE(uback.schedule);
  CHECK(utext.find("metric") == std::string::npos);
}

TEST_CASE("report documents") {
  VerifyReport r{{"capacity(s1)", "due(p1)"}, ObjectiveVector{{0, 2}}};
  auto text = write_report(ProblemKind::Ors, r);
  auto back = parse_report(text);
  CHECK(back.violations == r.violations);
  CHECK(back.objective == r.objective);
  CHECK_FALSE(back.ok());
}

TEST_CASE("histogram CSV") {
  CtsInstance empty;
  CHECK(write_histogram_csv(empty, {}, {}) == "slot,baseline,exact\n");
  CHECK(parse_histogram_csv("slot,baseline,exact\n").empty());

  CtsGenParams c;
  c.seed = 5;
  auto inst = generate_cts(c);
  REQUIRE(inst.slots == 26);
  auto g = greedy_cts(inst);
  auto csv = write_histogram_csv(inst, g.schedule, g.schedule);
  auto rows = parse_histogram_csv(csv);
  REQUIRE(rows.size() == 26);
  CHECK(rows.front().slot == "07:40");
  CHECK(rows.back().slot == "11:50");
  int total = 0;
  for (const auto& row : rows) {
    CHECK(row.baseline == row.exact);
    total += row.baseline;
  }
  CHECK(total == static_cast<int>(inst.patients.size()));
  CHECK_THROWS_AS(parse_histogram_csv("slot,base\n"), ParseError);
  CHECK_THROWS_AS(parse_histogram_csv("slot,baseline,exact\n07:40,x,1\n"), ParseError);
}

TEST_CASE("MUS document lists labelled entries with descriptions") {
  ConstraintModel m;
  auto x = add_var(m, "x", {0, 1});
  add_constraint(m, {"a", {}}, Implication{{}, Literal{x, {0}}}, {.removable = true}, "x must be 0");
  add_constraint(m, {"b", {}}, Implication{{}, Literal{x, {1}}}, {.removable = true}, "x must be 1");
  add_constraint(m, {"c", {"x"}}, ExactlyOne{{Literal{x, {0, 1}}}}, {.removable = true}, "x takes a value");
  Mus mus{{"a", "b", "c(x)"}, 7};
  auto doc = make_mus_doc(m, mus);
  REQUIRE(doc.entries.size() == 3);
  CHECK(doc.entries[1] == MusEntry{"b", "x must be 1"});
  doc.check_calls = 4;
  doc.minimal = false;
  auto text = write_mus(doc);
  CHECK(parse_mus(text) == doc);
}

TEST_CASE("justification and contrast documents round-trip") {
  JustDoc j;
  j.nodes = {{0, "atom", "justified", "x=1", "", false, {1, 2}},
             {1, "constraint", "given", "c", "x is one", true, {}},
             {2, "cap", "given", "level 1 <= 0", "objective", false, {}}};
  j.roots = {0};
  j.oracle_calls = 5;
  auto text = write_justification(j);
  CHECK(text.find("\"edges\"") != std::string::npos);
  CHECK(parse_justification(text) == j);

  ContrastDoc c{"alternative-worse", "x=1", "x=0", ObjectiveVector{{0, 1}}, ObjectiveVector{{1, 0}}, {}, {"x=0"}};
  CHECK(parse_contrast(write_contrast(c)) == c);
}
