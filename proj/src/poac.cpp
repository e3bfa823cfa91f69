#include "medsched/poac.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace medsched {

namespace {

std::string at(const char* coll, std::size_t i, const char* field) {
  return std::string(coll) + "[" + std::to_string(i) + "]." + field;
}

}  // namespace

void validate_poac(const PoacInstance& inst) {
  if (inst.days < 1) throw InstanceError("days", "must be at least 1");
  if (inst.doctors_per_day < 0) throw InstanceError("doctors_per_day", "must not be negative");
  std::set<std::string> areas;
  for (std::size_t i = 0; i < inst.areas.size(); ++i) {
    const auto& a = inst.areas[i];
    if (a.id.empty()) throw InstanceError(at("areas", i, "id"), "empty id");
    if (!areas.insert(a.id).second) throw InstanceError(at("areas", i, "id"), "duplicate id " + a.id);
    if (a.capacity < 1) throw InstanceError(at("areas", i, "capacity"), "must be at least 1");
  }
  std::set<std::string> exams;
  for (std::size_t i = 0; i < inst.exams.size(); ++i) {
    const auto& e = inst.exams[i];
    if (e.id.empty()) throw InstanceError(at("exams", i, "id"), "empty id");
    if (!exams.insert(e.id).second) throw InstanceError(at("exams", i, "id"), "duplicate id " + e.id);
    if (!areas.count(e.area)) throw InstanceError(at("exams", i, "area"), "exam " + e.id + " references unknown area " + e.area);
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < inst.patients.size(); ++i) {
    const auto& p = inst.patients[i];
    if (p.id.empty()) throw InstanceError(at("patients", i, "id"), "empty id");
    if (!ids.insert(p.id).second) throw InstanceError(at("patients", i, "id"), "duplicate id " + p.id);
    if (p.due_day < 0 || p.due_day >= inst.days) throw InstanceError(at("patients", i, "due_day"), "outside the horizon");
    for (const auto& e : p.exams)
      if (!exams.count(e)) throw InstanceError(at("patients", i, "exams"), "unknown exam " + e);
  }
}

std::vector<int> poac_areas_of(const PoacInstance& inst, const PoacPatient& p) {
  std::set<int> out;
  for (const auto& e : p.exams)
    for (const auto& ex : inst.exams)
      if (ex.id == e)
        for (std::size_t a = 0; a < inst.areas.size(); ++a)
          if (inst.areas[a].id == ex.area) out.insert(static_cast<int>(a));
  return {out.begin(), out.end()};
}

PoacEncoding encode_poac(const PoacInstance& inst) {
  validate_poac(inst);
  PoacEncoding enc;
  auto& m = enc.model;
  const int D = inst.days;
  const int A = static_cast<int>(inst.areas.size());
  std::vector<Value> days(static_cast<std::size_t>(D));
  std::iota(days.begin(), days.end(), 0);

  for (const auto& p : inst.patients) enc.day.push_back(add_var(m, "day(" + p.id + ")", days));
  enc.active.assign(static_cast<std::size_t>(A), {});
  for (int d = 0; d < D; ++d)
    for (int a = 0; a < A; ++a)
      enc.active[a].push_back(add_var(m, "active(" + inst.areas[a].id + "," + std::to_string(d) + ")", {0, 1}));

  const ConstraintFlags rule{true, false}, fact{true, true};
  std::vector<std::vector<int>> needs;
  for (std::size_t i = 0; i < inst.patients.size(); ++i) {
    const auto& p = inst.patients[i];
    needs.push_back(poac_areas_of(inst, p));
    if (p.due_day < D - 1) {
      std::vector<Value> ok(days.begin(), days.begin() + p.due_day + 1);
      add_constraint(m, {"due", {p.id}}, Implication{{}, {enc.day[i], ok}}, fact,
                     "patient " + p.id + " is seen by day " + std::to_string(p.due_day));
    }
    for (int a : needs.back())
      for (int d = 0; d < D; ++d)
        add_constraint(m, {"requires", {p.id, inst.areas[a].id, std::to_string(d)}},
                       Implication{{{enc.day[i], {d}}}, {enc.active[a][d], {1}}}, rule,
                       "patient " + p.id + " on day " + std::to_string(d) + " needs area " + inst.areas[a].id);
  }

  for (int a = 0; a < A; ++a)
    for (int d = 0; d < D; ++d) {
      AtMostKCount c;
      c.k = inst.areas[a].capacity;
      for (std::size_t i = 0; i < inst.patients.size(); ++i)
        if (std::find(needs[i].begin(), needs[i].end(), a) != needs[i].end()) c.lits.push_back({enc.day[i], {d}});
      if (static_cast<int>(c.lits.size()) <= c.k) continue;
      add_constraint(m, {"area-capacity", {inst.areas[a].id, std::to_string(d)}}, std::move(c), fact,
                     "area " + inst.areas[a].id + " sees at most " + std::to_string(inst.areas[a].capacity) +
                         " patients on day " + std::to_string(d));
    }

  if (A > inst.doctors_per_day)
    for (int d = 0; d < D; ++d) {
      AtMostKCount c;
      c.k = inst.doctors_per_day;
      for (int a = 0; a < A; ++a) c.lits.push_back({enc.active[a][d], {1}});
      add_constraint(m, {"doctors", {std::to_string(d)}}, std::move(c), fact,
                     std::to_string(inst.doctors_per_day) + " doctors on day " + std::to_string(d));
    }

  for (int d = 0; d < D; ++d)
    for (int a = 0; a < A; ++a)
      add_soft(m, {"activation", {inst.areas[a].id, std::to_string(d)}}, 1, 1, Forbid{{{enc.active[a][d], {1}}}},
               "area " + inst.areas[a].id + " opened on day " + std::to_string(d));
  for (std::size_t i = 0; i < inst.patients.size(); ++i)
    for (int d = 1; d < D; ++d)
      add_soft(m, {"earliness", {inst.patients[i].id, std::to_string(d)}}, 2, d, Forbid{{{enc.day[i], {d}}}},
               "patient " + inst.patients[i].id + " seen on day " + std::to_string(d));
  return enc;
}

PoacSchedule decode_poac(const PoacInstance& inst, const PoacEncoding& enc, const Assignment& a) {
  if (a.size() != enc.model.vars.size()) throw InstanceError("assignment", "does not cover the model");
  PoacSchedule s;
  for (std::size_t i = 0; i < inst.patients.size(); ++i) s.visits.push_back({inst.patients[i].id, a[enc.day[i]]});
  for (int d = 0; d < inst.days; ++d)
    for (std::size_t ar = 0; ar < inst.areas.size(); ++ar)
      if (a[enc.active[ar][d]] == 1) s.active.push_back({inst.areas[ar].id, d});
  s.objective = check_assignment(enc.model, a).objective;
  s.objective.costs.resize(2, 0);
  return s;
}

std::optional<Assignment> poac_assignment(const PoacInstance& inst, const PoacEncoding& enc, const PoacSchedule& s) {
  if (s.visits.size() != inst.patients.size()) return std::nullopt;
  Assignment a(enc.model.vars.size(), 0);
  for (std::size_t i = 0; i < s.visits.size(); ++i) {
    if (s.visits[i].day < 0 || s.visits[i].day >= inst.days) return std::nullopt;
    a[enc.day[i]] = s.visits[i].day;
  }
  for (const auto& act : s.active) {
    if (act.day < 0 || act.day >= inst.days) return std::nullopt;
    bool found = false;
    for (std::size_t ar = 0; ar < inst.areas.size(); ++ar)
      if (inst.areas[ar].id == act.area) {
        a[enc.active[ar][act.day]] = 1;
        found = true;
      }
    if (!found) return std::nullopt;
  }
  return a;
}

VerifyReport verify_poac(const PoacInstance& inst, const PoacSchedule& s) {
  if (s.visits.size() != inst.patients.size()) throw InstanceError("visits", "expected one visit per patient");
  for (std::size_t i = 0; i < inst.patients.size(); ++i)
    if (s.visits[i].patient != inst.patients[i].id)
      throw InstanceError("visits[" + std::to_string(i) + "].patient", "expected " + inst.patients[i].id);

  VerifyReport rep;
  auto fail = [&](Label l) { rep.violations.push_back(l.str()); };
  std::map<std::string, std::string> area_of;
  for (const auto& e : inst.exams) area_of[e.id] = e.area;
  std::set<std::pair<std::string, int>> active;
  std::map<int, int> per_day;
  for (const auto& act : s.active) {
    bool known = std::any_of(inst.areas.begin(), inst.areas.end(), [&](const PoacArea& a) { return a.id == act.area; });
    if (!known || act.day < 0 || act.day >= inst.days) {
      fail({"unknown-activation", {act.area, std::to_string(act.day)}});
      continue;
    }
    if (active.insert({act.area, act.day}).second) ++per_day[act.day];
  }
  std::map<std::pair<std::string, int>, int> load;
  Cost days_sum = 0;
  for (std::size_t i = 0; i < inst.patients.size(); ++i) {
    const auto& p = inst.patients[i];
    int d = s.visits[i].day;
    days_sum += d;
    if (d < 0 || d >= inst.days) fail({"range", {p.id}});
    if (d > p.due_day) fail({"due", {p.id}});
    std::set<std::string> areas;
    for (const auto& e : p.exams) areas.insert(area_of[e]);
    for (const auto& a : areas) {
      if (!active.count({a, d})) fail({"requires", {p.id, a, std::to_string(d)}});
      ++load[{a, d}];
    }
  }
  for (const auto& a : inst.areas)
    for (int d = 0; d < inst.days; ++d)
      if (load[{a.id, d}] > a.capacity) fail({"area-capacity", {a.id, std::to_string(d)}});
  for (int d = 0; d < inst.days; ++d)
    if (per_day[d] > inst.doctors_per_day) fail({"doctors", {std::to_string(d)}});
  rep.objective.costs = {static_cast<Cost>(active.size()), days_sum};
  return rep;
}

}  // namespace medsched
