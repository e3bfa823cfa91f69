#include "medsched/ors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace medsched {

namespace {

std::string at(const char* coll, std::size_t i, const char* field) {
  return std::string(coll) + "[" + std::to_string(i) + "]." + field;
}

bool occupies(const OrsShift& s, const ScuNeed& n, int day) {
  return s.day <= day && day < s.day + n.stay_days;
}

}  // namespace

void validate_ors(const OrsInstance& inst) {
  if (inst.horizon < 1) throw InstanceError("horizon", "must be at least 1");
  std::set<std::string> units;
  for (std::size_t i = 0; i < inst.units.size(); ++i) {
    const auto& u = inst.units[i];
    if (u.id.empty()) throw InstanceError(at("units", i, "id"), "empty id");
    if (!units.insert(u.id).second) throw InstanceError(at("units", i, "id"), "duplicate id " + u.id);
    if (u.beds < 0) throw InstanceError(at("units", i, "beds"), "must not be negative");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < inst.registrations.size(); ++i) {
    const auto& r = inst.registrations[i];
    if (r.id.empty()) throw InstanceError(at("registrations", i, "id"), "empty id");
    if (!ids.insert(r.id).second) throw InstanceError(at("registrations", i, "id"), "duplicate id " + r.id);
    if (r.specialty.empty()) throw InstanceError(at("registrations", i, "specialty"), "empty specialty");
    if (r.duration < 1) throw InstanceError(at("registrations", i, "duration"), "must be at least 1 minute");
    if (r.priority < 1 || r.priority > 3) throw InstanceError(at("registrations", i, "priority"), "must be 1, 2 or 3");
    if (r.scu) {
      if (!units.count(r.scu->unit)) throw InstanceError(at("registrations", i, "scu.unit"), "unknown unit " + r.scu->unit);
      if (r.scu->stay_days < 1) throw InstanceError(at("registrations", i, "scu.stay_days"), "must be at least 1");
    }
  }
  std::set<std::string> shifts;
  for (std::size_t i = 0; i < inst.shifts.size(); ++i) {
    const auto& s = inst.shifts[i];
    if (s.id.empty()) throw InstanceError(at("shifts", i, "id"), "empty id");
    if (s.id == "unassigned") throw InstanceError(at("shifts", i, "id"), "reserved id");
    if (!shifts.insert(s.id).second) throw InstanceError(at("shifts", i, "id"), "duplicate id " + s.id);
    if (s.day < 0 || s.day >= inst.horizon) throw InstanceError(at("shifts", i, "day"), "outside the horizon");
    if (s.length < 1) throw InstanceError(at("shifts", i, "length"), "must be at least 1 minute");
    if (s.specialty.empty()) throw InstanceError(at("shifts", i, "specialty"), "empty specialty");
  }
}

OrsInstance without_scu(const OrsInstance& inst) {
  OrsInstance out = inst;
  for (auto& r : out.registrations) r.scu.reset();
  return out;
}

OrsEncoding encode_ors(const OrsInstance& inst) {
  validate_ors(inst);
  OrsEncoding enc;
  auto& m = enc.model;
  const int H = static_cast<int>(inst.shifts.size());
  const int N = static_cast<int>(inst.registrations.size());
  enc.unassigned = H;
  enc.vars.resize(static_cast<std::size_t>(N));

  std::vector<int> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ra = inst.registrations[a];
    const auto& rb = inst.registrations[b];
    if (ra.priority != rb.priority) return ra.priority < rb.priority;
    return ra.duration > rb.duration;
  });

  std::vector<Value> dom(static_cast<std::size_t>(H + 1));
  std::iota(dom.begin(), dom.end(), 0);
  std::vector<std::string> names;
  for (const auto& s : inst.shifts) names.push_back(s.id);
  names.push_back("unassigned");
  for (int ri : order) enc.vars[ri] = add_var(m, "shift(" + inst.registrations[ri].id + ")", dom, names);

  const ConstraintFlags rule{true, false}, fact{true, true};
  for (int ri : order) {
    const auto& r = inst.registrations[ri];
    VarId x = enc.vars[ri];
    std::vector<Value> other;
    for (int s = 0; s < H; ++s)
      if (inst.shifts[s].specialty != r.specialty) other.push_back(s);
    if (!other.empty())
      add_constraint(m, {"specialty", {r.id}}, Forbid{{{x, other}}}, fact,
                     "registration " + r.id + " goes to a " + r.specialty + " shift");
    if (r.priority == 1)
      add_constraint(m, {"assign-all-p1", {r.id}}, Forbid{{{x, {H}}}}, rule,
                     "priority-1 registration " + r.id + " is assigned");
  }

  for (int s = 0; s < H; ++s) {
    const auto& sh = inst.shifts[s];
    LinearLeq c;
    c.bound = sh.length;
    Cost total = 0;
    for (int ri : order) {
      c.terms.push_back({enc.vars[ri], inst.registrations[ri].duration, std::vector<Value>{s}});
      total += inst.registrations[ri].duration;
    }
    if (total <= sh.length) continue;
    add_constraint(m, {"capacity", {sh.id}}, std::move(c), fact,
                   "shift " + sh.id + " holds at most " + std::to_string(sh.length) + " minutes");
  }

  for (const auto& u : inst.units)
    for (int d = 0; d < inst.horizon; ++d) {
      AtMostKCount c;
      c.k = u.beds;
      for (int ri : order) {
        const auto& r = inst.registrations[ri];
        if (!r.scu || r.scu->unit != u.id) continue;
        std::vector<Value> vals;
        for (int s = 0; s < H; ++s)
          if (occupies(inst.shifts[s], *r.scu, d)) vals.push_back(s);
        if (!vals.empty()) c.lits.push_back({enc.vars[ri], std::move(vals)});
      }
      if (static_cast<int>(c.lits.size()) <= u.beds) continue;
      add_constraint(m, {"scu", {u.id, std::to_string(d)}}, std::move(c), fact,
                     "unit " + u.id + " has " + std::to_string(u.beds) + " beds on day " + std::to_string(d));
    }

  for (int ri : order) {
    const auto& r = inst.registrations[ri];
    if (r.priority == 1) continue;
    add_soft(m, {"unassigned", {r.id}}, r.priority - 1, 1, Forbid{{{enc.vars[ri], {H}}}},
             "priority-" + std::to_string(r.priority) + " registration " + r.id + " left unassigned");
  }
  return enc;
}

OrsSchedule decode_ors(const OrsInstance& inst, const OrsEncoding& enc, const Assignment& a) {
  if (a.size() != enc.model.vars.size()) throw InstanceError("assignment", "does not cover the model");
  OrsSchedule s;
  for (std::size_t i = 0; i < inst.registrations.size(); ++i) {
    OrsAssignment x{inst.registrations[i].id, std::nullopt};
    Value v = a[enc.vars[i]];
    if (v != enc.unassigned) x.shift = inst.shifts[v].id;
    s.assignments.push_back(std::move(x));
  }
  s.objective = check_assignment(enc.model, a).objective;
  s.objective.costs.resize(2, 0);
  return s;
}

std::optional<Assignment> ors_assignment(const OrsInstance& inst, const OrsEncoding& enc, const OrsSchedule& s) {
  if (s.assignments.size() != inst.registrations.size()) return std::nullopt;
  Assignment a(enc.model.vars.size(), enc.unassigned);
  for (std::size_t i = 0; i < s.assignments.size(); ++i) {
    if (!s.assignments[i].shift) continue;
    int idx = -1;
    for (std::size_t k = 0; k < inst.shifts.size(); ++k)
      if (inst.shifts[k].id == *s.assignments[i].shift) idx = static_cast<int>(k);
    if (idx < 0) return std::nullopt;
    a[enc.vars[i]] = idx;
  }
  return a;
}

VerifyReport verify_ors(const OrsInstance& inst, const OrsSchedule& s) {
  if (s.assignments.size() != inst.registrations.size())
    throw InstanceError("assignments", "expected one entry per registration");
  for (std::size_t i = 0; i < inst.registrations.size(); ++i)
    if (s.assignments[i].registration != inst.registrations[i].id)
      throw InstanceError("assignments[" + std::to_string(i) + "].registration", "expected " + inst.registrations[i].id);

  VerifyReport rep;
  auto fail = [&](Label l) { rep.violations.push_back(l.str()); };
  std::map<std::string, const OrsShift*> shift;
  for (const auto& sh : inst.shifts) shift[sh.id] = &sh;
  std::map<std::string, long long> used;
  std::map<std::pair<std::string, int>, int> beds;
  Cost p2 = 0, p3 = 0;

  for (std::size_t i = 0; i < inst.registrations.size(); ++i) {
    const auto& r = inst.registrations[i];
    const auto& x = s.assignments[i].shift;
    if (!x) {
      if (r.priority == 1) fail({"assign-all-p1", {r.id}});
      if (r.priority == 2) ++p2;
      if (r.priority == 3) ++p3;
      continue;
    }
    auto it = shift.find(*x);
    if (it == shift.end()) {
      fail({"unknown-shift", {r.id}});
      continue;
    }
    const OrsShift& sh = *it->second;
    if (sh.specialty != r.specialty) fail({"specialty", {r.id}});
    used[sh.id] += r.duration;
    if (r.scu)
      for (int d = sh.day; d < std::min(sh.day + r.scu->stay_days, inst.horizon); ++d) ++beds[{r.scu->unit, d}];
  }
  for (const auto& sh : inst.shifts)
    if (used[sh.id] > sh.length) fail({"capacity", {sh.id}});
  for (const auto& u : inst.units)
    for (int d = 0; d < inst.horizon; ++d)
      if (beds[{u.id, d}] > u.beds) fail({"scu", {u.id, std::to_string(d)}});
  rep.objective.costs = {p2, p3};
  return rep;
}

}  // namespace medsched
