#include "medsched/cts.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

namespace medsched {

const char* kind_tag(ProblemKind k) {
  switch (k) {
    case ProblemKind::Cts: return "cts";
    case ProblemKind::Ors: return "ors";
    case ProblemKind::Poac: return "poac";
  }
  return "?";
}

const char* type_name(ResourceType t) { return t == ResourceType::Bed ? "bed" : "chair"; }

namespace {

std::string idx_field(const char* coll, std::size_t i, const char* field = nullptr) {
  std::string s = std::string(coll) + "[" + std::to_string(i) + "]";
  if (field) s += std::string(".") + field;
  return s;
}

bool parse_clock(const std::string& s, int& minutes) {
  if (s.size() != 5 || s[2] != ':') return false;
  for (int i : {0, 1, 3, 4})
    if (s[i] < '0' || s[i] > '9') return false;
  int h = (s[0] - '0') * 10 + (s[1] - '0'), m = (s[3] - '0') * 10 + (s[4] - '0');
  if (h > 23 || m > 59) return false;
  minutes = h * 60 + m;
  return true;
}

int window_end(const CtsInstance& inst, const CtsPatient& p) {
  return inst.slots - p.durations[1] - p.durations[2] - p.durations[3];
}

}  // namespace

void validate_cts(const CtsInstance& inst) {
  if (inst.slots < 1) throw InstanceError("slots", "must be at least 1");
  if (inst.slot_minutes < 1) throw InstanceError("slot_minutes", "must be at least 1");
  int start = 0;
  if (!parse_clock(inst.day_start, start)) throw InstanceError("day_start", "expected HH:MM");
  for (int i = 0; i < 3; ++i)
    if (inst.staff_capacity[i] < 1) throw InstanceError(idx_field("staff_capacity", i), "must be at least 1");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < inst.patients.size(); ++i) {
    const auto& p = inst.patients[i];
    if (p.id.empty()) throw InstanceError(idx_field("patients", i, "id"), "empty id");
    if (!ids.insert(p.id).second) throw InstanceError(idx_field("patients", i, "id"), "duplicate id " + p.id);
    for (int d : p.durations)
      if (d < 1) throw InstanceError(idx_field("patients", i, "durations"), "durations must be at least 1 slot");
    if (p.drug_ready && (*p.drug_ready < 0 || *p.drug_ready >= inst.slots))
      throw InstanceError(idx_field("patients", i, "drug_ready"), "must be a slot index below slots");
  }
  std::map<std::string, std::string> room_of;
  for (std::size_t i = 0; i < inst.resources.size(); ++i) {
    const auto& r = inst.resources[i];
    if (r.id.empty()) throw InstanceError(idx_field("resources", i, "id"), "empty id");
    if (!room_of.emplace(r.id, r.room).second)
      throw InstanceError(idx_field("resources", i, "id"), "duplicate id " + r.id);
  }
  std::set<std::string> room_ids, listed;
  for (std::size_t i = 0; i < inst.rooms.size(); ++i) {
    const auto& room = inst.rooms[i];
    if (room.id.empty()) throw InstanceError(idx_field("rooms", i, "id"), "empty id");
    if (!room_ids.insert(room.id).second) throw InstanceError(idx_field("rooms", i, "id"), "duplicate id " + room.id);
    for (const auto& r : room.resources) {
      auto it = room_of.find(r);
      if (it == room_of.end()) throw InstanceError(idx_field("rooms", i, "resources"), "unknown resource " + r);
      if (it->second != room.id)
        throw InstanceError(idx_field("rooms", i, "resources"), "resource " + r + " belongs to room " + it->second);
      if (!listed.insert(r).second) throw InstanceError(idx_field("rooms", i, "resources"), "resource listed twice " + r);
    }
  }
  for (std::size_t i = 0; i < inst.resources.size(); ++i) {
    const auto& r = inst.resources[i];
    if (!room_ids.count(r.room)) throw InstanceError(idx_field("resources", i, "room"), "unknown room " + r.room);
    if (!listed.count(r.id)) throw InstanceError(idx_field("resources", i, "room"), "room " + r.room + " does not list " + r.id);
  }
}

std::string slot_label(const CtsInstance& inst, int t) {
  int start = 0;
  parse_clock(inst.day_start, start);
  int m = (start + t * inst.slot_minutes) % (24 * 60);
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", m / 60, m % 60);
  return buf;
}

int cts_peak_lower_bound(const CtsInstance& inst) {
  if (inst.patients.empty()) return 0;
  std::vector<std::pair<int, int>> windows;
  for (const auto& p : inst.patients) {
    int lo = p.durations[0], hi = window_end(inst, p);
    if (lo <= hi) windows.push_back({lo, hi});
  }
  int best = 1;
  for (int a = 0; a < inst.slots; ++a)
    for (int b = a; b < inst.slots; ++b) {
      int inside = 0;
      for (auto [lo, hi] : windows) inside += lo >= a && hi <= b;
      int width = b - a + 1;
      best = std::max(best, (inside + width - 1) / width);
    }
  return best;
}

const char* metric_name(PeakMetric m) { return m == PeakMetric::Starts ? "starts" : "occupancy"; }

std::optional<PeakMetric> parse_metric(std::string_view s) {
  if (s == "starts") return PeakMetric::Starts;
  if (s == "occupancy") return PeakMetric::Occupancy;
  return std::nullopt;
}

CtsEncoding encode_cts(const CtsInstance& inst, PeakMetric metric) {
  validate_cts(inst);
  CtsEncoding enc;
  enc.metric = metric;
  auto& m = enc.model;
  const int S = inst.slots;
  const int R = static_cast<int>(inst.resources.size());
  const int N = static_cast<int>(inst.patients.size());
  enc.num_resources = R;
  enc.vars.resize(static_cast<std::size_t>(N));

  // Patients with the tightest phase-2 deadline are branched on first.
  std::vector<int> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = inst.patients[a];
    const auto& pb = inst.patients[b];
    int da = window_end(inst, pa), db = window_end(inst, pb);
    if (da != db) return da < db;
    return pa.durations[3] > pb.durations[3];
  });

  std::vector<Value> slot_values(static_cast<std::size_t>(S));
  std::iota(slot_values.begin(), slot_values.end(), 0);
  std::vector<std::string> slot_names;
  for (int t = 0; t < S; ++t) slot_names.push_back(slot_label(inst, t));
  std::vector<Value> therapy_values;
  std::vector<std::string> therapy_names;
  for (int t = 0; t < S; ++t)
    for (int r = 0; r < std::max(R, 1); ++r) {
      therapy_values.push_back(t * std::max(R, 1) + r);
      therapy_names.push_back((R ? inst.resources[r].id : std::string("none")) + "@" + slot_names[t]);
    }
  const int RR = std::max(R, 1);

  auto therapy_set = [&](auto keep) {
    std::vector<Value> out;
    for (int t = 0; t < S; ++t)
      for (int r = 0; r < R; ++r)
        if (keep(t, r)) out.push_back(t * RR + r);
    return out;
  };
  auto member = [&](Label label, VarId v, std::vector<Value> values, const std::vector<Value>& all,
                    ConstraintFlags flags, std::string desc) {
    if (values.empty()) add_constraint(m, std::move(label), Forbid{{{v, all}}}, flags, std::move(desc));
    else add_constraint(m, std::move(label), Implication{{}, {v, std::move(values)}}, flags, std::move(desc));
  };
  const ConstraintFlags rule{true, false}, fact{true, true};

  for (int pi : order) {
    const auto& p = inst.patients[pi];
    auto& vars = enc.vars[pi];
    for (int ph = 0; ph < 3; ++ph)
      vars[ph] = add_var(m, "start(" + p.id + "," + std::to_string(ph + 1) + ")", slot_values, slot_names);
    vars[3] = add_var(m, "therapy(" + p.id + ")", therapy_values, therapy_names);
  }
  enc.peak = add_var(m, "peak", [&] {
    std::vector<Value> d;
    for (int k = cts_peak_lower_bound(inst); k <= N; ++k) d.push_back(k);
    return d;
  }());

  static const char* phase_names[] = {"registration", "blood collection", "medical check", "therapy"};
  for (int pi : order) {
    const auto& p = inst.patients[pi];
    const auto& v = enc.vars[pi];
    for (int ph = 0; ph < 2; ++ph)
      add_constraint(m, {"order", {p.id, std::to_string(ph + 1)}}, Ordering{v[ph], v[ph + 1], p.durations[ph]}, rule,
                     "patient " + p.id + ": " + phase_names[ph + 1] + " starts after " + phase_names[ph] + " ends");
    add_constraint(m, {"order", {p.id, "3"}}, Ordering{v[2], v[3], static_cast<Cost>(RR) * p.durations[2], RR}, rule,
                   "patient " + p.id + ": therapy starts after the medical check ends");
    if (R == 0) {
      add_constraint(m, {"resource-available", {p.id}}, Forbid{{{v[3], therapy_values}}}, fact,
                     "patient " + p.id + ": no therapy resource exists");
      continue;
    }
    member({"completion", {p.id}}, v[3], therapy_set([&](int t, int) { return t + p.durations[3] <= S; }),
           therapy_values, fact, "patient " + p.id + ": therapy ends within the day");
    if (p.drug_ready)
      member({"drug", {p.id}}, v[3], therapy_set([&](int t, int) { return t >= *p.drug_ready; }), therapy_values, fact,
             "patient " + p.id + ": therapy starts once the drug is ready at " + slot_names[*p.drug_ready]);
    if (p.scalp_cooling)
      member({"scalp", {p.id}}, v[3], therapy_set([&](int, int r) { return inst.resources[r].scalp_cooling; }),
             therapy_values, fact, "patient " + p.id + ": therapy on a scalp-cooling resource");
  }

  // Staff pools for phases 1-3.
  for (int ph = 0; ph < 3; ++ph) {
    int cap = inst.staff_capacity[ph];
    if (N <= cap) continue;
    for (int t = 0; t < S; ++t) {
      AtMostKCount c;
      c.k = cap;
      for (int pi : order) {
        int d = inst.patients[pi].durations[ph];
        std::vector<Value> starts;
        for (int s = std::max(0, t - d + 1); s <= t; ++s) starts.push_back(s);
        c.lits.push_back({enc.vars[pi][ph], starts});
      }
      add_constraint(m, {"staff", {std::to_string(ph + 1), std::to_string(t)}}, std::move(c), fact,
                     std::string("at most ") + std::to_string(cap) + " patients in " + phase_names[ph] + " at " +
                         slot_names[t]);
    }
  }

  auto busy_values = [&](int pi, int t, auto in_scope) {
    int d = inst.patients[pi].durations[3];
    return therapy_set([&](int s, int r) { return s <= t && t < s + d && in_scope(r); });
  };

  if (N > 1)
    for (int r = 0; r < R; ++r)
      for (int t = 0; t < S; ++t) {
        AtMostKCount c;
        c.k = 1;
        for (int pi : order) {
          auto vals = busy_values(pi, t, [&](int x) { return x == r; });
          if (!vals.empty()) c.lits.push_back({enc.vars[pi][3], std::move(vals)});
        }
        if (c.lits.size() < 2) continue;
        add_constraint(m, {"exclusive", {inst.resources[r].id, std::to_string(t)}}, std::move(c), fact,
                       "resource " + inst.resources[r].id + " holds one patient at " + slot_names[t]);
      }

  for (int pi : order) {
    const auto& p = inst.patients[pi];
    if (!p.isolation || N < 2) continue;
    for (const auto& room : inst.rooms) {
      if (room.resources.size() < 2) continue;
      std::set<int> in_room;
      for (int r = 0; r < R; ++r)
        if (inst.resources[r].room == room.id) in_room.insert(r);
      auto scope = [&](int r) { return in_room.count(r) > 0; };
      for (int t = 0; t < S; ++t) {
        LinearLeq c;
        c.bound = N - 1;
        auto own = busy_values(pi, t, scope);
        if (own.empty()) continue;
        c.terms.push_back({enc.vars[pi][3], N - 1, own});
        for (int qi : order) {
          if (qi == pi) continue;
          auto vals = busy_values(qi, t, scope);
          if (!vals.empty()) c.terms.push_back({enc.vars[qi][3], 1, std::move(vals)});
        }
        if (c.terms.size() < 2) continue;
        add_constraint(m, {"isolation", {p.id, room.id, std::to_string(t)}}, std::move(c), rule,
                       "patient " + p.id + " is alone in room " + room.id + " at " + slot_names[t]);
      }
    }
  }

  if (N > 0)
    for (int t = 0; t < S; ++t) {
      AtMostKCount c;
      c.cap = enc.peak;
      for (int pi : order) {
        int d2 = metric == PeakMetric::Starts ? 1 : inst.patients[pi].durations[1];
        std::vector<Value> when;
        for (int u = std::max(0, t - d2 + 1); u <= t; ++u) when.push_back(u);
        c.lits.push_back({enc.vars[pi][1], std::move(when)});
      }
      add_constraint(m, {"peak", {std::to_string(t)}}, std::move(c), {},
                     std::string(metric == PeakMetric::Starts ? "phase-2 starts" : "patients in phase 2") + " at " +
                         slot_names[t] + " stay within the peak");
    }

  for (int pi : order) {
    const auto& p = inst.patients[pi];
    auto good = therapy_set([&](int, int r) { return inst.resources[r].type == p.preferred; });
    Params params;
    if (good.empty()) params = Forbid{{{enc.vars[pi][3], therapy_values}}};
    else params = Implication{{}, {enc.vars[pi][3], good}};
    add_soft(m, {"prefer", {p.id}}, 1, 1, std::move(params),
             "patient " + p.id + " gets a " + type_name(p.preferred));
  }
  for (Value k : m.vars[enc.peak].domain)
    if (k > 0)
      add_soft(m, {"peak-value", {std::to_string(k)}}, 2, k, Forbid{{{enc.peak, {k}}}},
               "peak phase-2 starts equal " + std::to_string(k));
  return enc;
}

CtsSchedule decode_cts(const CtsInstance& inst, const CtsEncoding& enc, const Assignment& a) {
  if (a.size() != enc.model.vars.size()) throw InstanceError("assignment", "does not cover the model");
  const int RR = std::max(enc.num_resources, 1);
  CtsSchedule s;
  for (std::size_t pi = 0; pi < inst.patients.size(); ++pi) {
    CtsAppointment ap;
    ap.patient = inst.patients[pi].id;
    const auto& v = enc.vars[pi];
    for (int ph = 0; ph < 3; ++ph) ap.start[ph] = a[v[ph]];
    ap.start[3] = a[v[3]] / RR;
    ap.resource = enc.num_resources ? inst.resources[a[v[3]] % RR].id : "";
    s.appointments.push_back(ap);
  }
  s.objective = check_assignment(enc.model, a).objective;
  s.objective.costs.resize(2, 0);
  return s;
}

std::optional<Assignment> cts_assignment(const CtsInstance& inst, const CtsEncoding& enc, const CtsSchedule& s) {
  if (s.appointments.size() != inst.patients.size()) return std::nullopt;
  if (enc.num_resources == 0 && !inst.patients.empty()) return std::nullopt;
  Assignment a(enc.model.vars.size(), 0);
  const int RR = enc.num_resources;
  for (std::size_t pi = 0; pi < inst.patients.size(); ++pi) {
    const auto& ap = s.appointments[pi];
    for (int ph = 0; ph < 4; ++ph)
      if (ap.start[ph] < 0 || ap.start[ph] >= inst.slots) return std::nullopt;
    int r = -1;
    for (int i = 0; i < RR; ++i)
      if (inst.resources[i].id == ap.resource) r = i;
    if (r < 0) return std::nullopt;
    for (int ph = 0; ph < 3; ++ph) a[enc.vars[pi][ph]] = ap.start[ph];
    a[enc.vars[pi][3]] = ap.start[3] * RR + r;
  }
  auto hist = enc.metric == PeakMetric::Starts ? phase2_histogram(s, inst) : phase2_occupancy(s, inst);
  int peak = hist.empty() ? 0 : *std::max_element(hist.begin(), hist.end());
  if (!enc.model.vars[enc.peak].index_of(peak)) return std::nullopt;
  a[enc.peak] = peak;
  return a;
}

VerifyReport verify_cts(const CtsInstance& inst, const CtsSchedule& s, PeakMetric metric) {
  if (s.appointments.size() != inst.patients.size())
    throw InstanceError("appointments", "expected one appointment per patient");
  for (std::size_t i = 0; i < inst.patients.size(); ++i)
    if (s.appointments[i].patient != inst.patients[i].id)
      throw InstanceError(idx_field("appointments", i, "patient"), "expected " + inst.patients[i].id);

  const int S = inst.slots;
  VerifyReport rep;
  auto fail = [&](Label l) { rep.violations.push_back(l.str()); };
  std::map<std::string, const CtsResource*> res;
  for (const auto& r : inst.resources) res[r.id] = &r;

  Cost wrong = 0;
  for (std::size_t i = 0; i < inst.patients.size(); ++i) {
    const auto& p = inst.patients[i];
    const auto& ap = s.appointments[i];
    bool in_day = true;
    for (int ph = 0; ph < 4; ++ph) in_day = in_day && ap.start[ph] >= 0 && ap.start[ph] < S;
    if (!in_day) fail({"range", {p.id}});
    for (int ph = 0; ph < 3; ++ph)
      if (ap.start[ph] + p.durations[ph] > ap.start[ph + 1]) fail({"order", {p.id, std::to_string(ph + 1)}});
    if (ap.start[3] + p.durations[3] > S) fail({"completion", {p.id}});
    if (p.drug_ready && ap.start[3] < *p.drug_ready) fail({"drug", {p.id}});
    auto it = res.find(ap.resource);
    if (it == res.end()) {
      fail({"resource", {p.id}});
      continue;
    }
    if (p.scalp_cooling && !it->second->scalp_cooling) fail({"scalp", {p.id}});
    if (it->second->type != p.preferred) ++wrong;
  }

  for (int ph = 0; ph < 3; ++ph)
    for (int t = 0; t < S; ++t) {
      int busy = 0;
      for (std::size_t i = 0; i < inst.patients.size(); ++i) {
        int st = s.appointments[i].start[ph];
        busy += st <= t && t < st + inst.patients[i].durations[ph];
      }
      if (busy > inst.staff_capacity[ph]) fail({"staff", {std::to_string(ph + 1), std::to_string(t)}});
    }

  auto on_at = [&](std::size_t i, int t) {
    int st = s.appointments[i].start[3];
    return st <= t && t < st + inst.patients[i].durations[3];
  };
  for (const auto& r : inst.resources)
    for (int t = 0; t < S; ++t) {
      int n = 0;
      for (std::size_t i = 0; i < inst.patients.size(); ++i) n += s.appointments[i].resource == r.id && on_at(i, t);
      if (n > 1) fail({"exclusive", {r.id, std::to_string(t)}});
    }

  for (std::size_t i = 0; i < inst.patients.size(); ++i) {
    if (!inst.patients[i].isolation) continue;
    auto it = res.find(s.appointments[i].resource);
    if (it == res.end()) continue;
    const std::string& room = it->second->room;
    for (int t = 0; t < S; ++t) {
      if (!on_at(i, t)) continue;
      for (std::size_t j = 0; j < inst.patients.size(); ++j) {
        if (j == i || !on_at(j, t)) continue;
        auto jt = res.find(s.appointments[j].resource);
        if (jt != res.end() && jt->second->room == room) {
          fail({"isolation", {inst.patients[i].id, room, std::to_string(t)}});
          break;
        }
      }
    }
  }

  auto hist = metric == PeakMetric::Starts ? phase2_histogram(s, inst) : phase2_occupancy(s, inst);
  Cost peak = hist.empty() ? 0 : *std::max_element(hist.begin(), hist.end());
  rep.objective.costs = {wrong, peak};
  return rep;
}

std::vector<int> phase2_histogram(const CtsSchedule& s, const CtsInstance& inst) {
  std::vector<int> h(static_cast<std::size_t>(std::max(inst.slots, 0)), 0);
  for (const auto& ap : s.appointments)
    if (ap.start[1] >= 0 && ap.start[1] < inst.slots) ++h[ap.start[1]];
  return h;
}

std::vector<int> phase2_occupancy(const CtsSchedule& s, const CtsInstance& inst) {
  std::vector<int> h(static_cast<std::size_t>(std::max(inst.slots, 0)), 0);
  std::map<std::string, int> d2;
  for (const auto& p : inst.patients) d2[p.id] = p.durations[1];
  for (const auto& ap : s.appointments)
    for (int t = std::max(ap.start[1], 0); t < std::min(ap.start[1] + d2[ap.patient], inst.slots); ++t) ++h[t];
  return h;
}

}  // namespace medsched
