#include "medsched/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace medsched {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void schema(const std::string& where, const std::string& msg) {
  throw ParseError(ParseErrc::Schema, where, msg);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1, col = 1;
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw ParseError(ParseErrc::Syntax, "line " + std::to_string(line) + ", column " + std::to_string(col), msg);
  }
}

// Strict view of one JSON object: every lookup is recorded and done()
// rejects whatever was not asked for.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema(path_.empty() ? "document" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* opt(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  const json& req(const std::string& key) {
    const json* v = opt(key);
    if (!v) schema(path_.empty() ? "document" : path_, "missing field '" + key + "'");
    return *v;
  }

  int integer(const std::string& key) { return as_int(req(key), at(key)); }
  std::string string(const std::string& key) { return as_string(req(key), at(key)); }
  bool boolean(const std::string& key, bool dflt) {
    const json* v = opt(key);
    if (!v) return dflt;
    if (!v->is_boolean()) schema(at(key), "expected true or false");
    return v->get<bool>();
  }
  const json& array(const std::string& key) {
    const json& v = req(key);
    if (!v.is_array()) schema(at(key), "expected an array");
    return v;
  }

  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) schema(at(k), "unknown field");
  }

  static int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) schema(where, "expected an integer");
    auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) schema(where, "out of range");
    return static_cast<int>(x);
  }
  static std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) schema(where, "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string idx(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

template <class F>
void each(const json& arr, const std::string& base, F&& f) {
  for (std::size_t i = 0; i < arr.size(); ++i) f(arr[i], idx(base, i));
}

std::vector<std::string> string_list(const json& arr, const std::string& base) {
  std::vector<std::string> out;
  each(arr, base, [&](const json& v, const std::string& w) { out.push_back(Obj::as_string(v, w)); });
  return out;
}

std::vector<int> int_list(const json& arr, const std::string& base) {
  std::vector<int> out;
  each(arr, base, [&](const json& v, const std::string& w) { out.push_back(Obj::as_int(v, w)); });
  return out;
}

// Header shared by every document.
void check_header(Obj& o, const char* format) {
  if (o.string("format") != format) schema("format", std::string("expected ") + format);
  if (o.integer("version") != kFormatVersion) schema("version", "unsupported version");
}

ojson header(const char* format) {
  ojson j;
  j["format"] = format;
  j["version"] = kFormatVersion;
  return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ProblemKind read_kind(Obj& o) {
  auto s = o.string("kind");
  auto k = parse_kind(s);
  if (!k) schema("kind", "unknown problem kind '" + s + "'");
  return *k;
}

ojson objective_json(const ObjectiveVector& v) {
  ojson a = ojson::array();
  for (Cost c : v.costs) a.push_back(c);
  return a;
}

ObjectiveVector read_objective(const json& v, const std::string& where) {
  if (!v.is_array()) schema(where, "expected an array of integers");
  ObjectiveVector out;
  each(v, where, [&](const json& c, const std::string& w) {
    if (!c.is_number_integer()) schema(w, "expected an integer");
    out.costs.push_back(c.get<Cost>());
  });
  return out;
}

// ---- instance bodies ----

ResourceType read_type(const json& v, const std::string& where) {
  auto s = Obj::as_string(v, where);
  if (s == "bed") return ResourceType::Bed;
  if (s == "chair") return ResourceType::Chair;
  schema(where, "expected \"bed\" or \"chair\"");
}

ojson cts_body(const CtsInstance& inst) {
  ojson b;
  b["slots"] = inst.slots;
  b["slot_minutes"] = inst.slot_minutes;
  b["day_start"] = inst.day_start;
  b["staff_capacity"] = inst.staff_capacity;
  b["patients"] = ojson::array();
  for (const auto& p : inst.patients) {
    ojson j;
    j["id"] = p.id;
    j["durations"] = p.durations;
    j["preferred"] = type_name(p.preferred);
    j["scalp_cooling"] = p.scalp_cooling;
    j["isolation"] = p.isolation;
    if (p.drug_ready) j["drug_ready"] = *p.drug_ready;
    b["patients"].push_back(j);
  }
  b["resources"] = ojson::array();
  for (const auto& r : inst.resources) {
    ojson j;
    j["id"] = r.id;
    j["type"] = type_name(r.type);
    j["room"] = r.room;
    j["scalp_cooling"] = r.scalp_cooling;
    b["resources"].push_back(j);
  }
  b["rooms"] = ojson::array();
  for (const auto& r : inst.rooms) {
    ojson j;
    j["id"] = r.id;
    j["resources"] = r.resources;
    b["rooms"].push_back(j);
  }
  return b;
}

template <std::size_t N>
std::array<int, N> fixed_ints(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != N) schema(where, "expected " + std::to_string(N) + " integers");
  std::array<int, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = Obj::as_int(v[i], idx(where, i));
  return out;
}

CtsInstance read_cts(Obj& b) {
  CtsInstance inst;
  inst.slots = b.integer("slots");
  inst.slot_minutes = b.integer("slot_minutes");
  inst.day_start = b.string("day_start");
  inst.staff_capacity = fixed_ints<3>(b.req("staff_capacity"), b.at("staff_capacity"));
  each(b.array("patients"), b.at("patients"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    CtsPatient p;
    p.id = o.string("id");
    p.durations = fixed_ints<4>(o.req("durations"), o.at("durations"));
    p.preferred = read_type(o.req("preferred"), o.at("preferred"));
    p.scalp_cooling = o.boolean("scalp_cooling", false);
    p.isolation = o.boolean("isolation", false);
    if (const json* d = o.opt("drug_ready")) p.drug_ready = Obj::as_int(*d, o.at("drug_ready"));
    o.done();
    inst.patients.push_back(std::move(p));
  });
  each(b.array("resources"), b.at("resources"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    CtsResource r;
    r.id = o.string("id");
    r.type = read_type(o.req("type"), o.at("type"));
    r.room = o.string("room");
    r.scalp_cooling = o.boolean("scalp_cooling", false);
    o.done();
    inst.resources.push_back(std::move(r));
  });
  each(b.array("rooms"), b.at("rooms"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    CtsRoom r;
    r.id = o.string("id");
    r.resources = string_list(o.array("resources"), o.at("resources"));
    o.done();
    inst.rooms.push_back(std::move(r));
  });
  return inst;
}

ojson ors_body(const OrsInstance& inst) {
  ojson b;
  b["horizon"] = inst.horizon;
  b["registrations"] = ojson::array();
  for (const auto& r : inst.registrations) {
    ojson j;
    j["id"] = r.id;
    j["specialty"] = r.specialty;
    j["duration"] = r.duration;
    j["priority"] = r.priority;
    if (r.scu) {
      ojson s;
      s["unit"] = r.scu->unit;
      s["stay_days"] = r.scu->stay_days;
      j["scu"] = s;
    }
    b["registrations"].push_back(j);
  }
  b["shifts"] = ojson::array();
  for (const auto& s : inst.shifts) {
    ojson j;
    j["id"] = s.id;
    j["room"] = s.room;
    j["day"] = s.day;
    j["specialty"] = s.specialty;
    j["length"] = s.length;
    b["shifts"].push_back(j);
  }
  b["units"] = ojson::array();
  for (const auto& u : inst.units) {
    ojson j;
    j["id"] = u.id;
    j["beds"] = u.beds;
    b["units"].push_back(j);
  }
  return b;
}

OrsInstance read_ors(Obj& b) {
  OrsInstance inst;
  inst.horizon = b.integer("horizon");
  each(b.array("registrations"), b.at("registrations"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    OrsRegistration r;
    r.id = o.string("id");
    r.specialty = o.string("specialty");
    r.duration = o.integer("duration");
    r.priority = o.integer("priority");
    if (const json* s = o.opt("scu"); s && !s->is_null()) {
      Obj so(*s, o.at("scu"));
      r.scu = ScuNeed{so.string("unit"), so.integer("stay_days")};
      so.done();
    }
    o.done();
    inst.registrations.push_back(std::move(r));
  });
  each(b.array("shifts"), b.at("shifts"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    OrsShift s;
    s.id = o.string("id");
    s.room = o.string("room");
    s.day = o.integer("day");
    s.specialty = o.string("specialty");
    s.length = o.integer("length");
    o.done();
    inst.shifts.push_back(std::move(s));
  });
  each(b.array("units"), b.at("units"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    OrsUnit u{o.string("id"), o.integer("beds")};
    o.done();
    inst.units.push_back(std::move(u));
  });
  return inst;
}

ojson poac_body(const PoacInstance& inst) {
  ojson b;
  b["days"] = inst.days;
  b["doctors_per_day"] = inst.doctors_per_day;
  b["patients"] = ojson::array();
  for (const auto& p : inst.patients) {
    ojson j;
    j["id"] = p.id;
    j["due_day"] = p.due_day;
    j["exams"] = p.exams;
    b["patients"].push_back(j);
  }
  b["exams"] = ojson::array();
  for (const auto& e : inst.exams) {
    ojson j;
    j["id"] = e.id;
    j["area"] = e.area;
    b["exams"].push_back(j);
  }
  b["areas"] = ojson::array();
  for (const auto& a : inst.areas) {
    ojson j;
    j["id"] = a.id;
    j["capacity"] = a.capacity;
    b["areas"].push_back(j);
  }
  return b;
}

PoacInstance read_poac(Obj& b) {
  PoacInstance inst;
  inst.days = b.integer("days");
  inst.doctors_per_day = b.integer("doctors_per_day");
  each(b.array("patients"), b.at("patients"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    PoacPatient p;
    p.id = o.string("id");
    p.due_day = o.integer("due_day");
    p.exams = string_list(o.array("exams"), o.at("exams"));
    o.done();
    inst.patients.push_back(std::move(p));
  });
  each(b.array("exams"), b.at("exams"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    PoacExam e{o.string("id"), o.string("area")};
    o.done();
    inst.exams.push_back(std::move(e));
  });
  each(b.array("areas"), b.at("areas"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    PoacArea a{o.string("id"), o.integer("capacity")};
    o.done();
    inst.areas.push_back(std::move(a));
  });
  return inst;
}

// ---- schedules ----

ojson schedule_json(const Schedule& s, const Instance& inst) {
  ojson b;
  if (auto* c = std::get_if<CtsSchedule>(&s)) {
    const auto* ci = std::get_if<CtsInstance>(&inst);
    b["appointments"] = ojson::array();
    for (const auto& a : c->appointments) {
      ojson j;
      j["patient"] = a.patient;
      j["starts"] = a.start;
      if (ci) {
        ojson t = ojson::array();
        for (int x : a.start) t.push_back(slot_label(*ci, x));
        j["times"] = t;
      }
      j["resource"] = a.resource;
      b["appointments"].push_back(j);
    }
  } else if (auto* o = std::get_if<OrsSchedule>(&s)) {
    b["assignments"] = ojson::array();
    for (const auto& a : o->assignments) {
      ojson j;
      j["registration"] = a.registration;
      j["shift"] = a.shift ? ojson(*a.shift) : ojson(nullptr);
      b["assignments"].push_back(j);
    }
  } else {
    const auto& p = std::get<PoacSchedule>(s);
    b["visits"] = ojson::array();
    for (const auto& v : p.visits) {
      ojson j;
      j["patient"] = v.patient;
      j["day"] = v.day;
      b["visits"].push_back(j);
    }
    b["active"] = ojson::array();
    for (const auto& a : p.active) {
      ojson j;
      j["area"] = a.area;
      j["day"] = a.day;
      b["active"].push_back(j);
    }
  }
  return b;
}

Schedule read_schedule(ProblemKind kind, Obj& b, const Instance* inst) {
  if (kind == ProblemKind::Cts) {
    const auto* ci = inst ? std::get_if<CtsInstance>(inst) : nullptr;
    CtsSchedule s;
    each(b.array("appointments"), b.at("appointments"), [&](const json& v, const std::string& w) {
      Obj o(v, w);
      CtsAppointment a;
      a.patient = o.string("patient");
      a.start = fixed_ints<4>(o.req("starts"), o.at("starts"));
      if (const json* t = o.opt("times")) {
        auto labels = string_list(*t, o.at("times"));
        if (labels.size() != 4) schema(o.at("times"), "expected 4 labels");
        if (ci)
          for (int k = 0; k < 4; ++k)
            if (labels[k] != slot_label(*ci, a.start[k]))
              throw ParseError(ParseErrc::Semantic, idx(o.at("times"), k), "does not match slot " + std::to_string(a.start[k]));
      }
      a.resource = o.string("resource");
      o.done();
      s.appointments.push_back(std::move(a));
    });
    return s;
  }
  if (kind == ProblemKind::Ors) {
    OrsSchedule s;
    each(b.array("assignments"), b.at("assignments"), [&](const json& v, const std::string& w) {
      Obj o(v, w);
      OrsAssignment a;
      a.registration = o.string("registration");
      const json& sh = o.req("shift");
      if (!sh.is_null()) a.shift = Obj::as_string(sh, o.at("shift"));
      o.done();
      s.assignments.push_back(std::move(a));
    });
    return s;
  }
  PoacSchedule s;
  each(b.array("visits"), b.at("visits"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    PoacVisit x{o.string("patient"), o.integer("day")};
    o.done();
    s.visits.push_back(std::move(x));
  });
  each(b.array("active"), b.at("active"), [&](const json& v, const std::string& w) {
    Obj o(v, w);
    PoacActivation x{o.string("area"), o.integer("day")};
    o.done();
    s.active.push_back(std::move(x));
  });
  return s;
}

void set_objective(Schedule& s, const ObjectiveVector& v) {
  std::visit([&](auto& x) { x.objective = v; }, s);
}

ojson entries_json(const std::vector<MusEntry>& entries) {
  ojson a = ojson::array();
  for (const auto& e : entries) {
    ojson j;
    j["label"] = e.label;
    j["description"] = e.description;
    a.push_back(j);
  }
  return a;
}

std::vector<MusEntry> read_entries(const json& arr, const std::string& base) {
  if (!arr.is_array()) schema(base, "expected an array");
  std::vector<MusEntry> out;
  each(arr, base, [&](const json& v, const std::string& w) {
    Obj o(v, w);
    MusEntry e{o.string("label"), o.string("description")};
    o.done();
    out.push_back(std::move(e));
  });
  return out;
}

std::string describe(const ConstraintModel& model, const std::string& label) {
  if (auto i = model.find_hard(label)) {
    const auto& c = model.hard[*i];
    return c.description.empty() ? c.label.str() : c.description;
  }
  if (label == kForcedLabel) return "the alternative assignment";
  return {};
}

}  // namespace

ProblemKind kind_of(const Instance& inst) { return static_cast<ProblemKind>(inst.index()); }

std::optional<ProblemKind> parse_kind(std::string_view s) {
  for (auto k : {ProblemKind::Cts, ProblemKind::Ors, ProblemKind::Poac})
    if (s == kind_tag(k)) return k;
  return std::nullopt;
}

std::optional<SolveStatus> parse_status(std::string_view s) {
  for (auto k : {SolveStatus::Optimal, SolveStatus::FeasibleTimeout, SolveStatus::Unsat, SolveStatus::UnknownTimeout})
    if (s == status_name(k)) return k;
  return std::nullopt;
}

void validate(const Instance& inst) {
  std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CtsInstance>) validate_cts(x);
        else if constexpr (std::is_same_v<T, OrsInstance>) validate_ors(x);
        else validate_poac(x);
      },
      inst);
}

Instance parse_instance(std::string_view text) {
  json j = parse_json(text);
  Obj doc(j, "");
  check_header(doc, "medsched-instance");
  ProblemKind kind = read_kind(doc);
  Obj body(doc.req("instance"), "instance");
  Instance inst;
  switch (kind) {
    case ProblemKind::Cts: inst = read_cts(body); break;
    case ProblemKind::Ors: inst = read_ors(body); break;
    case ProblemKind::Poac: inst = read_poac(body); break;
  }
  body.done();
  doc.done();
  try {
    validate(inst);
  } catch (const InstanceError& e) {
    std::string what = e.what();
    std::string msg = e.field().empty() ? what : what.substr(e.field().size() + 2);
    throw ParseError(ParseErrc::Semantic, "instance." + e.field(), msg);
  }
  return inst;
}

std::string write_instance(const Instance& inst) {
  ojson j = header("medsched-instance");
  j["kind"] = kind_tag(kind_of(inst));
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CtsInstance>) j["instance"] = cts_body(x);
        else if constexpr (std::is_same_v<T, OrsInstance>) j["instance"] = ors_body(x);
        else j["instance"] = poac_body(x);
      },
      inst);
  return dump(j);
}

Instance apply_patch(const Instance& inst, std::string_view patch) {
  json j = parse_json(patch);
  Obj doc(j, "");
  const json& ops = doc.array("ops");
  doc.done();
  json body = json::parse(write_instance(inst))["instance"];
  const ProblemKind kind = kind_of(inst);
  auto collection = [&](const std::string& target) -> const char* {
    switch (kind) {
      case ProblemKind::Cts:
        if (target == "patient") return "patients";
        if (target == "resource") return "resources";
        if (target == "room") return "rooms";
        break;
      case ProblemKind::Ors:
        if (target == "registration" || target == "patient") return "registrations";
        if (target == "shift") return "shifts";
        if (target == "unit") return "units";
        break;
      case ProblemKind::Poac:
        if (target == "patient") return "patients";
        if (target == "exam") return "exams";
        if (target == "area") return "areas";
        break;
    }
    return nullptr;
  };
  each(ops, "ops", [&](const json& v, const std::string& w) {
    Obj o(v, w);
    const std::string op = o.string("op"), target = o.string("target");
    if (op != "add" && op != "remove" && op != "modify") schema(o.at("op"), "expected add, remove or modify");
    if (target == "capacity") {
      if (op != "modify") schema(o.at("op"), "capacity can only be modified");
      const std::string field = o.string("field");
      static const std::set<std::string> collections{"patients", "resources", "rooms", "registrations",
                                                     "shifts",   "units",     "exams", "areas"};
      if (!body.contains(field) || collections.count(field))
        schema(o.at("field"), "not a capacity setting: " + field);
      body[field] = o.req("value");
      o.done();
      return;
    }
    const char* coll = collection(target);
    if (!coll) schema(o.at("target"), "unknown target '" + target + "' for " + kind_tag(kind));
    json& items = body[coll];
    if (op == "add") {
      const json& value = o.req("value");
      if (!value.is_object()) schema(o.at("value"), "expected an object");
      items.push_back(value);
      o.done();
      return;
    }
    const std::string id = o.string("id");
    auto it = std::find_if(items.begin(), items.end(), [&](const json& x) { return x.value("id", "") == id; });
    if (it == items.end()) throw ParseError(ParseErrc::Semantic, o.at("id"), "no " + target + " with id " + id);
    if (op == "remove") {
      items.erase(it);
      if (kind == ProblemKind::Cts && target == "resource")
        for (auto& room : body["rooms"]) {
          auto& list = room["resources"];
          list.erase(std::remove(list.begin(), list.end(), json(id)), list.end());
        }
    } else {
      const json& value = o.req("value");
      if (!value.is_object()) schema(o.at("value"), "expected an object");
      for (const auto& [k, x] : value.items()) (*it)[k] = x;
    }
    o.done();
  });
  json full{{"format", "medsched-instance"}, {"version", kFormatVersion}, {"kind", kind_tag(kind)}, {"instance", body}};
  return parse_instance(full.dump());
}

std::string write_solution(const SolutionDoc& doc, const Instance& inst) {
  ojson j = header("medsched-solution");
  j["kind"] = kind_tag(doc.kind);
  j["status"] = status_name(doc.status);
  if (doc.kind == ProblemKind::Cts) j["metric"] = metric_name(doc.metric);
  j["objective"] = doc.objective ? objective_json(*doc.objective) : ojson(nullptr);
  j["schedule"] = doc.schedule ? schedule_json(*doc.schedule, inst) : ojson(nullptr);
  return dump(j);
}

SolutionDoc parse_solution(std::string_view text, const Instance* inst) {
  json j = parse_json(text);
  Obj o(j, "");
  check_header(o, "medsched-solution");
  SolutionDoc doc;
  doc.kind = read_kind(o);
  if (inst && kind_of(*inst) != doc.kind) throw ParseError(ParseErrc::Semantic, "kind", "does not match the instance");
  auto st = o.string("status");
  auto status = parse_status(st);
  if (!status) schema("status", "unknown status '" + st + "'");
  doc.status = *status;
  if (doc.kind == ProblemKind::Cts) {
    auto m = o.string("metric");
    auto metric = parse_metric(m);
    if (!metric) schema("metric", "unknown metric '" + m + "'");
    doc.metric = *metric;
  }
  if (const json& v = o.req("objective"); !v.is_null()) doc.objective = read_objective(v, "objective");
  if (const json& v = o.req("schedule"); !v.is_null()) {
    Obj s(v, "schedule");
    doc.schedule = read_schedule(doc.kind, s, inst);
    s.done();
    if (doc.objective) set_objective(*doc.schedule, *doc.objective);
  }
  o.done();
  return doc;
}

std::string write_report(ProblemKind kind, const VerifyReport& report) {
  ojson j = header("medsched-report");
  j["kind"] = kind_tag(kind);
  j["ok"] = report.ok();
  j["violations"] = report.violations;
  j["objective"] = objective_json(report.objective);
  return dump(j);
}

VerifyReport parse_report(std::string_view text) {
  json j = parse_json(text);
  Obj o(j, "");
  check_header(o, "medsched-report");
  read_kind(o);
  VerifyReport r;
  bool ok = o.boolean("ok", false);
  r.violations = string_list(o.array("violations"), "violations");
  if (ok != r.violations.empty()) throw ParseError(ParseErrc::Semantic, "ok", "disagrees with the violation list");
  r.objective = read_objective(o.req("objective"), "objective");
  o.done();
  return r;
}

MusDoc make_mus_doc(const ConstraintModel& model, const Mus& mus) {
  MusDoc doc;
  for (const auto& l : mus.labels) doc.entries.push_back({l, describe(model, l)});
  doc.oracle_calls = mus.oracle_calls;
  return doc;
}

std::string write_mus(const MusDoc& doc) {
  ojson j = header("medsched-mus");
  j["entries"] = entries_json(doc.entries);
  j["oracle_calls"] = doc.oracle_calls;
  if (doc.check_calls) {
    ojson c;
    c["minimal"] = doc.minimal;
    c["calls"] = *doc.check_calls;
    j["check"] = c;
  }
  return dump(j);
}

MusDoc parse_mus(std::string_view text) {
  json j = parse_json(text);
  Obj o(j, "");
  check_header(o, "medsched-mus");
  MusDoc doc;
  doc.entries = read_entries(o.req("entries"), "entries");
  const json& calls = o.req("oracle_calls");
  if (!calls.is_number_integer()) schema("oracle_calls", "expected an integer");
  doc.oracle_calls = calls.get<long long>();
  if (const json* c = o.opt("check")) {
    Obj co(*c, "check");
    doc.minimal = co.boolean("minimal", false);
    doc.check_calls = co.integer("calls");
    co.done();
  }
  o.done();
  return doc;
}

JustDoc make_just_doc(const ConstraintModel& model, const JustificationGraph& g) {
  static const char* kinds[] = {"atom", "constraint", "cap"};
  static const char* statuses[] = {"given", "justified", "unforced", "truncated"};
  JustDoc doc;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    JustDocNode d;
    d.id = static_cast<int>(i);
    d.kind = kinds[static_cast<int>(n.kind)];
    d.status = statuses[static_cast<int>(n.status)];
    switch (n.kind) {
      case NodeKind::Atom: d.text = atom_text(model, n.atom); break;
      case NodeKind::Constraint:
        d.text = n.label;
        d.description = describe(model, n.label);
        d.fact = n.fact;
        break;
      case NodeKind::Cap:
        d.text = "level " + std::to_string(n.level) + " <= " + std::to_string(n.cap);
        d.description = "objective level " + std::to_string(n.level) + " at most its optimal value";
        break;
    }
    d.supports = n.supports;
    doc.nodes.push_back(std::move(d));
  }
  doc.roots = g.roots;
  doc.oracle_calls = g.oracle_calls;
  return doc;
}

std::string write_justification(const JustDoc& doc) {
  ojson j = header("medsched-justification");
  j["roots"] = doc.roots;
  j["nodes"] = ojson::array();
  ojson edges = ojson::array();
  for (const auto& n : doc.nodes) {
    ojson x;
    x["id"] = n.id;
    x["kind"] = n.kind;
    x["status"] = n.status;
    x["text"] = n.text;
    x["description"] = n.description;
    x["fact"] = n.fact;
    j["nodes"].push_back(x);
    for (int s : n.supports) {
      ojson e;
      e["from"] = n.id;
      e["to"] = s;
      edges.push_back(e);
    }
  }
  j["edges"] = edges;
  j["oracle_calls"] = doc.oracle_calls;
  return dump(j);
}

JustDoc parse_justification(std::string_view text) {
  json j = parse_json(text);
  Obj o(j, "");
  check_header(o, "medsched-justification");
  JustDoc doc;
  doc.roots = int_list(o.array("roots"), "roots");
  each(o.array("nodes"), "nodes", [&](const json& v, const std::string& w) {
    Obj n(v, w);
    JustDocNode d;
    d.id = n.integer("id");
    if (d.id != static_cast<int>(doc.nodes.size())) throw ParseError(ParseErrc::Semantic, n.at("id"), "ids must be 0, 1, 2, ...");
    d.kind = n.string("kind");
    d.status = n.string("status");
    d.text = n.string("text");
    d.description = n.string("description");
    d.fact = n.boolean("fact", false);
    n.done();
    doc.nodes.push_back(std::move(d));
  });
  const int size = static_cast<int>(doc.nodes.size());
  each(o.array("edges"), "edges", [&](const json& v, const std::string& w) {
    Obj e(v, w);
    int from = e.integer("from"), to = e.integer("to");
    e.done();
    if (from < 0 || from >= size || to < 0 || to >= size) throw ParseError(ParseErrc::Semantic, w, "edge to a missing node");
    doc.nodes[from].supports.push_back(to);
  });
  for (int r : doc.roots)
    if (r < 0 || r >= size) throw ParseError(ParseErrc::Semantic, "roots", "missing node " + std::to_string(r));
  const json& calls = o.req("oracle_calls");
  if (!calls.is_number_integer()) schema("oracle_calls", "expected an integer");
  doc.oracle_calls = calls.get<long long>();
  o.done();
  return doc;
}

ContrastDoc make_contrast_doc(const ConstraintModel& model, const Assignment& solution, const Atom& a, const Atom& b,
                              const ContrastResult& r) {
  ContrastDoc doc;
  doc.verdict = verdict_name(r.verdict);
  doc.a = atom_text(model, a);
  doc.b = atom_text(model, b);
  doc.original = r.original;
  doc.alternative = r.alternative;
  for (const auto& l : r.mus.labels) doc.mus.push_back({l, describe(model, l)});
  if (r.alternative_assignment)
    for (std::size_t v = 0; v < solution.size(); ++v)
      if ((*r.alternative_assignment)[v] != solution[v])
        doc.changed.push_back(atom_text(model, Atom{static_cast<VarId>(v), (*r.alternative_assignment)[v]}));
  return doc;
}

std::string write_contrast(const ContrastDoc& doc) {
  ojson j = header("medsched-contrast");
  j["a"] = doc.a;
  j["b"] = doc.b;
  j["verdict"] = doc.verdict;
  j["original"] = objective_json(doc.original);
  j["alternative"] = doc.alternative ? objective_json(*doc.alternative) : ojson(nullptr);
  j["mus"] = entries_json(doc.mus);
  j["changed"] = doc.changed;
  return dump(j);
}

ContrastDoc parse_contrast(std::string_view text) {
  json j = parse_json(text);
  Obj o(j, "");
  check_header(o, "medsched-contrast");
  ContrastDoc doc;
  doc.a = o.string("a");
  doc.b = o.string("b");
  doc.verdict = o.string("verdict");
  doc.original = read_objective(o.req("original"), "original");
  if (const json& v = o.req("alternative"); !v.is_null()) doc.alternative = read_objective(v, "alternative");
  doc.mus = read_entries(o.req("mus"), "mus");
  doc.changed = string_list(o.array("changed"), "changed");
  o.done();
  return doc;
}

std::string write_histogram_csv(const CtsInstance& inst, const CtsSchedule& baseline, const CtsSchedule& exact,
                                PeakMetric metric) {
  std::ostringstream out;
  out << "slot,baseline,exact\n";
  if (inst.patients.empty()) return out.str();
  auto hist = [&](const CtsSchedule& s) {
    return metric == PeakMetric::Starts ? phase2_histogram(s, inst) : phase2_occupancy(s, inst);
  };
  auto b = hist(baseline), e = hist(exact);
  for (int t = 0; t < inst.slots; ++t) out << slot_label(inst, t) << ',' << b[t] << ',' << e[t] << '\n';
  return out.str();
}

std::vector<HistogramRow> parse_histogram_csv(std::string_view text) {
  std::vector<HistogramRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string where = "line " + std::to_string(n);
    if (n == 1) {
      if (line != "slot,baseline,exact") throw ParseError(ParseErrc::Schema, where, "expected header slot,baseline,exact");
      continue;
    }
    auto c1 = line.find(','), c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw ParseError(ParseErrc::Syntax, where, "expected three columns");
    HistogramRow r;
    r.slot = line.substr(0, c1);
    try {
      std::size_t used = 0;
      std::string b = line.substr(c1 + 1, c2 - c1 - 1), e = line.substr(c2 + 1);
      r.baseline = std::stoi(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      r.exact = std::stoi(e, &used);
      if (used != e.size()) throw std::invalid_argument(e);
    } catch (const std::logic_error&) {
      throw ParseError(ParseErrc::Syntax, where, "counts must be integers");
    }
    rows.push_back(std::move(r));
  }
  if (n == 0) throw ParseError(ParseErrc::Schema, "line 1", "missing header");
  return rows;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw std::runtime_error("cannot write " + path);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot write " + path + ": " + ec.message());
  }
}

}  // namespace medsched
