#include "medsched/baseline.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace medsched {

CtsBaseline greedy_cts(const CtsInstance& inst, bool wait_for_preferred) {
  validate_cts(inst);
  const int S = inst.slots;
  const int R = static_cast<int>(inst.resources.size());
  CtsBaseline out;
  std::array<std::vector<int>, 3> staff;
  for (auto& v : staff) v.assign(static_cast<std::size_t>(S), 0);
  std::vector<std::vector<int>> holder(static_cast<std::size_t>(R), std::vector<int>(static_cast<std::size_t>(S), -1));
  std::map<std::string, int> room_index;
  for (const auto& room : inst.rooms) room_index.emplace(room.id, static_cast<int>(room_index.size()));
  // Per room and slot: patients in therapy, and whether one of them is isolated.
  std::vector<std::vector<int>> room_load(room_index.size(), std::vector<int>(static_cast<std::size_t>(S), 0));
  std::vector<std::vector<char>> room_isolated(room_index.size(), std::vector<char>(static_cast<std::size_t>(S), 0));

  for (std::size_t pi = 0; pi < inst.patients.size(); ++pi) {
    const auto& p = inst.patients[pi];
    CtsAppointment ap;
    ap.patient = p.id;
    int earliest = 0;
    bool placed = true;
    std::array<bool, 3> took{};
    for (int ph = 0; ph < 3; ++ph) {
      int rest = 0;
      for (int k = ph; k < 4; ++k) rest += p.durations[k];
      int chosen = -1;
      for (int t = earliest; t + rest <= S && chosen < 0; ++t) {
        bool room = true;
        for (int u = t; u < t + p.durations[ph]; ++u) room = room && staff[ph][u] < inst.staff_capacity[ph];
        if (room) chosen = t;
      }
      if (chosen < 0) {
        chosen = std::min(earliest, std::max(S - 1, 0));
        placed = false;
      } else {
        for (int u = chosen; u < chosen + p.durations[ph]; ++u) ++staff[ph][u];
        took[ph] = true;
      }
      ap.start[ph] = chosen;
      earliest = chosen + p.durations[ph];
    }
    if (!placed)  // a virtual patient holds no staff
      for (int ph = 0; ph < 3; ++ph)
        if (took[ph])
          for (int u = ap.start[ph]; u < ap.start[ph] + p.durations[ph]; ++u) --staff[ph][u];

    int ready = std::max(earliest, p.drug_ready.value_or(0));
    const int d = p.durations[3];
    auto eligible = [&](int r, int t) {
      const auto& res = inst.resources[r];
      if (p.scalp_cooling && !res.scalp_cooling) return false;
      int room = room_index.at(res.room);
      for (int u = t; u < t + d; ++u) {
        if (holder[r][u] >= 0) return false;
        if (room_isolated[room][u]) return false;
        if (p.isolation && room_load[room][u] > 0) return false;
      }
      return true;
    };
    int chosen_t = -1, chosen_r = -1;
    auto scan = [&](bool preferred_only) {
      for (int t = ready; t + d <= S && chosen_r < 0; ++t)
        for (int pass = 0; pass < 2 && chosen_r < 0; ++pass)
          for (int r = 0; r < R && chosen_r < 0; ++r) {
            bool preferred = inst.resources[r].type == p.preferred;
            if ((pass == 0) != preferred || (preferred_only && !preferred)) continue;
            if (eligible(r, t)) {
              chosen_t = t;
              chosen_r = r;
            }
          }
    };
    if (placed && wait_for_preferred) scan(true);
    if (placed && chosen_r < 0) scan(false);
    if (chosen_r < 0) {
      ++out.virtual_resources;
      out.feasible = false;
      ap.start[3] = std::min(ready, std::max(S - 1, 0));
      ap.resource = "virtual-" + std::to_string(out.virtual_resources);
    } else {
      ap.start[3] = chosen_t;
      ap.resource = inst.resources[chosen_r].id;
      int room = room_index.at(inst.resources[chosen_r].room);
      for (int u = chosen_t; u < chosen_t + d; ++u) {
        holder[chosen_r][u] = static_cast<int>(pi);
        ++room_load[room][u];
        if (p.isolation) room_isolated[room][u] = 1;
      }
    }
    out.schedule.appointments.push_back(ap);
  }

  Cost wrong = 0;
  std::map<std::string, ResourceType> type;
  for (const auto& r : inst.resources) type[r.id] = r.type;
  for (std::size_t pi = 0; pi < inst.patients.size(); ++pi) {
    auto it = type.find(out.schedule.appointments[pi].resource);
    if (it != type.end() && it->second != inst.patients[pi].preferred) ++wrong;
  }
  auto hist = phase2_histogram(out.schedule, inst);
  Cost peak = hist.empty() ? 0 : *std::max_element(hist.begin(), hist.end());
  out.schedule.objective.costs = {wrong, peak};
  return out;
}

bool cts_capacity_witness(const CtsInstance& inst) {
  int beds = 0, chairs = 0, want_beds = 0, want_chairs = 0;
  for (const auto& r : inst.resources) (r.type == ResourceType::Bed ? beds : chairs)++;
  for (const auto& p : inst.patients) (p.preferred == ResourceType::Bed ? want_beds : want_chairs)++;
  if (beds < want_beds || chairs < want_chairs) return false;
  auto g = greedy_cts(inst, true);
  return g.feasible && g.virtual_resources == 0 && g.schedule.objective.at_level(1) == 0;
}

OrsBaseline greedy_ors(const OrsInstance& inst) {
  validate_ors(inst);
  const auto& regs = inst.registrations;
  std::vector<int> order(regs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (regs[a].priority != regs[b].priority) return regs[a].priority < regs[b].priority;
    return regs[a].duration > regs[b].duration;
  });
  std::vector<long long> left;
  for (const auto& s : inst.shifts) left.push_back(s.length);
  std::map<std::pair<std::string, int>, int> free_beds;
  for (const auto& u : inst.units)
    for (int d = 0; d < inst.horizon; ++d) free_beds[{u.id, d}] = u.beds;

  OrsBaseline out;
  out.schedule.assignments.resize(regs.size());
  for (std::size_t i = 0; i < regs.size(); ++i) out.schedule.assignments[i].registration = regs[i].id;
  Cost p2 = 0, p3 = 0;
  for (int ri : order) {
    const auto& r = regs[ri];
    int chosen = -1;
    for (std::size_t s = 0; s < inst.shifts.size() && chosen < 0; ++s) {
      const auto& sh = inst.shifts[s];
      if (sh.specialty != r.specialty || left[s] < r.duration) continue;
      bool beds_ok = true;
      if (r.scu)
        for (int d = sh.day; d < std::min(sh.day + r.scu->stay_days, inst.horizon); ++d)
          beds_ok = beds_ok && free_beds[{r.scu->unit, d}] > 0;
      if (beds_ok) chosen = static_cast<int>(s);
    }
    if (chosen < 0) {
      if (r.priority == 1) out.feasible = false;
      if (r.priority == 2) ++p2;
      if (r.priority == 3) ++p3;
      continue;
    }
    const auto& sh = inst.shifts[chosen];
    left[chosen] -= r.duration;
    if (r.scu)
      for (int d = sh.day; d < std::min(sh.day + r.scu->stay_days, inst.horizon); ++d) --free_beds[{r.scu->unit, d}];
    out.schedule.assignments[ri].shift = sh.id;
  }
  out.schedule.objective.costs = {p2, p3};
  return out;
}

}  // namespace medsched
