#ifndef MEDSCHED_TESTS_DOMAIN_ORACLES_HPP
#define MEDSCHED_TESTS_DOMAIN_ORACLES_HPP

// Exhaustive search over schedules (not model assignments), scored by the
// domain verifiers. Shares no code with the encoders.

#include <functional>
#include <map>
#include <optional>
#include <set>

#include "medsched/cts.hpp"
#include "medsched/ors.hpp"
#include "medsched/poac.hpp"

namespace medsched::testing {

template <class Option, class Schedule>
std::optional<ObjectiveVector> best_over(const std::vector<std::vector<Option>>& options,
                                         const std::function<Schedule(const std::vector<const Option*>&)>& build,
                                         const std::function<VerifyReport(const Schedule&)>& check) {
  std::optional<ObjectiveVector> best;
  std::vector<const Option*> pick(options.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == options.size()) {
      auto rep = check(build(pick));
      if (rep.ok() && (!best || rep.objective < *best)) best = rep.objective;
      return;
    }
    for (const auto& o : options[i]) {
      pick[i] = &o;
      rec(i + 1);
    }
  };
  rec(0);
  return best;
}

inline std::optional<ObjectiveVector> cts_optimum(const CtsInstance& inst,
                                                  PeakMetric metric = PeakMetric::Starts) {
  const int S = inst.slots;
  std::vector<std::vector<CtsAppointment>> options;
  for (const auto& p : inst.patients) {
    std::vector<CtsAppointment> opts;
    const auto& d = p.durations;
    for (int a = 0; a < S; ++a)
      for (int b = a + d[0]; b < S; ++b)
        for (int c = b + d[1]; c < S; ++c)
          for (int t = c + d[2]; t + d[3] <= S; ++t)
            for (const auto& r : inst.resources) opts.push_back({p.id, {a, b, c, t}, r.id});
    options.push_back(std::move(opts));
  }
  if (inst.patients.empty()) return verify_cts(inst, {}, metric).objective;
  return best_over<CtsAppointment, CtsSchedule>(
      options,
      [](const std::vector<const CtsAppointment*>& pick) {
        CtsSchedule s;
        for (auto* ap : pick) s.appointments.push_back(*ap);
        return s;
      },
      [&](const CtsSchedule& s) { return verify_cts(inst, s, metric); });
}

inline std::optional<ObjectiveVector> ors_optimum(const OrsInstance& inst) {
  std::vector<std::vector<OrsAssignment>> options;
  for (const auto& r : inst.registrations) {
    std::vector<OrsAssignment> opts{{r.id, std::nullopt}};
    for (const auto& s : inst.shifts) opts.push_back({r.id, s.id});
    options.push_back(std::move(opts));
  }
  if (inst.registrations.empty()) return verify_ors(inst, {}).objective;
  return best_over<OrsAssignment, OrsSchedule>(
      options,
      [](const std::vector<const OrsAssignment*>& pick) {
        OrsSchedule s;
        for (auto* a : pick) s.assignments.push_back(*a);
        return s;
      },
      [&](const OrsSchedule& s) { return verify_ors(inst, s); });
}

// Activations beyond those the visits need only add cost, so each choice of
// days is scored with exactly the needed ones.
inline std::optional<ObjectiveVector> poac_optimum(const PoacInstance& inst) {
  std::vector<std::vector<PoacVisit>> options;
  for (const auto& p : inst.patients) {
    std::vector<PoacVisit> opts;
    for (int d = 0; d < inst.days; ++d) opts.push_back({p.id, d});
    options.push_back(std::move(opts));
  }
  auto build = [&](const std::vector<const PoacVisit*>& pick) {
    PoacSchedule s;
    std::map<std::string, std::string> area_of;
    for (const auto& e : inst.exams) area_of[e.id] = e.area;
    std::set<std::pair<int, std::string>> need;
    for (std::size_t i = 0; i < pick.size(); ++i) {
      s.visits.push_back(*pick[i]);
      for (const auto& e : inst.patients[i].exams) need.insert({pick[i]->day, area_of[e]});
    }
    for (const auto& [d, a] : need) s.active.push_back({a, d});
    return s;
  };
  if (inst.patients.empty()) return verify_poac(inst, {}).objective;
  return best_over<PoacVisit, PoacSchedule>(options, build, [&](const PoacSchedule& s) { return verify_poac(inst, s); });
}

}  // namespace medsched::testing

#endif  // MEDSCHED_TESTS_DOMAIN_ORACLES_HPP
