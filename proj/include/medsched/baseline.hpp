#ifndef MEDSCHED_BASELINE_HPP
#define MEDSCHED_BASELINE_HPP

// First-come-first-served reference schedulers, standing in for the manual
// hospital procedure in comparisons.

#include "medsched/cts.hpp"
#include "medsched/ors.hpp"

namespace medsched {

struct CtsBaseline {
  CtsSchedule schedule;
  int virtual_resources = 0;
  bool feasible = true;  // false iff a virtual resource was needed
};

/// Patients in input order; each phase at its earliest slot with free staff;
/// therapy at the earliest slot with a free eligible resource, preferred type
/// first. A patient whose phases do not fit, or whose therapy finds no
/// resource, gets a fresh virtual resource. With wait_for_preferred the
/// therapy is delayed while a preferred-type resource may still free up.
CtsBaseline greedy_cts(const CtsInstance& inst, bool wait_for_preferred = false);

/// Resources of each type cover the patients preferring it, and the greedy
/// schedule that waits for preferred resources needs no virtual resource
/// and no wrong type.
bool cts_capacity_witness(const CtsInstance& inst);

struct OrsBaseline {
  OrsSchedule schedule;
  bool feasible = true;  // false if a priority-1 registration did not fit
};

/// First fit by (priority, longest duration first) into matching shifts,
/// respecting shift length and SCU beds.
OrsBaseline greedy_ors(const OrsInstance& inst);

}  // namespace medsched

#endif  // MEDSCHED_BASELINE_HPP
