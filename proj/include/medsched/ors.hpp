#ifndef MEDSCHED_ORS_HPP
#define MEDSCHED_ORS_HPP

// Operating room scheduling with special-care-unit beds.

#include <optional>
#include <string>
#include <vector>

#include "medsched/domain.hpp"
#include "medsched/model.hpp"

namespace medsched {

struct ScuNeed {
  std::string unit;
  int stay_days = 1;

  bool operator==(const ScuNeed&) const = default;
};

struct OrsRegistration {
  std::string id;
  std::string specialty;
  int duration = 1;  // minutes
  int priority = 2;  // 1 highest
  std::optional<ScuNeed> scu;

  bool operator==(const OrsRegistration&) const = default;
};

struct OrsShift {
  std::string id;
  std::string room;
  int day = 0;
  std::string specialty;
  int length = 0;  // minutes

  bool operator==(const OrsShift&) const = default;
};

struct OrsUnit {
  std::string id;
  int beds = 0;

  bool operator==(const OrsUnit&) const = default;
};

struct OrsInstance {
  int horizon = 1;
  std::vector<OrsRegistration> registrations;
  std::vector<OrsShift> shifts;
  std::vector<OrsUnit> units;

  bool operator==(const OrsInstance&) const = default;
};

void validate_ors(const OrsInstance& inst);

struct OrsAssignment {
  std::string registration;
  std::optional<std::string> shift;  // nullopt = unassigned

  bool operator==(const OrsAssignment&) const = default;
};

struct OrsSchedule {
  std::vector<OrsAssignment> assignments;  // instance registration order
  ObjectiveVector objective;               // [unassigned p2, unassigned p3]
};

struct OrsEncoding {
  ConstraintModel model;
  std::vector<VarId> vars;  // per registration; value = shift index, shifts.size() = unassigned
  int unassigned = 0;
};

OrsEncoding encode_ors(const OrsInstance& inst);
OrsSchedule decode_ors(const OrsInstance& inst, const OrsEncoding& enc, const Assignment& a);
std::optional<Assignment> ors_assignment(const OrsInstance& inst, const OrsEncoding& enc, const OrsSchedule& s);
VerifyReport verify_ors(const OrsInstance& inst, const OrsSchedule& s);

/// Copy of the instance with every SCU requirement dropped.
OrsInstance without_scu(const OrsInstance& inst);

}  // namespace medsched

#endif  // MEDSCHED_ORS_HPP
