#ifndef MEDSCHED_POAC_HPP
#define MEDSCHED_POAC_HPP

// Pre-operative assessment clinic: one visit day per patient, exam areas
// activated per day, each activation taking one doctor.

#include <string>
#include <vector>

#include "medsched/domain.hpp"
#include "medsched/model.hpp"

namespace medsched {

struct PoacPatient {
  std::string id;
  int due_day = 0;
  std::vector<std::string> exams;

  bool operator==(const PoacPatient&) const = default;
};

struct PoacExam {
  std::string id;
  std::string area;

  bool operator==(const PoacExam&) const = default;
};

struct PoacArea {
  std::string id;
  int capacity = 1;

  bool operator==(const PoacArea&) const = default;
};

struct PoacInstance {
  int days = 1;
  int doctors_per_day = 1;
  std::vector<PoacPatient> patients;
  std::vector<PoacExam> exams;
  std::vector<PoacArea> areas;

  bool operator==(const PoacInstance&) const = default;
};

void validate_poac(const PoacInstance& inst);

struct PoacVisit {
  std::string patient;
  int day = 0;

  bool operator==(const PoacVisit&) const = default;
};

struct PoacActivation {
  std::string area;
  int day = 0;

  bool operator==(const PoacActivation&) const = default;
};

struct PoacSchedule {
  std::vector<PoacVisit> visits;         // instance patient order
  std::vector<PoacActivation> active;    // sorted by (day, area order)
  ObjectiveVector objective;             // [activations, sum of visit days]
};

struct PoacEncoding {
  ConstraintModel model;
  std::vector<VarId> day;                  // per patient
  std::vector<std::vector<VarId>> active;  // [area][day]
};

/// Area indices a patient needs, ascending and without repeats.
std::vector<int> poac_areas_of(const PoacInstance& inst, const PoacPatient& p);

PoacEncoding encode_poac(const PoacInstance& inst);
PoacSchedule decode_poac(const PoacInstance& inst, const PoacEncoding& enc, const Assignment& a);
std::optional<Assignment> poac_assignment(const PoacInstance& inst, const PoacEncoding& enc, const PoacSchedule& s);
VerifyReport verify_poac(const PoacInstance& inst, const PoacSchedule& s);

}  // namespace medsched

#endif  // MEDSCHED_POAC_HPP
