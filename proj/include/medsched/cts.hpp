#ifndef MEDSCHED_CTS_HPP
#define MEDSCHED_CTS_HPP

// Chemotherapy treatment scheduling: registration, blood collection,
// medical check and therapy on a slotted day.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medsched/domain.hpp"
#include "medsched/model.hpp"

namespace medsched {

enum class ResourceType { Bed, Chair };

const char* type_name(ResourceType t);

struct CtsPatient {
  std::string id;
  std::array<int, 4> durations{1, 1, 1, 1};  // in slots
  ResourceType preferred = ResourceType::Chair;
  bool scalp_cooling = false;
  bool isolation = false;
  std::optional<int> drug_ready;

  bool operator==(const CtsPatient&) const = default;
};

struct CtsResource {
  std::string id;
  ResourceType type = ResourceType::Chair;
  std::string room;
  bool scalp_cooling = false;

  bool operator==(const CtsResource&) const = default;
};

struct CtsRoom {
  std::string id;
  std::vector<std::string> resources;

  bool operator==(const CtsRoom&) const = default;
};

struct CtsInstance {
  int slots = 26;
  int slot_minutes = 10;
  std::string day_start = "07:40";
  std::array<int, 3> staff_capacity{1, 1, 1};
  std::vector<CtsPatient> patients;
  std::vector<CtsResource> resources;
  std::vector<CtsRoom> rooms;

  bool operator==(const CtsInstance&) const = default;
};

/// Throws InstanceError naming the first offending field.
void validate_cts(const CtsInstance& inst);

/// "HH:MM" label of slot t.
std::string slot_label(const CtsInstance& inst, int t);

struct CtsAppointment {
  std::string patient;
  std::array<int, 4> start{};
  std::string resource;

  bool operator==(const CtsAppointment&) const = default;
};

struct CtsSchedule {
  std::vector<CtsAppointment> appointments;  // instance patient order
  ObjectiveVector objective;                 // [wrong resources, peak phase-2 starts]
};

/// What the level-2 peak counts per slot: patients starting phase 2, or
/// patients in phase 2.
enum class PeakMetric { Starts, Occupancy };

const char* metric_name(PeakMetric m);
std::optional<PeakMetric> parse_metric(std::string_view s);

struct CtsEncoding {
  ConstraintModel model;
  PeakMetric metric = PeakMetric::Starts;
  /// Per patient (instance order): vars for phase 1-3 starts and the therapy
  /// var, whose value is slot * resources + resource index.
  std::vector<std::array<VarId, 4>> vars;
  VarId peak = 0;
  int num_resources = 0;
};

/// Lower bound on peak phase-2 starts from the patients' start windows.
int cts_peak_lower_bound(const CtsInstance& inst);

CtsEncoding encode_cts(const CtsInstance& inst, PeakMetric metric = PeakMetric::Starts);
CtsSchedule decode_cts(const CtsInstance& inst, const CtsEncoding& enc, const Assignment& a);
/// Model assignment for a schedule that only uses instance resources.
std::optional<Assignment> cts_assignment(const CtsInstance& inst, const CtsEncoding& enc, const CtsSchedule& s);

/// Re-checks every rule from the instance alone.
VerifyReport verify_cts(const CtsInstance& inst, const CtsSchedule& s, PeakMetric metric = PeakMetric::Starts);

/// Phase-2 starts per slot.
std::vector<int> phase2_histogram(const CtsSchedule& s, const CtsInstance& inst);
/// Patients in phase 2 per slot (the in-progress reading of concurrency).
std::vector<int> phase2_occupancy(const CtsSchedule& s, const CtsInstance& inst);

}  // namespace medsched

#endif  // MEDSCHED_CTS_HPP
