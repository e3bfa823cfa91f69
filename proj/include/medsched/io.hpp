#ifndef MEDSCHED_IO_HPP
#define MEDSCHED_IO_HPP

// JSON documents for instances, solutions, reports and explanations, plus
// the histogram CSV. Writers are canonical: fixed field order, two-space
// indent, trailing newline. Readers are strict and reject unknown fields.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "medsched/cts.hpp"
#include "medsched/engine.hpp"
#include "medsched/explain.hpp"
#include "medsched/ors.hpp"
#include "medsched/poac.hpp"

namespace medsched {

using Instance = std::variant<CtsInstance, OrsInstance, PoacInstance>;
using Schedule = std::variant<CtsSchedule, OrsSchedule, PoacSchedule>;

ProblemKind kind_of(const Instance& inst);
std::optional<ProblemKind> parse_kind(std::string_view s);
std::optional<SolveStatus> parse_status(std::string_view s);

/// Runs the kind's validate_* function.
void validate(const Instance& inst);

inline constexpr int kFormatVersion = 1;

enum class ParseErrc { Syntax, Schema, Semantic };

/// `where` is "line L, column C" for syntax errors and a field path such as
/// instance.patients[2].durations otherwise.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrc code, std::string where, const std::string& msg)
      : std::runtime_error(where.empty() ? msg : where + ": " + msg), code_(code), where_(std::move(where)) {}
  ParseErrc code() const { return code_; }
  const std::string& where() const { return where_; }

 private:
  ParseErrc code_;
  std::string where_;
};

Instance parse_instance(std::string_view text);
std::string write_instance(const Instance& inst);

/// Applies a patch document {"ops": [...]} as one step and re-validates.
/// Ops: {"op": "add", "target": T, "value": {...}},
///      {"op": "remove", "target": T, "id": ...},
///      {"op": "modify", "target": T, "id": ..., "value": {fields to replace}},
///      {"op": "modify", "target": "capacity", "field": F, "value": ...}.
/// Targets per kind: cts patient/resource/room, ors registration/shift/unit,
/// poac patient/exam/area. Capacity fields are the body's scalar settings.
Instance apply_patch(const Instance& inst, std::string_view patch);

struct SolutionDoc {
  ProblemKind kind = ProblemKind::Cts;
  SolveStatus status = SolveStatus::UnknownTimeout;
  std::optional<ObjectiveVector> objective;
  std::optional<Schedule> schedule;
  PeakMetric metric = PeakMetric::Starts;  // CTS only
};

/// CTS appointments also carry "HH:MM" labels for readability; `inst`
/// supplies them.
std::string write_solution(const SolutionDoc& doc, const Instance& inst);
/// With an instance, CTS time labels are checked against it.
SolutionDoc parse_solution(std::string_view text, const Instance* inst = nullptr);

std::string write_report(ProblemKind kind, const VerifyReport& report);
VerifyReport parse_report(std::string_view text);

struct MusEntry {
  std::string label;
  std::string description;

  bool operator==(const MusEntry&) const = default;
};

struct MusDoc {
  std::vector<MusEntry> entries;
  long long oracle_calls = 0;
  std::optional<int> check_calls;  // set when minimality was re-checked
  bool minimal = false;

  bool operator==(const MusDoc&) const = default;
};

/// Descriptions come from the model's hard constraints.
MusDoc make_mus_doc(const ConstraintModel& model, const Mus& mus);
std::string write_mus(const MusDoc& doc);
MusDoc parse_mus(std::string_view text);

struct JustDocNode {
  int id = 0;
  std::string kind;    // atom, constraint, cap
  std::string status;  // given, justified, unforced, truncated
  std::string text;    // atom text, constraint label, or "level N <= cap"
  std::string description;
  bool fact = false;
  std::vector<int> supports;

  bool operator==(const JustDocNode&) const = default;
};

struct JustDoc {
  std::vector<JustDocNode> nodes;
  std::vector<int> roots;
  long long oracle_calls = 0;

  bool operator==(const JustDoc&) const = default;
};

JustDoc make_just_doc(const ConstraintModel& model, const JustificationGraph& g);
/// Nodes plus a separate edge list (from = supported node, to = support).
std::string write_justification(const JustDoc& doc);
JustDoc parse_justification(std::string_view text);

struct ContrastDoc {
  std::string verdict;
  std::string a;
  std::string b;
  ObjectiveVector original;
  std::optional<ObjectiveVector> alternative;
  std::vector<MusEntry> mus;
  std::vector<std::string> changed;  // atoms of the alternative that differ

  bool operator==(const ContrastDoc&) const = default;
};

ContrastDoc make_contrast_doc(const ConstraintModel& model, const Assignment& solution, const Atom& a, const Atom& b,
                              const ContrastResult& r);
std::string write_contrast(const ContrastDoc& doc);
ContrastDoc parse_contrast(std::string_view text);

struct HistogramRow {
  std::string slot;
  int baseline = 0;
  int exact = 0;

  bool operator==(const HistogramRow&) const = default;
};

/// "slot,baseline,exact", one row per slot under the metric. An instance
/// without patients gives the header alone.
std::string write_histogram_csv(const CtsInstance& inst, const CtsSchedule& baseline, const CtsSchedule& exact,
                                PeakMetric metric = PeakMetric::Starts);
std::vector<HistogramRow> parse_histogram_csv(std::string_view text);

/// Throws std::runtime_error naming the path.
std::string read_file(const std::string& path);
/// Writes a sibling temp file and renames it over `path`, so readers never
/// see a partial file.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace medsched

#endif  // MEDSCHED_IO_HPP
