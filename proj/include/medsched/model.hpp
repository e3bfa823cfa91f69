#ifndef MEDSCHED_MODEL_HPP
#define MEDSCHED_MODEL_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace medsched {

using VarId = int;
using Value = int;
using Cost = std::int64_t;

/// Structured identifier: a family name plus an argument tuple, rendered
/// as `family(a,b,...)` (or just `family` when there are no arguments).
struct Label {
  std::string family;
  std::vector<std::string> args;

  std::string str() const;
  auto operator<=>(const Label&) const = default;
};

struct Var {
  VarId id = 0;
  std::string name;
  std::vector<Value> domain;
  /// Optional symbolic names for domain values, parallel to `domain`.
  std::vector<std::string> value_names;

  /// Position of `v` in the domain, if present.
  std::optional<int> index_of(Value v) const;
  std::string value_text(Value v) const;
};

/// "var takes one of `values`" (values sorted, unique, non-empty).
struct Literal {
  VarId var = 0;
  std::vector<Value> values;
};

// The constraint catalog. Counting constraints and nogoods are phrased over
// literals so that encoders can attach per-variable value sets.

/// Exactly one literal holds.
struct ExactlyOne {
  std::vector<Literal> lits;
};

/// At most one literal holds.
struct AtMostOne {
  std::vector<Literal> lits;
};

/// Number of holding literals <= k (+ value of `cap` when present).
struct AtMostKCount {
  std::vector<Literal> lits;
  int k = 0;
  std::optional<VarId> cap;
};

/// A term contributes coef * x, or coef * [x in indicator] when an
/// indicator set is given.
struct LinearTerm {
  VarId var = 0;
  Cost coef = 0;
  std::optional<std::vector<Value>> indicator;
};

/// Sum of terms <= bound; coefficients are non-negative.
struct LinearLeq {
  std::vector<LinearTerm> terms;
  Cost bound = 0;
};

/// scale * before + offset <= after, offset >= 0, scale >= 1.
struct Ordering {
  VarId before = 0;
  VarId after = 0;
  Cost offset = 0;
  Cost scale = 1;
};

/// Conjunction of premises implies the conclusion. No premises makes it a
/// unary membership constraint.
struct Implication {
  std::vector<Literal> premises;
  Literal conclusion;
};

/// The conjunction of the literals must not hold.
struct Forbid {
  std::vector<Literal> lits;
};

using Params = std::variant<ExactlyOne, AtMostOne, LinearLeq, Ordering,
                            AtMostKCount, Implication, Forbid>;

enum class Kind { ExactlyOne, AtMostOne, LinearLeq, Ordering, AtMostKCount, Implication, Forbid };

const char* kind_name(Kind k);

struct ConstraintInstance {
  Label label;
  Params params;
  std::string description;

  Kind kind() const { return static_cast<Kind>(params.index()); }
  /// Variables the constraint reads, in first-occurrence order.
  std::vector<VarId> scope() const;
};

struct SoftConstraint {
  Label label;
  int level = 1;
  Cost weight = 1;
  /// Cost is paid iff this constraint is violated.
  ConstraintInstance violation;
};

struct ConstraintFlags {
  bool removable = false;
  bool fact = false;
};

struct ConstraintModel {
  std::vector<Var> vars;
  std::vector<ConstraintInstance> hard;
  std::vector<SoftConstraint> soft;
  std::set<std::string> removable;
  std::set<std::string> facts;

  /// Highest soft level present (0 when there are no soft constraints).
  int num_levels() const;
  std::optional<std::size_t> find_hard(const std::string& label) const;
  std::optional<VarId> find_var(const std::string& name) const;
  bool has_label(const std::string& label) const;
};

using Assignment = std::vector<Value>;

/// Per-level costs, level 1 first. Comparison pads the shorter vector
/// with zeros.
struct ObjectiveVector {
  std::vector<Cost> costs;

  Cost at_level(int level) const;
  std::string str() const;

  std::strong_ordering operator<=>(const ObjectiveVector& o) const;
  bool operator==(const ObjectiveVector& o) const;
};

enum class ModelErrc {
  EmptyDomain,
  UnsortedDomain,
  DuplicateLabel,
  UnknownVar,
  MalformedParams,
  PartialAssignment,
  ValueOutsideDomain,
  UnknownLabel,
};

const char* errc_name(ModelErrc e);

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrc code, const std::string& msg);
  ModelErrc code() const { return code_; }

 private:
  ModelErrc code_;
};

VarId add_var(ConstraintModel& model, std::string name, std::vector<Value> domain,
              std::vector<std::string> value_names = {});

void add_constraint(ConstraintModel& model, Label label, Params params,
                    ConstraintFlags flags = {}, std::string description = {});

void add_soft(ConstraintModel& model, Label label, int level, Cost weight, Params params,
              std::string description = {});

/// Exact truth value of one constraint under a total assignment.
bool satisfied(const ConstraintInstance& c, std::span<const Value> values);

struct CheckResult {
  std::vector<std::string> violations;
  ObjectiveVector objective;
};

CheckResult check_assignment(const ConstraintModel& model, const Assignment& assignment);

enum class DefectKind { EmptyDomain, UnsortedDomain, NonDenseIds, DanglingVar, DuplicateLabel,
                        MalformedParams, UnknownRemovable, UnknownFact };

const char* defect_name(DefectKind d);

struct Defect {
  DefectKind kind;
  std::string where;
};

std::vector<Defect> validate_model(const ConstraintModel& model);

/// Throws ModelError when validate_model reports anything.
void require_valid(const ConstraintModel& model);

}  // namespace medsched

#endif  // MEDSCHED_MODEL_HPP
