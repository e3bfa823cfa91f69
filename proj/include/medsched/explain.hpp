#ifndef MEDSCHED_EXPLAIN_HPP
#define MEDSCHED_EXPLAIN_HPP

#include <optional>
#include <string>
#include <vector>

#include "medsched/engine.hpp"

namespace medsched {

enum class ExplainErrc {
  NotUnsat,
  TargetNotInSolution,
  SameAssignment,
  AlreadyHolds,
  LabelCollision,
  UnknownAtom,
  Timeout,
};

class ExplainError : public std::runtime_error {
 public:
  ExplainError(ExplainErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExplainErrc code() const { return code_; }

 private:
  ExplainErrc code_;
};

struct Mus {
  std::vector<std::string> labels;  // in model order
  long long oracle_calls = 0;
};

/// Deletion-based shrink over the removable labels of `model`.
/// Non-removable hard constraints stay enabled throughout.
Mus extract_mus(const ConstraintModel& model, const SolveConfig& config = {});

/// Re-checks a MUS: enabling all of it is Unsat and every single removal is
/// Sat. Costs |labels| + 1 decision calls.
struct MusCheck {
  bool unsat = false;
  bool minimal = false;
  int calls = 0;
};
MusCheck verify_mus(const ConstraintModel& model, const std::vector<std::string>& labels,
                    const SolveConfig& config = {});

struct Atom {
  VarId var = 0;
  Value value = 0;
  auto operator<=>(const Atom&) const = default;
};

/// "name=value" where value is an integer or one of the var's value names.
Atom parse_atom(const ConstraintModel& model, const std::string& text);
std::string atom_text(const ConstraintModel& model, const Atom& a);

enum class NodeKind { Atom, Constraint, Cap };
enum class NodeStatus { Given, Justified, Unforced, Truncated };

struct JustNode {
  NodeKind kind = NodeKind::Atom;
  NodeStatus status = NodeStatus::Given;
  Atom atom;            // Atom nodes
  std::string label;    // Constraint nodes
  bool fact = false;    // Constraint nodes: designated ground fact
  int level = 0;        // Cap nodes
  Cost cap = 0;         // Cap nodes
  std::vector<int> supports;
};

/// Atoms are justified by negating them under the solution's objective caps
/// and shrinking the conflict over hard constraints, caps and the other
/// atoms of the solution. Supporting atoms are expanded in turn. Constraint
/// and cap nodes are leaves.
struct JustificationGraph {
  std::vector<JustNode> nodes;
  std::vector<int> roots;
  long long oracle_calls = 0;

  bool acyclic() const;
  /// Every leaf is a constraint or cap node, or an atom left unexpanded
  /// because it is Unforced or Truncated.
  bool leaves_given() const;
};

struct JustifyOptions {
  int max_depth = 32;
  SolveConfig config;
};

JustificationGraph justify(const ConstraintModel& model, const Assignment& solution, const std::vector<Atom>& targets,
                           const JustifyOptions& options = {});

/// Checks one Justified node: the negated atom, its supporting constraints,
/// caps and atoms together are Unsat.
bool support_is_unsat(const ConstraintModel& model, const Assignment& solution, const JustificationGraph& g, int node,
                      const SolveConfig& config = {});

enum class ContrastVerdict { AlternativeInfeasible, AlternativeWorse, AlternativeEquivalent, AlternativeBetter };

const char* verdict_name(ContrastVerdict v);

struct ContrastResult {
  ContrastVerdict verdict = ContrastVerdict::AlternativeInfeasible;
  Mus mus;  // AlternativeInfeasible; may contain kForcedLabel
  ObjectiveVector original;
  std::optional<ObjectiveVector> alternative;
  std::optional<Assignment> alternative_assignment;
};

inline const std::string kForcedLabel = "contrast-alternative";

ContrastResult contrast(const ConstraintModel& model, const Assignment& solution, const Atom& a, const Atom& b,
                        const SolveConfig& config = {});

struct HistoryEntry {
  std::vector<std::string> added;
  bool sat = false;
  std::optional<Mus> mus;
};

struct Session {
  ConstraintModel base;
  std::vector<ConstraintInstance> background;
  std::vector<HistoryEntry> history;

  /// Base plus background, with background constraints removable facts.
  ConstraintModel augmented() const;
};

/// Appends background constraints and re-analyses the augmented model; an
/// Unsat result carries a MUS over removable and background labels.
const HistoryEntry& add_background(Session& session, std::vector<ConstraintInstance> facts,
                                   const SolveConfig& config = {});

/// Background line syntax: "[label:] name=value" or "[label:] name!=value".
ConstraintInstance parse_background(const ConstraintModel& model, const std::string& line, int ordinal);

}  // namespace medsched

#endif  // MEDSCHED_EXPLAIN_HPP
