#ifndef MEDSCHED_ENGINE_HPP
#define MEDSCHED_ENGINE_HPP

#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "medsched/model.hpp"

namespace medsched {

inline constexpr Cost kNoCap = std::numeric_limits<Cost>::max() / 4;

enum class SolveStatus { Optimal, FeasibleTimeout, Unsat, UnknownTimeout };

const char* status_name(SolveStatus s);

struct SolveStats {
  long long nodes = 0;
  double wall_ms = 0;
};

struct SolveConfig {
  double time_limit_s = 60.0;
  /// Deterministic budget on search nodes; exceeding it behaves like a timeout.
  std::optional<long long> node_limit;
  /// Warm start: used as the first incumbent if it satisfies every hard
  /// constraint. Never changes a proven-optimal result.
  std::optional<Assignment> hint;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::UnknownTimeout;
  std::optional<Assignment> assignment;
  std::optional<ObjectiveVector> objective;
  SolveStats stats;

  bool has_solution() const { return assignment.has_value(); }
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpaceTooLarge : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Exact lexicographic optimisation: depth-first branch and bound over vars
/// in id order, one level at a time. Values are tried ascending except that
/// the incumbent's value goes first. Levels split the remaining time and node
/// budget evenly; a level that runs out keeps its incumbent value.
SolveOutcome solve(const ConstraintModel& model, const SolveConfig& config = {});

enum class DecisionStatus { Sat, Unsat, UnknownTimeout };

struct DecisionResult {
  DecisionStatus status = DecisionStatus::UnknownTimeout;
  std::optional<Assignment> assignment;
  long long nodes = 0;
};

/// Feasibility with non-removable hard constraints always on and removable
/// ones on iff listed in `enabled`. Soft constraints are ignored.
DecisionResult solve_decision(const ConstraintModel& model, const std::set<std::string>& enabled,
                              const SolveConfig& config = {});

/// Reusable feasibility oracle over one compiled model. Each query picks the
/// active hard constraints by index and optional per-level cost caps
/// (kNoCap = uncapped); used by the explanation layer for repeated calls.
class DecisionOracle {
 public:
  DecisionOracle(const ConstraintModel& model, SolveConfig config);
  ~DecisionOracle();
  DecisionOracle(DecisionOracle&&) noexcept;
  DecisionOracle& operator=(DecisionOracle&&) noexcept;

  DecisionResult check(const std::vector<bool>& active_hard, std::span<const Cost> caps = {});
  const ConstraintModel& model() const;
  long long calls() const { return calls_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  long long calls_ = 0;
};

inline constexpr double kBruteForceLimit = 1e6;

/// Exhaustive enumeration in lexicographic order; keeps the first assignment
/// with the smallest objective vector. Throws SpaceTooLarge above 10^6
/// assignments.
SolveOutcome brute_force(const ConstraintModel& model);

/// Product of domain sizes (saturating at 1e300).
double search_space(const ConstraintModel& model);

}  // namespace medsched

#endif  // MEDSCHED_ENGINE_HPP
