#ifndef MEDSCHED_PIPELINE_HPP
#define MEDSCHED_PIPELINE_HPP

// Encode, solve, decode and verify any instance kind. Shared by the CLI
// and the service so both return the same documents.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "medsched/generate.hpp"
#include "medsched/io.hpp"

namespace medsched {

struct SolveOptions {
  double time_limit_s = 60.0;
  std::optional<long long> node_limit;
  PeakMetric metric = PeakMetric::Starts;
  bool use_hint = true;
};

/// An instance with its encoding. Background constraints, when added, go
/// into the model but leave decoding untouched.
class Problem {
 public:
  explicit Problem(Instance inst, PeakMetric metric = PeakMetric::Starts);

  const Instance& instance() const { return inst_; }
  ProblemKind kind() const { return kind_of(inst_); }
  PeakMetric metric() const { return metric_; }
  const ConstraintModel& model() const { return model_; }

  void add_constraints(const std::vector<ConstraintInstance>& extra);

  /// Greedy schedule as a warm start: for CTS the better of the two greedy
  /// variants that need no virtual resource, for ORS first fit. None for POAC.
  std::optional<Assignment> baseline_hint() const;
  Schedule decode(const Assignment& a) const;
  std::optional<Assignment> assignment_of(const Schedule& s) const;

 private:
  Instance inst_;
  PeakMetric metric_;
  std::variant<CtsEncoding, OrsEncoding, PoacEncoding> enc_;
  ConstraintModel model_;
};

VerifyReport verify_schedule(const Instance& inst, const Schedule& s, PeakMetric metric = PeakMetric::Starts);

struct Solved {
  SolveOutcome outcome;
  SolutionDoc doc;
};

/// Throws std::logic_error if a decoded schedule fails the verifier.
Solved solve_problem(const Problem& p, const SolveOptions& opt = {});

SolveConfig explain_config(const SolveOptions& opt);

/// MUS over the removable constraints, re-checked for 1-minimality.
MusDoc explain_unsat(const Problem& p, const SolveOptions& opt = {});
JustDoc explain_why(const Problem& p, const Assignment& solution, const std::vector<std::string>& atoms,
                    const SolveOptions& opt = {});
ContrastDoc explain_contrast(const Problem& p, const Assignment& solution, const std::string& a, const std::string& b,
                             const SolveOptions& opt = {});

// ---- CTS benchmark: exact solver against the first-come-first-served greedy ----

struct BenchOptions {
  std::uint64_t seed = 7;
  int instances = 30;
  int patients = 50;
  int slots = 26;
  double tightness = 2.5;
  double time_limit_s = 60.0;
  /// Node budget keeps results independent of machine speed.
  std::optional<long long> node_limit = 60000;
  PeakMetric metric = PeakMetric::Starts;
};

struct BenchRow {
  std::string name;
  std::uint64_t seed = 0;
  int patients = 0;
  Cost greedy_peak = 0;
  Cost exact_peak = 0;
  int greedy_virtual = 0;
  Cost greedy_wrong_type = 0;
  Cost exact_wrong_type = 0;
  SolveStatus status = SolveStatus::UnknownTimeout;
  long long nodes = 0;
  double greedy_ms = 0;
  double exact_ms = 0;
  std::string histogram_csv;
};

/// Instance i is generated from the i-th output of SplitMix64(seed).
std::vector<CtsGenParams> bench_params(const BenchOptions& opt);
BenchRow bench_one(const std::string& name, const CtsGenParams& gen, const BenchOptions& opt);
std::vector<BenchRow> run_bench(const BenchOptions& opt, const std::function<void(const BenchRow&)>& progress = {});

/// Deterministic columns only; timings go to bench_timings_csv.
std::string bench_summary_csv(const std::vector<BenchRow>& rows);
std::string bench_timings_csv(const std::vector<BenchRow>& rows);
/// Largest and smallest peak reduction (first index wins ties).
std::pair<std::size_t, std::size_t> bench_best_worst(const std::vector<BenchRow>& rows);

}  // namespace medsched

#endif  // MEDSCHED_PIPELINE_HPP
