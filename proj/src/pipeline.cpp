#include "medsched/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <sstream>

#include "medsched/baseline.hpp"

namespace medsched {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Cost peak(const std::vector<int>& h) { return h.empty() ? 0 : *std::max_element(h.begin(), h.end()); }

}  // namespace

Problem::Problem(Instance inst, PeakMetric metric) : inst_(std::move(inst)), metric_(metric) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CtsInstance>) enc_ = encode_cts(x, metric_);
        else if constexpr (std::is_same_v<T, OrsInstance>) enc_ = encode_ors(x);
        else enc_ = encode_poac(x);
      },
      inst_);
  model_ = std::visit([](const auto& e) { return e.model; }, enc_);
}

void Problem::add_constraints(const std::vector<ConstraintInstance>& extra) {
  for (const auto& c : extra) add_constraint(model_, c.label, c.params, {.removable = true, .fact = true}, c.description);
}

std::optional<Assignment> Problem::baseline_hint() const {
  if (auto* inst = std::get_if<CtsInstance>(&inst_)) {
    const auto& enc = std::get<CtsEncoding>(enc_);
    std::optional<std::pair<Assignment, ObjectiveVector>> best;
    for (bool wait : {false, true}) {
      auto g = greedy_cts(*inst, wait);
      if (!g.feasible) continue;
      auto a = cts_assignment(*inst, enc, g.schedule);
      if (!a) continue;
      auto obj = verify_cts(*inst, g.schedule, metric_).objective;
      if (!best || obj < best->second) best.emplace(std::move(*a), obj);
    }
    if (best) return best->first;
    return std::nullopt;
  }
  if (auto* inst = std::get_if<OrsInstance>(&inst_)) {
    auto g = greedy_ors(*inst);
    if (!g.feasible) return std::nullopt;
    return ors_assignment(*inst, std::get<OrsEncoding>(enc_), g.schedule);
  }
  return std::nullopt;
}

Schedule Problem::decode(const Assignment& a) const {
  if (auto* inst = std::get_if<CtsInstance>(&inst_)) return decode_cts(*inst, std::get<CtsEncoding>(enc_), a);
  if (auto* inst = std::get_if<OrsInstance>(&inst_)) return decode_ors(*inst, std::get<OrsEncoding>(enc_), a);
  return decode_poac(std::get<PoacInstance>(inst_), std::get<PoacEncoding>(enc_), a);
}

std::optional<Assignment> Problem::assignment_of(const Schedule& s) const {
  if (kind_of(inst_) != static_cast<ProblemKind>(s.index())) return std::nullopt;
  if (auto* inst = std::get_if<CtsInstance>(&inst_))
    return cts_assignment(*inst, std::get<CtsEncoding>(enc_), std::get<CtsSchedule>(s));
  if (auto* inst = std::get_if<OrsInstance>(&inst_))
    return ors_assignment(*inst, std::get<OrsEncoding>(enc_), std::get<OrsSchedule>(s));
  return poac_assignment(std::get<PoacInstance>(inst_), std::get<PoacEncoding>(enc_), std::get<PoacSchedule>(s));
}

VerifyReport verify_schedule(const Instance& inst, const Schedule& s, PeakMetric metric) {
  if (kind_of(inst) != static_cast<ProblemKind>(s.index())) return {{"kind-mismatch"}, {}};
  if (auto* i = std::get_if<CtsInstance>(&inst)) return verify_cts(*i, std::get<CtsSchedule>(s), metric);
  if (auto* i = std::get_if<OrsInstance>(&inst)) return verify_ors(*i, std::get<OrsSchedule>(s));
  return verify_poac(std::get<PoacInstance>(inst), std::get<PoacSchedule>(s));
}

SolveConfig explain_config(const SolveOptions& opt) {
  SolveConfig cfg;
  cfg.time_limit_s = opt.time_limit_s;
  cfg.node_limit = opt.node_limit;
  return cfg;
}

Solved solve_problem(const Problem& p, const SolveOptions& opt) {
  SolveConfig cfg = explain_config(opt);
  if (opt.use_hint) cfg.hint = p.baseline_hint();
  Solved s;
  s.outcome = solve(p.model(), cfg);
  s.doc.kind = p.kind();
  s.doc.status = s.outcome.status;
  s.doc.metric = p.metric();
  if (s.outcome.has_solution()) {
    Schedule sched = p.decode(*s.outcome.assignment);
    auto rep = verify_schedule(p.instance(), sched, p.metric());
    if (!rep.ok()) throw std::logic_error("decoded schedule fails the verifier: " + rep.violations.front());
    if (!(rep.objective == *s.outcome.objective))
      throw std::logic_error("verifier objective " + rep.objective.str() + " differs from solver " +
                             s.outcome.objective->str());
    s.doc.objective = rep.objective;
    s.doc.schedule = std::move(sched);
  }
  return s;
}

MusDoc explain_unsat(const Problem& p, const SolveOptions& opt) {
  auto cfg = explain_config(opt);
  auto mus = extract_mus(p.model(), cfg);
  auto doc = make_mus_doc(p.model(), mus);
  auto check = verify_mus(p.model(), mus.labels, cfg);
  doc.check_calls = check.calls;
  doc.minimal = check.unsat && check.minimal;
  return doc;
}

JustDoc explain_why(const Problem& p, const Assignment& solution, const std::vector<std::string>& atoms,
                    const SolveOptions& opt) {
  std::vector<Atom> targets;
  for (const auto& t : atoms) targets.push_back(parse_atom(p.model(), t));
  JustifyOptions jo;
  jo.config = explain_config(opt);
  return make_just_doc(p.model(), justify(p.model(), solution, targets, jo));
}

ContrastDoc explain_contrast(const Problem& p, const Assignment& solution, const std::string& a, const std::string& b,
                             const SolveOptions& opt) {
  auto aa = parse_atom(p.model(), a), bb = parse_atom(p.model(), b);
  auto r = contrast(p.model(), solution, aa, bb, explain_config(opt));
  return make_contrast_doc(p.model(), solution, aa, bb, r);
}

std::vector<CtsGenParams> bench_params(const BenchOptions& opt) {
  SplitMix64 rng(opt.seed);
  std::vector<CtsGenParams> out;
  for (int i = 0; i < opt.instances; ++i) {
    CtsGenParams g;
    g.seed = rng.next();
    g.patients = opt.patients;
    g.slots = opt.slots;
    g.tightness = opt.tightness;
    out.push_back(g);
  }
  return out;
}

BenchRow bench_one(const std::string& name, const CtsGenParams& gen, const BenchOptions& opt) {
  BenchRow row;
  row.name = name;
  row.seed = gen.seed;
  auto inst = generate_cts(gen);
  row.patients = static_cast<int>(inst.patients.size());

  auto t0 = std::chrono::steady_clock::now();
  auto g = greedy_cts(inst);
  row.greedy_ms = ms_since(t0);
  row.greedy_virtual = g.virtual_resources;
  auto grep = verify_cts(inst, g.schedule, opt.metric);
  row.greedy_wrong_type = grep.objective.at_level(1);
  auto hist = [&](const CtsSchedule& s) {
    return opt.metric == PeakMetric::Starts ? phase2_histogram(s, inst) : phase2_occupancy(s, inst);
  };
  row.greedy_peak = peak(hist(g.schedule));

  SolveOptions so;
  so.time_limit_s = opt.time_limit_s;
  so.node_limit = opt.node_limit;
  so.metric = opt.metric;
  t0 = std::chrono::steady_clock::now();
  Problem p(inst, opt.metric);
  auto solved = solve_problem(p, so);
  row.exact_ms = ms_since(t0);
  row.status = solved.outcome.status;
  row.nodes = solved.outcome.stats.nodes;
  CtsSchedule exact;
  if (solved.doc.schedule) {
    exact = std::get<CtsSchedule>(*solved.doc.schedule);
    row.exact_wrong_type = exact.objective.at_level(1);
    row.exact_peak = peak(hist(exact));
  } else {
    row.exact_peak = -1;
    row.exact_wrong_type = -1;
  }
  row.histogram_csv = write_histogram_csv(inst, g.schedule, exact, opt.metric);
  return row;
}

std::vector<BenchRow> run_bench(const BenchOptions& opt, const std::function<void(const BenchRow&)>& progress) {
  std::vector<BenchRow> rows;
  auto params = bench_params(opt);
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::ostringstream name;
    name << "cts-" << std::setw(3) << std::setfill('0') << i + 1;
    rows.push_back(bench_one(name.str(), params[i], opt));
    if (progress) progress(rows.back());
  }
  return rows;
}

std::string bench_summary_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "instance,seed,patients,greedy_peak,exact_peak,greedy_virtual,greedy_wrong_type,exact_wrong_type,exact_status,"
         "exact_nodes\n";
  for (const auto& r : rows)
    out << r.name << ',' << r.seed << ',' << r.patients << ',' << r.greedy_peak << ',' << r.exact_peak << ','
        << r.greedy_virtual << ',' << r.greedy_wrong_type << ',' << r.exact_wrong_type << ',' << status_name(r.status)
        << ',' << r.nodes << '\n';
  return out.str();
}

std::string bench_timings_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "instance,greedy_ms,exact_ms\n" << std::fixed << std::setprecision(3);
  for (const auto& r : rows) out << r.name << ',' << r.greedy_ms << ',' << r.exact_ms << '\n';
  return out.str();
}

std::pair<std::size_t, std::size_t> bench_best_worst(const std::vector<BenchRow>& rows) {
  std::size_t best = 0, worst = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto gain = [&](std::size_t k) { return rows[k].greedy_peak - rows[k].exact_peak; };
    if (gain(i) > gain(best)) best = i;
    if (gain(i) < gain(worst)) worst = i;
  }
  return {best, worst};
}

}  // namespace medsched
