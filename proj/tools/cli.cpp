#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "medsched/pipeline.hpp"
#include "medsched/service.hpp"

namespace medsched::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string instance;
  std::string out;
  std::optional<double> time_limit;
  std::optional<long long> node_limit;
  std::string metric = "starts";
  bool no_hint = false;
};

double default_time_limit() {
  const char* env = std::getenv(kTimeLimitEnv);
  if (!env || !*env) return 60.0;
  char* end = nullptr;
  double v = std::strtod(env, &end);
  if (*end != '\0' || !(v > 0)) throw UsageError(std::string(kTimeLimitEnv) + " must be a positive number of seconds");
  return v;
}

SolveOptions options_of(const Common& c) {
  SolveOptions o;
  o.time_limit_s = c.time_limit ? *c.time_limit : default_time_limit();
  if (o.time_limit_s <= 0) throw UsageError("--time-limit must be positive");
  o.node_limit = c.node_limit;
  auto m = parse_metric(c.metric);
  if (!m) throw UsageError("--metric must be starts or occupancy");
  o.metric = *m;
  o.use_hint = !c.no_hint;
  return o;
}

void add_solver_flags(CLI::App* sub, Common& c) {
  sub->add_option("--time-limit", c.time_limit, "Seconds per solve (default $MEDSCHED_TIME_LIMIT or 60)");
  sub->add_option("--node-limit", c.node_limit, "Search node budget, for machine-independent results");
  sub->add_option("--metric", c.metric, "CTS peak metric: starts or occupancy")->capture_default_str();
}

Instance load_instance(const std::string& path) { return parse_instance(read_file(path)); }

// Writes `text` to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

// Solution from --solution, or a fresh solve.
Assignment solution_for(const Problem& p, const std::string& solution_path, const SolveOptions& opt) {
  if (!solution_path.empty()) {
    auto doc = parse_solution(read_file(solution_path), &p.instance());
    if (!doc.schedule) throw UsageError("solution document has no schedule");
    auto a = p.assignment_of(*doc.schedule);
    if (!a) throw UsageError("solution does not fit the instance (virtual or unknown resources?)");
    return *a;
  }
  auto s = solve_problem(p, opt);
  if (!s.outcome.has_solution()) throw UsageError(std::string("instance has no solution (") + status_name(s.doc.status) + ")");
  return *s.outcome.assignment;
}

// ---- explain-unsat session file ----

struct ReplSession {
  Instance instance;
  PeakMetric metric = PeakMetric::Starts;
  std::vector<std::string> lines;
  std::vector<ojson> history;
};

std::string write_repl(const ReplSession& s) {
  ojson j;
  j["format"] = "medsched-explain-session";
  j["version"] = kFormatVersion;
  j["metric"] = metric_name(s.metric);
  j["instance"] = ojson::parse(write_instance(s.instance));
  j["history"] = s.history;
  return j.dump(2) + "\n";
}

void print_entry(const ojson& e, std::ostream& out) {
  if (e["sat"].get<bool>()) {
    out << "sat: background facts are consistent\n";
    return;
  }
  out << "unsat: minimal conflict of " << e["mus"].size() << " constraint(s)\n";
  for (const auto& m : e["mus"]) out << "  " << m["label"].get<std::string>() << ": " << m["description"].get<std::string>() << '\n';
}

int cmd_explain_session(const Common& c, const std::string& session_path, bool interactive, std::istream& in,
                        std::ostream& out, std::ostream& err) {
  const SolveOptions opt = options_of(c);
  ReplSession rs;
  std::vector<std::vector<std::string>> replay;
  if (!session_path.empty() && std::filesystem::exists(session_path)) {
    auto j = nlohmann::json::parse(read_file(session_path));
    if (j.value("format", "") != "medsched-explain-session") throw std::runtime_error(session_path + ": not a session file");
    rs.instance = parse_instance(j.at("instance").dump());
    rs.metric = *parse_metric(j.value("metric", "starts"));
    for (const auto& h : j.at("history")) replay.push_back(h.at("lines").get<std::vector<std::string>>());
  } else {
    if (c.instance.empty()) throw UsageError("--instance is required unless --session names an existing file");
    rs.instance = load_instance(c.instance);
    rs.metric = opt.metric;
  }
  Problem base(rs.instance, rs.metric);
  Session session;
  session.base = base.model();
  SolveConfig cfg = explain_config(opt);

  auto step = [&](const std::vector<std::string>& lines) {
    std::vector<ConstraintInstance> facts;
    for (std::size_t i = 0; i < lines.size(); ++i)
      facts.push_back(parse_background(session.augmented(), lines[i], static_cast<int>(rs.lines.size() + i) + 1));
    const auto& entry = add_background(session, facts, cfg);
    ojson e;
    e["lines"] = lines;
    e["added"] = entry.added;
    e["sat"] = entry.sat;
    e["mus"] = ojson::array();
    if (entry.mus)
      for (const auto& m : make_mus_doc(session.augmented(), *entry.mus).entries)
        e["mus"].push_back({{"label", m.label}, {"description", m.description}});
    rs.lines.insert(rs.lines.end(), lines.begin(), lines.end());
    rs.history.push_back(e);
    if (!session_path.empty()) write_file_atomic(session_path, write_repl(rs));
    return e;
  };

  for (const auto& lines : replay) {
    out << "> " << (lines.empty() ? "" : lines.front()) << '\n';
    print_entry(step(lines), out);
  }
  if (!interactive) {
    if (!replay.empty()) return kOk;
    emit(c.out, write_mus(explain_unsat(base, opt)), out);
    return kOk;
  }
  {
    // Initial analysis of the instance alone.
    auto r = solve_decision(session.augmented(), session.augmented().removable, cfg);
    if (r.status == DecisionStatus::Unsat) {
      out << "instance is unsat\n";
      for (const auto& e : explain_unsat(base, opt).entries) out << "  " << e.label << ": " << e.description << '\n';
    } else {
      out << "instance is sat; add background facts as name=value or name!=value, one per line\n";
    }
  }
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    if (line == "quit" || line == "exit") break;
    try {
      print_entry(step({line}), out);
    } catch (const ExplainError& e) {
      err << "error: " << e.what() << '\n';
    }
  }
  out << '\n';
  return kOk;
}

int print_bench(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << std::left << std::setw(10) << "instance" << std::right << std::setw(8) << "greedy" << std::setw(8) << "exact"
      << std::setw(9) << "virtual" << std::setw(18) << "status" << std::setw(12) << "exact ms" << '\n';
  int better = 0, regressions = 0;
  for (const auto& r : rows) {
    out << std::left << std::setw(10) << r.name << std::right << std::setw(8) << r.greedy_peak << std::setw(8)
        << r.exact_peak << std::setw(9) << r.greedy_virtual << std::setw(18) << status_name(r.status) << std::setw(12)
        << std::fixed << std::setprecision(1) << r.exact_ms << '\n';
    if (r.exact_peak < 0 || r.exact_peak > r.greedy_peak) ++regressions;
    else if (r.exact_peak < r.greedy_peak) ++better;
  }
  out << "exact peak strictly lower on " << better << " of " << rows.size() << " instances\n";
  return regressions;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact scheduling for chemotherapy, operating rooms and pre-operative clinics", "medsched"};
  app.require_subcommand(1);
  Common c;

  auto* gen = app.add_subcommand("gen", "Generate a seeded instance");
  std::string kind;
  std::uint64_t seed = 1;
  std::optional<int> size, slots, days, beds, doctors, scu_percent;
  std::optional<double> tightness;
  gen->add_option("--kind", kind, "cts, ors or poac")->required();
  gen->add_option("--seed", seed, "Generator seed")->capture_default_str();
  gen->add_option("--size", size, "Patients (cts, poac) or registrations (ors)");
  gen->add_option("--tightness", tightness, "Demand over capacity");
  gen->add_option("--slots", slots, "CTS slots per day");
  gen->add_option("--days", days, "ORS horizon or POAC days");
  gen->add_option("--beds", beds, "ORS beds per unit (0 = never binding)");
  gen->add_option("--doctors", doctors, "POAC doctors per day");
  gen->add_option("--scu-percent", scu_percent, "ORS share of registrations needing SCU");
  gen->add_option("--out,-o", c.out, "Output file (default stdout)");

  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance exactly");
  solve_cmd->add_option("--instance,-i", c.instance, "Instance document")->required();
  solve_cmd->add_option("--out,-o", c.out, "Solution document (default stdout)");
  solve_cmd->add_flag("--no-hint", c.no_hint, "Do not warm-start from the greedy schedule");
  add_solver_flags(solve_cmd, c);

  auto* verify_cmd = app.add_subcommand("verify", "Check a solution against an instance");
  std::string solution;
  verify_cmd->add_option("--instance,-i", c.instance, "Instance document")->required();
  verify_cmd->add_option("--solution,-s", solution, "Solution document")->required();
  verify_cmd->add_option("--out,-o", c.out, "Report document (default stdout)");

  auto* unsat_cmd = app.add_subcommand("explain-unsat", "Minimal unsatisfiable subset of an infeasible instance");
  bool interactive = false;
  std::string session_file;
  unsat_cmd->add_option("--instance,-i", c.instance, "Instance document");
  unsat_cmd->add_option("--out,-o", c.out, "MUS document (default stdout)");
  unsat_cmd->add_flag("--interactive", interactive, "Read background facts from stdin, re-analysing after each");
  unsat_cmd->add_option("--session", session_file, "Session file to replay and extend");
  add_solver_flags(unsat_cmd, c);

  auto* why_cmd = app.add_subcommand("explain-why", "Justify atoms of an optimal solution");
  std::vector<std::string> atoms;
  why_cmd->add_option("--instance,-i", c.instance, "Instance document")->required();
  why_cmd->add_option("--solution,-s", solution, "Solution document (default: solve first)");
  why_cmd->add_option("--atom,-a", atoms, "Atom name=value, repeatable")->required();
  why_cmd->add_option("--out,-o", c.out, "Justification document (default stdout)");
  add_solver_flags(why_cmd, c);

  auto* contrast_cmd = app.add_subcommand("explain-contrast", "Why atom A rather than atom B");
  std::string atom_a, atom_b;
  contrast_cmd->add_option("--instance,-i", c.instance, "Instance document")->required();
  contrast_cmd->add_option("--solution,-s", solution, "Solution document (default: solve first)");
  contrast_cmd->add_option("--atom", atom_a, "Atom that holds in the solution")->required();
  contrast_cmd->add_option("--instead", atom_b, "Alternative atom")->required();
  contrast_cmd->add_option("--out,-o", c.out, "Contrast document (default stdout)");
  add_solver_flags(contrast_cmd, c);

  auto* bench_cmd = app.add_subcommand("bench", "Exact solver against the greedy baseline on seeded CTS days");
  BenchOptions bo;
  std::string out_dir = "bench-out";
  bench_cmd->add_option("--seed", bo.seed, "Master seed")->capture_default_str();
  bench_cmd->add_option("--instances,-n", bo.instances, "Number of instances")->capture_default_str();
  bench_cmd->add_option("--patients", bo.patients, "Patients per instance")->capture_default_str();
  bench_cmd->add_option("--slots", bo.slots, "Slots per day")->capture_default_str();
  bench_cmd->add_option("--tightness", bo.tightness, "Patients per therapy resource")->capture_default_str();
  bench_cmd->add_option("--out-dir,-o", out_dir, "Directory for CSV output")->capture_default_str();
  long long bench_nodes = *bo.node_limit;
  bench_cmd->add_option("--time-limit", c.time_limit, "Seconds per solve (default $MEDSCHED_TIME_LIMIT or 60)");
  bench_cmd->add_option("--node-limit", bench_nodes, "Node budget per solve (0 = none)")->capture_default_str();
  bench_cmd->add_option("--metric", c.metric, "Peak metric: starts or occupancy")->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP session service");
  std::string host = "127.0.0.1", state_dir;
  int port = 8080;
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--state-dir", state_dir, "Persist sessions here");
  serve_cmd->add_option("--time-limit", c.time_limit, "Default seconds per solve");

  std::vector<std::string> argv_store{"medsched"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) {
      auto k = parse_kind(kind);
      if (!k) throw UsageError("--kind must be cts, ors or poac");
      Instance inst;
      try {
        switch (*k) {
          case ProblemKind::Cts: {
            CtsGenParams p;
            p.seed = seed;
            if (size) p.patients = *size;
            if (tightness) p.tightness = *tightness;
            if (slots) p.slots = *slots;
            inst = generate_cts(p);
            break;
          }
          case ProblemKind::Ors: {
            OrsGenParams p;
            p.seed = seed;
            if (size) p.registrations = *size;
            if (tightness) p.tightness = *tightness;
            if (days) p.horizon = *days;
            if (beds) p.beds = *beds;
            if (scu_percent) p.scu_percent = *scu_percent;
            inst = generate_ors(p);
            break;
          }
          case ProblemKind::Poac: {
            PoacGenParams p;
            p.seed = seed;
            if (size) p.patients = *size;
            if (tightness) p.tightness = *tightness;
            if (days) p.days = *days;
            if (doctors) p.doctors = *doctors;
            inst = generate_poac(p);
            break;
          }
        }
      } catch (const GeneratorError& e) {
        throw UsageError(e.what());
      }
      emit(c.out, write_instance(inst), out);
      return kOk;
    }

    if (solve_cmd->parsed()) {
      const SolveOptions opt = options_of(c);
      Problem p(load_instance(c.instance), opt.metric);
      auto s = solve_problem(p, opt);
      auto text = write_solution(s.doc, p.instance());
      if (!c.out.empty() && c.out != "-") {
        write_file_atomic(c.out, text);
        out << status_name(s.doc.status);
        if (s.doc.objective) out << ' ' << s.doc.objective->str();
        out << '\n';
      } else {
        out << text;
      }
      if (s.doc.status == SolveStatus::Unsat) {
        err << "instance is unsat; run `medsched explain-unsat --instance " << c.instance << "` for a minimal conflict\n";
        return kUnsat;
      }
      if (s.doc.status == SolveStatus::UnknownTimeout) {
        err << "search budget ran out before any solution was found\n";
        return kNoIncumbent;
      }
      return kOk;
    }

    if (verify_cmd->parsed()) {
      Instance inst = load_instance(c.instance);
      auto doc = parse_solution(read_file(solution), &inst);
      if (!doc.schedule) throw UsageError("solution document has no schedule to verify");
      auto rep = verify_schedule(inst, *doc.schedule, doc.metric);
      emit(c.out, write_report(kind_of(inst), rep), out);
      if (!rep.ok()) {
        err << rep.violations.size() << " violation(s)\n";
        return kFailure;
      }
      if (doc.objective && !(*doc.objective == rep.objective)) {
        err << "objective in the solution " << doc.objective->str() << " differs from the verified " << rep.objective.str()
            << '\n';
        return kFailure;
      }
      return kOk;
    }

    if (unsat_cmd->parsed()) {
      if (interactive || !session_file.empty())
        return cmd_explain_session(c, session_file, interactive, in, out, err);
      if (c.instance.empty()) throw UsageError("--instance is required");
      const SolveOptions opt = options_of(c);
      Problem p(load_instance(c.instance), opt.metric);
      emit(c.out, write_mus(explain_unsat(p, opt)), out);
      return kOk;
    }

    if (why_cmd->parsed() || contrast_cmd->parsed()) {
      const SolveOptions opt = options_of(c);
      Problem p(load_instance(c.instance), opt.metric);
      auto sol = solution_for(p, solution, opt);
      try {
        if (why_cmd->parsed()) emit(c.out, write_justification(explain_why(p, sol, atoms, opt)), out);
        else emit(c.out, write_contrast(explain_contrast(p, sol, atom_a, atom_b, opt)), out);
      } catch (const ExplainError& e) {
        if (e.code() == ExplainErrc::Timeout) throw;
        throw UsageError(e.what());
      }
      return kOk;
    }

    if (bench_cmd->parsed()) {
      bo.time_limit_s = c.time_limit ? *c.time_limit : default_time_limit();
      bo.node_limit = bench_nodes > 0 ? std::optional<long long>(bench_nodes) : std::nullopt;
      auto m = parse_metric(c.metric);
      if (!m) throw UsageError("--metric must be starts or occupancy");
      bo.metric = *m;
      if (bo.instances < 1) throw UsageError("--instances must be at least 1");
      std::vector<BenchRow> rows;
      try {
        rows = run_bench(bo);
      } catch (const GeneratorError& e) {
        throw UsageError(e.what());
      }
      std::filesystem::create_directories(out_dir + "/hist");
      for (const auto& r : rows) write_file_atomic(out_dir + "/hist/" + r.name + ".csv", r.histogram_csv);
      auto [best, worst] = bench_best_worst(rows);
      write_file_atomic(out_dir + "/best.csv", rows[best].histogram_csv);
      write_file_atomic(out_dir + "/worst.csv", rows[worst].histogram_csv);
      write_file_atomic(out_dir + "/summary.csv", bench_summary_csv(rows));
      write_file_atomic(out_dir + "/timings.csv", bench_timings_csv(rows));
      int regressions = print_bench(rows, out);
      out << "best " << rows[best].name << ", worst " << rows[worst].name << "; CSVs in " << out_dir << '\n';
      if (regressions) {
        err << regressions << " instance(s) where the exact peak exceeds the greedy peak: solver regression\n";
        return kRegression;
      }
      return kOk;
    }

    if (serve_cmd->parsed()) {
      ServiceOptions so;
      if (!state_dir.empty()) so.state_dir = state_dir;
      so.default_time_limit_s = c.time_limit ? *c.time_limit : default_time_limit();
      Service svc(so);
      out << "listening on http://" << host << ':' << port << '\n' << std::flush;
      if (!svc.listen(host, port)) {
        err << "cannot bind " << host << ':' << port << '\n';
        return kFailure;
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace medsched::cli
