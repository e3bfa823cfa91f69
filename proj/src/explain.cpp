#include "medsched/explain.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>

namespace medsched {

namespace {

// Unsat predicate over a set of item ids; UnknownTimeout aborts the caller.
using UnsatFn = std::function<bool(const std::vector<int>&)>;

// Deletion-based shrink. Chunks are tried before single items; the final
// pass over single items is what makes the result 1-minimal.
std::vector<int> shrink(std::vector<int> items, const UnsatFn& unsat) {
  std::size_t chunk = items.size() / 2;
  while (true) {
    if (chunk == 0) chunk = 1;
    std::size_t pos = 0;
    while (pos < items.size()) {
      std::size_t len = std::min(chunk, items.size() - pos);
      std::vector<int> rest;
      rest.reserve(items.size() - len);
      rest.insert(rest.end(), items.begin(), items.begin() + static_cast<std::ptrdiff_t>(pos));
      rest.insert(rest.end(), items.begin() + static_cast<std::ptrdiff_t>(pos + len), items.end());
      if (unsat(rest)) items = std::move(rest);
      else pos += len;
    }
    if (chunk == 1) return items;
    chunk /= 2;
  }
}

bool is_unsat(const DecisionResult& r) {
  if (r.status == DecisionStatus::UnknownTimeout)
    throw ExplainError(ExplainErrc::Timeout, "explanation query hit the time limit");
  return r.status == DecisionStatus::Unsat;
}

std::vector<bool> base_mask(const ConstraintModel& m) {
  std::vector<bool> active(m.hard.size());
  for (std::size_t i = 0; i < m.hard.size(); ++i) active[i] = !m.removable.count(m.hard[i].label.str());
  return active;
}

std::string fresh_label(const ConstraintModel& m, const std::string& family, VarId v) {
  std::string s = Label{family, {std::to_string(v)}}.str();
  if (m.has_label(s)) throw ExplainError(ExplainErrc::LabelCollision, "label already in model: " + s);
  return s;
}

// The model extended, per variable, with an "atom holds" and an "atom
// negated" constraint. Nothing here is enabled unless a mask says so.
struct AtomModel {
  ConstraintModel model;
  std::size_t n_hard = 0;
  std::vector<Cost> caps;

  AtomModel(const ConstraintModel& base, const Assignment& solution) : model(base) {
    n_hard = base.hard.size();
    model.removable.clear();
    model.facts.clear();
    for (const auto& v : base.vars) {
      Literal l{v.id, {solution[v.id]}};
      model.hard.push_back({Label{fresh_label(base, "justify-atom", v.id), {}}, Implication{{}, l}, ""});
    }
    for (const auto& v : base.vars) {
      Literal l{v.id, {solution[v.id]}};
      model.hard.push_back({Label{fresh_label(base, "justify-negation", v.id), {}}, Forbid{{l}}, ""});
    }
    caps = check_assignment(base, solution).objective.costs;
    caps.resize(static_cast<std::size_t>(base.num_levels()), 0);
  }

  std::size_t atom_index(VarId v) const { return n_hard + static_cast<std::size_t>(v); }
  std::size_t negation_index(VarId v) const { return n_hard + model.vars.size() + static_cast<std::size_t>(v); }
};

}  // namespace

Mus extract_mus(const ConstraintModel& model, const SolveConfig& config) {
  DecisionOracle oracle(model, config);
  std::vector<bool> fixed = base_mask(model);
  std::vector<int> candidates;
  for (std::size_t i = 0; i < model.hard.size(); ++i)
    if (!fixed[i]) candidates.push_back(static_cast<int>(i));
  auto unsat = [&](const std::vector<int>& on) {
    std::vector<bool> active = fixed;
    for (int i : on) active[static_cast<std::size_t>(i)] = true;
    return is_unsat(oracle.check(active));
  };
  if (!unsat(candidates)) throw ExplainError(ExplainErrc::NotUnsat, "model is satisfiable with every constraint enabled");
  Mus mus;
  for (int i : shrink(candidates, unsat)) mus.labels.push_back(model.hard[static_cast<std::size_t>(i)].label.str());
  mus.oracle_calls = oracle.calls();
  return mus;
}

MusCheck verify_mus(const ConstraintModel& model, const std::vector<std::string>& labels, const SolveConfig& config) {
  MusCheck out;
  std::set<std::string> all(labels.begin(), labels.end());
  out.unsat = solve_decision(model, all, config).status == DecisionStatus::Unsat;
  ++out.calls;
  out.minimal = true;
  for (const auto& l : labels) {
    std::set<std::string> less = all;
    less.erase(l);
    ++out.calls;
    if (solve_decision(model, less, config).status != DecisionStatus::Sat) out.minimal = false;
  }
  return out;
}

Atom parse_atom(const ConstraintModel& model, const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos) throw ExplainError(ExplainErrc::UnknownAtom, "atom must look like name=value: " + text);
  std::string name = text.substr(0, eq), value = text.substr(eq + 1);
  auto var = model.find_var(name);
  if (!var) throw ExplainError(ExplainErrc::UnknownAtom, "no variable named " + name);
  const Var& v = model.vars[static_cast<std::size_t>(*var)];
  for (std::size_t i = 0; i < v.value_names.size(); ++i)
    if (v.value_names[i] == value) return {*var, v.domain[i]};
  Value x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !v.index_of(x))
    throw ExplainError(ExplainErrc::UnknownAtom, "value " + value + " is not in the domain of " + name);
  return {*var, x};
}

std::string atom_text(const ConstraintModel& model, const Atom& a) {
  const Var& v = model.vars.at(static_cast<std::size_t>(a.var));
  return v.name + "=" + v.value_text(a.value);
}

bool JustificationGraph::acyclic() const {
  std::vector<int> color(nodes.size(), 0);
  std::function<bool(int)> visit = [&](int n) {
    color[n] = 1;
    for (int s : nodes[n].supports) {
      if (color[s] == 1) return false;
      if (color[s] == 0 && !visit(s)) return false;
    }
    color[n] = 2;
    return true;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (color[i] == 0 && !visit(static_cast<int>(i))) return false;
  return true;
}

bool JustificationGraph::leaves_given() const {
  for (const auto& n : nodes) {
    if (!n.supports.empty()) continue;
    if (n.kind == NodeKind::Atom && n.status == NodeStatus::Justified) return false;
  }
  return true;
}

JustificationGraph justify(const ConstraintModel& model, const Assignment& solution, const std::vector<Atom>& targets,
                           const JustifyOptions& options) {
  if (solution.size() != model.vars.size())
    throw ExplainError(ExplainErrc::TargetNotInSolution, "solution does not cover the model");
  for (const auto& t : targets)
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= solution.size() || solution[t.var] != t.value)
      throw ExplainError(ExplainErrc::TargetNotInSolution, "target does not hold in the solution");

  AtomModel am(model, solution);
  DecisionOracle oracle(am.model, options.config);
  const int levels = model.num_levels();
  JustificationGraph g;
  std::map<std::string, int> constraint_node;
  std::map<int, int> cap_node, atom_node;
  std::vector<char> on_path(model.vars.size(), 0);

  auto add_node = [&](JustNode n) {
    g.nodes.push_back(std::move(n));
    return static_cast<int>(g.nodes.size() - 1);
  };
  auto constraint_id = [&](const std::string& label, bool fact) {
    auto it = constraint_node.find(label);
    if (it != constraint_node.end()) return it->second;
    JustNode n;
    n.kind = NodeKind::Constraint;
    n.label = label;
    n.fact = fact;
    int id = add_node(std::move(n));
    constraint_node[label] = id;
    return id;
  };
  auto cap_id = [&](int level) {
    auto it = cap_node.find(level);
    if (it != cap_node.end()) return it->second;
    JustNode n;
    n.kind = NodeKind::Cap;
    n.level = level;
    n.cap = am.caps[level - 1];
    int id = add_node(std::move(n));
    cap_node[level] = id;
    return id;
  };

  // Item ids: [0, n_hard) model constraints, then one per level, then one
  // per variable (its solution atom).
  const int n_hard = static_cast<int>(am.n_hard);
  auto query = [&](VarId target, const std::vector<int>& items) {
    std::vector<bool> active(am.model.hard.size(), false);
    std::vector<Cost> caps(static_cast<std::size_t>(levels), kNoCap);
    active[am.negation_index(target)] = true;
    for (int it : items) {
      if (it < n_hard) active[static_cast<std::size_t>(it)] = true;
      else if (it < n_hard + levels) caps[static_cast<std::size_t>(it - n_hard)] = am.caps[static_cast<std::size_t>(it - n_hard)];
      else active[am.atom_index(it - n_hard - levels)] = true;
    }
    return is_unsat(oracle.check(active, caps));
  };

  std::function<int(VarId, int)> visit = [&](VarId v, int depth) -> int {
    if (auto it = atom_node.find(v); it != atom_node.end()) return it->second;
    JustNode n;
    n.kind = NodeKind::Atom;
    n.atom = {v, solution[v]};
    std::vector<int> global;
    for (int i = 0; i < n_hard + levels; ++i) global.push_back(i);
    if (depth >= options.max_depth) {
      n.status = NodeStatus::Truncated;
    } else if (!query(v, global)) {
      n.status = NodeStatus::Unforced;
    } else {
      n.status = NodeStatus::Justified;
    }
    int id = add_node(std::move(n));
    atom_node[v] = id;
    if (g.nodes[id].status != NodeStatus::Justified) return id;

    std::vector<int> items = global;
    for (VarId u = 0; u < static_cast<VarId>(model.vars.size()); ++u)
      if (u != v && !on_path[u]) items.push_back(n_hard + levels + u);
    on_path[v] = 1;
    std::vector<int> core = shrink(items, [&](const std::vector<int>& s) { return query(v, s); });
    std::vector<int> supports;
    if (core.empty()) supports.push_back(constraint_id(Label{"domain", {model.vars[v].name}}.str(), true));
    for (int it : core) {
      if (it < n_hard) {
        const auto& label = model.hard[static_cast<std::size_t>(it)].label.str();
        supports.push_back(constraint_id(label, model.facts.count(label) > 0));
      } else if (it < n_hard + levels) {
        supports.push_back(cap_id(it - n_hard + 1));
      } else {
        supports.push_back(visit(it - n_hard - levels, depth + 1));
      }
    }
    on_path[v] = 0;
    g.nodes[id].supports = std::move(supports);
    return id;
  };

  for (const auto& t : targets) g.roots.push_back(visit(t.var, 0));
  g.oracle_calls = oracle.calls();
  return g;
}

bool support_is_unsat(const ConstraintModel& model, const Assignment& solution, const JustificationGraph& g, int node,
                      const SolveConfig& config) {
  const JustNode& n = g.nodes.at(static_cast<std::size_t>(node));
  if (n.kind != NodeKind::Atom || n.status != NodeStatus::Justified) return false;
  AtomModel am(model, solution);
  std::vector<bool> active(am.model.hard.size(), false);
  std::vector<Cost> caps(static_cast<std::size_t>(model.num_levels()), kNoCap);
  active[am.negation_index(n.atom.var)] = true;
  for (int s : n.supports) {
    const JustNode& sn = g.nodes[static_cast<std::size_t>(s)];
    if (sn.kind == NodeKind::Constraint) {
      if (auto i = model.find_hard(sn.label)) active[*i] = true;
    } else if (sn.kind == NodeKind::Cap) {
      caps[static_cast<std::size_t>(sn.level - 1)] = sn.cap;
    } else {
      active[am.atom_index(sn.atom.var)] = true;
    }
  }
  DecisionOracle oracle(am.model, config);
  return oracle.check(active, caps).status == DecisionStatus::Unsat;
}

const char* verdict_name(ContrastVerdict v) {
  switch (v) {
    case ContrastVerdict::AlternativeInfeasible: return "alternative-infeasible";
    case ContrastVerdict::AlternativeWorse: return "alternative-worse";
    case ContrastVerdict::AlternativeEquivalent: return "alternative-equivalent";
    case ContrastVerdict::AlternativeBetter: return "alternative-better";
  }
  return "?";
}

ContrastResult contrast(const ConstraintModel& model, const Assignment& solution, const Atom& a, const Atom& b,
                        const SolveConfig& config) {
  if (solution.size() != model.vars.size() || a.var < 0 || static_cast<std::size_t>(a.var) >= solution.size() ||
      solution[a.var] != a.value)
    throw ExplainError(ExplainErrc::TargetNotInSolution, "first atom does not hold in the solution");
  if (a == b) throw ExplainError(ExplainErrc::SameAssignment, "both atoms are the same");
  if (b.var < 0 || static_cast<std::size_t>(b.var) >= model.vars.size() ||
      !model.vars[static_cast<std::size_t>(b.var)].index_of(b.value))
    throw ExplainError(ExplainErrc::UnknownAtom, "alternative value outside the variable's domain");
  if (solution[b.var] == b.value) throw ExplainError(ExplainErrc::AlreadyHolds, "alternative already holds");

  ContrastResult out;
  out.original = check_assignment(model, solution).objective;
  ConstraintModel forced = model;
  if (forced.has_label(kForcedLabel))
    throw ExplainError(ExplainErrc::LabelCollision, "label already in model: " + kForcedLabel);
  add_constraint(forced, Label{kForcedLabel, {}}, Implication{{}, Literal{b.var, {b.value}}}, {true, false},
                 "force " + atom_text(model, b));

  ConstraintModel all_removable = forced;
  for (const auto& c : forced.hard) all_removable.removable.insert(c.label.str());
  std::set<std::string> every(all_removable.removable);
  auto feasible = solve_decision(all_removable, every, config);
  if (is_unsat(feasible)) {
    out.verdict = ContrastVerdict::AlternativeInfeasible;
    out.mus = extract_mus(all_removable, config);
    return out;
  }
  SolveConfig cfg = config;
  cfg.hint = feasible.assignment;
  auto alt = solve(forced, cfg);
  if (alt.status != SolveStatus::Optimal)
    throw ExplainError(ExplainErrc::Timeout, "alternative could not be solved to optimality in time");
  out.alternative = alt.objective;
  out.alternative_assignment = alt.assignment;
  if (*alt.objective > out.original) out.verdict = ContrastVerdict::AlternativeWorse;
  else if (*alt.objective == out.original) out.verdict = ContrastVerdict::AlternativeEquivalent;
  else out.verdict = ContrastVerdict::AlternativeBetter;
  return out;
}

ConstraintModel Session::augmented() const {
  ConstraintModel m = base;
  for (const auto& c : background) add_constraint(m, c.label, c.params, {true, true}, c.description);
  return m;
}

const HistoryEntry& add_background(Session& session, std::vector<ConstraintInstance> facts,
                                   const SolveConfig& config) {
  ConstraintModel probe = session.augmented();
  std::set<std::string> seen;
  for (const auto& f : facts) {
    std::string l = f.label.str();
    if (probe.has_label(l) || !seen.insert(l).second)
      throw ExplainError(ExplainErrc::LabelCollision, "background label already used: " + l);
  }
  HistoryEntry entry;
  for (auto& f : facts) {
    entry.added.push_back(f.label.str());
    session.background.push_back(std::move(f));
  }
  ConstraintModel aug = session.augmented();
  auto r = solve_decision(aug, aug.removable, config);
  entry.sat = !is_unsat(r);
  if (!entry.sat) entry.mus = extract_mus(aug, config);
  session.history.push_back(std::move(entry));
  return session.history.back();
}

ConstraintInstance parse_background(const ConstraintModel& model, const std::string& line, int ordinal) {
  std::string body = line;
  Label label{"user", {std::to_string(ordinal)}};
  auto eq = body.find('=');
  auto colon = body.find(':');
  if (colon != std::string::npos && (eq == std::string::npos || colon < eq)) {
    std::string name = body.substr(0, colon);
    name.erase(0, name.find_first_not_of(' '));
    name.erase(name.find_last_not_of(' ') + 1);
    if (name.empty()) throw ExplainError(ExplainErrc::UnknownAtom, "empty background label");
    label = Label{name, {}};
    body = body.substr(colon + 1);
  }
  std::erase(body, ' ');
  bool negated = false;
  auto ne = body.find("!=");
  if (ne != std::string::npos) {
    negated = true;
    body.erase(ne, 1);
  }
  Atom a = parse_atom(model, body);
  Literal lit{a.var, {a.value}};
  ConstraintInstance c;
  c.label = label;
  std::string shown = atom_text(model, a);
  shown.replace(shown.find('='), 1, negated ? " != " : " = ");
  c.description = "background fact " + shown;
  if (negated) c.params = Forbid{{lit}};
  else c.params = Implication{{}, lit};
  return c;
}

}  // namespace medsched
