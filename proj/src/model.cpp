#include "medsched/model.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace medsched {

std::string Label::str() const {
  if (args.empty()) return family;
  std::string out = family + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i];
  }
  return out + ")";
}

std::optional<int> Var::index_of(Value v) const {
  auto it = std::lower_bound(domain.begin(), domain.end(), v);
  if (it == domain.end() || *it != v) return std::nullopt;
  return static_cast<int>(it - domain.begin());
}

std::string Var::value_text(Value v) const {
  if (!value_names.empty()) {
    if (auto idx = index_of(v)) return value_names[*idx];
  }
  return std::to_string(v);
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::ExactlyOne: return "ExactlyOne";
    case Kind::AtMostOne: return "AtMostOne";
    case Kind::LinearLeq: return "LinearLeq";
    case Kind::Ordering: return "Ordering";
    case Kind::AtMostKCount: return "AtMostKCount";
    case Kind::Implication: return "Implication";
    case Kind::Forbid: return "Forbid";
  }
  return "?";
}

const char* errc_name(ModelErrc e) {
  switch (e) {
    case ModelErrc::EmptyDomain: return "EmptyDomain";
    case ModelErrc::UnsortedDomain: return "UnsortedDomain";
    case ModelErrc::DuplicateLabel: return "DuplicateLabel";
    case ModelErrc::UnknownVar: return "UnknownVar";
    case ModelErrc::MalformedParams: return "MalformedParams";
    case ModelErrc::PartialAssignment: return "PartialAssignment";
    case ModelErrc::ValueOutsideDomain: return "ValueOutsideDomain";
    case ModelErrc::UnknownLabel: return "UnknownLabel";
  }
  return "?";
}

const char* defect_name(DefectKind d) {
  switch (d) {
    case DefectKind::EmptyDomain: return "EmptyDomain";
    case DefectKind::UnsortedDomain: return "UnsortedDomain";
    case DefectKind::NonDenseIds: return "NonDenseIds";
    case DefectKind::DanglingVar: return "DanglingVar";
    case DefectKind::DuplicateLabel: return "DuplicateLabel";
    case DefectKind::MalformedParams: return "MalformedParams";
    case DefectKind::UnknownRemovable: return "UnknownRemovable";
    case DefectKind::UnknownFact: return "UnknownFact";
  }
  return "?";
}

ModelError::ModelError(ModelErrc code, const std::string& msg)
    : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void collect_scope(const Params& p, std::vector<VarId>& out) {
  auto lits = [&](const std::vector<Literal>& ls) {
    for (const auto& l : ls) out.push_back(l.var);
  };
  std::visit(Overloaded{
                 [&](const ExactlyOne& c) { lits(c.lits); },
                 [&](const AtMostOne& c) { lits(c.lits); },
                 [&](const AtMostKCount& c) {
                   lits(c.lits);
                   if (c.cap) out.push_back(*c.cap);
                 },
                 [&](const LinearLeq& c) {
                   for (const auto& t : c.terms) out.push_back(t.var);
                 },
                 [&](const Ordering& c) {
                   out.push_back(c.before);
                   out.push_back(c.after);
                 },
                 [&](const Implication& c) {
                   lits(c.premises);
                   out.push_back(c.conclusion.var);
                 },
                 [&](const Forbid& c) { lits(c.lits); },
             },
             p);
}

bool var_exists(const ConstraintModel& m, VarId v) {
  return v >= 0 && static_cast<std::size_t>(v) < m.vars.size();
}

bool value_set_ok(const Var& var, const std::vector<Value>& values) {
  if (values.empty()) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i && values[i] <= values[i - 1]) return false;
    if (!var.index_of(values[i])) return false;
  }
  return true;
}

// Assumes all vars exist. Returns a description of the first problem.
std::optional<std::string> params_problem(const ConstraintModel& m, const Params& p) {
  auto lits_ok = [&](const std::vector<Literal>& ls) -> std::optional<std::string> {
    for (const auto& l : ls) {
      if (!value_set_ok(m.vars[l.var], l.values))
        return "literal on " + m.vars[l.var].name + " needs a sorted non-empty subset of its domain";
    }
    return std::nullopt;
  };
  return std::visit(
      Overloaded{
          [&](const ExactlyOne& c) -> std::optional<std::string> {
            if (c.lits.empty()) return "ExactlyOne over an empty scope";
            return lits_ok(c.lits);
          },
          [&](const AtMostOne& c) -> std::optional<std::string> {
            if (c.lits.empty()) return "AtMostOne over an empty scope";
            return lits_ok(c.lits);
          },
          [&](const AtMostKCount& c) -> std::optional<std::string> {
            if (c.lits.empty()) return "AtMostKCount over an empty scope";
            if (c.k < 0) return "AtMostKCount with negative k";
            return lits_ok(c.lits);
          },
          [&](const LinearLeq& c) -> std::optional<std::string> {
            if (c.terms.empty()) return "LinearLeq without terms";
            for (const auto& t : c.terms) {
              if (t.coef < 0) return "LinearLeq coefficient must be non-negative";
              if (t.indicator && !value_set_ok(m.vars[t.var], *t.indicator))
                return "LinearLeq indicator set is not a sorted subset of the domain";
            }
            return std::nullopt;
          },
          [&](const Ordering& c) -> std::optional<std::string> {
            if (c.offset < 0) return "Ordering offset must be >= 0";
            if (c.scale < 1) return "Ordering scale must be >= 1";
            if (c.before == c.after) return "Ordering relates a variable to itself";
            return std::nullopt;
          },
          [&](const Implication& c) -> std::optional<std::string> {
            if (auto e = lits_ok(c.premises)) return e;
            return lits_ok({c.conclusion});
          },
          [&](const Forbid& c) -> std::optional<std::string> {
            if (c.lits.empty()) return "Forbid without literals";
            return lits_ok(c.lits);
          },
      },
      p);
}

std::optional<VarId> dangling_var(const ConstraintModel& m, const Params& p) {
  std::vector<VarId> scope;
  collect_scope(p, scope);
  for (VarId v : scope)
    if (!var_exists(m, v)) return v;
  return std::nullopt;
}

bool holds(const Literal& l, std::span<const Value> values) {
  return std::binary_search(l.values.begin(), l.values.end(), values[l.var]);
}

}  // namespace

std::vector<VarId> ConstraintInstance::scope() const {
  std::vector<VarId> all;
  collect_scope(params, all);
  std::vector<VarId> out;
  for (VarId v : all)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

int ConstraintModel::num_levels() const {
  int n = 0;
  for (const auto& s : soft) n = std::max(n, s.level);
  return n;
}

std::optional<std::size_t> ConstraintModel::find_hard(const std::string& label) const {
  for (std::size_t i = 0; i < hard.size(); ++i)
    if (hard[i].label.str() == label) return i;
  return std::nullopt;
}

std::optional<VarId> ConstraintModel::find_var(const std::string& name) const {
  for (const auto& v : vars)
    if (v.name == name) return v.id;
  return std::nullopt;
}

bool ConstraintModel::has_label(const std::string& label) const {
  if (find_hard(label)) return true;
  for (const auto& s : soft)
    if (s.label.str() == label) return true;
  return false;
}

Cost ObjectiveVector::at_level(int level) const {
  if (level < 1 || static_cast<std::size_t>(level) > costs.size()) return 0;
  return costs[level - 1];
}

std::string ObjectiveVector::str() const {
  std::string out = "[";
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(costs[i]);
  }
  return out + "]";
}

std::strong_ordering ObjectiveVector::operator<=>(const ObjectiveVector& o) const {
  std::size_t n = std::max(costs.size(), o.costs.size());
  for (std::size_t i = 0; i < n; ++i) {
    Cost a = i < costs.size() ? costs[i] : 0;
    Cost b = i < o.costs.size() ? o.costs[i] : 0;
    if (a != b) return a <=> b;
  }
  return std::strong_ordering::equal;
}

bool ObjectiveVector::operator==(const ObjectiveVector& o) const {
  return (*this <=> o) == std::strong_ordering::equal;
}

VarId add_var(ConstraintModel& model, std::string name, std::vector<Value> domain,
              std::vector<std::string> value_names) {
  if (domain.empty()) throw ModelError(ModelErrc::EmptyDomain, "variable " + name);
  for (std::size_t i = 1; i < domain.size(); ++i)
    if (domain[i] <= domain[i - 1])
      throw ModelError(ModelErrc::UnsortedDomain, "variable " + name);
  if (!value_names.empty() && value_names.size() != domain.size())
    throw ModelError(ModelErrc::MalformedParams, "value names of " + name);
  Var v;
  v.id = static_cast<VarId>(model.vars.size());
  v.name = std::move(name);
  v.domain = std::move(domain);
  v.value_names = std::move(value_names);
  model.vars.push_back(std::move(v));
  return model.vars.back().id;
}

void add_constraint(ConstraintModel& model, Label label, Params params, ConstraintFlags flags,
                    std::string description) {
  std::string key = label.str();
  if (model.has_label(key)) throw ModelError(ModelErrc::DuplicateLabel, key);
  if (auto v = dangling_var(model, params))
    throw ModelError(ModelErrc::UnknownVar, key + " references var " + std::to_string(*v));
  if (auto e = params_problem(model, params)) throw ModelError(ModelErrc::MalformedParams, key + ": " + *e);
  model.hard.push_back({std::move(label), std::move(params), std::move(description)});
  if (flags.removable) model.removable.insert(key);
  if (flags.fact) model.facts.insert(key);
}

void add_soft(ConstraintModel& model, Label label, int level, Cost weight, Params params,
              std::string description) {
  std::string key = label.str();
  if (model.has_label(key)) throw ModelError(ModelErrc::DuplicateLabel, key);
  if (level < 1 || weight < 1)
    throw ModelError(ModelErrc::MalformedParams, key + ": level and weight must be >= 1");
  if (auto v = dangling_var(model, params))
    throw ModelError(ModelErrc::UnknownVar, key + " references var " + std::to_string(*v));
  if (auto e = params_problem(model, params)) throw ModelError(ModelErrc::MalformedParams, key + ": " + *e);
  SoftConstraint s;
  s.label = label;
  s.level = level;
  s.weight = weight;
  s.violation = {std::move(label), std::move(params), std::move(description)};
  model.soft.push_back(std::move(s));
}

bool satisfied(const ConstraintInstance& c, std::span<const Value> values) {
  auto count = [&](const std::vector<Literal>& ls) {
    int n = 0;
    for (const auto& l : ls) n += holds(l, values) ? 1 : 0;
    return n;
  };
  return std::visit(
      Overloaded{
          [&](const ExactlyOne& p) { return count(p.lits) == 1; },
          [&](const AtMostOne& p) { return count(p.lits) <= 1; },
          [&](const AtMostKCount& p) {
            Cost bound = p.k + (p.cap ? values[*p.cap] : 0);
            return count(p.lits) <= bound;
          },
          [&](const LinearLeq& p) {
            Cost sum = 0;
            for (const auto& t : p.terms) {
              Value x = values[t.var];
              if (t.indicator)
                sum += std::binary_search(t.indicator->begin(), t.indicator->end(), x) ? t.coef : 0;
              else
                sum += t.coef * x;
            }
            return sum <= p.bound;
          },
          [&](const Ordering& p) {
            return p.scale * values[p.before] + p.offset <= static_cast<Cost>(values[p.after]);
          },
          [&](const Implication& p) {
            for (const auto& l : p.premises)
              if (!holds(l, values)) return true;
            return holds(p.conclusion, values);
          },
          [&](const Forbid& p) { return count(p.lits) != static_cast<int>(p.lits.size()); },
      },
      c.params);
}

CheckResult check_assignment(const ConstraintModel& model, const Assignment& assignment) {
  if (assignment.size() != model.vars.size())
    throw ModelError(ModelErrc::PartialAssignment,
                     "expected " + std::to_string(model.vars.size()) + " values, got " +
                         std::to_string(assignment.size()));
  for (const auto& v : model.vars)
    if (!v.index_of(assignment[v.id]))
      throw ModelError(ModelErrc::ValueOutsideDomain,
                       v.name + "=" + std::to_string(assignment[v.id]));
  CheckResult r;
  for (const auto& c : model.hard)
    if (!satisfied(c, assignment)) r.violations.push_back(c.label.str());
  r.objective.costs.assign(static_cast<std::size_t>(model.num_levels()), 0);
  for (const auto& s : model.soft)
    if (!satisfied(s.violation, assignment)) r.objective.costs[s.level - 1] += s.weight;
  return r;
}

std::vector<Defect> validate_model(const ConstraintModel& model) {
  std::vector<Defect> out;
  for (std::size_t i = 0; i < model.vars.size(); ++i) {
    const auto& v = model.vars[i];
    if (v.id != static_cast<VarId>(i)) out.push_back({DefectKind::NonDenseIds, v.name});
    if (v.domain.empty()) out.push_back({DefectKind::EmptyDomain, v.name});
    for (std::size_t j = 1; j < v.domain.size(); ++j)
      if (v.domain[j] <= v.domain[j - 1]) {
        out.push_back({DefectKind::UnsortedDomain, v.name});
        break;
      }
  }
  std::unordered_set<std::string> seen;
  auto check = [&](const ConstraintInstance& c) {
    std::string key = c.label.str();
    if (!seen.insert(key).second) out.push_back({DefectKind::DuplicateLabel, key});
    if (dangling_var(model, c.params)) {
      out.push_back({DefectKind::DanglingVar, key});
      return;
    }
    if (auto e = params_problem(model, c.params)) out.push_back({DefectKind::MalformedParams, key + ": " + *e});
  };
  for (const auto& c : model.hard) check(c);
  for (const auto& s : model.soft) {
    check(s.violation);
    if (s.level < 1 || s.weight < 1) out.push_back({DefectKind::MalformedParams, s.label.str()});
  }
  std::unordered_set<std::string> hard_labels;
  for (const auto& c : model.hard) hard_labels.insert(c.label.str());
  for (const auto& l : model.removable)
    if (!hard_labels.count(l)) out.push_back({DefectKind::UnknownRemovable, l});
  for (const auto& l : model.facts)
    if (!hard_labels.count(l)) out.push_back({DefectKind::UnknownFact, l});
  return out;
}

void require_valid(const ConstraintModel& model) {
  auto defects = validate_model(model);
  if (defects.empty()) return;
  std::ostringstream msg;
  msg << "invalid model:";
  for (const auto& d : defects) msg << " " << defect_name(d.kind) << "(" << d.where << ")";
  throw ModelError(ModelErrc::MalformedParams, msg.str());
}

}  // namespace medsched
