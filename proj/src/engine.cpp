#include "medsched/engine.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <utility>

namespace medsched {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::FeasibleTimeout: return "feasible-timeout";
    case SolveStatus::Unsat: return "unsat";
    case SolveStatus::UnknownTimeout: return "unknown-timeout";
  }
  return "?";
}

namespace {

using Word = std::uint64_t;
using Clock = std::chrono::steady_clock;

struct Interrupted {};

enum class Truth { Entailed, Disentailed, Undecided };

int words_for(int n) { return (n + 63) / 64; }

/// Domains as bitsets over value indices, with a trail for backtracking.
class Store {
 public:
  Store(const std::vector<const std::vector<Value>*>& values, const std::vector<Word>& pool)
      : values_(values), pool_(pool) {
    int total = 0;
    for (const auto* dom : values) {
      int n = static_cast<int>(dom->size());
      off_.push_back(total);
      nw_.push_back(words_for(n));
      size_.push_back(n);
      total += words_for(n);
    }
    bits_.assign(static_cast<std::size_t>(total), 0);
    for (std::size_t v = 0; v < values.size(); ++v) {
      int n = size_[v];
      for (int i = 0; i < n; ++i) bits_[off_[v] + i / 64] |= Word{1} << (i % 64);
    }
    int maxw = 0;
    for (int w : nw_) maxw = std::max(maxw, w);
    tmp_.resize(static_cast<std::size_t>(maxw));
    dirty_.assign(values.size(), 0);
  }

  int num_vars() const { return static_cast<int>(off_.size()); }
  int size(int v) const { return size_[v]; }
  bool fixed(int v) const { return size_[v] == 1; }
  const Word* dom(int v) const { return bits_.data() + off_[v]; }
  int nwords(int v) const { return nw_[v]; }
  Value value(int v, int idx) const { return (*values_[v])[idx]; }
  const Word* mask(int m) const { return pool_.data() + m; }

  bool has(int v, int idx) const { return (dom(v)[idx / 64] >> (idx % 64)) & 1; }

  int min_idx(int v) const {
    const Word* d = dom(v);
    for (int w = 0; w < nw_[v]; ++w)
      if (d[w]) return w * 64 + std::countr_zero(d[w]);
    return -1;
  }
  int max_idx(int v) const {
    const Word* d = dom(v);
    for (int w = nw_[v] - 1; w >= 0; --w)
      if (d[w]) return w * 64 + 63 - std::countl_zero(d[w]);
    return -1;
  }
  Value min_value(int v) const { return value(v, min_idx(v)); }
  Value max_value(int v) const { return value(v, max_idx(v)); }

  bool lit_true(int v, int m) const {
    const Word* d = dom(v);
    const Word* k = mask(m);
    for (int w = 0; w < nw_[v]; ++w)
      if (d[w] & ~k[w]) return false;
    return true;
  }
  bool lit_false(int v, int m) const {
    const Word* d = dom(v);
    const Word* k = mask(m);
    for (int w = 0; w < nw_[v]; ++w)
      if (d[w] & k[w]) return false;
    return true;
  }

  // Modifiers return false on wipeout (domain left untouched then).
  bool intersect(int v, int m) {
    const Word* k = mask(m);
    return update(v, [&](int w, Word d) { return d & k[w]; });
  }
  bool remove(int v, int m) {
    const Word* k = mask(m);
    return update(v, [&](int w, Word d) { return d & ~k[w]; });
  }
  bool assign(int v, int idx) {
    return update(v, [&](int w, Word d) { return w == idx / 64 ? d & (Word{1} << (idx % 64)) : Word{0}; });
  }
  bool keep_range(int v, int lo, int hi) {
    if (lo > hi) return false;
    return update(v, [&](int w, Word d) {
      int base = w * 64;
      if (base + 63 < lo || base > hi) return Word{0};
      Word keep = ~Word{0};
      if (lo > base) keep &= ~Word{0} << (lo - base);
      if (hi < base + 63) keep &= ~Word{0} >> (63 - (hi - base));
      return d & keep;
    });
  }
  bool keep_values_ge(int v, Cost lb) {
    const auto& vals = *values_[v];
    if (lb <= vals.front()) return true;
    auto it = std::lower_bound(vals.begin(), vals.end(), lb,
                               [](Value a, Cost b) { return static_cast<Cost>(a) < b; });
    return keep_range(v, static_cast<int>(it - vals.begin()), static_cast<int>(vals.size()) - 1);
  }
  bool keep_values_le(int v, Cost ub) {
    const auto& vals = *values_[v];
    if (ub >= vals.back()) return true;
    auto it = std::upper_bound(vals.begin(), vals.end(), ub,
                               [](Cost b, Value a) { return b < static_cast<Cost>(a); });
    return keep_range(v, 0, static_cast<int>(it - vals.begin()) - 1);
  }

  std::size_t mark() const { return entries_.size(); }
  void undo(std::size_t mark) {
    while (entries_.size() > mark) {
      const Entry& e = entries_.back();
      std::copy_n(saved_.begin() + static_cast<std::ptrdiff_t>(e.pos), nw_[e.var], bits_.begin() + off_[e.var]);
      size_[e.var] = e.size;
      saved_.resize(e.pos);
      entries_.pop_back();
    }
    clear_changed();
  }

  const std::vector<int>& changed() const { return changed_; }
  void clear_changed() {
    for (int v : changed_) dirty_[v] = 0;
    changed_.clear();
  }

 private:
  template <class F>
  bool update(int v, F f) {
    Word* d = bits_.data() + off_[v];
    int n = nw_[v];
    bool diff = false;
    int count = 0;
    for (int w = 0; w < n; ++w) {
      tmp_[w] = f(w, d[w]);
      diff |= tmp_[w] != d[w];
      count += std::popcount(tmp_[w]);
    }
    if (!diff) return true;
    if (count == 0) return false;
    entries_.push_back({v, size_[v], saved_.size()});
    saved_.insert(saved_.end(), d, d + n);
    std::copy_n(tmp_.begin(), n, d);
    size_[v] = count;
    if (!dirty_[v]) {
      dirty_[v] = 1;
      changed_.push_back(v);
    }
    return true;
  }

  struct Entry {
    int var;
    int size;
    std::size_t pos;
  };

  const std::vector<const std::vector<Value>*>& values_;
  const std::vector<Word>& pool_;
  std::vector<Word> bits_;
  std::vector<int> off_, nw_, size_;
  std::vector<Word> tmp_;
  std::vector<Entry> entries_;
  std::vector<Word> saved_;
  std::vector<int> changed_;
  std::vector<char> dirty_;
};

struct CLit {
  int var;
  int mask;
};

struct WatchSpec {
  int var;
  int mask;  // -1: wake on any change; otherwise wake when fixed into the mask
};

class Prop {
 public:
  virtual ~Prop() = default;
  virtual bool propagate(Store& s) const = 0;
  virtual Truth status(const Store& s) const = 0;
  virtual void watches(std::vector<WatchSpec>& out) const = 0;
};

/// ExactlyOne / AtMostOne / AtMostKCount: lo <= #true <= k + max(cap).
class CountProp final : public Prop {
 public:
  CountProp(std::vector<CLit> lits, int lo, int k, int cap, bool wake_any)
      : lits_(std::move(lits)), lo_(lo), k_(k), cap_(cap), wake_any_(wake_any) {}

  bool propagate(Store& s) const override {
    int t = 0, u = 0, last_u = -1;
    for (std::size_t i = 0; i < lits_.size(); ++i) {
      const auto& l = lits_[i];
      if (s.lit_false(l.var, l.mask)) continue;
      if (s.lit_true(l.var, l.mask)) {
        ++t;
      } else {
        ++u;
        last_u = static_cast<int>(i);
      }
    }
    Cost hi = k_ + (cap_ >= 0 ? s.max_value(cap_) : 0);
    if (t > hi) return false;
    if (cap_ >= 0 && !s.keep_values_ge(cap_, static_cast<Cost>(t) - k_)) return false;
    if (t == hi && u > 0) {
      for (const auto& l : lits_) {
        if (s.lit_false(l.var, l.mask) || s.lit_true(l.var, l.mask)) continue;
        if (!s.remove(l.var, l.mask)) return false;
      }
    }
    if (lo_ > 0) {
      if (t + u < lo_) return false;
      if (t == 0 && u == 1 && !s.intersect(lits_[last_u].var, lits_[last_u].mask)) return false;
    }
    return true;
  }

  Truth status(const Store& s) const override {
    int t = 0, u = 0;
    for (const auto& l : lits_) {
      if (s.lit_false(l.var, l.mask)) continue;
      if (s.lit_true(l.var, l.mask)) ++t;
      else ++u;
    }
    Cost hi_max = k_ + (cap_ >= 0 ? s.max_value(cap_) : 0);
    Cost hi_min = k_ + (cap_ >= 0 ? s.min_value(cap_) : 0);
    if (t > hi_max || t + u < lo_) return Truth::Disentailed;
    if (t + u <= hi_min && t >= lo_) return Truth::Entailed;
    return Truth::Undecided;
  }

  void watches(std::vector<WatchSpec>& out) const override {
    for (const auto& l : lits_) out.push_back({l.var, wake_any_ ? -1 : l.mask});
    if (cap_ >= 0) out.push_back({cap_, -1});
  }

 private:
  std::vector<CLit> lits_;
  int lo_, k_, cap_;
  bool wake_any_;
};

class LinearProp final : public Prop {
 public:
  struct Term {
    int var;
    Cost coef;
    int mask;  // -1 for a plain coef * x term
  };

  LinearProp(std::vector<Term> terms, Cost bound) : terms_(std::move(terms)), bound_(bound) {}

  bool propagate(Store& s) const override {
    Cost minsum = min_sum(s);
    if (minsum > bound_) return false;
    Cost slack = bound_ - minsum;
    for (const auto& t : terms_) {
      if (t.coef <= slack || t.coef == 0) continue;
      if (t.mask >= 0) {
        if (s.lit_true(t.var, t.mask) || s.lit_false(t.var, t.mask)) continue;
        if (!s.remove(t.var, t.mask)) return false;
      } else {
        Cost lim = s.min_value(t.var) + slack / t.coef;
        if (!s.keep_values_le(t.var, lim)) return false;
      }
    }
    return true;
  }

  Truth status(const Store& s) const override {
    if (min_sum(s) > bound_) return Truth::Disentailed;
    Cost maxsum = 0;
    for (const auto& t : terms_) {
      if (t.mask >= 0) maxsum += s.lit_false(t.var, t.mask) ? 0 : t.coef;
      else maxsum += t.coef * s.max_value(t.var);
    }
    return maxsum <= bound_ ? Truth::Entailed : Truth::Undecided;
  }

  void watches(std::vector<WatchSpec>& out) const override {
    for (const auto& t : terms_) out.push_back({t.var, t.mask});
  }

 private:
  Cost min_sum(const Store& s) const {
    Cost sum = 0;
    for (const auto& t : terms_) {
      if (t.mask >= 0) sum += s.lit_true(t.var, t.mask) ? t.coef : 0;
      else sum += t.coef * s.min_value(t.var);
    }
    return sum;
  }

  std::vector<Term> terms_;
  Cost bound_;
};

Cost floor_div(Cost a, Cost b) {
  Cost q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

class OrderingProp final : public Prop {
 public:
  OrderingProp(int before, int after, Cost offset, Cost scale)
      : x_(before), y_(after), offset_(offset), scale_(scale) {}

  bool propagate(Store& s) const override {
    if (!s.keep_values_ge(y_, scale_ * s.min_value(x_) + offset_)) return false;
    return s.keep_values_le(x_, floor_div(s.max_value(y_) - offset_, scale_));
  }

  Truth status(const Store& s) const override {
    if (scale_ * s.min_value(x_) + offset_ > s.max_value(y_)) return Truth::Disentailed;
    if (scale_ * s.max_value(x_) + offset_ <= s.min_value(y_)) return Truth::Entailed;
    return Truth::Undecided;
  }

  void watches(std::vector<WatchSpec>& out) const override {
    out.push_back({x_, -1});
    out.push_back({y_, -1});
  }

 private:
  int x_, y_;
  Cost offset_, scale_;
};

class ImplicationProp final : public Prop {
 public:
  ImplicationProp(std::vector<CLit> premises, CLit conclusion)
      : premises_(std::move(premises)), conclusion_(conclusion) {}

  bool propagate(Store& s) const override {
    int open = 0, which = -1;
    for (std::size_t i = 0; i < premises_.size(); ++i) {
      const auto& p = premises_[i];
      if (s.lit_false(p.var, p.mask)) return true;
      if (!s.lit_true(p.var, p.mask)) {
        ++open;
        which = static_cast<int>(i);
      }
    }
    if (open == 0) return s.intersect(conclusion_.var, conclusion_.mask);
    if (open == 1 && s.lit_false(conclusion_.var, conclusion_.mask))
      return s.remove(premises_[which].var, premises_[which].mask);
    return true;
  }

  Truth status(const Store& s) const override {
    bool all_true = true;
    for (const auto& p : premises_) {
      if (s.lit_false(p.var, p.mask)) return Truth::Entailed;
      if (!s.lit_true(p.var, p.mask)) all_true = false;
    }
    if (s.lit_true(conclusion_.var, conclusion_.mask)) return Truth::Entailed;
    if (all_true && s.lit_false(conclusion_.var, conclusion_.mask)) return Truth::Disentailed;
    return Truth::Undecided;
  }

  void watches(std::vector<WatchSpec>& out) const override {
    for (const auto& p : premises_) out.push_back({p.var, -1});
    out.push_back({conclusion_.var, -1});
  }

 private:
  std::vector<CLit> premises_;
  CLit conclusion_;
};

class ForbidProp final : public Prop {
 public:
  explicit ForbidProp(std::vector<CLit> lits) : lits_(std::move(lits)) {}

  bool propagate(Store& s) const override {
    int open = 0, which = -1;
    for (std::size_t i = 0; i < lits_.size(); ++i) {
      const auto& l = lits_[i];
      if (s.lit_false(l.var, l.mask)) return true;
      if (!s.lit_true(l.var, l.mask)) {
        ++open;
        which = static_cast<int>(i);
      }
    }
    if (open == 0) return false;
    if (open == 1) return s.remove(lits_[which].var, lits_[which].mask);
    return true;
  }

  Truth status(const Store& s) const override {
    bool all_true = true;
    for (const auto& l : lits_) {
      if (s.lit_false(l.var, l.mask)) return Truth::Entailed;
      if (!s.lit_true(l.var, l.mask)) all_true = false;
    }
    return all_true ? Truth::Disentailed : Truth::Undecided;
  }

  void watches(std::vector<WatchSpec>& out) const override {
    for (const auto& l : lits_) out.push_back({l.var, l.mask});
  }

 private:
  std::vector<CLit> lits_;
};

/// Unary soft constraints on one variable at one level, folded into a cost
/// per domain value. tiers ascending; le_masks[j] = values costing <= tiers[j].
struct SoftGroup {
  int level;
  int var;
  std::vector<Cost> tiers;
  std::vector<int> le_masks;
};

struct SoftProp {
  int level;
  Cost weight;
  std::unique_ptr<Prop> prop;
};

struct Compiled {
  const ConstraintModel* model = nullptr;
  std::vector<const std::vector<Value>*> values;
  std::vector<Word> pool;
  std::vector<std::unique_ptr<Prop>> hard;
  std::vector<std::vector<int>> any_watch;
  // fixed_watch[v][i]: props woken when v is fixed to its i-th value
  std::vector<std::vector<std::vector<int>>> fixed_watch;
  std::vector<SoftGroup> groups;
  std::vector<SoftProp> nonunary;
  int levels = 0;

  void add_watch(const WatchSpec& w, int prop) {
    if (w.mask < 0) {
      auto& l = any_watch[w.var];
      if (l.empty() || l.back() != prop) l.push_back(prop);
      return;
    }
    auto& per = fixed_watch[w.var];
    for (std::size_t i = 0; i < per.size(); ++i)
      if (((pool[w.mask + i / 64] >> (i % 64)) & 1) && (per[i].empty() || per[i].back() != prop)) per[i].push_back(prop);
  }

  int add_mask(int var, const std::vector<Value>& vals) {
    const Var& v = model->vars[var];
    int off = static_cast<int>(pool.size());
    pool.resize(pool.size() + static_cast<std::size_t>(words_for(static_cast<int>(v.domain.size()))), 0);
    for (Value x : vals) {
      int idx = *v.index_of(x);
      pool[off + idx / 64] |= Word{1} << (idx % 64);
    }
    return off;
  }
  CLit lit(const Literal& l) { return {l.var, add_mask(l.var, l.values)}; }
  std::vector<CLit> lits(const std::vector<Literal>& ls) {
    std::vector<CLit> out;
    for (const auto& l : ls) out.push_back(lit(l));
    return out;
  }

  std::unique_ptr<Prop> make(const Params& p) {
    switch (static_cast<Kind>(p.index())) {
      case Kind::ExactlyOne:
        return std::make_unique<CountProp>(lits(std::get<ExactlyOne>(p).lits), 1, 1, -1, true);
      case Kind::AtMostOne:
        return std::make_unique<CountProp>(lits(std::get<AtMostOne>(p).lits), 0, 1, -1, false);
      case Kind::AtMostKCount: {
        const auto& c = std::get<AtMostKCount>(p);
        return std::make_unique<CountProp>(lits(c.lits), 0, c.k, c.cap ? *c.cap : -1, false);
      }
      case Kind::LinearLeq: {
        const auto& c = std::get<LinearLeq>(p);
        std::vector<LinearProp::Term> terms;
        for (const auto& t : c.terms)
          terms.push_back({t.var, t.coef, t.indicator ? add_mask(t.var, *t.indicator) : -1});
        return std::make_unique<LinearProp>(std::move(terms), c.bound);
      }
      case Kind::Ordering: {
        const auto& c = std::get<Ordering>(p);
        return std::make_unique<OrderingProp>(c.before, c.after, c.offset, c.scale);
      }
      case Kind::Implication: {
        const auto& c = std::get<Implication>(p);
        return std::make_unique<ImplicationProp>(lits(c.premises), lit(c.conclusion));
      }
      case Kind::Forbid:
        return std::make_unique<ForbidProp>(lits(std::get<Forbid>(p).lits));
    }
    return nullptr;
  }

  explicit Compiled(const ConstraintModel& m) : model(&m) {
    for (const auto& v : m.vars) values.push_back(&v.domain);
    any_watch.resize(m.vars.size());
    fixed_watch.resize(m.vars.size());
    for (std::size_t v = 0; v < m.vars.size(); ++v) fixed_watch[v].resize(m.vars[v].domain.size());
    std::vector<WatchSpec> specs;
    for (std::size_t i = 0; i < m.hard.size(); ++i) {
      hard.push_back(make(m.hard[i].params));
      specs.clear();
      hard.back()->watches(specs);
      for (const auto& w : specs) add_watch(w, static_cast<int>(i));
    }
    levels = m.num_levels();

    std::map<std::pair<int, int>, std::vector<Cost>> unary;
    Assignment probe(m.vars.size(), 0);
    for (const auto& s : m.soft) {
      auto scope = s.violation.scope();
      if (scope.size() == 1) {
        int var = scope[0];
        const auto& dom = m.vars[var].domain;
        auto& costs = unary[{s.level, var}];
        costs.resize(dom.size(), 0);
        for (std::size_t i = 0; i < dom.size(); ++i) {
          probe[var] = dom[i];
          if (!satisfied(s.violation, probe)) costs[i] += s.weight;
        }
        probe[var] = 0;
      } else {
        nonunary.push_back({s.level, s.weight, make(s.violation.params)});
      }
    }
    for (auto& [key, costs] : unary) {
      SoftGroup g;
      g.level = key.first;
      g.var = key.second;
      g.tiers = costs;
      std::sort(g.tiers.begin(), g.tiers.end());
      g.tiers.erase(std::unique(g.tiers.begin(), g.tiers.end()), g.tiers.end());
      const auto& dom = m.vars[g.var].domain;
      for (Cost tier : g.tiers) {
        std::vector<Value> vals;
        for (std::size_t i = 0; i < dom.size(); ++i)
          if (costs[i] <= tier) vals.push_back(dom[i]);
        g.le_masks.push_back(add_mask(g.var, vals));
      }
      groups.push_back(std::move(g));
    }
  }
};

struct Limits {
  Clock::time_point deadline;
  long long node_limit = -1;
  long long nodes = 0;
};

Limits make_limits(const SolveConfig& cfg) {
  Limits l;
  double secs = std::max(cfg.time_limit_s, 0.0);
  l.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(secs));
  if (cfg.node_limit) l.node_limit = *cfg.node_limit;
  return l;
}

class Search {
 public:
  Search(const Compiled& c, const std::vector<char>& active, std::vector<Cost> caps, Limits& limits)
      : c_(c), active_(active), caps_(std::move(caps)), limits_(limits), store_(c.values, c.pool) {
    in_queue_.assign(c.hard.size(), 0);
    caps_.resize(static_cast<std::size_t>(c.levels), kNoCap);
  }

  void set_cap(int level, Cost cap) { caps_[level - 1] = cap; }

  /// Values tried first at each branch, by domain index (-1 = none).
  void set_guide(const Assignment& a) {
    guide_.assign(a.size(), -1);
    for (std::size_t v = 0; v < a.size(); ++v)
      if (auto i = c_.model->vars[v].index_of(a[v])) guide_[v] = static_cast<int>(*i);
  }

  /// Calls on_solution(assignment, objective) per solution; it returns
  /// whether to keep searching. Returns false if interrupted by a limit.
  template <class OnSolution>
  bool run(OnSolution&& on_solution) {
    for (std::size_t i = 0; i < c_.hard.size(); ++i)
      if (active_[i]) enqueue(static_cast<int>(i));
    try {
      if (!propagate()) return true;
      dfs(0, on_solution);
    } catch (const Interrupted&) {
      return false;
    }
    return true;
  }

 private:
  void enqueue(int p) {
    if (in_queue_[p]) return;
    in_queue_[p] = 1;
    queue_.push_back(p);
  }

  void clear_queue() {
    for (int p : queue_) in_queue_[p] = 0;
    queue_.clear();
  }

  void drain_changes() {
    for (int v : store_.changed()) {
      for (int p : c_.any_watch[v])
        if (active_[p]) enqueue(p);
      if (store_.fixed(v))
        for (int p : c_.fixed_watch[v][store_.min_idx(v)])
          if (active_[p]) enqueue(p);
    }
    store_.clear_changed();
  }

  bool propagate() {
    drain_changes();
    while (true) {
      std::size_t head = 0;
      while (head < queue_.size()) {
        int p = queue_[head++];
        in_queue_[p] = 0;
        if (!c_.hard[p]->propagate(store_)) {
          clear_queue();
          return false;
        }
        drain_changes();
      }
      queue_.clear();
      if (!bound_costs()) return false;
      if (store_.changed().empty()) return true;
      drain_changes();
    }
  }

  // Lower-bounds each capped level and prunes values that would exceed it.
  bool bound_costs() {
    for (int level = 1; level <= c_.levels; ++level) {
      Cost cap = caps_[level - 1];
      if (cap >= kNoCap) continue;
      Cost lb = 0;
      gmin_.clear();
      for (const auto& g : c_.groups) {
        if (g.level != level) continue;
        std::size_t j = 0;
        while (j < g.tiers.size() && store_.lit_false(g.var, g.le_masks[j])) ++j;
        gmin_.push_back(j);
        lb += g.tiers[j];
      }
      for (const auto& s : c_.nonunary)
        if (s.level == level && s.prop->status(store_) == Truth::Disentailed) lb += s.weight;
      if (lb > cap) return false;
      Cost slack = cap - lb;
      std::size_t gi = 0;
      for (const auto& g : c_.groups) {
        if (g.level != level) continue;
        std::size_t j = gmin_[gi++];
        Cost allowed = g.tiers[j] + slack;
        std::size_t top = j;
        while (top + 1 < g.tiers.size() && g.tiers[top + 1] <= allowed) ++top;
        if (top + 1 < g.tiers.size() && !store_.intersect(g.var, g.le_masks[top])) return false;
      }
      for (const auto& s : c_.nonunary) {
        if (s.level != level || s.weight <= slack) continue;
        if (s.prop->status(store_) != Truth::Undecided) continue;
        if (!s.prop->propagate(store_)) return false;
      }
    }
    return true;
  }

  void tick() {
    ++limits_.nodes;
    if (limits_.node_limit >= 0 && limits_.nodes > limits_.node_limit) throw Interrupted{};
    if (Clock::now() >= limits_.deadline) throw Interrupted{};
  }

  template <class OnSolution>
  void dfs(int from, OnSolution& on_solution) {
    tick();
    int n = store_.num_vars();
    int v = from;
    while (v < n && store_.fixed(v)) ++v;
    if (v == n) {
      leaf(on_solution);
      return;
    }
    std::vector<int> candidates;
    candidates.reserve(static_cast<std::size_t>(store_.size(v)));
    const Word* d = store_.dom(v);
    for (int w = 0; w < store_.nwords(v); ++w) {
      Word bits = d[w];
      while (bits) {
        candidates.push_back(w * 64 + std::countr_zero(bits));
        bits &= bits - 1;
      }
    }
    if (!guide_.empty() && guide_[v] >= 0) {
      auto it = std::find(candidates.begin(), candidates.end(), guide_[v]);
      if (it != candidates.end()) std::rotate(candidates.begin(), it, it + 1);
    }
    for (int idx : candidates) {
      std::size_t mark = store_.mark();
      if (store_.assign(v, idx) && propagate()) dfs(v + 1, on_solution);
      store_.undo(mark);
      clear_queue();
      if (stop_) return;
    }
  }

  template <class OnSolution>
  void leaf(OnSolution& on_solution) {
    const auto& m = *c_.model;
    Assignment a(m.vars.size());
    for (std::size_t v = 0; v < a.size(); ++v) a[v] = store_.value(static_cast<int>(v), store_.min_idx(static_cast<int>(v)));
    for (std::size_t i = 0; i < m.hard.size(); ++i)
      if (active_[i] && !satisfied(m.hard[i], a)) return;
    ObjectiveVector obj;
    obj.costs.assign(static_cast<std::size_t>(c_.levels), 0);
    for (const auto& s : m.soft)
      if (!satisfied(s.violation, a)) obj.costs[s.level - 1] += s.weight;
    for (int l = 1; l <= c_.levels; ++l)
      if (obj.costs[l - 1] > caps_[l - 1]) return;
    if (!on_solution(a, obj)) stop_ = true;
  }

  const Compiled& c_;
  const std::vector<char>& active_;
  std::vector<Cost> caps_;
  Limits& limits_;
  Store store_;
  std::vector<int> queue_;
  std::vector<char> in_queue_;
  std::vector<std::size_t> gmin_;
  std::vector<int> guide_;
  bool stop_ = false;
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

double search_space(const ConstraintModel& model) {
  double p = 1;
  for (const auto& v : model.vars) {
    p *= static_cast<double>(v.domain.size());
    if (p > 1e300) return 1e300;
  }
  return p;
}

SolveOutcome solve(const ConstraintModel& model, const SolveConfig& config) {
  auto start = Clock::now();
  require_valid(model);
  Compiled compiled(model);
  std::vector<char> active(model.hard.size(), 1);
  Limits limits = make_limits(config);
  const int levels = model.num_levels();

  std::optional<std::pair<Assignment, ObjectiveVector>> incumbent;
  if (config.hint && config.hint->size() == model.vars.size()) {
    bool in_domain = true;
    for (const auto& v : model.vars) in_domain &= v.index_of((*config.hint)[v.id]).has_value();
    if (in_domain) {
      auto check = check_assignment(model, *config.hint);
      if (check.violations.empty()) incumbent.emplace(*config.hint, check.objective);
    }
  }

  SolveOutcome out;
  auto finish = [&](SolveStatus st) {
    out.status = st;
    if (incumbent && (st == SolveStatus::Optimal || st == SolveStatus::FeasibleTimeout)) {
      out.assignment = incumbent->first;
      out.objective = incumbent->second;
    }
    out.stats.nodes = limits.nodes;
    out.stats.wall_ms = elapsed_ms(start);
    return out;
  };

  std::vector<Cost> caps(static_cast<std::size_t>(levels), kNoCap);
  if (levels == 0) {
    Search search(compiled, active, caps, limits);
    std::optional<std::pair<Assignment, ObjectiveVector>> found;
    bool done = search.run([&](const Assignment& a, const ObjectiveVector& o) {
      found.emplace(a, o);
      return false;
    });
    if (found) {
      incumbent = found;
      return finish(SolveStatus::Optimal);
    }
    if (!done) return finish(incumbent ? SolveStatus::FeasibleTimeout : SolveStatus::UnknownTimeout);
    return finish(SolveStatus::Unsat);
  }

  // Each level gets an even share of what is left of both budgets. A level
  // that runs out keeps its incumbent value as the cap for the next one.
  bool proven = true;
  for (int level = 1; level <= levels; ++level) {
    caps[level - 1] = incumbent ? incumbent->second.at_level(level) - 1 : kNoCap;
    const int share = levels - level + 1;
    Limits local = limits;
    auto now = Clock::now();
    if (limits.deadline > now) local.deadline = now + (limits.deadline - now) / share;
    if (limits.node_limit >= 0) local.node_limit = limits.nodes + (limits.node_limit - limits.nodes) / share;
    Search search(compiled, active, caps, local);
    if (incumbent) search.set_guide(incumbent->first);
    bool done = search.run([&](const Assignment& a, const ObjectiveVector& o) {
      incumbent.emplace(a, o);
      search.set_cap(level, o.at_level(level) - 1);
      search.set_guide(a);
      return true;
    });
    limits.nodes = local.nodes;
    if (!done) {
      if (!incumbent) return finish(SolveStatus::UnknownTimeout);
      proven = false;
    } else if (!incumbent) {
      return finish(SolveStatus::Unsat);
    }
    caps[level - 1] = incumbent->second.at_level(level);
  }
  return finish(proven ? SolveStatus::Optimal : SolveStatus::FeasibleTimeout);
}

struct DecisionOracle::Impl {
  ConstraintModel model;
  SolveConfig config;
  std::unique_ptr<Compiled> compiled;
};

DecisionOracle::DecisionOracle(const ConstraintModel& model, SolveConfig config)
    : impl_(std::make_unique<Impl>()) {
  require_valid(model);
  impl_->model = model;
  impl_->config = std::move(config);
  impl_->compiled = std::make_unique<Compiled>(impl_->model);
}

DecisionOracle::~DecisionOracle() = default;
DecisionOracle::DecisionOracle(DecisionOracle&&) noexcept = default;
DecisionOracle& DecisionOracle::operator=(DecisionOracle&&) noexcept = default;

const ConstraintModel& DecisionOracle::model() const { return impl_->model; }

DecisionResult DecisionOracle::check(const std::vector<bool>& active_hard, std::span<const Cost> caps) {
  ++calls_;
  const auto& m = impl_->model;
  if (active_hard.size() != m.hard.size()) throw EngineError("active mask size mismatch");
  std::vector<char> active(active_hard.begin(), active_hard.end());
  std::vector<Cost> cap_vec(caps.begin(), caps.end());
  Limits limits = make_limits(impl_->config);
  Search search(*impl_->compiled, active, cap_vec, limits);
  DecisionResult r;
  bool done = search.run([&](const Assignment& a, const ObjectiveVector&) {
    r.assignment = a;
    return false;
  });
  r.nodes = limits.nodes;
  if (r.assignment) r.status = DecisionStatus::Sat;
  else r.status = done ? DecisionStatus::Unsat : DecisionStatus::UnknownTimeout;
  return r;
}

DecisionResult solve_decision(const ConstraintModel& model, const std::set<std::string>& enabled,
                              const SolveConfig& config) {
  for (const auto& l : enabled)
    if (!model.removable.count(l)) throw EngineError("label not removable: " + l);
  std::vector<bool> active(model.hard.size());
  for (std::size_t i = 0; i < model.hard.size(); ++i) {
    std::string key = model.hard[i].label.str();
    active[i] = !model.removable.count(key) || enabled.count(key);
  }
  DecisionOracle oracle(model, config);
  return oracle.check(active);
}

SolveOutcome brute_force(const ConstraintModel& model) {
  auto start = Clock::now();
  require_valid(model);
  if (search_space(model) > kBruteForceLimit)
    throw SpaceTooLarge("search space exceeds 10^6 assignments");
  const std::size_t n = model.vars.size();
  std::vector<std::size_t> idx(n, 0);
  Assignment a(n);
  for (std::size_t v = 0; v < n; ++v) a[v] = model.vars[v].domain[0];
  SolveOutcome out;
  out.status = SolveStatus::Unsat;
  long long visited = 0;
  const int levels = model.num_levels();
  while (true) {
    ++visited;
    bool ok = true;
    for (const auto& c : model.hard)
      if (!satisfied(c, a)) {
        ok = false;
        break;
      }
    if (ok) {
      ObjectiveVector obj;
      obj.costs.assign(static_cast<std::size_t>(levels), 0);
      for (const auto& s : model.soft)
        if (!satisfied(s.violation, a)) obj.costs[s.level - 1] += s.weight;
      if (!out.objective || obj < *out.objective) {
        out.status = SolveStatus::Optimal;
        out.assignment = a;
        out.objective = obj;
      }
    }
    // Odometer: the last variable moves fastest, so enumeration is lexicographic.
    bool carry = true;
    for (std::size_t v = n; carry && v > 0;) {
      --v;
      if (++idx[v] < model.vars[v].domain.size()) {
        carry = false;
      } else {
        idx[v] = 0;
      }
      a[v] = model.vars[v].domain[idx[v]];
    }
    if (carry) break;
  }
  out.stats.nodes = visited;
  out.stats.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace medsched
