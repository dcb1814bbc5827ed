// Copyright 2026 The semtwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "semtwin/error.hpp"
#include "semtwin/geo.hpp"
#include "semtwin/rules.hpp"

namespace semtwin {

namespace {

using GeometryOf = std::function<const geo::Geometry&(std::size_t)>;

const Literal& literal_arg(std::string_view name, const std::vector<Term>& args,
                           std::size_t i) {
  const Literal* lit = as_literal(args[i]);
  if (!lit) {
    throw ReasonError("argument " + std::to_string(i + 1) + " of " +
                      std::string(name) + " is an IRI, expected a literal");
  }
  return *lit;
}

// Three-way comparison following the coercion rules: numbers compare by
// value, strings and dateTimes lexically, mixed kinds are an error.
int compare_literals(std::string_view name, const Literal& a,
                     const Literal& b) {
  if (a.is_numeric() && b.is_numeric()) {
    double x = a.as_double(), y = b.as_double();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.datatype == b.datatype && !a.is_numeric()) {
    return a.lexical < b.lexical ? -1 : (a.lexical > b.lexical ? 1 : 0);
  }
  throw ReasonError(std::string(name) + " cannot compare " +
                    std::string(datatype_name(a.datatype)) + " \"" +
                    a.lexical + "\" with " +
                    std::string(datatype_name(b.datatype)) + " \"" +
                    b.lexical + "\"");
}

bool terms_equal(std::string_view name, const Term& a, const Term& b) {
  const Literal* la = as_literal(a);
  const Literal* lb = as_literal(b);
  if (la && lb) return compare_literals(name, *la, *lb) == 0;
  return a == b;
}

bool eval_with(std::string_view name, const std::vector<Term>& args,
               const GeometryOf& geometry) {
  if (name == "withinDistance" || name == "distanceGreaterThan") {
    const Literal& d = literal_arg(name, args, 2);
    if (!d.is_numeric()) {
      throw ReasonError("distance argument of " + std::string(name) +
                        " is not numeric");
    }
    double dist = geo::min_distance_m(geometry(0), geometry(1));
    return name == "withinDistance" ? dist <= d.as_double()
                                    : dist > d.as_double();
  }
  if (name == "intersects") return geo::intersects(geometry(0), geometry(1));
  if (name == "contains") return geo::contains(geometry(0), geometry(1));
  if (name == "lessThan" || name == "greaterThan") {
    int c = compare_literals(name, literal_arg(name, args, 0),
                             literal_arg(name, args, 1));
    return name == "lessThan" ? c < 0 : c > 0;
  }
  if (name == "equal") return terms_equal(name, args[0], args[1]);
  if (name == "notEqual") return !terms_equal(name, args[0], args[1]);
  throw ReasonError("unknown built-in '" + std::string(name) + "'");
}

geo::Geometry geometry_of(std::string_view name, const Term& t,
                          std::size_t i) {
  const Literal* lit = as_literal(t);
  if (!lit || lit->datatype != Datatype::WktLiteral) {
    throw ReasonError("argument " + std::to_string(i + 1) + " of " +
                      std::string(name) + " is not a wktLiteral: " +
                      format_term(t));
  }
  try {
    return lit->as_geometry();
  } catch (const Error& e) {
    throw ReasonError("malformed WKT in argument " + std::to_string(i + 1) +
                      " of " + std::string(name) + ": " + e.what());
  }
}

std::string format_binding(const Binding& b) {
  std::string out = "{";
  bool first = true;
  for (const auto& [var, value] : b) {
    if (!first) out += ", ";
    first = false;
    out += "?" + var + " = " + format_term(value);
  }
  return out + "}";
}

using TermId = std::uint32_t;
using Fact = std::array<TermId, 3>;
constexpr TermId kUnbound = std::numeric_limits<TermId>::max();

struct FactHash {
  std::size_t operator()(const Fact& f) const {
    std::uint64_t h = f[0];
    h = h * 0x9E3779B97F4A7C15ULL ^ f[1];
    h = h * 0x9E3779B97F4A7C15ULL ^ f[2];
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

std::uint64_t pair_key(TermId a, TermId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct Slot {
  bool is_var = false;
  TermId value = 0;  // variable index or term id
};

struct CPattern {
  std::array<Slot, 3> slots;
};

struct CBuiltin {
  const BuiltinCall* call = nullptr;
  std::vector<Slot> args;
};

struct Plan {
  std::size_t delta = 0;               // body pattern read from the delta
  std::vector<std::size_t> order;      // body pattern indices
  std::vector<std::vector<std::size_t>> checks;  // built-ins after each step
};

struct CRule {
  const Rule* rule = nullptr;
  std::vector<std::string> vars;
  std::vector<CPattern> body;
  std::vector<CBuiltin> builtins;
  std::vector<CPattern> head;
  std::vector<Plan> plans;
};

class Engine {
 public:
  Engine(const Graph& graph, const RuleSet& rules) {
    for (const auto& t : graph) add_fact(intern_triple(t), 0);
    for (const auto& r : rules.rules()) compile(r);
  }

  void run() {
    std::size_t lo = 0;
    std::size_t hi = facts_.size();
    int round = 1;
    while (lo < hi) {
      pending_.clear();
      for (const auto& rule : rules_) {
        for (const auto& plan : rule.plans) {
          std::vector<TermId> binding(rule.vars.size(), kUnbound);
          join(rule, plan, 0, binding, lo, hi);
        }
      }
      for (const auto& f : pending_) add_fact(f, round);
      lo = hi;
      hi = facts_.size();
      ++round;
    }
  }

  Inference result() const {
    Inference out;
    for (std::size_t i = 0; i < facts_.size(); ++i) {
      Triple t = to_triple(facts_[i]);
      out.graph.insert(t);
      out.round.emplace(std::move(t), rounds_[i]);
    }
    return out;
  }

  Graph graph() const {
    Graph g;
    for (const auto& f : facts_) g.insert(to_triple(f));
    return g;
  }

 private:
  TermId intern(const Term& t) {
    auto [it, inserted] = ids_.emplace(t, static_cast<TermId>(terms_.size()));
    if (inserted) terms_.push_back(t);
    return it->second;
  }

  Fact intern_triple(const Triple& t) {
    return {intern(Term{t.subject}), intern(Term{t.predicate}),
            intern(t.object)};
  }

  Triple to_triple(const Fact& f) const {
    return Triple{std::get<Iri>(terms_[f[0]]), std::get<Iri>(terms_[f[1]]),
                  terms_[f[2]]};
  }

  void add_fact(const Fact& f, int round) {
    if (round == 0 && !known_.insert(f).second) return;
    auto idx = static_cast<std::uint32_t>(facts_.size());
    facts_.push_back(f);
    rounds_.push_back(round);
    by_p_[f[1]].push_back(idx);
    by_s_[f[0]].push_back(idx);
    by_ps_[pair_key(f[1], f[0])].push_back(idx);
    by_po_[pair_key(f[1], f[2])].push_back(idx);
  }

  Slot compile_term(const PatternTerm& t, std::map<std::string, TermId>& vars,
                    CRule& rule) {
    if (const auto* v = std::get_if<Variable>(&t)) {
      auto [it, inserted] =
          vars.emplace(v->name, static_cast<TermId>(rule.vars.size()));
      if (inserted) rule.vars.push_back(v->name);
      return {true, it->second};
    }
    return {false, intern(std::get<Term>(t))};
  }

  CPattern compile_pattern(const TriplePattern& p,
                           std::map<std::string, TermId>& vars, CRule& rule) {
    return {{compile_term(p.subject, vars, rule),
             compile_term(p.predicate, vars, rule),
             compile_term(p.object, vars, rule)}};
  }

  void compile(const Rule& r) {
    CRule rule;
    rule.rule = &r;
    std::map<std::string, TermId> vars;
    for (const auto& item : r.body) {
      if (const auto* p = std::get_if<TriplePattern>(&item)) {
        rule.body.push_back(compile_pattern(*p, vars, rule));
      }
    }
    for (const auto& item : r.body) {
      if (const auto* b = std::get_if<BuiltinCall>(&item)) {
        CBuiltin cb;
        cb.call = b;
        for (const auto& a : b->args) cb.args.push_back(compile_term(a, vars, rule));
        rule.builtins.push_back(std::move(cb));
      }
    }
    for (const auto& p : r.head) {
      rule.head.push_back(compile_pattern(p, vars, rule));
    }
    for (std::size_t d = 0; d < rule.body.size(); ++d) {
      rule.plans.push_back(make_plan(rule, d));
    }
    rules_.push_back(std::move(rule));
  }

  // Greedy join order: after the delta pattern, repeatedly take the pattern
  // with the most constant or already-bound positions.
  static Plan make_plan(const CRule& rule, std::size_t delta) {
    Plan plan;
    plan.delta = delta;
    std::vector<bool> bound(rule.vars.size(), false);
    std::vector<bool> used(rule.body.size(), false);
    auto take = [&](std::size_t i) {
      used[i] = true;
      plan.order.push_back(i);
      for (const auto& s : rule.body[i].slots) {
        if (s.is_var) bound[s.value] = true;
      }
    };
    take(delta);
    while (plan.order.size() < rule.body.size()) {
      std::size_t best = 0;
      int best_score = -1;
      for (std::size_t i = 0; i < rule.body.size(); ++i) {
        if (used[i]) continue;
        int score = 0;
        for (const auto& s : rule.body[i].slots) {
          score += !s.is_var || bound[s.value];
        }
        if (score > best_score) {
          best = i;
          best_score = score;
        }
      }
      take(best);
    }
    plan.checks.resize(plan.order.size());
    std::vector<bool> seen(rule.vars.size(), false);
    std::vector<bool> placed(rule.builtins.size(), false);
    for (std::size_t step = 0; step < plan.order.size(); ++step) {
      for (const auto& s : rule.body[plan.order[step]].slots) {
        if (s.is_var) seen[s.value] = true;
      }
      for (std::size_t b = 0; b < rule.builtins.size(); ++b) {
        if (placed[b]) continue;
        bool ready = std::all_of(
            rule.builtins[b].args.begin(), rule.builtins[b].args.end(),
            [&](const Slot& s) { return !s.is_var || seen[s.value]; });
        if (ready) {
          placed[b] = true;
          plan.checks[step].push_back(b);
        }
      }
    }
    return plan;
  }

  const std::vector<std::uint32_t>* candidates(const CPattern& p,
                                               const std::vector<TermId>& b,
                                               bool& scan_all) const {
    auto value = [&](const Slot& s) { return s.is_var ? b[s.value] : s.value; };
    TermId s = value(p.slots[0]);
    TermId pr = value(p.slots[1]);
    TermId o = value(p.slots[2]);
    static const std::vector<std::uint32_t> kEmpty;
    scan_all = false;
    auto lookup = [&](const auto& index, auto key)
        -> const std::vector<std::uint32_t>* {
      auto it = index.find(key);
      return it == index.end() ? &kEmpty : &it->second;
    };
    if (pr != kUnbound) {
      if (s != kUnbound) return lookup(by_ps_, pair_key(pr, s));
      if (o != kUnbound) return lookup(by_po_, pair_key(pr, o));
      return lookup(by_p_, pr);
    }
    if (s != kUnbound) return lookup(by_s_, s);
    scan_all = true;
    return nullptr;
  }

  static bool unify(const CPattern& p, const Fact& f, std::vector<TermId>& b,
                    std::vector<TermId>& trail) {
    for (int k = 0; k < 3; ++k) {
      const Slot& s = p.slots[k];
      if (!s.is_var) {
        if (s.value != f[k]) return false;
      } else if (b[s.value] == kUnbound) {
        b[s.value] = f[k];
        trail.push_back(s.value);
      } else if (b[s.value] != f[k]) {
        return false;
      }
    }
    return true;
  }

  void join(const CRule& rule, const Plan& plan, std::size_t step,
            std::vector<TermId>& b, std::size_t lo, std::size_t hi) {
    if (step == plan.order.size()) {
      emit(rule, b);
      return;
    }
    std::size_t pi = plan.order[step];
    const CPattern& p = rule.body[pi];
    // Patterns before the delta pattern read only facts older than the
    // delta, so each new combination is produced once.
    std::size_t limit = pi < plan.delta ? lo : hi;
    auto visit = [&](std::uint32_t idx) {
      std::vector<TermId> trail;
      if (unify(p, facts_[idx], b, trail) && checks_pass(rule, plan, step, b)) {
        join(rule, plan, step + 1, b, lo, hi);
      }
      for (TermId v : trail) b[v] = kUnbound;
    };
    if (step == 0) {
      for (std::size_t idx = lo; idx < hi; ++idx) {
        visit(static_cast<std::uint32_t>(idx));
      }
      return;
    }
    bool scan_all = false;
    const auto* list = candidates(p, b, scan_all);
    if (scan_all) {
      for (std::size_t idx = 0; idx < limit; ++idx) {
        visit(static_cast<std::uint32_t>(idx));
      }
      return;
    }
    for (std::uint32_t idx : *list) {
      if (idx >= limit) break;
      visit(idx);
    }
  }

  Binding to_binding(const CRule& rule, const std::vector<TermId>& b) const {
    Binding out;
    for (std::size_t v = 0; v < rule.vars.size(); ++v) {
      if (b[v] != kUnbound) out.emplace(rule.vars[v], terms_[b[v]]);
    }
    return out;
  }

  const geo::Geometry& geometry(TermId id, std::string_view name,
                                std::size_t i) {
    auto it = geometry_cache_.find(id);
    if (it == geometry_cache_.end()) {
      it = geometry_cache_.emplace(id, geometry_of(name, terms_[id], i)).first;
    }
    return it->second;
  }

  bool checks_pass(const CRule& rule, const Plan& plan, std::size_t step,
                   const std::vector<TermId>& b) {
    for (std::size_t bi : plan.checks[step]) {
      const CBuiltin& cb = rule.builtins[bi];
      std::vector<TermId> ids;
      std::vector<Term> args;
      for (const auto& s : cb.args) {
        ids.push_back(s.is_var ? b[s.value] : s.value);
        args.push_back(terms_[ids.back()]);
      }
      bool ok = false;
      try {
        ok = eval_with(cb.call->name, args, [&](std::size_t i)
                           -> const geo::Geometry& {
          return geometry(ids[i], cb.call->name, i);
        });
      } catch (const Error& e) {
        throw ReasonError("rule '" + rule.rule->name + "': " + e.what() +
                          " under binding " +
                          format_binding(to_binding(rule, b)));
      }
      if (!ok) return false;
    }
    return true;
  }

  void emit(const CRule& rule, const std::vector<TermId>& b) {
    for (const auto& h : rule.head) {
      Fact f;
      for (int k = 0; k < 3; ++k) {
        const Slot& s = h.slots[k];
        f[k] = s.is_var ? b[s.value] : s.value;
      }
      if (!is_iri(terms_[f[0]]) || !is_iri(terms_[f[1]])) {
        throw ReasonError("rule '" + rule.rule->name +
                          "': head would place a literal in subject or "
                          "predicate position under binding " +
                          format_binding(to_binding(rule, b)));
      }
      if (known_.insert(f).second) pending_.push_back(f);
    }
  }

  std::vector<Term> terms_;
  std::map<Term, TermId> ids_;
  std::vector<Fact> facts_;
  std::vector<int> rounds_;
  std::unordered_set<Fact, FactHash> known_;
  std::vector<Fact> pending_;
  std::unordered_map<TermId, std::vector<std::uint32_t>> by_p_;
  std::unordered_map<TermId, std::vector<std::uint32_t>> by_s_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_ps_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_po_;
  std::unordered_map<TermId, geo::Geometry> geometry_cache_;
  std::vector<CRule> rules_;
};

PatternTerm substitute(const PatternTerm& t, const Binding& b) {
  if (const auto* v = std::get_if<Variable>(&t)) {
    auto it = b.find(v->name);
    if (it != b.end()) return it->second;
  }
  return t;
}

TriplePattern substitute(const TriplePattern& p, const Binding& b) {
  return {substitute(p.subject, b), substitute(p.predicate, b),
          substitute(p.object, b)};
}

std::optional<Triple> ground(const TriplePattern& p, const Binding& b) {
  TriplePattern g = substitute(p, b);
  const Term* s = std::get_if<Term>(&g.subject);
  const Term* pr = std::get_if<Term>(&g.predicate);
  const Term* o = std::get_if<Term>(&g.object);
  if (!s || !pr || !o || !is_iri(*s) || !is_iri(*pr)) return std::nullopt;
  return Triple{std::get<Iri>(*s), std::get<Iri>(*pr), *o};
}

bool unify_head(const PatternTerm& p, const Term& value, Binding& b) {
  if (const auto* v = std::get_if<Variable>(&p)) {
    auto [it, inserted] = b.emplace(v->name, value);
    return inserted || it->second == value;
  }
  return std::get<Term>(p) == value;
}

class Explainer {
 public:
  Explainer(const Inference& inf, const RuleSet& rules)
      : inf_(inf), rules_(rules) {}

  int round_of(const Triple& t) const {
    auto it = inf_.round.find(t);
    if (it == inf_.round.end()) {
      throw ReasonError("triple is not in the fixpoint: " + format_triple(t));
    }
    return it->second;
  }

  Derivation derive(const Triple& t) const {
    int round = round_of(t);
    if (round == 0) return Derivation{t, "", {}, {}};
    for (const auto& rule : rules_.rules()) {
      std::vector<const TriplePattern*> patterns;
      std::vector<const BuiltinCall*> builtins;
      for (const auto& item : rule.body) {
        if (const auto* p = std::get_if<TriplePattern>(&item)) {
          patterns.push_back(p);
        } else {
          builtins.push_back(&std::get<BuiltinCall>(item));
        }
      }
      for (const auto& h : rule.head) {
        Binding b;
        if (!unify_head(h.subject, Term{t.subject}, b) ||
            !unify_head(h.predicate, Term{t.predicate}, b) ||
            !unify_head(h.object, t.object, b)) {
          continue;
        }
        std::optional<Binding> found =
            search(patterns, builtins, 0, b, round);
        if (!found) continue;
        Derivation d{t, rule.name, *found, {}};
        for (const auto* p : patterns) {
          d.premises.push_back(derive(*ground(*p, *found)));
        }
        return d;
      }
    }
    throw ReasonError("no derivation found for " + format_triple(t));
  }

 private:
  std::optional<Binding> search(
      const std::vector<const TriplePattern*>& patterns,
      const std::vector<const BuiltinCall*>& builtins, std::size_t i,
      const Binding& b, int round) const {
    if (i == patterns.size()) {
      for (const auto* call : builtins) {
        std::vector<Term> args;
        for (const auto& a : call->args) {
          args.push_back(std::get<Term>(substitute(a, b)));
        }
        if (!eval_builtin(call->name, args)) return std::nullopt;
      }
      return b;
    }
    TriplePattern p = substitute(*patterns[i], b);
    for (const auto& extra : match(inf_.graph, p)) {
      Binding next = b;
      next.insert(extra.begin(), extra.end());
      std::optional<Triple> fact = ground(*patterns[i], next);
      if (!fact || round_of(*fact) >= round) continue;
      if (auto r = search(patterns, builtins, i + 1, next, round)) return r;
    }
    return std::nullopt;
  }

  const Inference& inf_;
  const RuleSet& rules_;
};

void render(const Derivation& d, int depth, std::string& out) {
  out += std::string(static_cast<std::size_t>(depth) * 2, ' ');
  out += format_triple(d.conclusion);
  if (d.rule.empty()) {
    out += "  [fact]\n";
    return;
  }
  out += "  <= " + d.rule + " " + format_binding(d.binding) + "\n";
  for (const auto& p : d.premises) render(p, depth + 1, out);
}

}  // namespace

bool eval_builtin(std::string_view name, const std::vector<Term>& args) {
  auto it = builtin_registry().find(name);
  if (it == builtin_registry().end()) {
    throw ReasonError("unknown built-in '" + std::string(name) + "'");
  }
  if (args.size() != it->second) {
    throw ReasonError("built-in " + std::string(name) + " takes " +
                      std::to_string(it->second) + " arguments");
  }
  std::vector<geo::Geometry> cache;
  std::vector<bool> ready(args.size(), false);
  cache.resize(args.size(), geo::Point{});
  return eval_with(name, args, [&](std::size_t i) -> const geo::Geometry& {
    if (!ready[i]) {
      cache[i] = geometry_of(name, args[i], i);
      ready[i] = true;
    }
    return cache[i];
  });
}

Graph reason(const Graph& graph, const RuleSet& rules) {
  Engine engine(graph, rules);
  engine.run();
  Graph out = engine.graph();
  for (const auto& [p, base] : graph.prefixes()) out.set_prefix(p, base);
  return out;
}

Inference reason_traced(const Graph& graph, const RuleSet& rules) {
  Engine engine(graph, rules);
  engine.run();
  Inference out = engine.result();
  for (const auto& [p, base] : graph.prefixes()) out.graph.set_prefix(p, base);
  return out;
}

std::optional<Derivation> explain(const Inference& inference,
                                  const RuleSet& rules, const Triple& triple) {
  Explainer ex(inference, rules);
  if (ex.round_of(triple) == 0) return std::nullopt;
  return ex.derive(triple);
}

std::string format_derivation(const std::optional<Derivation>& d) {
  std::string out;
  if (d) render(*d, 0, out);
  return out;
}

}  // namespace semtwin
