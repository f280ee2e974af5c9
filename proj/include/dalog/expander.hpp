#pragma once

// Inlines `use` directives, assigns default meta-constraints and checks the
// static well-formedness rules of expanded units.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dalog/core.hpp"
#include "dalog/formula.hpp"
#include "dalog/printer.hpp"

namespace dalog {

/// A unit with every `use` inlined. After `infer_default_metas`, `metas`
/// holds exactly one entry per predicate.
struct ExpandedUnit {
  std::string name;
  std::optional<std::set<std::string>> exported;
  std::vector<Rule> rules;
  std::vector<MetaConstraint> metas;
  std::set<Constant> constants;
  Signature signature;
  std::set<std::string> defaulted;  // predicates whose meta was inferred
  SourceSpan span;

  MetaKind meta_of(const std::string& pred) const {
    for (const auto& m : metas)
      if (m.pred == pred) return m.kind;
    return MetaKind::Certain;
  }
};

/// Target of one bound predicate: `outer(args..., extra...)`.
struct Binding {
  std::string outer;
  std::vector<Term> extra;
  friend bool operator==(const Binding&, const Binding&) = default;
};
using BindingMap = std::map<std::string, Binding>;

struct ExpandOptions {
  bool allow_circular_use = false;
  std::size_t max_instantiations = 10000;
};

namespace detail {

inline Formula apply_binding(const Formula& f, const BindingMap& b) {
  return map_atoms(f, [&](const AtomF& a, const SourceSpan& sp) {
    if (a.pred.kind != PredRef::Kind::Plain && a.pred.kind != PredRef::Kind::Truth) return Formula{a, sp};
    auto it = b.find(a.pred.name);
    if (it == b.end()) return Formula{a, sp};
    AtomF out = a;
    out.pred.name = it->second.outer;
    out.args.insert(out.args.end(), it->second.extra.begin(), it->second.extra.end());
    return Formula{std::move(out), sp};
  });
}

inline std::set<std::string> extra_vars(const BindingMap& b) {
  std::set<std::string> out;
  for (const auto& [k, v] : b)
    for (const auto& t : v.extra) collect_term_var(t, out);
  return out;
}

inline Rule apply_binding(const Rule& r, const BindingMap& b, const std::set<std::string>& reserved) {
  // Rule variables that collide with the binding's extra-argument variables
  // are renamed first so the extra arguments stay distinct.
  std::set<std::string> vars = all_vars(r);
  std::map<std::string, std::string> renames;
  std::set<std::string> used = vars;
  used.insert(reserved.begin(), reserved.end());
  for (const auto& v : vars)
    if (reserved.count(v)) {
      std::string nv = fresh_name(v, used);
      used.insert(nv);
      renames[v] = nv;
    }
  Rule out = renames.empty() ? r : rename_all_vars(r, renames);
  if (out.head.kind == PredRef::Kind::Plain || out.head.kind == PredRef::Kind::Truth) {
    auto it = b.find(out.head.name);
    if (it != b.end()) {
      out.head.name = it->second.outer;
      out.head_args.insert(out.head_args.end(), it->second.extra.begin(), it->second.extra.end());
    }
  }
  if (out.body) out.body = apply_binding(*out.body, b);
  return out;
}

inline BindingMap binding_map(const std::vector<UseBinding>& bs) {
  BindingMap m;
  for (const auto& b : bs)
    if (!(b.inner == b.outer && b.extra.empty())) m[b.inner] = Binding{b.outer, b.extra};
  return m;
}

/// `outer ∘ inner`: rename by `inner` first, then by `outer`.
inline BindingMap compose(const BindingMap& outer, const BindingMap& inner) {
  BindingMap out;
  for (const auto& [p, b] : inner) {
    Binding r = b;
    auto it = outer.find(b.outer);
    if (it != outer.end()) {
      r.outer = it->second.outer;
      r.extra.insert(r.extra.end(), it->second.extra.begin(), it->second.extra.end());
    }
    out[p] = std::move(r);
  }
  for (const auto& [p, b] : outer)
    if (!inner.count(p)) out[p] = b;
  for (auto it = out.begin(); it != out.end();)
    it = (it->second.outer == it->first && it->second.extra.empty()) ? out.erase(it) : std::next(it);
  return out;
}

inline std::string use_key(const std::string& target, const BindingMap& b) {
  std::string key = target;
  for (const auto& [p, v] : b) {
    key += "|" + p + "=" + v.outer;
    if (!v.extra.empty()) key += terms_to_string(v.extra);
  }
  return key;
}

inline void collect_rule_constants(const Rule& r, std::set<Constant>& out) {
  auto add = [&](const Term& t) {
    if (t.is_const()) out.insert(t.as_const());
  };
  for (const auto& t : r.head_args) add(t);
  if (!r.body) return;
  std::function<void(const Formula&)> walk = [&](const Formula& f) {
    std::visit(overloaded{
                   [&](const AtomF& a) {
                     if (a.pred.subject) add(*a.pred.subject);
                     for (const auto& t : a.args) add(t);
                   },
                   [&](const NotF& n) { walk(*n.body); },
                   [&](const AndF& c) {
                     for (const auto& p : c.parts) walk(p);
                   },
                   [&](const OrF& c) {
                     for (const auto& p : c.parts) walk(p);
                   },
                   [&](const QuantF& q) { walk(*q.body); },
                   [&](const EqF& e) {
                     add(e.lhs);
                     add(e.rhs);
                   },
               },
               f.node);
  };
  walk(*r.body);
}

/// Plain predicate names a unit mentions in its own text.
inline std::set<std::string> own_predicates(const KUnitDef& u) {
  std::set<std::string> out;
  auto add_ref = [&](const PredRef& p) {
    if (p.kind == PredRef::Kind::Plain || p.kind == PredRef::Kind::Truth) out.insert(p.name);
  };
  for (const auto& r : u.rules) {
    add_ref(r.head);
    if (r.body) visit_atoms(*r.body, [&](const AtomF& a, bool) { add_ref(a.pred); });
  }
  for (const auto& m : u.metas) out.insert(m.pred);
  return out;
}

/// Predicate vocabulary of each unit once its uses are inlined.
inline std::map<std::string, std::set<std::string>> vocabularies(const Program& p) {
  std::map<std::string, std::set<std::string>> vocab;
  for (const auto& u : p.units) vocab[u.name] = own_predicates(u);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& u : p.units) {
      auto& mine = vocab[u.name];
      for (const auto& use : u.uses) {
        auto it = vocab.find(use.target);
        if (it == vocab.end()) continue;
        BindingMap b = binding_map(use.bindings);
        for (const auto& q : std::set<std::string>(it->second)) {
          auto bt = b.find(q);
          if (mine.insert(bt == b.end() ? q : bt->second.outer).second) changed = true;
        }
      }
    }
  }
  return vocab;
}

inline void check_use_acyclic(const Program& p) {
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::function<void(const KUnitDef&)> dfs = [&](const KUnitDef& u) {
    state[u.name] = 1;
    for (const auto& use : u.uses) {
      const KUnitDef* t = p.find(use.target);
      if (!t) throw Error(ErrorKind::UnknownUnit, "use of unknown kunit '" + use.target + "'", use.span);
      if (state[t->name] == 1)
        throw Error(ErrorKind::CyclicUse,
                    "kunit '" + u.name + "' uses '" + t->name + "', which forms a cycle of uses", use.span);
      if (state[t->name] == 0) dfs(*t);
    }
    state[u.name] = 2;
  };
  for (const auto& u : p.units)
    if (state[u.name] == 0) dfs(u);
}

inline void check_directive(const KUnitDef& user, const UseDirective& use, const KUnitDef& target,
                            const std::set<std::string>& target_vocab) {
  std::set<std::string> inners;
  for (const auto& b : use.bindings) {
    if (!inners.insert(b.inner).second)
      throw Error(ErrorKind::Parse, "predicate '" + b.inner + "' bound twice in use of '" + target.name + "'",
                  use.span);
    if (!target_vocab.count(b.inner))
      throw Error(ErrorKind::UnknownPredicate,
                  "kunit '" + target.name + "' has no predicate '" + b.inner + "' to bind", use.span);
    if (target.exported && !target.exported->count(b.inner))
      throw Error(ErrorKind::HiddenPredicate,
                  "predicate '" + b.inner + "' is not a parameter of kunit '" + target.name + "'", use.span);
  }
  if (!target.exported) return;
  std::set<std::string> hidden;
  for (const auto& q : target_vocab)
    if (!target.exported->count(q)) hidden.insert(q);
  for (const auto& b : use.bindings)
    if (hidden.count(b.outer))
      throw Error(ErrorKind::HiddenPredicate,
                  "predicate '" + b.outer + "' is hidden in kunit '" + target.name + "'", use.span);
  auto check_ref = [&](const PredRef& p, const SourceSpan& sp) {
    if ((p.kind == PredRef::Kind::Plain || p.kind == PredRef::Kind::Truth) && hidden.count(p.name))
      throw Error(ErrorKind::HiddenPredicate,
                  "predicate '" + p.name + "' is hidden in kunit '" + target.name + "'", sp);
  };
  for (const auto& r : user.rules) {
    check_ref(r.head, r.span);
    if (r.body) visit_atoms(*r.body, [&](const AtomF& a, bool) { check_ref(a.pred, r.span); });
  }
  for (const auto& m : user.metas)
    if (hidden.count(m.pred))
      throw Error(ErrorKind::HiddenPredicate, "predicate '" + m.pred + "' is hidden in kunit '" + target.name + "'",
                  m.span);
}

}  // namespace detail

/// Rules and metas of `unit` with its predicates renamed per `bindings`.
struct Instantiation {
  std::vector<Rule> rules;
  std::vector<MetaConstraint> metas;
};

inline Instantiation substitute(const KUnitDef& unit, const BindingMap& bindings) {
  Instantiation out;
  std::set<std::string> reserved = detail::extra_vars(bindings);
  for (const auto& r : unit.rules) out.rules.push_back(detail::apply_binding(r, bindings, reserved));
  for (auto m : unit.metas) {
    auto it = bindings.find(m.pred);
    if (it != bindings.end()) m.pred = it->second.outer;
    out.metas.push_back(std::move(m));
  }
  return out;
}

inline Instantiation substitute(const KUnitDef& unit, const std::vector<UseBinding>& bindings) {
  return substitute(unit, detail::binding_map(bindings));
}

/// Inlines every use, recursively. Each distinct (unit, composed bindings)
/// pair is inlined once per expanding unit.
inline std::vector<ExpandedUnit> expand_uses(const Program& p, const ExpandOptions& opts = {}) {
  for (const auto& u : p.units)
    for (const auto& use : u.uses)
      if (!p.find(use.target)) throw Error(ErrorKind::UnknownUnit, "use of unknown kunit '" + use.target + "'", use.span);
  if (!opts.allow_circular_use) detail::check_use_acyclic(p);
  auto vocab = detail::vocabularies(p);

  std::vector<ExpandedUnit> out;
  for (const auto& unit : p.units) {
    ExpandedUnit e;
    e.name = unit.name;
    e.exported = unit.exported;
    e.span = unit.span;
    e.rules = unit.rules;
    e.metas = unit.metas;

    struct Pending {
      const KUnitDef* user;
      const UseDirective* use;
      BindingMap outer;
    };
    std::set<std::string> seen{detail::use_key(unit.name, {})};
    std::deque<Pending> work;
    for (const auto& use : unit.uses) work.push_back({&unit, &use, {}});
    while (!work.empty()) {
      Pending cur = std::move(work.front());
      work.pop_front();
      const KUnitDef& target = *p.find(cur.use->target);
      detail::check_directive(*cur.user, *cur.use, target, vocab[target.name]);
      BindingMap composed = detail::compose(cur.outer, detail::binding_map(cur.use->bindings));
      if (!seen.insert(detail::use_key(target.name, composed)).second) continue;
      if (seen.size() > opts.max_instantiations)
        throw Error(ErrorKind::ExpansionLimit,
                    "expanding kunit '" + unit.name + "' needs more than " + std::to_string(opts.max_instantiations) +
                        " instantiations",
                    cur.use->span);
      Instantiation inst = substitute(target, composed);
      for (auto& r : inst.rules) e.rules.push_back(std::move(r));
      for (auto& m : inst.metas) e.metas.push_back(std::move(m));
      for (const auto& use : target.uses) work.push_back({&target, &use, composed});
    }

    std::vector<Rule> unique_rules;
    for (auto& r : e.rules)
      if (std::find(unique_rules.begin(), unique_rules.end(), r) == unique_rules.end())
        unique_rules.push_back(std::move(r));
    e.rules = std::move(unique_rules);
    std::vector<MetaConstraint> unique_metas;
    for (auto& m : e.metas)
      if (std::find(unique_metas.begin(), unique_metas.end(), m) == unique_metas.end())
        unique_metas.push_back(std::move(m));
    e.metas = std::move(unique_metas);
    for (const auto& r : e.rules) detail::collect_rule_constants(r, e.constants);
    out.push_back(std::move(e));
  }
  return out;
}

/// Arity of every plain predicate, checked for consistency across the unit.
inline Signature signature_of(const ExpandedUnit& u) {
  Signature sig;
  auto note = [&](const PredRef& p, std::size_t arity, const SourceSpan& sp) {
    if (p.kind != PredRef::Kind::Plain && p.kind != PredRef::Kind::Truth) return;
    auto [it, fresh] = sig.emplace(p.name, arity);
    if (!fresh && it->second != arity)
      throw Error(ErrorKind::ArityMismatch,
                  "predicate '" + p.name + "' used with " + std::to_string(arity) + " arguments, earlier with " +
                      std::to_string(it->second) + " in kunit '" + u.name + "'",
                  sp);
  };
  for (const auto& r : u.rules) {
    note(r.head, r.head_args.size(), r.span);
    if (r.body) visit_atoms(*r.body, [&](const AtomF& a, bool) { note(a.pred, a.args.size(), r.span); });
  }
  return sig;
}

/// Edge of the predicate dependency graph. `ref` marks a hypothesis on a
/// founded-semantics reference `P.T/P.F/P.U`.
struct DepEdge {
  std::string from;
  std::string to;
  bool negative = false;
  bool ref = false;
  auto operator<=>(const DepEdge&) const = default;
};

inline std::set<DepEdge> dependency_edges(const std::vector<Rule>& rules) {
  std::set<DepEdge> out;
  for (const auto& r : rules) {
    if (!r.head.is_plain() || !r.body) continue;
    visit_atoms(*r.body, [&](const AtomF& a, bool positive) {
      if (a.pred.kind == PredRef::Kind::Plain)
        out.insert({r.head.name, a.pred.name, !positive, false});
      else if (a.pred.kind == PredRef::Kind::Truth)
        out.insert({r.head.name, a.pred.name, false, true});
    });
  }
  return out;
}

/// Strongly connected components in dependency order: a component comes
/// after every component it depends on.
inline std::vector<std::vector<std::string>> scc_order(const std::set<std::string>& nodes,
                                                      const std::set<DepEdge>& edges) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : edges) adj[e.from].push_back(e.to);
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;
  std::function<void(const std::string&)> strong = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : adj[v]) {
      if (!index.count(w)) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (const auto& n : nodes)
    if (!index.count(n)) strong(n);
  return out;  // Tarjan emits sinks first, which is dependency order here
}

/// Predicates defined transitively through their own negation, or through a
/// predicate that is.
inline std::set<std::string> negatively_dependent(const std::set<std::string>& nodes, const std::set<DepEdge>& edges) {
  std::set<DepEdge> plain;
  for (const auto& e : edges)
    if (!e.ref) plain.insert(e);
  auto comps = scc_order(nodes, plain);
  std::map<std::string, std::size_t> comp_of;
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (const auto& p : comps[i]) comp_of[p] = i;
  std::vector<bool> bad(comps.size(), false);
  for (const auto& e : plain)
    if (e.negative && comp_of[e.from] == comp_of[e.to]) bad[comp_of[e.from]] = true;
  // Components come in dependency order, so one forward pass propagates.
  std::map<std::size_t, std::set<std::size_t>> deps;
  for (const auto& e : plain) deps[comp_of[e.from]].insert(comp_of[e.to]);
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (auto j : deps[i])
      if (bad[j]) bad[i] = true;
  std::set<std::string> out;
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (bad[i]) out.insert(comps[i].begin(), comps[i].end());
  return out;
}

/// Gives every predicate without an explicit meta-constraint its default.
inline ExpandedUnit infer_default_metas(ExpandedUnit u) {
  u.signature = signature_of(u);
  std::map<std::string, const MetaConstraint*> explicit_meta;
  for (const auto& m : u.metas) {
    auto [it, fresh] = explicit_meta.emplace(m.pred, &m);
    if (!fresh && it->second->kind != m.kind)
      throw Error(ErrorKind::DuplicateMeta,
                  std::string("predicate '") + m.pred + "' declared both " + meta_kind_name(it->second->kind) +
                      " and " + meta_kind_name(m.kind),
                  m.span);
  }
  for (const auto& m : u.metas)
    if (!u.signature.count(m.pred))
      throw Error(ErrorKind::UnknownPredicate,
                  std::string(meta_kind_name(m.kind)) + " names unknown predicate '" + m.pred + "'", m.span);

  std::set<std::string> nodes;
  for (const auto& [p, a] : u.signature) nodes.insert(p);
  std::set<std::string> neg = negatively_dependent(nodes, dependency_edges(u.rules));

  std::vector<MetaConstraint> metas;
  for (const auto& [p, a] : u.signature) {
    MetaKind dflt = neg.count(p) ? MetaKind::Complete : MetaKind::Certain;
    auto it = explicit_meta.find(p);
    if (it == explicit_meta.end()) {
      metas.push_back({p, dflt, u.span});
      u.defaulted.insert(p);
      continue;
    }
    if (it->second->kind == MetaKind::Certain && dflt == MetaKind::Complete)
      throw Error(ErrorKind::CertainConflict,
                  "predicate '" + p + "' is defined through its own negation and cannot be certain", it->second->span);
    metas.push_back(*it->second);
  }
  u.metas = std::move(metas);
  return u;
}

namespace detail {

inline bool references_own_founded(const ExpandedUnit& u) {
  bool found = false;
  for (const auto& r : u.rules)
    if (r.body)
      visit_atoms(*r.body, [&](const AtomF& a, bool) {
        if (a.pred.kind == PredRef::Kind::Truth) found = true;
      });
  return found;
}

inline std::set<std::string> cs_targets(const ExpandedUnit& u) {
  std::set<std::string> out;
  for (const auto& r : u.rules)
    if (r.body)
      visit_atoms(*r.body, [&](const AtomF& a, bool) {
        if (a.pred.kind == PredRef::Kind::Cs) out.insert(a.pred.name);
      });
  return out;
}

}  // namespace detail

/// Names of units whose constraint models `u` references.
inline std::set<std::string> cs_dependencies(const ExpandedUnit& u) { return detail::cs_targets(u); }

/// Static checks on one expanded unit in the context of the whole program.
inline void validate(const ExpandedUnit& u, const std::vector<ExpandedUnit>& program) {
  auto find = [&](const std::string& n) -> const ExpandedUnit* {
    for (const auto& x : program)
      if (x.name == n) return &x;
    return nullptr;
  };
  for (const auto& r : u.rules) {
    if (r.head.is_reference())
      throw Error(ErrorKind::RefInHead, "reference predicate '" + to_string(r.head) + "' cannot be a conclusion",
                  r.span);
    std::set<std::string> body_free;
    if (r.body) body_free = free_vars(*r.body);
    for (const auto& t : r.head_args)
      if (t.is_var() && !body_free.count(t.var_name()))
        throw Error(ErrorKind::UnboundHeadVariable,
                    "variable '" + t.var_name() + "' in the conclusion of '" + to_string(r) + "' is not bound by its body",
                    r.span);
    if (!r.body) continue;
    visit_atoms(*r.body, [&](const AtomF& a, bool) {
      if (a.pred.kind == PredRef::Kind::Cs) {
        const ExpandedUnit* t = find(a.pred.name);
        if (!t) throw Error(ErrorKind::UnknownUnit, "reference to unknown kunit '" + a.pred.name + ".CS'", r.span);
        if (a.args.size() != 1)
          throw Error(ErrorKind::ArityMismatch, a.pred.name + ".CS takes one argument", r.span);
        if (detail::references_own_founded(*t))
          throw Error(ErrorKind::CsOfSelfReferencing,
                      "kunit '" + t->name + "' references its own founded semantics, so " + t->name +
                          ".CS is not allowed",
                      r.span);
      }
    });
  }

  // No predicate may be defined through a reference to itself.
  std::set<std::string> nodes;
  for (const auto& [p, a] : signature_of(u)) nodes.insert(p);
  auto edges = dependency_edges(u.rules);
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& e : edges) adj[e.from].insert(e.to);
  auto reaches = [&](const std::string& from, const std::string& to) {
    std::set<std::string> seen{from};
    std::vector<std::string> todo{from};
    while (!todo.empty()) {
      std::string x = todo.back();
      todo.pop_back();
      if (x == to) return true;
      for (const auto& y : adj[x])
        if (seen.insert(y).second) todo.push_back(y);
    }
    return false;
  };
  for (const auto& e : edges)
    if (e.ref && reaches(e.to, e.from)) {
      SourceSpan sp = u.span;
      for (const auto& r : u.rules)
        if (r.head.name == e.from) {
          sp = r.span;
          break;
        }
      throw Error(ErrorKind::SelfFoundedRef,
                  "predicate '" + e.from + "' is defined through a reference to the founded value of '" + e.to + "'",
                  sp);
    }

  // The CS-dependency relation must be acyclic.
  std::map<std::string, int> state;
  std::function<void(const ExpandedUnit&)> dfs = [&](const ExpandedUnit& x) {
    state[x.name] = 1;
    for (const auto& t : detail::cs_targets(x)) {
      const ExpandedUnit* y = find(t);
      if (!y) continue;
      if (state[t] == 1)
        throw Error(ErrorKind::CyclicCs, "kunit '" + x.name + "' depends on its own constraint models through '" + t +
                                             ".CS'",
                    x.span);
      if (state[t] == 0) dfs(*y);
    }
    state[x.name] = 2;
  };
  dfs(u);
}

/// Expansion, default metas and validation for a whole program.
inline std::vector<ExpandedUnit> load_program(const Program& p, const ExpandOptions& opts = {}) {
  auto units = expand_uses(p, opts);
  for (auto& u : units) u = infer_default_metas(std::move(u));
  for (const auto& u : units) validate(u, units);
  return units;
}

/// Program form of expanded units: no uses, explicit metas only.
inline Program to_program(const std::vector<ExpandedUnit>& units) {
  Program out;
  for (const auto& e : units) {
    KUnitDef k;
    k.name = e.name;
    k.exported = e.exported;
    k.rules = e.rules;
    for (const auto& m : e.metas)
      if (!e.defaulted.count(m.pred)) k.metas.push_back(m);
    k.span = e.span;
    out.units.push_back(std::move(k));
  }
  return out;
}

}  // namespace dalog
