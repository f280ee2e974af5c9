#pragma once

// Combined rules, completion rules and negation naming.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dalog/core.hpp"
#include "dalog/expander.hpp"
#include "dalog/formula.hpp"

namespace dalog {

enum class CmplTransform { None, Combined };

/// A unit after Combine and AddInv. `unit.rules` holds the combined rules in
/// place of the originals for uncertain complete predicates; their
/// completion rules, with heads `Q.F`, are kept apart.
struct CompletedUnit {
  ExpandedUnit unit;
  std::vector<Rule> completion_rules;
  std::map<std::string, CmplTransform> transform;

  std::vector<Rule> all_rules() const {
    std::vector<Rule> out = unit.rules;
    out.insert(out.end(), completion_rules.begin(), completion_rules.end());
    return out;
  }
};

namespace detail {

inline std::vector<std::string> combined_head_vars(const std::vector<const Rule*>& rules, std::size_t arity) {
  std::vector<std::string> out;
  std::set<std::string> taken;
  if (!rules.empty())
    for (const auto& t : rules.front()->head_args)
      if (t.is_var() && taken.insert(t.var_name()).second) out.push_back(t.var_name());
  if (out.size() == arity) return out;
  out.clear();
  taken.clear();
  for (std::size_t i = 1; i <= arity; ++i) {
    std::string v = fresh_name("x" + std::to_string(i), taken);
    taken.insert(v);
    out.push_back(v);
  }
  return out;
}

inline void push_conjuncts(std::vector<Formula>& parts, Formula f) {
  if (f.is<AndF>()) {
    for (const auto& p : f.as<AndF>().parts) parts.push_back(p);
  } else {
    parts.push_back(std::move(f));
  }
}

/// One disjunct of a combined rule: `some body-vars | heads equal and body`.
inline Formula combined_disjunct(const Rule& original, const std::vector<std::string>& head) {
  std::set<std::string> hset(head.begin(), head.end());
  std::set<std::string> used = all_vars(original);
  used.insert(hset.begin(), hset.end());
  std::map<std::string, std::string> apart;
  for (const auto& v : all_vars(original))
    if (hset.count(v)) {
      std::string nv = fresh_name(v, used);
      used.insert(nv);
      apart[v] = nv;
    }
  Rule r = apart.empty() ? original : rename_all_vars(original, apart);

  TermSubst to_head;
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < head.size(); ++i) {
    const Term& t = r.head_args[i];
    if (t.is_var() && !to_head.count(t.var_name())) {
      to_head[t.var_name()] = Term::var(head[i]);
    } else {
      parts.push_back(make_eq(Term::var(head[i]), substitute(t, to_head)));
    }
  }
  if (r.body) push_conjuncts(parts, substitute(*r.body, to_head));
  Formula conj = make_and(std::move(parts));
  std::vector<std::string> local;
  for (const auto& v : free_vars(conj))
    if (!hset.count(v)) local.push_back(v);
  return make_exists(std::move(local), std::move(conj));
}

}  // namespace detail

/// Replaces the rules and facts of every uncertain complete predicate by one
/// combined rule.
inline ExpandedUnit combine(const ExpandedUnit& u) {
  ExpandedUnit out = u;
  out.rules.clear();
  std::map<std::string, std::vector<const Rule*>> defining;
  for (const auto& r : u.rules) defining[r.head.name].push_back(&r);
  std::set<std::string> done;
  for (const auto& r : u.rules) {
    if (!is_complete_kind(u.meta_of(r.head.name))) out.rules.push_back(r);
  }
  for (const auto& [pred, arity] : u.signature) {
    if (!is_complete_kind(u.meta_of(pred))) continue;
    const auto& rules = defining[pred];
    std::vector<std::string> head = detail::combined_head_vars(rules, arity);
    std::vector<Formula> disjuncts;
    for (const Rule* r : rules) disjuncts.push_back(detail::combined_disjunct(*r, head));
    Rule c;
    c.head = PredRef::plain(pred);
    for (const auto& v : head) c.head_args.push_back(Term::var(v));
    c.body = disjuncts.empty() ? make_false() : make_or(std::move(disjuncts));
    c.span = rules.empty() ? u.span : rules.front()->span;
    out.rules.push_back(std::move(c));
  }
  return out;
}

/// Adds `Q.F(x..) <- NNF(not B)` for every combined rule `Q(x..) <- B`.
inline CompletedUnit add_inv(const ExpandedUnit& combined) {
  CompletedUnit out{combined, {}, {}};
  for (const auto& [pred, arity] : combined.signature)
    out.transform[pred] = is_complete_kind(combined.meta_of(pred)) ? CmplTransform::Combined : CmplTransform::None;
  for (const auto& r : combined.rules) {
    if (!is_complete_kind(combined.meta_of(r.head.name))) continue;
    Rule inv;
    inv.head = PredRef::truth(r.head.name, TruthValue::F);
    inv.head_args = r.head_args;
    inv.body = negate_nnf(r.body ? *r.body : make_true());
    inv.span = r.span;
    out.completion_rules.push_back(std::move(inv));
  }
  return out;
}

inline CompletedUnit cmpl(const ExpandedUnit& u) { return add_inv(combine(u)); }

/// NNF, then `not P(..)` on a plain predicate becomes `P.F(..)`. Negation
/// over reference atoms and equalities stays.
inline Formula name_neg(const Formula& f) {
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    return std::visit(
        overloaded{
            [&](const AtomF&) -> Formula { return g; },
            [&](const EqF&) -> Formula { return g; },
            [&](const NotF& n) -> Formula {
              if (n.body->is<AtomF>() && n.body->as<AtomF>().pred.is_plain()) {
                AtomF a = n.body->as<AtomF>();
                a.pred = PredRef::truth(a.pred.name, TruthValue::F);
                return Formula{std::move(a), g.span};
              }
              return g;
            },
            [&](const AndF& c) -> Formula {
              AndF out;
              for (const auto& p : c.parts) out.parts.push_back(go(p));
              return Formula{std::move(out), g.span};
            },
            [&](const OrF& c) -> Formula {
              OrF out;
              for (const auto& p : c.parts) out.parts.push_back(go(p));
              return Formula{std::move(out), g.span};
            },
            [&](const QuantF& q) -> Formula { return Formula{QuantF{q.q, q.vars, go(*q.body)}, g.span}; },
        },
        g.node);
  };
  return go(nnf(f));
}

inline Rule name_neg(const Rule& r) {
  Rule out = r;
  if (out.body) out.body = name_neg(*out.body);
  return out;
}

inline CompletedUnit name_neg(const CompletedUnit& cu) {
  CompletedUnit out = cu;
  for (auto& r : out.unit.rules) r = name_neg(r);
  for (auto& r : out.completion_rules) r = name_neg(r);
  return out;
}

}  // namespace dalog
