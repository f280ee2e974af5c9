#pragma once

// Variable bookkeeping, substitution and negation normal form over formulas.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dalog/core.hpp"

namespace dalog {

namespace detail {

inline void collect_term_var(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) out.insert(t.var_name());
}

inline void collect_free(const Formula& f, const std::set<std::string>& bound, std::set<std::string>& out) {
  auto add = [&](const Term& t) {
    if (t.is_var() && !bound.count(t.var_name())) out.insert(t.var_name());
  };
  std::visit(overloaded{
                 [&](const AtomF& a) {
                   if (a.pred.subject) add(*a.pred.subject);
                   for (const auto& t : a.args) add(t);
                 },
                 [&](const NotF& n) { collect_free(*n.body, bound, out); },
                 [&](const AndF& c) {
                   for (const auto& p : c.parts) collect_free(p, bound, out);
                 },
                 [&](const OrF& c) {
                   for (const auto& p : c.parts) collect_free(p, bound, out);
                 },
                 [&](const QuantF& q) {
                   auto inner = bound;
                   inner.insert(q.vars.begin(), q.vars.end());
                   collect_free(*q.body, inner, out);
                 },
                 [&](const EqF& e) {
                   add(e.lhs);
                   add(e.rhs);
                 },
             },
             f.node);
}

}  // namespace detail

/// Every variable name occurring in `f`, free or bound.
inline void collect_all_vars(const Formula& f, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const AtomF& a) {
                   if (a.pred.subject) detail::collect_term_var(*a.pred.subject, out);
                   for (const auto& t : a.args) detail::collect_term_var(t, out);
                 },
                 [&](const NotF& n) { collect_all_vars(*n.body, out); },
                 [&](const AndF& c) {
                   for (const auto& p : c.parts) collect_all_vars(p, out);
                 },
                 [&](const OrF& c) {
                   for (const auto& p : c.parts) collect_all_vars(p, out);
                 },
                 [&](const QuantF& q) {
                   out.insert(q.vars.begin(), q.vars.end());
                   collect_all_vars(*q.body, out);
                 },
                 [&](const EqF& e) {
                   detail::collect_term_var(e.lhs, out);
                   detail::collect_term_var(e.rhs, out);
                 },
             },
             f.node);
}

inline std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  detail::collect_free(f, {}, out);
  return out;
}

/// Free variables of a rule: head arguments plus free variables of the body.
inline std::set<std::string> free_vars(const Rule& r) {
  std::set<std::string> out;
  for (const auto& t : r.head_args) detail::collect_term_var(t, out);
  if (r.body) detail::collect_free(*r.body, {}, out);
  return out;
}

inline std::set<std::string> all_vars(const Rule& r) {
  std::set<std::string> out;
  for (const auto& t : r.head_args) detail::collect_term_var(t, out);
  if (r.body) collect_all_vars(*r.body, out);
  return out;
}

/// `base`, or `base_N` for the smallest N that avoids `used`.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& used) {
  if (!used.count(base)) return base;
  for (std::size_t n = 1;; ++n) {
    std::string candidate = base + "_" + std::to_string(n);
    if (!used.count(candidate)) return candidate;
  }
}

using TermSubst = std::map<std::string, Term>;

inline Term substitute(const Term& t, const TermSubst& s) {
  if (!t.is_var()) return t;
  auto it = s.find(t.var_name());
  return it == s.end() ? t : it->second;
}

/// Capture-avoiding substitution of free variables.
inline Formula substitute(const Formula& f, const TermSubst& s) {
  if (s.empty()) return f;
  return std::visit(
      overloaded{
          [&](const AtomF& a) -> Formula {
            AtomF out = a;
            if (out.pred.subject) out.pred.subject = substitute(*out.pred.subject, s);
            for (auto& t : out.args) t = substitute(t, s);
            return Formula{std::move(out), f.span};
          },
          [&](const NotF& n) -> Formula { return Formula{NotF{substitute(*n.body, s)}, f.span}; },
          [&](const AndF& c) -> Formula {
            AndF out;
            for (const auto& p : c.parts) out.parts.push_back(substitute(p, s));
            return Formula{std::move(out), f.span};
          },
          [&](const OrF& c) -> Formula {
            OrF out;
            for (const auto& p : c.parts) out.parts.push_back(substitute(p, s));
            return Formula{std::move(out), f.span};
          },
          [&](const QuantF& q) -> Formula {
            TermSubst inner = s;
            for (const auto& v : q.vars) inner.erase(v);
            std::set<std::string> body_free = free_vars(*q.body);
            std::set<std::string> image_vars;
            for (const auto& [k, t] : inner)
              if (body_free.count(k) && t.is_var()) image_vars.insert(t.var_name());
            std::set<std::string> used;
            collect_all_vars(*q.body, used);
            used.insert(image_vars.begin(), image_vars.end());
            for (const auto& [k, t] : inner) used.insert(k);
            QuantF out{q.q, {}, *q.body};
            for (const auto& v : q.vars) {
              if (image_vars.count(v)) {
                std::string nv = fresh_name(v, used);
                used.insert(nv);
                inner[v] = Term::var(nv);
                out.vars.push_back(nv);
              } else {
                out.vars.push_back(v);
              }
            }
            out.body = substitute(*q.body, inner);
            return Formula{std::move(out), f.span};
          },
          [&](const EqF& e) -> Formula { return Formula{EqF{substitute(e.lhs, s), substitute(e.rhs, s)}, f.span}; },
      },
      f.node);
}

/// Renames variables everywhere, binders included. The caller guarantees the
/// new names are fresh.
inline Formula rename_all_vars(const Formula& f, const std::map<std::string, std::string>& m) {
  auto rn = [&](const Term& t) {
    if (!t.is_var()) return t;
    auto it = m.find(t.var_name());
    return it == m.end() ? t : Term::var(it->second);
  };
  return std::visit(
      overloaded{
          [&](const AtomF& a) -> Formula {
            AtomF out = a;
            if (out.pred.subject) out.pred.subject = rn(*out.pred.subject);
            for (auto& t : out.args) t = rn(t);
            return Formula{std::move(out), f.span};
          },
          [&](const NotF& n) -> Formula { return Formula{NotF{rename_all_vars(*n.body, m)}, f.span}; },
          [&](const AndF& c) -> Formula {
            AndF out;
            for (const auto& p : c.parts) out.parts.push_back(rename_all_vars(p, m));
            return Formula{std::move(out), f.span};
          },
          [&](const OrF& c) -> Formula {
            OrF out;
            for (const auto& p : c.parts) out.parts.push_back(rename_all_vars(p, m));
            return Formula{std::move(out), f.span};
          },
          [&](const QuantF& q) -> Formula {
            QuantF out{q.q, {}, rename_all_vars(*q.body, m)};
            for (const auto& v : q.vars) {
              auto it = m.find(v);
              out.vars.push_back(it == m.end() ? v : it->second);
            }
            return Formula{std::move(out), f.span};
          },
          [&](const EqF& e) -> Formula { return Formula{EqF{rn(e.lhs), rn(e.rhs)}, f.span}; },
      },
      f.node);
}

inline Rule rename_all_vars(const Rule& r, const std::map<std::string, std::string>& m) {
  Rule out = r;
  for (auto& t : out.head_args)
    if (t.is_var()) {
      auto it = m.find(t.var_name());
      if (it != m.end()) t = Term::var(it->second);
    }
  if (out.body) out.body = rename_all_vars(*out.body, m);
  return out;
}

Formula negate_nnf(const Formula& f);

/// Negation normal form: negation applied only to atoms and equalities.
inline Formula nnf(const Formula& f) {
  return std::visit(
      overloaded{
          [&](const AtomF&) -> Formula { return f; },
          [&](const EqF&) -> Formula { return f; },
          [&](const NotF& n) -> Formula { return negate_nnf(*n.body); },
          [&](const AndF& c) -> Formula {
            AndF out;
            for (const auto& p : c.parts) out.parts.push_back(nnf(p));
            return Formula{std::move(out), f.span};
          },
          [&](const OrF& c) -> Formula {
            OrF out;
            for (const auto& p : c.parts) out.parts.push_back(nnf(p));
            return Formula{std::move(out), f.span};
          },
          [&](const QuantF& q) -> Formula { return Formula{QuantF{q.q, q.vars, nnf(*q.body)}, f.span}; },
      },
      f.node);
}

/// NNF of `not f`.
inline Formula negate_nnf(const Formula& f) {
  return std::visit(
      overloaded{
          [&](const AtomF&) -> Formula { return Formula{NotF{f}, f.span}; },
          [&](const EqF&) -> Formula { return Formula{NotF{f}, f.span}; },
          [&](const NotF& n) -> Formula { return nnf(*n.body); },
          [&](const AndF& c) -> Formula {
            OrF out;
            for (const auto& p : c.parts) out.parts.push_back(negate_nnf(p));
            return Formula{std::move(out), f.span};
          },
          [&](const OrF& c) -> Formula {
            AndF out;
            for (const auto& p : c.parts) out.parts.push_back(negate_nnf(p));
            return Formula{std::move(out), f.span};
          },
          [&](const QuantF& q) -> Formula {
            Quantifier dual = q.q == Quantifier::Exists ? Quantifier::Forall : Quantifier::Exists;
            return Formula{QuantF{dual, q.vars, negate_nnf(*q.body)}, f.span};
          },
      },
      f.node);
}

/// Calls `fn(atom, positive)` for every atom, with its polarity under negation.
template <class Fn>
void visit_atoms(const Formula& f, Fn&& fn, bool positive = true) {
  std::visit(overloaded{
                 [&](const AtomF& a) { fn(a, positive); },
                 [&](const EqF&) {},
                 [&](const NotF& n) { visit_atoms(*n.body, fn, !positive); },
                 [&](const AndF& c) {
                   for (const auto& p : c.parts) visit_atoms(p, fn, positive);
                 },
                 [&](const OrF& c) {
                   for (const auto& p : c.parts) visit_atoms(p, fn, positive);
                 },
                 [&](const QuantF& q) { visit_atoms(*q.body, fn, positive); },
             },
             f.node);
}

/// Rebuilds `f` with every atom replaced by `fn(atom, span)`.
template <class Fn>
Formula map_atoms(const Formula& f, Fn&& fn) {
  return std::visit(
      overloaded{
          [&](const AtomF& a) -> Formula { return fn(a, f.span); },
          [&](const EqF&) -> Formula { return f; },
          [&](const NotF& n) -> Formula { return Formula{NotF{map_atoms(*n.body, fn)}, f.span}; },
          [&](const AndF& c) -> Formula {
            AndF out;
            for (const auto& p : c.parts) out.parts.push_back(map_atoms(p, fn));
            return Formula{std::move(out), f.span};
          },
          [&](const OrF& c) -> Formula {
            OrF out;
            for (const auto& p : c.parts) out.parts.push_back(map_atoms(p, fn));
            return Formula{std::move(out), f.span};
          },
          [&](const QuantF& q) -> Formula { return Formula{QuantF{q.q, q.vars, map_atoms(*q.body, fn)}, f.span}; },
      },
      f.node);
}

}  // namespace dalog
