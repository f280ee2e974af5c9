#pragma once

// Unit domains and ground instances of rules.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dalog/core.hpp"
#include "dalog/expander.hpp"
#include "dalog/formula.hpp"

namespace dalog {

struct UnitDomain {
  std::string unit;
  std::set<Constant> constants;
};

/// Constraint models of already evaluated units, by unit name.
using CsModels = std::map<std::string, std::vector<ModelPtr>>;

/// Syntactic constants of `u` plus the constraint models of every unit it
/// references through `K.CS`.
inline UnitDomain domain_of(const ExpandedUnit& u, const CsModels& cs_env) {
  UnitDomain d{u.name, u.constants};
  for (const auto& k : cs_dependencies(u)) {
    auto it = cs_env.find(k);
    if (it == cs_env.end())
      throw Error(ErrorKind::MissingCs, "constraint models of '" + k + "' are needed by '" + u.name +
                                            "' but have not been computed");
    for (const auto& m : it->second) d.constants.insert(Constant::model(m));
  }
  return d;
}

/// A rule with no variables and no quantifiers. Completion rules have a
/// negative head.
struct GroundRule {
  Literal head;
  Formula body;
  friend bool operator==(const GroundRule&, const GroundRule&) = default;
};

using Assignment = std::map<std::string, Constant>;

namespace detail {

inline Term ground_term(const Term& t, const Assignment& env) {
  if (!t.is_var()) return t;
  auto it = env.find(t.var_name());
  if (it == env.end()) throw Error(ErrorKind::UnboundHeadVariable, "variable '" + t.var_name() + "' is not bound");
  return Term::constant(it->second);
}

inline void expand_quant(const QuantF& q, std::size_t k, Assignment& env, const std::vector<Constant>& dom,
                         std::vector<Formula>& out, const SourceSpan& span);

inline Formula ground_formula(const Formula& f, Assignment& env, const std::vector<Constant>& dom) {
  return std::visit(
      overloaded{
          [&](const AtomF& a) -> Formula {
            AtomF out = a;
            if (out.pred.subject) out.pred.subject = ground_term(*out.pred.subject, env);
            for (auto& t : out.args) t = ground_term(t, env);
            return Formula{std::move(out), f.span};
          },
          [&](const EqF& e) -> Formula {
            bool same = ground_term(e.lhs, env).as_const() == ground_term(e.rhs, env).as_const();
            return same ? make_true() : make_false();
          },
          [&](const NotF& n) -> Formula { return Formula{NotF{ground_formula(*n.body, env, dom)}, f.span}; },
          [&](const AndF& c) -> Formula {
            AndF out;
            for (const auto& p : c.parts) out.parts.push_back(ground_formula(p, env, dom));
            return Formula{std::move(out), f.span};
          },
          [&](const OrF& c) -> Formula {
            OrF out;
            for (const auto& p : c.parts) out.parts.push_back(ground_formula(p, env, dom));
            return Formula{std::move(out), f.span};
          },
          [&](const QuantF& q) -> Formula {
            std::vector<Formula> parts;
            expand_quant(q, 0, env, dom, parts, f.span);
            if (q.q == Quantifier::Forall) return Formula{AndF{std::move(parts)}, f.span};
            return Formula{OrF{std::move(parts)}, f.span};
          },
      },
      f.node);
}

inline void expand_quant(const QuantF& q, std::size_t k, Assignment& env, const std::vector<Constant>& dom,
                         std::vector<Formula>& out, const SourceSpan& span) {
  if (k == q.vars.size()) {
    out.push_back(ground_formula(*q.body, env, dom));
    return;
  }
  const std::string& v = q.vars[k];
  auto saved = env.find(v) == env.end() ? std::nullopt : std::optional<Constant>(env.at(v));
  for (const auto& c : dom) {
    env.insert_or_assign(v, c);
    expand_quant(q, k + 1, env, dom, out, span);
  }
  if (saved)
    env.insert_or_assign(v, *saved);
  else
    env.erase(v);
}

}  // namespace detail

/// Expands quantifiers over `dom` and replaces free variables per `env`.
inline Formula ground_formula(const Formula& f, const Assignment& env, const std::vector<Constant>& dom) {
  Assignment e = env;
  return detail::ground_formula(f, e, dom);
}

/// Calls `fn(assignment)` for every map from `vars` into `dom`.
template <class Fn>
void for_each_assignment(const std::vector<std::string>& vars, const std::vector<Constant>& dom, Fn&& fn) {
  Assignment env;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == vars.size()) {
      fn(static_cast<const Assignment&>(env));
      return;
    }
    for (const auto& c : dom) {
      env.insert_or_assign(vars[k], c);
      rec(k + 1);
    }
  };
  rec(0);
}

/// Every ground instance of `r`: one per assignment of its free variables.
/// A head `P.F` gives a negative head literal.
inline std::vector<GroundRule> ground_rule(const Rule& r, const UnitDomain& d) {
  std::vector<Constant> dom(d.constants.begin(), d.constants.end());
  std::set<std::string> fv = free_vars(r);
  std::vector<std::string> vars(fv.begin(), fv.end());
  Sign sign = r.head.kind == PredRef::Kind::Truth && r.head.tv == TruthValue::F ? Sign::Neg : Sign::Pos;
  std::vector<GroundRule> out;
  for_each_assignment(vars, dom, [&](const Assignment& env) {
    Atom head{r.head.name, {}};
    for (const auto& t : r.head_args) head.args.push_back(detail::ground_term(t, env).as_const());
    Formula body = r.body ? ground_formula(*r.body, env, dom) : make_true();
    out.push_back({{std::move(head), sign}, std::move(body)});
  });
  return out;
}

/// Every tuple of `arity` constants from `dom`, in lexicographic order.
inline std::vector<std::vector<Constant>> tuples_of(const std::vector<Constant>& dom, std::size_t arity) {
  std::vector<std::vector<Constant>> out;
  std::vector<Constant> cur;
  std::function<void()> rec = [&]() {
    if (cur.size() == arity) {
      out.push_back(cur);
      return;
    }
    for (const auto& c : dom) {
      cur.push_back(c);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

}  // namespace dalog
