#pragma once

// Renders programs back to concrete syntax. Output re-parses to a
// structurally equal program.

#include <sstream>
#include <string>

#include "dalog/core.hpp"

namespace dalog {

inline std::string to_string(const Term& t, const ModelNamer& namer = {}) {
  return t.is_var() ? t.var_name() : to_string(t.as_const(), namer);
}

inline std::string terms_to_string(const std::vector<Term>& ts, const ModelNamer& namer = {}) {
  std::string out = "(";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) out += ", ";
    out += to_string(ts[i], namer);
  }
  return out + ")";
}

inline std::string to_string(const PredRef& p, const ModelNamer& namer = {}) {
  switch (p.kind) {
    case PredRef::Kind::Plain: return p.name;
    case PredRef::Kind::Truth: return p.name + "." + truth_char(p.tv);
    case PredRef::Kind::Cs: return p.name + ".CS";
    case PredRef::Kind::Proj: return to_string(*p.subject, namer) + "." + p.name;
  }
  return p.name;
}

namespace detail {

enum class Ctx { Top, AndPart, OrPart, NotArg };

inline void print_formula(std::ostream& os, const Formula& f, Ctx ctx, const ModelNamer& namer);

inline void print_parts(std::ostream& os, const std::vector<Formula>& parts, const char* sep, Ctx part_ctx,
                        const ModelNamer& namer) {
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) os << sep;
    print_formula(os, parts[i], part_ctx, namer);
  }
}

inline void print_formula(std::ostream& os, const Formula& f, Ctx ctx, const ModelNamer& namer) {
  std::visit(overloaded{
                 [&](const AtomF& a) {
                   os << to_string(a.pred, namer);
                   if (!a.args.empty()) os << terms_to_string(a.args, namer);
                 },
                 [&](const EqF& e) {
                   bool paren = ctx != Ctx::Top;
                   if (paren) os << "(";
                   os << to_string(e.lhs, namer) << " = " << to_string(e.rhs, namer);
                   if (paren) os << ")";
                 },
                 [&](const NotF& n) {
                   os << "not ";
                   print_formula(os, *n.body, Ctx::NotArg, namer);
                 },
                 [&](const AndF& c) {
                   if (c.parts.empty()) {
                     os << "true";
                     return;
                   }
                   bool paren = ctx == Ctx::AndPart || ctx == Ctx::NotArg;
                   if (paren) os << "(";
                   print_parts(os, c.parts, " and ", Ctx::AndPart, namer);
                   if (paren) os << ")";
                 },
                 [&](const OrF& c) {
                   if (c.parts.empty()) {
                     os << "false";
                     return;
                   }
                   bool paren = ctx != Ctx::Top;
                   if (paren) os << "(";
                   print_parts(os, c.parts, " or ", Ctx::OrPart, namer);
                   if (paren) os << ")";
                 },
                 [&](const QuantF& q) {
                   bool paren = ctx != Ctx::Top;
                   if (paren) os << "(";
                   os << (q.q == Quantifier::Exists ? "some " : "each ");
                   for (std::size_t i = 0; i < q.vars.size(); ++i) os << (i ? ", " : "") << q.vars[i];
                   if (q.domain) os << " in " << to_string(*q.domain, namer);
                   os << " | ";
                   print_formula(os, *q.body, Ctx::Top, namer);
                   if (paren) os << ")";
                 },
             },
             f.node);
}

}  // namespace detail

inline std::string to_string(const Formula& f, const ModelNamer& namer = {}) {
  std::ostringstream os;
  detail::print_formula(os, f, detail::Ctx::Top, namer);
  return os.str();
}

inline std::string to_string(const Rule& r, const ModelNamer& namer = {}) {
  std::string out = to_string(r.head, namer);
  if (!r.head_args.empty()) out += terms_to_string(r.head_args, namer);
  if (r.body) out += " <- " + to_string(*r.body, namer);
  return out;
}

inline std::string to_string(const UseDirective& u) {
  std::string out = "use " + u.target + " (";
  for (std::size_t i = 0; i < u.bindings.size(); ++i) {
    const auto& b = u.bindings[i];
    if (i) out += ", ";
    out += b.inner + " = " + b.outer;
    if (!b.extra.empty()) out += terms_to_string(b.extra);
  }
  return out + ")";
}

inline std::string to_string(const KUnitDef& u) {
  std::ostringstream os;
  os << "kunit " << u.name;
  if (u.exported) {
    os << " (";
    bool first = true;
    for (const auto& p : *u.exported) {
      os << (first ? "" : ", ") << p;
      first = false;
    }
    os << ")";
  }
  os << ":\n";
  for (const auto& m : u.metas) os << "  " << meta_kind_name(m.kind) << "(" << m.pred << ")\n";
  for (const auto& use : u.uses) os << "  " << to_string(use) << "\n";
  for (const auto& r : u.rules) os << "  " << to_string(r) << "\n";
  return os.str();
}

inline std::string to_string(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.units.size(); ++i) {
    if (i) out += "\n";
    out += to_string(p.units[i]);
  }
  return out;
}

}  // namespace dalog
