#pragma once

// Shared domain types: constants, terms, formulas, rules, units, atoms,
// literals, interpretations and constraint models.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dalog/error.hpp"

namespace dalog {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Owning, deep-copying pointer used to build recursive value types.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  const T& operator*() const { return *ptr_; }
  T& operator*() { return *ptr_; }
  const T* operator->() const { return ptr_.get(); }
  T* operator->() { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a == *b; }

 private:
  std::unique_ptr<T> ptr_;
};

enum class TruthValue { T, F, U };

inline char truth_char(TruthValue v) {
  switch (v) {
    case TruthValue::T: return 'T';
    case TruthValue::F: return 'F';
    case TruthValue::U: return 'U';
  }
  return '?';
}

/// Kleene negation.
inline TruthValue kleene_not(TruthValue v) {
  if (v == TruthValue::T) return TruthValue::F;
  if (v == TruthValue::F) return TruthValue::T;
  return TruthValue::U;
}

struct ConstraintModel;
using ModelPtr = std::shared_ptr<const ConstraintModel>;

/// Domain constant: an integer, a symbol, or a constraint model of some unit.
class Constant {
 public:
  Constant() : repr_(std::in_place_index<0>, 0) {}
  static Constant integer(std::int64_t v) { return Constant(Repr(std::in_place_index<0>, v)); }
  static Constant symbol(std::string s) { return Constant(Repr(std::in_place_index<1>, std::move(s))); }
  static Constant model(ModelPtr m) { return Constant(Repr(std::in_place_index<2>, std::move(m))); }

  bool is_int() const { return repr_.index() == 0; }
  bool is_symbol() const { return repr_.index() == 1; }
  bool is_model() const { return repr_.index() == 2; }

  std::int64_t as_int() const { return std::get<0>(repr_); }
  const std::string& as_symbol() const { return std::get<1>(repr_); }
  const ConstraintModel& as_model() const { return *std::get<2>(repr_); }
  const ModelPtr& model_ptr() const { return std::get<2>(repr_); }

  friend std::strong_ordering operator<=>(const Constant& a, const Constant& b);
  friend bool operator==(const Constant& a, const Constant& b) { return (a <=> b) == 0; }

 private:
  using Repr = std::variant<std::int64_t, std::string, ModelPtr>;
  explicit Constant(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

struct Variable {
  std::string name;
  auto operator<=>(const Variable&) const = default;
};

/// Rule argument: a constant or a variable.
struct Term {
  std::variant<Constant, Variable> value;

  static Term constant(Constant c) { return Term{std::move(c)}; }
  static Term var(std::string name) { return Term{Variable{std::move(name)}}; }

  bool is_var() const { return value.index() == 1; }
  bool is_const() const { return value.index() == 0; }
  const std::string& var_name() const { return std::get<1>(value).name; }
  const Constant& as_const() const { return std::get<0>(value); }

  friend bool operator==(const Term&, const Term&) = default;
};

/// Which predicate an atom formula applies.
struct PredRef {
  enum class Kind { Plain, Truth, Cs, Proj };

  Kind kind = Kind::Plain;
  std::string name;  // predicate for Plain/Truth/Proj, unit for Cs
  TruthValue tv = TruthValue::T;   // Truth only
  std::optional<Term> subject;     // Proj only: the model-valued term before the dot

  static PredRef plain(std::string p) { return {Kind::Plain, std::move(p), TruthValue::T, {}}; }
  static PredRef truth(std::string p, TruthValue tv) { return {Kind::Truth, std::move(p), tv, {}}; }
  static PredRef cs(std::string unit) { return {Kind::Cs, std::move(unit), TruthValue::T, {}}; }
  static PredRef proj(Term subject, std::string p) {
    return {Kind::Proj, std::move(p), TruthValue::T, std::move(subject)};
  }

  bool is_plain() const { return kind == Kind::Plain; }
  bool is_reference() const { return kind != Kind::Plain; }

  friend bool operator==(const PredRef&, const PredRef&) = default;
};

enum class Quantifier { Exists, Forall };

struct Formula;
bool operator==(const Formula& a, const Formula& b);

struct AtomF {
  PredRef pred;
  std::vector<Term> args;
  friend bool operator==(const AtomF&, const AtomF&) = default;
};
struct NotF {
  Box<Formula> body;
  friend bool operator==(const NotF&, const NotF&) = default;
};
/// Conjunction; the empty conjunction is `true`.
struct AndF {
  std::vector<Formula> parts;
  friend bool operator==(const AndF&, const AndF&) = default;
};
/// Disjunction; the empty disjunction is `false`.
struct OrF {
  std::vector<Formula> parts;
  friend bool operator==(const OrF&, const OrF&) = default;
};
struct QuantF {
  Quantifier q = Quantifier::Exists;
  std::vector<std::string> vars;
  Box<Formula> body;
  std::optional<PredRef> domain = std::nullopt;  // `some x in p | B` before desugaring
  friend bool operator==(const QuantF&, const QuantF&) = default;
};
/// Term equality. Never produced by the parser; introduced when rules are combined.
struct EqF {
  Term lhs;
  Term rhs;
  friend bool operator==(const EqF&, const EqF&) = default;
};

struct Formula {
  std::variant<AtomF, NotF, AndF, OrF, QuantF, EqF> node;
  SourceSpan span;

  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <class T>
  const T& as() const { return std::get<T>(node); }
};

// Spans do not take part in structural equality.
inline bool operator==(const Formula& a, const Formula& b) { return a.node == b.node; }

inline Formula make_atom(PredRef pred, std::vector<Term> args, SourceSpan span = {}) {
  return Formula{AtomF{std::move(pred), std::move(args)}, std::move(span)};
}
inline Formula make_not(Formula f, SourceSpan span = {}) { return Formula{NotF{std::move(f)}, std::move(span)}; }
inline Formula make_true() { return Formula{AndF{}, {}}; }
inline Formula make_false() { return Formula{OrF{}, {}}; }
inline Formula make_and(std::vector<Formula> parts, SourceSpan span = {}) {
  if (parts.size() == 1) return std::move(parts.front());
  return Formula{AndF{std::move(parts)}, std::move(span)};
}
inline Formula make_or(std::vector<Formula> parts, SourceSpan span = {}) {
  if (parts.size() == 1) return std::move(parts.front());
  return Formula{OrF{std::move(parts)}, std::move(span)};
}
inline Formula make_quant(Quantifier q, std::vector<std::string> vars, Formula body, SourceSpan span = {}) {
  if (vars.empty()) return body;
  return Formula{QuantF{q, std::move(vars), std::move(body)}, std::move(span)};
}
inline Formula make_exists(std::vector<std::string> vars, Formula body, SourceSpan span = {}) {
  return make_quant(Quantifier::Exists, std::move(vars), std::move(body), std::move(span));
}
inline Formula make_forall(std::vector<std::string> vars, Formula body, SourceSpan span = {}) {
  return make_quant(Quantifier::Forall, std::move(vars), std::move(body), std::move(span));
}
inline Formula make_eq(Term a, Term b) { return Formula{EqF{std::move(a), std::move(b)}, {}}; }

inline bool is_true_const(const Formula& f) { return f.is<AndF>() && f.as<AndF>().parts.empty(); }
inline bool is_false_const(const Formula& f) { return f.is<OrF>() && f.as<OrF>().parts.empty(); }

/// `head <- body`; a fact when `body` is absent.
struct Rule {
  PredRef head = PredRef::plain("");
  std::vector<Term> head_args;
  std::optional<Formula> body;
  SourceSpan span;

  const std::string& head_pred() const { return head.name; }
  bool is_fact() const { return !body.has_value(); }

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.head == b.head && a.head_args == b.head_args && a.body == b.body;
  }
};

enum class MetaKind { Certain, Open, Complete, Closed };

inline const char* meta_kind_name(MetaKind k) {
  switch (k) {
    case MetaKind::Certain: return "certain";
    case MetaKind::Open: return "open";
    case MetaKind::Complete: return "complete";
    case MetaKind::Closed: return "closed";
  }
  return "?";
}

/// Uncertain predicates: everything but certain.
inline bool is_uncertain(MetaKind k) { return k != MetaKind::Certain; }
/// Predicates that receive a combined rule and a completion rule.
inline bool is_complete_kind(MetaKind k) { return k == MetaKind::Complete || k == MetaKind::Closed; }

struct MetaConstraint {
  std::string pred;
  MetaKind kind = MetaKind::Certain;
  SourceSpan span;

  friend bool operator==(const MetaConstraint& a, const MetaConstraint& b) {
    return a.pred == b.pred && a.kind == b.kind;
  }
};

/// `inner = outer(extra...)` inside a `use` directive.
struct UseBinding {
  std::string inner;
  std::string outer;
  std::vector<Term> extra;
  friend bool operator==(const UseBinding&, const UseBinding&) = default;
};

struct UseDirective {
  std::string target;
  std::vector<UseBinding> bindings;
  SourceSpan span;

  friend bool operator==(const UseDirective& a, const UseDirective& b) {
    return a.target == b.target && a.bindings == b.bindings;
  }
};

struct KUnitDef {
  std::string name;
  std::optional<std::set<std::string>> exported;  // restricted parameters, if declared
  std::vector<Rule> rules;
  std::vector<MetaConstraint> metas;
  std::vector<UseDirective> uses;
  SourceSpan span;

  friend bool operator==(const KUnitDef& a, const KUnitDef& b) {
    return a.name == b.name && a.exported == b.exported && a.rules == b.rules && a.metas == b.metas &&
           a.uses == b.uses;
  }
};

struct Program {
  std::vector<KUnitDef> units;

  const KUnitDef* find(const std::string& name) const {
    for (const auto& u : units)
      if (u.name == name) return &u;
    return nullptr;
  }
  friend bool operator==(const Program&, const Program&) = default;
};

/// Predicate name to arity.
using Signature = std::map<std::string, std::size_t>;

struct Atom {
  std::string pred;
  std::vector<Constant> args;

  friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
    if (auto c = a.pred <=> b.pred; c != 0) return c;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
  }
  friend bool operator==(const Atom& a, const Atom& b) { return (a <=> b) == 0; }
};

enum class Sign { Pos, Neg };

struct Literal {
  Atom atom;
  Sign sign = Sign::Pos;

  friend std::strong_ordering operator<=>(const Literal& a, const Literal& b) {
    if (auto c = a.atom <=> b.atom; c != 0) return c;
    return static_cast<int>(a.sign) <=> static_cast<int>(b.sign);
  }
  friend bool operator==(const Literal& a, const Literal& b) { return (a <=> b) == 0; }
};

/// A 2-valued model of a unit, usable as a constant. Atoms of the source unit
/// that are not listed are false.
struct ConstraintModel {
  std::string source_unit;
  std::vector<Atom> true_atoms;  // sorted, unique

  bool holds(const Atom& a) const { return std::binary_search(true_atoms.begin(), true_atoms.end(), a); }

  friend std::strong_ordering operator<=>(const ConstraintModel& a, const ConstraintModel& b) {
    if (auto c = a.source_unit <=> b.source_unit; c != 0) return c;
    return std::lexicographical_compare_three_way(a.true_atoms.begin(), a.true_atoms.end(),
                                                  b.true_atoms.begin(), b.true_atoms.end());
  }
  friend bool operator==(const ConstraintModel& a, const ConstraintModel& b) { return (a <=> b) == 0; }
};

// Integers before symbols before models.
inline std::strong_ordering operator<=>(const Constant& a, const Constant& b) {
  if (a.repr_.index() != b.repr_.index()) return a.repr_.index() <=> b.repr_.index();
  switch (a.repr_.index()) {
    case 0: return std::get<0>(a.repr_) <=> std::get<0>(b.repr_);
    case 1: return std::get<1>(a.repr_) <=> std::get<1>(b.repr_);
    default: {
      const auto& pa = std::get<2>(a.repr_);
      const auto& pb = std::get<2>(b.repr_);
      if (pa == pb) return std::strong_ordering::equal;
      return *pa <=> *pb;
    }
  }
}

/// Renders a model constant; defaults to spelling out its true atoms.
using ModelNamer = std::function<std::string(const ConstraintModel&)>;

std::string to_string(const Atom& a, const ModelNamer& namer = {});

inline std::string to_string(const Constant& c, const ModelNamer& namer = {}) {
  if (c.is_int()) return std::to_string(c.as_int());
  if (c.is_symbol()) return "'" + c.as_symbol() + "'";
  const auto& m = c.as_model();
  if (namer) return namer(m);
  std::string out = m.source_unit + ".CS{";
  for (std::size_t i = 0; i < m.true_atoms.size(); ++i) {
    if (i) out += ",";
    out += to_string(m.true_atoms[i], namer);
  }
  return out + "}";
}

inline std::string args_to_string(const std::vector<Constant>& args, const ModelNamer& namer = {}) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += to_string(args[i], namer);
  }
  return out + ")";
}

inline std::string to_string(const Atom& a, const ModelNamer& namer) {
  if (a.args.empty()) return a.pred;
  return a.pred + args_to_string(a.args, namer);
}

inline std::string to_string(const Literal& l, const ModelNamer& namer = {}) {
  if (l.sign == Sign::Pos) return to_string(l.atom, namer);
  std::string out = l.atom.pred + ".F";
  if (!l.atom.args.empty()) out += args_to_string(l.atom.args, namer);
  return out;
}

/// Set of literals, kept as separate positive and negative atom sets. It can
/// hold an inconsistent set; `assert_consistent` checks it.
class Interpretation {
 public:
  Interpretation() = default;
  explicit Interpretation(const std::set<Literal>& lits) {
    for (const auto& l : lits) add(l);
  }

  void add(const Literal& l) { add(l.atom, l.sign); }
  void add(const Atom& a, Sign s) { (s == Sign::Pos ? pos_ : neg_).insert(a); }
  void add_true(const Atom& a) { pos_.insert(a); }
  void add_false(const Atom& a) { neg_.insert(a); }
  void merge(const Interpretation& other) {
    pos_.insert(other.pos_.begin(), other.pos_.end());
    neg_.insert(other.neg_.begin(), other.neg_.end());
  }

  bool contains(const Literal& l) const { return (l.sign == Sign::Pos ? pos_ : neg_).count(l.atom) > 0; }
  bool contains(const Interpretation& other) const {
    return std::includes(pos_.begin(), pos_.end(), other.pos_.begin(), other.pos_.end()) &&
           std::includes(neg_.begin(), neg_.end(), other.neg_.begin(), other.neg_.end());
  }
  const std::set<Atom>& true_atoms() const { return pos_; }
  const std::set<Atom>& false_atoms() const { return neg_; }
  std::size_t size() const { return pos_.size() + neg_.size(); }
  bool empty() const { return pos_.empty() && neg_.empty(); }

  std::set<Literal> literals() const {
    std::set<Literal> out;
    for (const auto& a : pos_) out.insert({a, Sign::Pos});
    for (const auto& a : neg_) out.insert({a, Sign::Neg});
    return out;
  }

  friend bool operator==(const Interpretation&, const Interpretation&) = default;

 private:
  std::set<Atom> pos_;
  std::set<Atom> neg_;
};

inline TruthValue truth_of(const Interpretation& i, const Atom& a) {
  if (i.true_atoms().count(a)) return TruthValue::T;
  if (i.false_atoms().count(a)) return TruthValue::F;
  return TruthValue::U;
}

inline void assert_consistent(const Interpretation& i) {
  std::vector<Atom> bad;
  std::set_intersection(i.true_atoms().begin(), i.true_atoms().end(), i.false_atoms().begin(),
                        i.false_atoms().end(), std::back_inserter(bad));
  if (bad.empty()) return;
  std::string msg = "atoms both true and false:";
  for (const auto& a : bad) msg += " " + to_string(a);
  throw Error(ErrorKind::Inconsistency, msg);
}

inline std::set<Literal> negate_set(const std::set<Atom>& atoms) {
  std::set<Literal> out;
  for (const auto& a : atoms) out.insert({a, Sign::Neg});
  return out;
}

/// Builds the canonical form of a 2-valued model. When `sig` is given, every
/// atom must belong to one of its predicates at the right arity.
template <class Range>
ConstraintModel canonical_model(std::string unit, const Range& trues, const Signature* sig = nullptr) {
  ConstraintModel m;
  m.source_unit = std::move(unit);
  for (const Atom& a : trues) {
    if (sig) {
      auto it = sig->find(a.pred);
      if (it == sig->end() || it->second != a.args.size())
        throw Error(ErrorKind::ForeignAtom, "atom " + to_string(a) + " is not an atom of unit " + m.source_unit);
    }
    m.true_atoms.push_back(a);
  }
  std::sort(m.true_atoms.begin(), m.true_atoms.end());
  m.true_atoms.erase(std::unique(m.true_atoms.begin(), m.true_atoms.end()), m.true_atoms.end());
  return m;
}

}  // namespace dalog
