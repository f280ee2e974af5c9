#pragma once

// Helpers shared by the test binaries: sample loading and atom shorthands.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dalog/dalog.hpp"

namespace dalog::test {

inline std::string sample_path(const std::string& name) { return std::string(DALOG_SAMPLES) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses the named sample files as one program.
inline Program load_samples(std::initializer_list<const char*> names) {
  std::vector<std::pair<std::string, std::string>> sources;
  for (const char* n : names) sources.emplace_back(read_file(sample_path(n)), n);
  return parse_sources(sources);
}

inline ProgramResult eval_samples(std::initializer_list<const char*> names, EvalOptions opts = {}) {
  return eval_program(load_samples(names), opts);
}

inline ProgramResult eval_text(const std::string& text, EvalOptions opts = {}) {
  return eval_program(parse_program(text), opts);
}

using Arg = std::variant<long, const char*, ModelPtr>;

inline Constant C(const Arg& a) {
  if (auto i = std::get_if<long>(&a)) return Constant::integer(*i);
  if (auto s = std::get_if<const char*>(&a)) return Constant::symbol(*s);
  return Constant::model(std::get<ModelPtr>(a));
}

/// `A("win", {1})` is the atom win(1).
inline Atom A(const std::string& pred, std::initializer_list<Arg> args = {}) {
  Atom out{pred, {}};
  for (const auto& a : args) out.args.push_back(C(a));
  return out;
}

inline TruthValue value(const UnitResult& u, const Atom& a) { return truth_of(u.founded(), a); }

/// True atoms of one predicate in a constraint model.
inline std::vector<Atom> pred_atoms(const ConstraintModel& m, const std::string& pred) {
  std::vector<Atom> out;
  for (const auto& a : m.true_atoms)
    if (a.pred == pred) out.push_back(a);
  return out;
}

/// `head >= body` in the truth order F < U < T.
inline bool implies3(TruthValue body, TruthValue head) {
  auto rank = [](TruthValue v) { return v == TruthValue::F ? 0 : v == TruthValue::U ? 1 : 2; };
  return rank(head) >= rank(body);
}

inline TruthValue literal_value(const Interpretation& i, const Literal& l) {
  TruthValue v = truth_of(i, l.atom);
  return l.sign == Sign::Pos ? v : kleene_not(v);
}

/// Whether `i` satisfies every ground instance of `rules` over the engine's
/// domain, 3-valued.
inline bool satisfies(UnitEngine& e, const std::vector<Rule>& rules, const Interpretation& i) {
  for (const auto& r : rules)
    for (const auto& g : ground_rule(r, e.domain()))
      if (!implies3(e.evaluate(g.body, i), literal_value(i, g.head))) return false;
  return true;
}

/// The 2-valued interpretation over the engine's atoms given by a model.
inline Interpretation total(const UnitEngine& e, const ConstraintModel& m) {
  Interpretation i;
  for (const auto& a : e.atoms()) i.add(a, m.holds(a) ? Sign::Pos : Sign::Neg);
  return i;
}

}  // namespace dalog::test
