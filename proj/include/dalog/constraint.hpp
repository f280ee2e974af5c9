#pragma once

// Whole-program evaluation in CS-dependency order, constraint models and
// queries.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dalog/core.hpp"
#include "dalog/expander.hpp"
#include "dalog/founded.hpp"
#include "dalog/grounder.hpp"

namespace dalog {

struct EvalOptions {
  ExpandOptions expand;
  bool all_models = false;
  std::set<std::string> models_for;  // units whose constraint models are wanted
};

class UnitResult {
 public:
  explicit UnitResult(std::shared_ptr<UnitEngine> engine) : engine_(std::move(engine)) {}

  const std::string& name() const { return engine_->unit().name; }
  const ExpandedUnit& unit() const { return engine_->unit(); }
  const UnitDomain& domain() const { return engine_->domain(); }
  const Interpretation& founded() const { return engine_->founded(); }
  UnitEngine& engine() const { return *engine_; }
  bool models_computed() const { return models_->has_value(); }

  /// Constraint models, computed on first request. Copies share the list.
  const std::vector<ModelPtr>& models() const {
    if (!*models_) {
      std::vector<ModelPtr> out;
      for (const auto& m : engine_->constraint_models()) out.push_back(std::make_shared<const ConstraintModel>(m));
      *models_ = std::move(out);
    }
    return **models_;
  }

 private:
  std::shared_ptr<UnitEngine> engine_;
  std::shared_ptr<std::optional<std::vector<ModelPtr>>> models_ =
      std::make_shared<std::optional<std::vector<ModelPtr>>>();
};

/// Founded model and constraint models of every unit, in program order.
class ProgramResult {
 public:
  std::vector<UnitResult> units;

  const UnitResult& at(const std::string& name) const {
    for (const auto& u : units)
      if (u.name() == name) return u;
    throw Error(ErrorKind::UnknownUnit, "no kunit named '" + name + "'");
  }

  /// Index of `m` in its source unit's canonical model list.
  std::optional<std::size_t> model_index(const ConstraintModel& m) const {
    for (const auto& u : units)
      if (u.name() == m.source_unit && u.models_computed()) {
        const auto& ms = u.models();
        for (std::size_t i = 0; i < ms.size(); ++i)
          if (*ms[i] == m) return i;
      }
    return std::nullopt;
  }

  /// Renders model constants as `unit.CS[i]`.
  ModelNamer namer() const {
    return [this](const ConstraintModel& m) {
      auto i = model_index(m);
      if (!i) return to_string(Constant::model(std::make_shared<const ConstraintModel>(m)));
      return m.source_unit + ".CS[" + std::to_string(*i) + "]";
    };
  }
};

/// Units ordered so each comes after every unit whose constraint models it
/// references; ties keep program order.
inline std::vector<std::size_t> cs_topological_order(const std::vector<ExpandedUnit>& units) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < units.size(); ++i) index[units[i].name] = i;
  std::vector<int> state(units.size(), 0);
  std::vector<std::size_t> out;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (state[i] == 2) return;
    if (state[i] == 1)
      throw Error(ErrorKind::CyclicCs, "constraint-model references of '" + units[i].name + "' form a cycle",
                  units[i].span);
    state[i] = 1;
    for (const auto& t : cs_dependencies(units[i])) {
      auto it = index.find(t);
      if (it == index.end()) throw Error(ErrorKind::UnknownUnit, "reference to unknown kunit '" + t + ".CS'");
      visit(it->second);
    }
    state[i] = 2;
    out.push_back(i);
  };
  for (std::size_t i = 0; i < units.size(); ++i) visit(i);
  return out;
}

/// Evaluates already loaded units.
inline ProgramResult eval_units(const std::vector<ExpandedUnit>& units, const EvalOptions& opts = {}) {
  std::set<std::string> needed = opts.models_for;
  for (const auto& u : units) {
    if (opts.all_models) needed.insert(u.name);
    for (const auto& t : cs_dependencies(u)) needed.insert(t);
  }
  EvalEnv env;
  std::map<std::string, UnitResult> by_name;
  for (std::size_t i : cs_topological_order(units)) {
    const ExpandedUnit& u = units[i];
    EvalEnv local;
    for (const auto& t : cs_dependencies(u)) local.cs[t] = by_name.at(t).models();
    local.info = env.info;
    auto engine = std::make_shared<UnitEngine>(u, std::move(local));
    UnitResult r(engine);
    assert_consistent(r.founded());
    if (needed.count(u.name)) r.models();
    env.info[u.name] = UnitInfo{engine->unit().signature};
    by_name.emplace(u.name, r);
  }
  ProgramResult out;
  for (const auto& u : units) out.units.push_back(by_name.at(u.name));
  return out;
}

/// Expands, validates and evaluates `p`.
inline ProgramResult eval_program(const Program& p, const EvalOptions& opts = {}) {
  return eval_units(load_program(p, opts.expand), opts);
}

struct QueryResult {
  TruthValue founded = TruthValue::U;
  std::optional<std::vector<bool>> models;
};

/// Founded value of `a` in `unit` and, if `with_models`, its value in each
/// constraint model. Atoms whose constants lie outside the unit's domain
/// have no rule instances: they are false, or undefined for open predicates.
inline QueryResult query(const ProgramResult& r, const std::string& unit, const Atom& a, bool with_models = false) {
  const UnitResult& u = r.at(unit);
  auto sig = u.unit().signature.find(a.pred);
  if (sig == u.unit().signature.end())
    throw Error(ErrorKind::UnknownAtom, "kunit '" + unit + "' has no predicate '" + a.pred + "'");
  if (sig->second != a.args.size())
    throw Error(ErrorKind::UnknownAtom, "predicate '" + a.pred + "' has arity " + std::to_string(sig->second) +
                                            ", got " + std::to_string(a.args.size()) + " arguments");
  QueryResult out;
  bool in_domain = std::all_of(a.args.begin(), a.args.end(),
                               [&](const Constant& c) { return u.domain().constants.count(c) > 0; });
  if (in_domain)
    out.founded = truth_of(u.founded(), a);
  else
    out.founded = u.unit().meta_of(a.pred) == MetaKind::Open ? TruthValue::U : TruthValue::F;
  if (with_models) {
    std::vector<bool> vals;
    for (const auto& m : u.models()) vals.push_back(m->holds(a));
    out.models = std::move(vals);
  }
  return out;
}

}  // namespace dalog
