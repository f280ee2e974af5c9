#pragma once

// Founded semantics of one unit: SCC-ordered least fixed points over the
// completed rules, completion facts for certain predicates, and the outer
// fixed point that falsifies self-false atoms of closed predicates.
//
// Predicates referenced through P.T/P.F/P.U are evaluated to their final
// values before any rule that references them. Predicates are split into
// levels by reference edges and the whole outer fixed point runs level by
// level.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dalog/completion.hpp"
#include "dalog/core.hpp"
#include "dalog/expander.hpp"
#include "dalog/grounder.hpp"

namespace dalog {

/// Signature of an evaluated unit, used to answer `m.P` lookups.
struct UnitInfo {
  Signature signature;
};

/// What one unit's evaluation may read about other units.
struct EvalEnv {
  CsModels cs;
  std::map<std::string, UnitInfo> info;
};

/// Ground formula over atom ids, with reference atoms folded to constants.
struct GNode {
  enum class Kind : std::uint8_t { Const, Atom, NegAtom, And, Or };
  Kind kind = Kind::Const;
  TruthValue tv = TruthValue::T;
  int atom = -1;
  std::vector<GNode> kids;
};

struct CompiledRule {
  int head = -1;
  Sign sign = Sign::Pos;
  GNode body;
};

struct EngineStats {
  std::size_t ground_atoms = 0;
  std::size_t outer_iterations = 0;
  struct SccRun {
    std::vector<std::string> preds;
    std::size_t atoms = 0;
    std::size_t rounds = 0;
  };
  std::vector<SccRun> scc_runs;
  struct OuterRun {
    std::size_t atoms = 0;
    std::size_t iterations = 0;
  };
  std::vector<OuterRun> outer_runs;  // one per level, closed evaluation only
};

enum class Enumeration { Pruned, Exhaustive };

namespace detail {

inline TruthValue kleene_and(TruthValue a, TruthValue b) {
  if (a == TruthValue::F || b == TruthValue::F) return TruthValue::F;
  if (a == TruthValue::U || b == TruthValue::U) return TruthValue::U;
  return TruthValue::T;
}
inline TruthValue kleene_or(TruthValue a, TruthValue b) {
  if (a == TruthValue::T || b == TruthValue::T) return TruthValue::T;
  if (a == TruthValue::U || b == TruthValue::U) return TruthValue::U;
  return TruthValue::F;
}

inline TruthValue eval(const GNode& n, const std::vector<TruthValue>& val) {
  switch (n.kind) {
    case GNode::Kind::Const: return n.tv;
    case GNode::Kind::Atom: return val[n.atom];
    case GNode::Kind::NegAtom: return kleene_not(val[n.atom]);
    case GNode::Kind::And: {
      TruthValue r = TruthValue::T;
      for (const auto& k : n.kids) {
        r = kleene_and(r, eval(k, val));
        if (r == TruthValue::F) break;
      }
      return r;
    }
    case GNode::Kind::Or: {
      TruthValue r = TruthValue::F;
      for (const auto& k : n.kids) {
        r = kleene_or(r, eval(k, val));
        if (r == TruthValue::T) break;
      }
      return r;
    }
  }
  return TruthValue::U;
}

/// Whether a body could still be made true without using an atom of
/// `unfounded` positively or a hypothesis already false in `val`. This is
/// the per-disjunct unfounded-set test applied to every disjunct of the
/// body's DNF at once.
inline bool supported(const GNode& n, const std::vector<TruthValue>& val, const std::vector<char>& unfounded) {
  switch (n.kind) {
    case GNode::Kind::Const: return n.tv != TruthValue::F;
    case GNode::Kind::Atom: return val[n.atom] != TruthValue::F && !unfounded[n.atom];
    case GNode::Kind::NegAtom: return val[n.atom] != TruthValue::T;
    case GNode::Kind::And:
      for (const auto& k : n.kids)
        if (!supported(k, val, unfounded)) return false;
      return true;
    case GNode::Kind::Or:
      for (const auto& k : n.kids)
        if (supported(k, val, unfounded)) return true;
      return false;
  }
  return false;
}

inline void collect_node_atoms(const GNode& n, std::vector<int>& out) {
  if (n.kind == GNode::Kind::Atom || n.kind == GNode::Kind::NegAtom) out.push_back(n.atom);
  for (const auto& k : n.kids) collect_node_atoms(k, out);
}

inline GNode const_node(TruthValue v) { return GNode{GNode::Kind::Const, v, -1, {}}; }

inline Rule nnf_rule(const Rule& r) {
  Rule out = r;
  if (out.body) out.body = nnf(*out.body);
  return out;
}

}  // namespace detail

/// Evaluates one expanded unit. Construction grounds the completed rules;
/// `founded()` and `constraint_models()` compute on first use.
class UnitEngine {
 public:
  UnitEngine(ExpandedUnit u, EvalEnv env) : env_(std::move(env)) {
    if (u.signature.empty()) u = infer_default_metas(std::move(u));
    unit_ = std::move(u);
    domain_ = domain_of(unit_, env_.cs);
    dom_.assign(domain_.constants.begin(), domain_.constants.end());
    completed_ = cmpl(unit_);
    build_atoms();
    build_levels();
    for (const auto& r : completed_.all_rules()) add_ground(detail::nnf_rule(r), cmpl_ground_);
    for (const auto& r : unit_.rules)
      if (unit_.meta_of(r.head.name) == MetaKind::Closed) add_ground(detail::nnf_rule(r), orig_ground_);
  }

  const ExpandedUnit& unit() const { return unit_; }
  const UnitDomain& domain() const { return domain_; }
  const CompletedUnit& completed() const { return completed_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const EvalEnv& env() const { return env_; }
  const EngineStats& stats() const { return stats_; }

  int atom_id(const Atom& a) const {
    auto it = ids_.find(a);
    return it == ids_.end() ? -1 : it->second;
  }

  /// Founded semantics ignoring closed declarations, with the literals of
  /// `extra` added as facts.
  Interpretation founded0(const Interpretation& extra = {}) {
    std::vector<TruthValue> ext = values_of(extra);
    return to_interpretation(run(false, &ext));
  }

  const Interpretation& founded() {
    if (!founded_) {
      final_ = run(true, nullptr);
      founded_ = to_interpretation(final_);
    }
    return *founded_;
  }

  /// Atoms of closed predicates that are self-false in `i`.
  std::set<Atom> self_false(const Interpretation& i) {
    founded();
    auto compiled = compile_all(orig_ground_);
    std::vector<int> cand;
    for (std::size_t a = 0; a < atoms_.size(); ++a)
      if (unit_.meta_of(atoms_[a].pred) == MetaKind::Closed) cand.push_back(static_cast<int>(a));
    std::set<Atom> out;
    for (int a : greatest_unfounded(compiled, values_of(i), cand)) out.insert(atoms_[a]);
    return out;
  }

  /// Whether 2-valued `i` contains every fact and satisfies every ground
  /// rule of the completed unit.
  bool is_model(const Interpretation& i) {
    founded();
    auto compiled = compile_all(cmpl_ground_);
    std::vector<TruthValue> val = values_of(i);
    for (const auto& r : compiled)
      if (violated(r, val)) return false;
    return true;
  }

  /// Constraint models in canonical order.
  const std::vector<ConstraintModel>& constraint_models(Enumeration mode = Enumeration::Pruned) {
    auto& slot = mode == Enumeration::Pruned ? pruned_ : exhaustive_;
    if (!slot) slot = enumerate(mode);
    return *slot;
  }

  /// Number of atoms left undefined by the founded model.
  std::size_t undefined_count() {
    founded();
    return static_cast<std::size_t>(std::count(final_.begin(), final_.end(), TruthValue::U));
  }

  /// Value of a ground formula (constants only) in interpretation `i`.
  TruthValue evaluate(const Formula& ground, const Interpretation& i) {
    founded();
    return detail::eval(compile(nnf(ground), final_), values_of(i));
  }

  /// Every ground instance of the completed rules, in NNF.
  const std::vector<GroundRule>& completed_ground_rules() const { return cmpl_ground_; }

 private:
  void build_atoms() {
    for (const auto& [pred, arity] : unit_.signature)
      for (auto& args : tuples_of(dom_, arity)) {
        Atom a{pred, std::move(args)};
        ids_.emplace(a, static_cast<int>(atoms_.size()));
        atoms_.push_back(std::move(a));
      }
    stats_.ground_atoms = atoms_.size();
  }

  void build_levels() {
    std::set<std::string> nodes;
    for (const auto& [p, a] : unit_.signature) nodes.insert(p);
    auto edges = dependency_edges(unit_.rules);
    auto comps = scc_order(nodes, edges);
    std::map<std::string, std::size_t> comp_of;
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (const auto& p : comps[i]) comp_of[p] = i;
    std::vector<int> level(comps.size(), 0);
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (const auto& e : edges)
        if (comp_of[e.from] == i && comp_of[e.to] != i)
          level[i] = std::max(level[i], level[comp_of[e.to]] + (e.ref ? 1 : 0));
    int max_level = 0;
    for (int l : level) max_level = std::max(max_level, l);
    levels_.assign(static_cast<std::size_t>(max_level) + 1, {});
    for (std::size_t i = 0; i < comps.size(); ++i) {
      levels_[level[i]].push_back(comps[i]);
      for (const auto& p : comps[i]) pred_level_[p] = level[i];
    }
  }

  void add_ground(const Rule& r, std::vector<GroundRule>& out) {
    for (auto& g : ground_rule(r, domain_)) out.push_back(std::move(g));
  }

  std::vector<TruthValue> values_of(const Interpretation& i) const {
    std::vector<TruthValue> val(atoms_.size(), TruthValue::U);
    for (const auto& a : i.true_atoms()) {
      int id = atom_id(a);
      if (id < 0) throw Error(ErrorKind::UnknownAtom, "atom " + to_string(a) + " is not an atom of " + unit_.name);
      val[id] = TruthValue::T;
    }
    for (const auto& a : i.false_atoms()) {
      int id = atom_id(a);
      if (id < 0) throw Error(ErrorKind::UnknownAtom, "atom " + to_string(a) + " is not an atom of " + unit_.name);
      if (val[id] == TruthValue::T)
        throw Error(ErrorKind::Inconsistency, "atom " + to_string(a) + " is both true and false");
      val[id] = TruthValue::F;
    }
    return val;
  }

  Interpretation to_interpretation(const std::vector<TruthValue>& val) const {
    Interpretation out;
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
      if (val[a] == TruthValue::T) out.add_true(atoms_[a]);
      if (val[a] == TruthValue::F) out.add_false(atoms_[a]);
    }
    return out;
  }

  TruthValue reference_value(const AtomF& a, const std::vector<TruthValue>& val) const {
    std::vector<Constant> args;
    for (const auto& t : a.args) args.push_back(t.as_const());
    switch (a.pred.kind) {
      case PredRef::Kind::Truth: {
        int id = atom_id(Atom{a.pred.name, args});
        TruthValue v = id < 0 ? TruthValue::U : val[id];
        return v == a.pred.tv ? TruthValue::T : TruthValue::F;
      }
      case PredRef::Kind::Cs: {
        auto it = env_.cs.find(a.pred.name);
        if (it == env_.cs.end() || args.size() != 1 || !args[0].is_model()) return TruthValue::F;
        for (const auto& m : it->second)
          if (*m == args[0].as_model()) return TruthValue::T;
        return TruthValue::F;
      }
      case PredRef::Kind::Proj: {
        const Constant& s = a.pred.subject->as_const();
        if (!s.is_model()) return TruthValue::U;
        const ConstraintModel& m = s.as_model();
        auto info = env_.info.find(m.source_unit);
        if (info == env_.info.end()) return TruthValue::U;
        auto sig = info->second.signature.find(a.pred.name);
        if (sig == info->second.signature.end() || sig->second != args.size()) return TruthValue::U;
        return m.holds(Atom{a.pred.name, args}) ? TruthValue::T : TruthValue::F;
      }
      case PredRef::Kind::Plain: break;
    }
    return TruthValue::U;
  }

  /// Compiles an NNF ground formula. Reference atoms read `val`, which must
  /// hold final values for every predicate they name.
  GNode compile(const Formula& f, const std::vector<TruthValue>& val) const {
    return std::visit(
        overloaded{
            [&](const AtomF& a) -> GNode {
              if (a.pred.is_plain()) {
                std::vector<Constant> args;
                for (const auto& t : a.args) args.push_back(t.as_const());
                return GNode{GNode::Kind::Atom, TruthValue::U, atom_id(Atom{a.pred.name, std::move(args)}), {}};
              }
              return detail::const_node(reference_value(a, val));
            },
            [&](const EqF&) -> GNode {
              throw Error(ErrorKind::Inconsistency, "internal: equality left in a ground formula");
            },
            [&](const NotF& n) -> GNode {
              GNode inner = compile(*n.body, val);
              if (inner.kind == GNode::Kind::Atom) {
                inner.kind = GNode::Kind::NegAtom;
                return inner;
              }
              if (inner.kind == GNode::Kind::Const) return detail::const_node(kleene_not(inner.tv));
              throw Error(ErrorKind::Inconsistency, "internal: negation over a compound formula after NNF");
            },
            [&](const AndF& c) -> GNode {
              GNode out{GNode::Kind::And, TruthValue::T, -1, {}};
              for (const auto& p : c.parts) {
                GNode k = compile(p, val);
                if (k.kind == GNode::Kind::Const && k.tv == TruthValue::F) return detail::const_node(TruthValue::F);
                if (k.kind == GNode::Kind::Const && k.tv == TruthValue::T) continue;
                out.kids.push_back(std::move(k));
              }
              if (out.kids.empty()) return detail::const_node(TruthValue::T);
              if (out.kids.size() == 1) return std::move(out.kids.front());
              return out;
            },
            [&](const OrF& c) -> GNode {
              GNode out{GNode::Kind::Or, TruthValue::F, -1, {}};
              for (const auto& p : c.parts) {
                GNode k = compile(p, val);
                if (k.kind == GNode::Kind::Const && k.tv == TruthValue::T) return detail::const_node(TruthValue::T);
                if (k.kind == GNode::Kind::Const && k.tv == TruthValue::F) continue;
                out.kids.push_back(std::move(k));
              }
              if (out.kids.empty()) return detail::const_node(TruthValue::F);
              if (out.kids.size() == 1) return std::move(out.kids.front());
              return out;
            },
            [&](const QuantF&) -> GNode {
              throw Error(ErrorKind::Inconsistency, "internal: quantifier in a ground formula");
            },
        },
        f.node);
  }

  CompiledRule compile_rule(const GroundRule& g, const std::vector<TruthValue>& val) const {
    return CompiledRule{atom_id(g.head.atom), g.head.sign, compile(g.body, val)};
  }

  std::vector<CompiledRule> compile_all(const std::vector<GroundRule>& rules) const {
    std::vector<CompiledRule> out;
    out.reserve(rules.size());
    for (const auto& g : rules) out.push_back(compile_rule(g, final_));
    return out;
  }

  static bool head_holds(const CompiledRule& r, const std::vector<TruthValue>& val) {
    return val[r.head] == (r.sign == Sign::Pos ? TruthValue::T : TruthValue::F);
  }

  static TruthValue head_value(const CompiledRule& r, const std::vector<TruthValue>& val) {
    return r.sign == Sign::Pos ? val[r.head] : kleene_not(val[r.head]);
  }

  static bool violated(const CompiledRule& r, const std::vector<TruthValue>& val) {
    return detail::eval(r.body, val) == TruthValue::T && head_value(r, val) == TruthValue::F;
  }

  void set_literal(std::vector<TruthValue>& val, int atom, Sign s) const {
    TruthValue want = s == Sign::Pos ? TruthValue::T : TruthValue::F;
    if (val[atom] == want) return;
    if (val[atom] != TruthValue::U)
      throw Error(ErrorKind::Inconsistency, "atom " + to_string(atoms_[atom]) + " derived both true and false in " +
                                                unit_.name);
    val[atom] = want;
  }

  /// Greatest unfounded set among `candidates` under `val`.
  std::vector<int> greatest_unfounded(const std::vector<CompiledRule>& rules, const std::vector<TruthValue>& val,
                                      const std::vector<int>& candidates) const {
    std::vector<char> unfounded(atoms_.size(), 0);
    for (int a : candidates) unfounded[a] = 1;
    std::map<int, std::vector<const CompiledRule*>> by_head;
    for (const auto& r : rules)
      if (r.sign == Sign::Pos && unfounded[r.head]) by_head[r.head].push_back(&r);
    bool changed = true;
    while (changed) {
      changed = false;
      for (int a : candidates) {
        if (!unfounded[a]) continue;
        for (const CompiledRule* r : by_head[a])
          if (detail::supported(r->body, val, unfounded)) {
            unfounded[a] = 0;
            changed = true;
            break;
          }
      }
    }
    std::vector<int> out;
    for (int a : candidates)
      if (unfounded[a]) out.push_back(a);
    return out;
  }

  /// Levels in order; within a level, Founded0 over its SCCs and, when
  /// `closed` is set, the outer fixed point with self-false atoms.
  std::vector<TruthValue> run(bool closed, const std::vector<TruthValue>* extra) {
    std::vector<TruthValue> val(atoms_.size(), TruthValue::U);
    std::vector<std::vector<int>> level_atoms(levels_.size());
    for (std::size_t a = 0; a < atoms_.size(); ++a) level_atoms[pred_level_[atoms_[a].pred]].push_back(static_cast<int>(a));

    for (std::size_t lv = 0; lv < levels_.size(); ++lv) {
      // Rules concluding a predicate at this level, compiled against the
      // final values of lower levels.
      std::map<std::string, std::vector<CompiledRule>> by_pred;
      for (const auto& g : cmpl_ground_)
        if (pred_level_[g.head.atom.pred] == static_cast<int>(lv)) by_pred[g.head.atom.pred].push_back(compile_rule(g, val));
      std::vector<CompiledRule> sf_rules;
      std::vector<int> sf_cand;
      if (closed) {
        for (const auto& g : orig_ground_)
          if (pred_level_[g.head.atom.pred] == static_cast<int>(lv)) sf_rules.push_back(compile_rule(g, val));
        for (int a : level_atoms[lv])
          if (unit_.meta_of(atoms_[a].pred) == MetaKind::Closed) sf_cand.push_back(a);
      }

      std::vector<TruthValue> ext(atoms_.size(), TruthValue::U);
      if (extra)
        for (int a : level_atoms[lv]) ext[a] = (*extra)[a];
      std::size_t outer = 0;
      while (true) {
        std::vector<TruthValue> cur = val;
        for (int a : level_atoms[lv]) cur[a] = TruthValue::U;
        for (const auto& comp : levels_[lv]) {
          std::vector<int> comp_atoms;
          std::vector<const CompiledRule*> rules;
          for (const auto& p : comp) {
            for (int a : level_atoms[lv])
              if (atoms_[a].pred == p) comp_atoms.push_back(a);
            for (const auto& r : by_pred[p]) rules.push_back(&r);
          }
          for (int a : comp_atoms)
            if (ext[a] != TruthValue::U) set_literal(cur, a, ext[a] == TruthValue::T ? Sign::Pos : Sign::Neg);
          std::size_t rounds = 0;
          bool changed = true;
          while (changed) {
            changed = false;
            ++rounds;
            for (const CompiledRule* r : rules) {
              if (head_holds(*r, cur)) continue;
              if (detail::eval(r->body, cur) == TruthValue::T) {
                set_literal(cur, r->head, r->sign);
                changed = true;
              }
            }
          }
          stats_.scc_runs.push_back({comp, comp_atoms.size(), rounds});
          for (int a : comp_atoms)
            if (unit_.meta_of(atoms_[a].pred) == MetaKind::Certain && cur[a] != TruthValue::T) cur[a] = TruthValue::F;
        }
        if (!closed) {
          val = std::move(cur);
          break;
        }
        std::vector<TruthValue> next(atoms_.size(), TruthValue::U);
        for (int a : level_atoms[lv]) next[a] = cur[a];
        for (int a : greatest_unfounded(sf_rules, cur, sf_cand)) {
          if (next[a] == TruthValue::T)
            throw Error(ErrorKind::Inconsistency,
                        "atom " + to_string(atoms_[a]) + " is self-false but derived true in " + unit_.name);
          next[a] = TruthValue::F;
        }
        ++outer;
        ++stats_.outer_iterations;
        if (next == ext) {
          val = std::move(cur);
          for (int a : level_atoms[lv]) val[a] = next[a];
          stats_.outer_runs.push_back({level_atoms[lv].size(), outer});
          break;
        }
        if (outer > level_atoms[lv].size() + 1)
          throw Error(ErrorKind::Inconsistency, "outer fixed point of " + unit_.name + " did not converge");
        ext = std::move(next);
      }
    }
    return val;
  }

  std::vector<ConstraintModel> enumerate(Enumeration mode) {
    founded();
    std::vector<CompiledRule> rules = compile_all(cmpl_ground_);
    std::vector<CompiledRule> sf_rules = compile_all(orig_ground_);
    std::vector<int> closed_atoms;
    for (std::size_t a = 0; a < atoms_.size(); ++a)
      if (unit_.meta_of(atoms_[a].pred) == MetaKind::Closed) closed_atoms.push_back(static_cast<int>(a));

    std::vector<int> open;
    for (std::size_t a = 0; a < atoms_.size(); ++a)
      if (final_[a] == TruthValue::U) open.push_back(static_cast<int>(a));
    std::vector<std::vector<const CompiledRule*>> watch(atoms_.size());
    for (const auto& r : rules) {
      std::vector<int> ids{r.head};
      detail::collect_node_atoms(r.body, ids);
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      for (int a : ids) watch[a].push_back(&r);
    }

    std::vector<TruthValue> val = final_;
    std::vector<ConstraintModel> out;
    auto accept = [&]() {
      for (const auto& r : rules)
        if (violated(r, val)) return;
      for (int a : greatest_unfounded(sf_rules, val, closed_atoms))
        if (val[a] != TruthValue::F) return;
      std::vector<Atom> trues;
      for (std::size_t a = 0; a < atoms_.size(); ++a)
        if (val[a] == TruthValue::T) trues.push_back(atoms_[a]);
      out.push_back(canonical_model(unit_.name, trues));
    };
    if (mode == Enumeration::Pruned)
      for (const auto& r : rules)
        if (violated(r, val)) return out;
    std::function<void(std::size_t)> dfs = [&](std::size_t k) {
      if (k == open.size()) {
        accept();
        return;
      }
      int a = open[k];
      for (TruthValue v : {TruthValue::T, TruthValue::F}) {
        val[a] = v;
        bool ok = true;
        if (mode == Enumeration::Pruned)
          for (const CompiledRule* r : watch[a])
            if (violated(*r, val)) {
              ok = false;
              break;
            }
        if (ok) dfs(k + 1);
      }
      val[a] = TruthValue::U;
    };
    dfs(0);
    std::sort(out.begin(), out.end());
    return out;
  }

  ExpandedUnit unit_;
  EvalEnv env_;
  UnitDomain domain_;
  std::vector<Constant> dom_;
  CompletedUnit completed_;
  std::vector<Atom> atoms_;
  std::map<Atom, int> ids_;
  std::vector<std::vector<std::vector<std::string>>> levels_;
  std::map<std::string, int> pred_level_;
  std::vector<GroundRule> cmpl_ground_;
  std::vector<GroundRule> orig_ground_;
  std::vector<TruthValue> final_;
  std::optional<Interpretation> founded_;
  std::optional<std::vector<ConstraintModel>> pruned_;
  std::optional<std::vector<ConstraintModel>> exhaustive_;
  EngineStats stats_;
};

/// Founded model of `u`; throws InconsistencyError if the result is not
/// consistent.
inline Interpretation founded(const ExpandedUnit& u, const EvalEnv& env = {}) {
  UnitEngine e(u, env);
  Interpretation i = e.founded();
  assert_consistent(i);
  return i;
}

inline Interpretation founded0(const ExpandedUnit& u, const EvalEnv& env = {}) {
  UnitEngine e(u, env);
  return e.founded0();
}

inline std::set<Atom> self_false(const ExpandedUnit& u, const Interpretation& i, const EvalEnv& env = {}) {
  UnitEngine e(u, env);
  return e.self_false(i);
}

}  // namespace dalog
