#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "random_programs.hpp"
#include "support.hpp"

using namespace dalog;
using namespace dalog::test;

namespace {

ExpandedUnit unit_from(const Program& p, const std::string& name) {
  for (auto& u : load_program(p))
    if (u.name == name) return u;
  FAIL("no unit " << name);
  return {};
}

Formula ground_atom(const std::string& p, std::vector<long> args) {
  std::vector<Term> ts;
  for (long a : args) ts.push_back(Term::constant(Constant::integer(a)));
  return make_atom(PredRef::plain(p), ts);
}

/// Kleene value of a ground formula over plain atoms only.
TruthValue eval3(const Formula& f, const Interpretation& i) {
  return std::visit(overloaded{
                        [&](const AtomF& a) {
                          Atom g{a.pred.name, {}};
                          for (const auto& t : a.args) g.args.push_back(t.as_const());
                          return truth_of(i, g);
                        },
                        [&](const NotF& n) { return kleene_not(eval3(*n.body, i)); },
                        [&](const AndF& c) {
                          TruthValue v = TruthValue::T;
                          for (const auto& p : c.parts) {
                            TruthValue x = eval3(p, i);
                            if (x == TruthValue::F) return TruthValue::F;
                            if (x == TruthValue::U) v = TruthValue::U;
                          }
                          return v;
                        },
                        [&](const OrF& c) {
                          TruthValue v = TruthValue::F;
                          for (const auto& p : c.parts) {
                            TruthValue x = eval3(p, i);
                            if (x == TruthValue::T) return TruthValue::T;
                            if (x == TruthValue::U) v = TruthValue::U;
                          }
                          return v;
                        },
                        [&](const QuantF&) -> TruthValue { throw std::logic_error("quantifier in ground formula"); },
                        [&](const EqF&) -> TruthValue { throw std::logic_error("equality in ground formula"); },
                    },
                    f.node);
}

bool is_ground(const Formula& f) {
  bool ok = true;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    std::visit(overloaded{
                   [&](const AtomF& a) {
                     for (const auto& t : a.args) ok = ok && t.is_const();
                     if (a.pred.subject) ok = ok && a.pred.subject->is_const();
                   },
                   [&](const NotF& n) { go(*n.body); },
                   [&](const AndF& c) {
                     for (const auto& p : c.parts) go(p);
                   },
                   [&](const OrF& c) {
                     for (const auto& p : c.parts) go(p);
                   },
                   [&](const QuantF&) { ok = false; },
                   [&](const EqF&) { ok = false; },
               },
               g.node);
  };
  go(f);
  return ok;
}

std::vector<Constant> ints(std::initializer_list<long> xs) {
  std::vector<Constant> out;
  for (long x : xs) out.push_back(Constant::integer(x));
  return out;
}

}  // namespace

TEST_CASE("domains") {
  Program p = load_samples({"win_unit.dal", "cmp_unit.dal", "win_set_unit.dal"});
  UnitDomain d1 = domain_of(unit_from(p, "win_unit1"), {});
  CHECK(d1.constants == std::set<Constant>{Constant::integer(0), Constant::integer(1)});

  CHECK(domain_of(unit_from(p, "win_unit"), {}).constants.empty());

  ExpandedUnit ws = unit_from(p, "win_set_unit");
  CHECK_THROWS_AS(domain_of(ws, {}), Error);
  auto m1 = std::make_shared<const ConstraintModel>(
      canonical_model("win_unit2", std::vector<Atom>{A("move", {1, 4}), A("move", {4, 1}), A("win", {1})}));
  auto m2 = std::make_shared<const ConstraintModel>(
      canonical_model("win_unit2", std::vector<Atom>{A("move", {1, 4}), A("move", {4, 1}), A("win", {4})}));
  UnitDomain d = domain_of(ws, CsModels{{"win_unit2", {m1, m2}}});
  std::set<Constant> expected;
  for (long i = 1; i <= 6; ++i) expected.insert(Constant::integer(i));
  expected.insert(Constant::model(m1));
  expected.insert(Constant::model(m2));
  CHECK(d.constants == expected);
}

TEST_CASE("ground instances of the win rule") {
  Program p = load_samples({"win_unit.dal"});
  const Rule& r = p.units[0].rules.at(0);
  UnitDomain d{"w", {Constant::integer(0), Constant::integer(1)}};
  auto gs = ground_rule(r, d);
  // One instance per value of x and y.
  REQUIRE(gs.size() == 4);
  std::set<Atom> heads;
  for (const auto& g : gs) {
    heads.insert(g.head.atom);
    CHECK(g.head.sign == Sign::Pos);
    CHECK(is_ground(g.body));
  }
  CHECK(heads == std::set<Atom>{A("win", {0}), A("win", {1})});

  // Combined, the local y becomes a 2-way disjunction per head.
  ExpandedUnit u = unit_from(p, "win_unit");
  u.constants = {Constant::integer(0), Constant::integer(1)};
  CompletedUnit cu = cmpl(u);
  std::vector<GroundRule> comb;
  for (const auto& cr : cu.unit.rules)
    if (cr.head.name == "win")
      for (auto& g : ground_rule(cr, d)) comb.push_back(g);
  REQUIRE(comb.size() == 2);
  for (const auto& g : comb) {
    REQUIRE(g.body.is<OrF>());
    CHECK(g.body.as<OrF>().parts.size() == 2);
  }
}

TEST_CASE("facts ground to themselves") {
  Rule fact = parse_program("kunit u:\n  move(1,0)\n").units[0].rules.at(0);
  auto gs = ground_rule(fact, UnitDomain{"u", {Constant::integer(0), Constant::integer(1)}});
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].head == Literal{A("move", {1, 0}), Sign::Pos});
  CHECK(is_true_const(gs[0].body));
}

TEST_CASE("universal quantifiers become conjunctions") {
  Rule r = parse_program("kunit u:\n  q <- each x | p(x)\n").units[0].rules.at(0);
  auto gs = ground_rule(r, UnitDomain{"u", {Constant::integer(1), Constant::integer(2)}});
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].body == make_and({ground_atom("p", {1}), ground_atom("p", {2})}));
}

TEST_CASE("a completion head grounds to a negative literal") {
  Rule r = parse_program("kunit u:\n  p(1)\n").units[0].rules.at(0);
  r.head = PredRef::truth("p", TruthValue::F);
  auto gs = ground_rule(r, UnitDomain{"u", {Constant::integer(1)}});
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].head.sign == Sign::Neg);
}

TEST_CASE("instance count is domain size to the number of free variables") {
  std::mt19937 rng(3);
  for (int n = 0; n < 300; ++n) {
    std::string text = randprog::generate(rng).text("r");
    INFO(text);
    Program p = parse_program(text);
    ExpandedUnit u = load_program(p)[0];
    UnitDomain d = domain_of(u, {});
    for (const auto& r : u.rules) {
      auto gs = ground_rule(r, d);
      auto expected = static_cast<std::size_t>(std::pow(d.constants.size(), free_vars(r).size()));
      CHECK(gs.size() == expected);
      for (const auto& g : gs) CHECK(is_ground(g.body));
    }
  }
}

TEST_CASE("grounding commutes with quantifier-domain desugaring") {
  std::vector<Constant> dom = ints({1, 2});
  Signature sig{{"win", 1}, {"move", 2}};
  for (Quantifier q : {Quantifier::Exists, Quantifier::Forall}) {
    Formula body = make_atom(PredRef::plain("move"), {Term::var("x"), Term::var("x")});
    Formula sugared{QuantF{q, {"x"}, body, PredRef::plain("win")}, {}};
    Formula guard = make_atom(PredRef::plain("win"), {Term::var("x")});
    Formula manual = q == Quantifier::Exists ? make_exists({"x"}, make_and({guard, body}))
                                             : make_forall({"x"}, make_or({make_not(guard), body}));
    Formula g1 = ground_formula(desugar_quantifier_domain(sugared, &sig), {}, dom);
    Formula g2 = ground_formula(manual, {}, dom);
    std::vector<Atom> atoms{A("win", {1}), A("win", {2}), A("move", {1, 1}), A("move", {2, 2})};
    for (int code = 0; code < 81; ++code) {
      Interpretation i;
      int c = code;
      for (const auto& a : atoms) {
        if (c % 3 == 0) i.add_true(a);
        if (c % 3 == 1) i.add_false(a);
        c /= 3;
      }
      CHECK(eval3(g1, i) == eval3(g2, i));
    }
  }
}

TEST_CASE("tuples_of enumerates in order") {
  auto ts = tuples_of(ints({1, 2}), 2);
  REQUIRE(ts.size() == 4);
  CHECK(ts[0] == ints({1, 1}));
  CHECK(ts[3] == ints({2, 2}));
  CHECK(tuples_of(ints({1, 2}), 0).size() == 1);
  CHECK(tuples_of({}, 1).empty());
}
