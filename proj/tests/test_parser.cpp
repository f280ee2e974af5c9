#include <catch_amalgamated.hpp>

#include <random>

#include "random_programs.hpp"
#include "support.hpp"

using namespace dalog;
using namespace dalog::test;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Parse;
}

Formula body_of(const std::string& rule) {
  Program p = parse_program("kunit u:\n  " + rule + "\n");
  REQUIRE(p.units.size() == 1);
  REQUIRE(p.units[0].rules.size() == 1);
  REQUIRE(p.units[0].rules[0].body);
  return *p.units[0].rules[0].body;
}

Formula atom(const std::string& p, std::vector<Term> args) { return make_atom(PredRef::plain(p), std::move(args)); }
Term v(const char* n) { return Term::var(n); }
Term c(long n) { return Term::constant(Constant::integer(n)); }

bool all_spans_set(const Formula& f) {
  bool ok = f.span.line > 0;
  std::visit(overloaded{
                 [&](const AtomF&) {},
                 [&](const EqF&) {},
                 [&](const NotF& n) { ok = ok && all_spans_set(*n.body); },
                 [&](const AndF& a) {
                   for (const auto& p : a.parts) ok = ok && all_spans_set(p);
                 },
                 [&](const OrF& o) {
                   for (const auto& p : o.parts) ok = ok && all_spans_set(p);
                 },
                 [&](const QuantF& q) { ok = ok && all_spans_set(*q.body); },
             },
             f.node);
  return ok;
}

}  // namespace

TEST_CASE("a rule parses into head and body") {
  Program p = parse_program("kunit w: win(x) <- move(x,y), not win(y)");
  REQUIRE(p.units.size() == 1);
  const KUnitDef& w = p.units[0];
  CHECK(w.name == "w");
  REQUIRE(w.rules.size() == 1);
  const Rule& r = w.rules[0];
  CHECK(r.head == PredRef::plain("win"));
  CHECK(r.head_args == std::vector<Term>{v("x")});
  REQUIRE(r.body);
  CHECK(*r.body == make_and({atom("move", {v("x"), v("y")}), make_not(atom("win", {v("y")}))}));
}

TEST_CASE("an empty unit has no rules") {
  Program p = parse_program("kunit e:");
  REQUIRE(p.units.size() == 1);
  CHECK(p.units[0].rules.empty());
  CHECK(p.units[0].metas.empty());
  CHECK(p.units[0].uses.empty());
}

TEST_CASE("malformed input reports the offending token") {
  try {
    parse_program("kunit w: win(x <-", "w.dal");
    FAIL("parsed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    REQUIRE(e.span());
    CHECK(e.span()->line == 1);
    CHECK(e.span()->col == 16);
    CHECK(e.span()->file == "w.dal");
  }
  CHECK(kind_of([] { parse_program("win(x) <- move(x)"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_program("kunit u:\n  p <- some x q(x)"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_program("kunit u:\n  p <- each x in q"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_program("kunit u:\n  p <- some x, x | q(x)"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_program("kunit u:\n  p(x) q(x)"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_program("kunit u:\nkunit u:"); }) == ErrorKind::DuplicateUnit);
}

TEST_CASE("set definitions become facts") {
  Program p = parse_program("kunit d:\n  move = {(1,1), (2,3), (3,1)}\n");
  const auto& rules = p.units[0].rules;
  REQUIRE(rules.size() == 3);
  CHECK(rules[0].is_fact());
  CHECK(rules[0].head_args == std::vector<Term>{c(1), c(1)});
  CHECK(rules[1].head_args == std::vector<Term>{c(2), c(3)});
  CHECK(rules[2].head_args == std::vector<Term>{c(3), c(1)});

  CHECK(parse_program("kunit d:\n  p = {}\n").units[0].rules.empty());
  CHECK(parse_program("kunit d:\n  p = {1, 2}\n").units[0].rules.size() == 2);

  CHECK(kind_of([] { parse_program("kunit d:\n  move = {(1,2)}\n  move(x,y) <- edge(x,y)\n"); }) ==
        ErrorKind::MixedDefinition);
  CHECK(kind_of([] { parse_program("kunit d:\n  move(3,3)\n  move = {(1,2)}\n"); }) == ErrorKind::MixedDefinition);
  CHECK(kind_of([] { parse_program("kunit d:\n  move = {(1,2)}\n  move = {(2,2)}\n"); }) ==
        ErrorKind::MixedDefinition);
  CHECK(kind_of([] { parse_program("kunit d:\n  move = {(x,2)}\n"); }) == ErrorKind::NonConstant);
}

TEST_CASE("quantifier domains desugar") {
  CHECK(body_of("p <- some x in win | move(x,x)") == body_of("p <- some x | win(x) and move(x,x)"));
  CHECK(body_of("p <- each x in win | move(x,x)") == body_of("p <- each x | not win(x) or move(x,x)"));
  CHECK(body_of("p <- some x in win") == body_of("p <- some x | win(x)"));
  CHECK(body_of("p <- some x in win | move(x,x)") ==
        make_exists({"x"}, make_and({atom("win", {v("x")}), atom("move", {v("x"), v("x")})})));

  Formula plain = body_of("p <- some x | q(x) or r");
  CHECK(desugar_quantifier_domain(plain) == plain);
}

TEST_CASE("quantifier domain arity is checked") {
  CHECK(kind_of([] { parse_program("kunit u:\n  q(1,2)\n  p <- some x in q | true\n"); }) == ErrorKind::DomainArity);
}

TEST_CASE("precedence: not binds tighter than and, and than or") {
  Formula f = body_of("p <- a or b and not c");
  CHECK(f == make_or({atom("a", {}), make_and({atom("b", {}), make_not(atom("c", {}))})}));
  Formula g = body_of("p <- (a or b), c");
  CHECK(g == make_and({make_or({atom("a", {}), atom("b", {})}), atom("c", {})}));
  Formula h = body_of("p <- some x | q(x) or r");
  CHECK(h == make_exists({"x"}, make_or({atom("q", {v("x")}), atom("r", {})})));
  Formula k = body_of("p <- (some x | q(x)) or r");
  CHECK(k == make_or({make_exists({"x"}, atom("q", {v("x")})), atom("r", {})}));
}

TEST_CASE("terms and reference predicates") {
  Formula f = body_of("p(x) <- q(x, -3, 'abc'), win.U(x), k.CS(m), m.win(x), r.F(x), r.T(x)");
  REQUIRE(f.is<AndF>());
  const auto& parts = f.as<AndF>().parts;
  REQUIRE(parts.size() == 6);
  CHECK(parts[0].as<AtomF>().args[1] == c(-3));
  CHECK(parts[0].as<AtomF>().args[2] == Term::constant(Constant::symbol("abc")));
  CHECK(parts[1].as<AtomF>().pred == PredRef::truth("win", TruthValue::U));
  CHECK(parts[2].as<AtomF>().pred == PredRef::cs("k"));
  CHECK(parts[3].as<AtomF>().pred == PredRef::proj(v("m"), "win"));
  CHECK(parts[4].as<AtomF>().pred == PredRef::truth("r", TruthValue::F));
  CHECK(parts[5].as<AtomF>().pred == PredRef::truth("r", TruthValue::T));
}

TEST_CASE("a rule may not wrap outside brackets") {
  CHECK(kind_of([] { parse_program("kunit u:\n  q(x) <- p(x) and\n    p(x)\n"); }) == ErrorKind::Parse);
}

TEST_CASE("a rule may wrap inside parentheses") {
  Program p = parse_program(
      "-- a comment\n"
      "kunit u:   -- trailing\n"
      "  p(1); p(2)\n"
      "  q(x) <- (p(x) and\n"
      "    p(x))\n"
      "  s = {(1),\n"
      "       (2)}\n");
  REQUIRE(p.units.size() == 1);
  CHECK(p.units[0].rules.size() == 5);
}

TEST_CASE("meta-constraints, uses and restricted parameters") {
  Program p = parse_program(
      "kunit a (reach, step):\n"
      "  reach(x,y) <- step(x,y)\n"
      "kunit b:\n"
      "  certain(p)\n  open(q)\n  complete(r)\n  closed(s)\n"
      "  use a (reach = conn(m), step = link)\n"
      "  use a ()\n");
  REQUIRE(p.units.size() == 2);
  CHECK(p.units[0].exported == std::set<std::string>{"reach", "step"});
  CHECK_FALSE(p.units[1].exported);
  const auto& metas = p.units[1].metas;
  REQUIRE(metas.size() == 4);
  CHECK(metas[0].kind == MetaKind::Certain);
  CHECK(metas[1].kind == MetaKind::Open);
  CHECK(metas[2].kind == MetaKind::Complete);
  CHECK(metas[3].kind == MetaKind::Closed);
  const auto& uses = p.units[1].uses;
  REQUIRE(uses.size() == 2);
  CHECK(uses[0].target == "a");
  REQUIRE(uses[0].bindings.size() == 2);
  CHECK(uses[0].bindings[0] == UseBinding{"reach", "conn", {v("m")}});
  CHECK(uses[0].bindings[1] == UseBinding{"step", "link", {}});
  CHECK(uses[1].bindings.empty());
}

TEST_CASE("every parsed node carries a span") {
  Program p = load_samples({"win_unit.dal", "cmp_unit.dal", "win_set_unit.dal", "draw_unit.dal"});
  for (const auto& u : p.units) {
    CHECK(u.span.line > 0);
    for (const auto& r : u.rules) {
      CHECK(r.span.line > 0);
      if (r.body) CHECK(all_spans_set(*r.body));
    }
    for (const auto& m : u.metas) CHECK(m.span.line > 0);
    for (const auto& use : u.uses) CHECK(use.span.line > 0);
  }
}

TEST_CASE("printing then parsing is the identity on the samples") {
  for (const char* f : {"win_unit.dal", "path_unit.dal", "win_path_unit.dal", "draw_unit.dal", "cmp_unit.dal",
                        "win_set_unit.dal", "cycles.dal", "restricted.dal", "circular.dal"}) {
    INFO(f);
    Program p = load_samples({f});
    std::string printed = to_string(p);
    Program again = parse_program(printed);
    CHECK(again == p);
    CHECK(to_string(again) == printed);
  }
}

TEST_CASE("printing then parsing is the identity on random programs") {
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    std::string text = randprog::generate(rng).text("r", i % 2 ? "closed" : "");
    Program p = parse_program(text);
    std::string printed = to_string(p);
    INFO(text << "\n--\n" << printed);
    CHECK(parse_program(printed) == p);
  }
}

TEST_CASE("printing nested formulas keeps their structure") {
  for (const char* rule : {"p <- not (a or b)", "p <- not (a, b)", "p <- (some x | q(x)), r", "p <- a or (b or c)",
                           "p <- each x | (q(x) or r(x)) and s", "p <- not not a", "p <- true", "p <- false",
                           "p <- not some x | q(x)"}) {
    INFO(rule);
    Program p = parse_program(std::string("kunit u:\n  ") + rule + "\n");
    CHECK(parse_program(to_string(p)) == p);
  }
}

TEST_CASE("desugaring introduces no predicates") {
  Program p = load_samples({"win_unit.dal", "cmp_unit.dal"});
  const KUnitDef* cmp = p.find("cmp_unit");
  REQUIRE(cmp);
  std::set<std::string> preds;
  for (const auto& r : cmp->rules)
    if (r.body) visit_atoms(*r.body, [&](const AtomF& a, bool) { preds.insert(to_string(a.pred)); });
  CHECK(preds == std::set<std::string>{"win.U", "win_unit1.CS", "m.win"});
}

TEST_CASE("query atoms") {
  QueryAtom q = parse_query_atom("win(1)");
  CHECK(q.pred == "win");
  REQUIRE(q.args.size() == 1);
  CHECK(*q.args[0].value == Constant::integer(1));

  CHECK(parse_query_atom("prolog").args.empty());

  QueryAtom m = parse_query_atom("valid_win(1, win_unit2.CS[1])");
  REQUIRE(m.args.size() == 2);
  CHECK_FALSE(m.args[1].value);
  CHECK(m.args[1].model_unit == "win_unit2");
  CHECK(m.args[1].model_index == 1);

  CHECK(*parse_query_atom("p('a')").args[0].value == Constant::symbol("a"));
  for (const char* bad : {"win(1", "win(x)", "", "win(1) extra", "(1)", "k.CS[a]"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_query_atom(bad), Error);
  }
}
