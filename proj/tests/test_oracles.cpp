// Differential tests on random programs against the reference semantics in
// oracles.hpp, plus the consistency, model and termination properties.

#include <catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <string>

#include "properties.hpp"
#include "random_programs.hpp"

using namespace dalog;
using namespace dalog::test;

namespace {

constexpr int kPrograms = 500;

}  // namespace

TEST_CASE("certain programs match the stratified oracle and are 2-valued") {
  std::mt19937 rng(20240601);
  int checked = 0;
  while (checked < kPrograms) {
    randprog::RProgram p = randprog::generate(rng);
    auto strata = p.strata();
    if (!strata) continue;
    ++checked;
    std::string text = p.text("r");
    INFO(text);
    ProgramResult r = eval_text(text, EvalOptions{{}, true, {}});
    const UnitResult& u = r.at("r");
    for (const auto& [pred, arity] : u.unit().signature) CHECK(u.unit().meta_of(pred) == MetaKind::Certain);
    oracle::GProgram g = p.ground();
    auto perfect = oracle::stratified(g, p.atom_strata(*strata));
    REQUIRE(perfect);
    CHECK(engine_values(u) == two_valued(g, *perfect));
    CHECK(u.engine().undefined_count() == 0);
    CHECK(engine_models(u) == std::set<std::set<std::string>>{*perfect});
    CHECK(check_properties(u) == "");
  }
}

TEST_CASE("complete programs match the Fitting oracle") {
  std::mt19937 rng(7);
  for (int i = 0; i < kPrograms; ++i) {
    randprog::RProgram p = randprog::generate(rng);
    std::string text = p.text("r", "complete");
    INFO(text);
    ProgramResult r = eval_text(text, EvalOptions{{}, true, {}});
    const UnitResult& u = r.at("r");
    oracle::GProgram g = p.ground();
    CHECK(engine_values(u) == oracle::fitting(g));
    CHECK(engine_models(u) == oracle::supported_models(g));
    CHECK(check_properties(u) == "");
  }
}

TEST_CASE("closed programs match the well-founded and stable model oracles") {
  std::mt19937 rng(99);
  for (int i = 0; i < kPrograms; ++i) {
    randprog::RProgram p = randprog::generate(rng);
    std::string text = p.text("r", "closed");
    INFO(text);
    ProgramResult r = eval_text(text, EvalOptions{{}, true, {}});
    const UnitResult& u = r.at("r");
    oracle::GProgram g = p.ground();
    CHECK(engine_values(u) == oracle::wfs(g));
    CHECK(engine_models(u) == oracle::stable_models(g));
    CHECK(check_properties(u) == "");
  }
}

TEST_CASE("programs with default meta-constraints satisfy the model properties") {
  std::mt19937 rng(31337);
  for (int i = 0; i < kPrograms; ++i) {
    randprog::RProgram p = randprog::generate(rng);
    std::string text = p.text("r");
    INFO(text);
    ProgramResult r = eval_text(text, EvalOptions{{}, true, {}});
    CHECK(check_properties(r.at("r")) == "");
  }
}

TEST_CASE("open programs leave underived atoms undefined") {
  std::mt19937 rng(4242);
  for (int i = 0; i < 200; ++i) {
    randprog::RProgram p = randprog::generate(rng);
    std::string text = p.text("r", "open");
    INFO(text);
    ProgramResult r = eval_text(text, EvalOptions{{}, true, {}});
    const UnitResult& u = r.at("r");
    CHECK(u.founded().false_atoms().empty());
    CHECK(check_properties(u) == "");
  }
}
