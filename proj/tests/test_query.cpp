#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>

#include "../tests/support/fixtures.hpp"
#include "cledger/query.hpp"

using namespace cledger;
using fixtures::tr;

TEST_CASE("contract spec loader") {
  SUBCASE("insurance fixture loads and matches the programmatic automaton") {
    auto c = load_contract_spec_file(std::string(FIXTURE_DIR) + "/insurance.json");
    auto ref = fixtures::insurance_contract();
    CHECK(c->id() == "Cd");
    CHECK(c->legal().states == ref->legal().states);
    CHECK(c->legal().resources == ref->legal().resources);
    CHECK(c->legal().rho == ref->legal().rho);
    CHECK(c->legal().finals == ref->legal().finals);
    CHECK(c->legal().transitions.size() == 10);
    CHECK(c->legal().initialSoA == ref->legal().initialSoA);
    CHECK(c->exec().states.size() == ref->exec().states.size());
  }
  SUBCASE("missing keys are reported") {
    CHECK_THROWS_AS(load_contract_spec("{}"), SpecError);
    CHECK_THROWS_AS(load_contract_spec("not json"), SpecError);
  }
  SUBCASE("bad final verdicts are reported") {
    CHECK_THROWS_WITH_AS(
        load_contract_spec(R"({"id":"X","resources":["r"],"events":[],)"
                           R"("actors":[],"states":["S"],"initial":"S",)"
                           R"("actions":{},"finals":{"S":"WAT"},)"
                           R"("transitions":[],"timeouts":[],)"
                           R"("initial_allocations":{}})"),
        doctest::Contains("WAT"), SpecError);
  }
  SUBCASE("semantic failures surface as InvalidContract") {
    CHECK_THROWS_AS(
        load_contract_spec(R"({"id":"X","resources":["x"],"events":[],)"
                           R"("actors":["k"],"states":["S","F"],"initial":"S",)"
                           R"("actions":{"a":{"resource":"x","from":"TOP","to":"k"}},)"
                           R"("finals":{},)"
                           R"("transitions":[{"from":"S","to":"F","actions":["a"]},)"
                           R"({"from":"F","to":"S","actions":["a"]}],)"
                           R"("timeouts":[],"initial_allocations":{}})"),
        InvalidContract);
  }
}

TEST_CASE("formula parsing") {
  SUBCASE("regression-shaped query") {
    auto f = parse_formula("EXF (PAST (app((o,TOP,customer),5)) => chi(9))");
    REQUIRE(f->kind == FormulaKind::DiamondUp);
    REQUIRE(f->lhs->kind == FormulaKind::Implies);
    CHECK(f->lhs->lhs->kind == FormulaKind::DiamondDown);
    CHECK(f->lhs->lhs->lhs->kind == FormulaKind::AtomAppAt);
    CHECK(f->lhs->lhs->lhs->name == "(o,TOP,customer)");
    CHECK(f->lhs->lhs->lhs->t == 5);
    CHECK(f->lhs->rhs->kind == FormulaKind::AtomChi);
    CHECK(f->lhs->rhs->t == 9);
  }
  SUBCASE("negated phi") {
    auto f = parse_formula("not phi(3)");
    REQUIRE(f->kind == FormulaKind::Not);
    CHECK(f->lhs->kind == FormulaKind::AtomPhi);
    CHECK(f->lhs->t == 3);
  }
  SUBCASE("interval conjunction of hol atoms") {
    auto f = parse_formula("hol(Eiffel, a, 4) and hol(Eiffel, a, 5)");
    REQUIRE(f->kind == FormulaKind::And);
    CHECK(f->lhs->kind == FormulaKind::AtomHol);
    CHECK(f->lhs->name == "Eiffel");
    CHECK(f->lhs->actor == "a");
    CHECK(f->lhs->t == 4);
    CHECK(f->rhs->t == 5);
  }
  SUBCASE("precedence: not > and > or > =>") {
    auto f = parse_formula("not true and false or true => false");
    REQUIRE(f->kind == FormulaKind::Implies);
    REQUIRE(f->lhs->kind == FormulaKind::Or);
    REQUIRE(f->lhs->lhs->kind == FormulaKind::And);
    CHECK(f->lhs->lhs->lhs->kind == FormulaKind::Not);
  }
  SUBCASE("=> is right associative") {
    auto f = parse_formula("true => false => true");
    REQUIRE(f->kind == FormulaKind::Implies);
    CHECK(f->rhs->kind == FormulaKind::Implies);
  }
  SUBCASE("modalities bind tighter than binary connectives") {
    auto f = parse_formula("EXF true and PAST false");
    REQUIRE(f->kind == FormulaKind::And);
    CHECK(f->lhs->kind == FormulaKind::DiamondUp);
    CHECK(f->rhs->kind == FormulaKind::DiamondDown);
  }
  SUBCASE("map operators take a quoted name") {
    auto f = parse_formula("exists \"nu_l:Cd\" phi(2)");
    REQUIRE(f->kind == FormulaKind::ExistsAlong);
    CHECK(f->name == "nu_l:Cd");
    CHECK(parse_formula("forall \"nu_e:Cd\" true")->kind == FormulaKind::ForallAlong);
    CHECK(parse_formula("pullback \"nu_le:Cd\" true")->kind == FormulaKind::Pullback);
  }
  SUBCASE("applast and bc") {
    auto f = parse_formula("applast((x,k1,k2),3) or bc(Cd)");
    CHECK(f->lhs->kind == FormulaKind::AtomAppLast);
    CHECK(f->rhs->kind == FormulaKind::AtomBc);
    CHECK(f->rhs->name == "Cd");
  }
  SUBCASE("syntax errors carry position and expectation") {
    try {
      parse_formula("chi(");
      FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
      CHECK(e.position() == 4);
      CHECK(e.expected() == "number");
    }
    CHECK_THROWS_AS(parse_formula("true )"), SyntaxError);
    CHECK_THROWS_AS(parse_formula("app(x)"), SyntaxError);
  }
  SUBCASE("unknown identifiers are distinguished from syntax errors") {
    CHECK_THROWS_AS(parse_formula("frobnicate(3)"), UnknownIdentifier);
  }
}

TEST_CASE("print/parse round-trip") {
  std::vector<std::string> samples = {
      "true",
      "false",
      "not phi(3)",
      "EXF (PAST app((o,TOP,customer),5) => chi(9))",
      "(hol(Eiffel,a,4) and hol(Eiffel,a,5))",
      "ALF NXE PVA ALLP PVE NXA applast((x,k1,k2),7)",
      "exists \"nu_l:Cd\" (phi(2) and chi(4))",
      "forall \"nu_e:Cd\" pullback \"nu_le:Cd\" bc(Cd)",
      "oneof(\"\",\"(x,a,b) (y,b,c)\")",
      "(true => (false or not app((m,bob,alice))))",
  };
  for (const auto& s : samples) {
    auto ast = parse_formula(s);
    auto printed = print_formula(ast);
    auto reparsed = parse_formula(printed);
    CHECK(equal(ast, reparsed));
    CHECK(print_formula(reparsed) == printed);
  }
}

TEST_CASE("random formula round-trip fuzz") {
  std::mt19937 rng(41);
  std::function<FormulaPtr(int)> gen = [&](int depth) -> FormulaPtr {
    int pick = std::uniform_int_distribution<int>(0, depth > 0 ? 13 : 5)(rng);
    switch (pick) {
      case 0: return Formula::make_true();
      case 1: return Formula::make_false();
      case 2: return Formula::chi(std::uniform_int_distribution<int>(0, 9)(rng));
      case 3: return Formula::phi(std::uniform_int_distribution<int>(0, 9)(rng));
      case 4: return Formula::app(tr("x", "k1", "k2"));
      case 5: return Formula::bc("Cd");
      case 6: return Formula::negation(gen(depth - 1));
      case 7: return Formula::conjunction(gen(depth - 1), gen(depth - 1));
      case 8: return Formula::disjunction(gen(depth - 1), gen(depth - 1));
      case 9: return Formula::implication(gen(depth - 1), gen(depth - 1));
      case 10:
        return Formula::modal(FormulaKind::DiamondUp, gen(depth - 1));
      case 11:
        return Formula::modal(FormulaKind::BoxUp, gen(depth - 1));
      case 12:
        return Formula::along(FormulaKind::ExistsAlong, "nu_l:Cd", gen(depth - 1));
      default:
        return Formula::app_at(tr("y", "TOP", "k"),
                               std::uniform_int_distribution<int>(1, 5)(rng));
    }
  };
  for (int i = 0; i < 300; ++i) {
    auto ast = gen(4);
    auto printed = print_formula(ast);
    CHECK(equal(ast, parse_formula(printed)));
  }
}

TEST_CASE("run_query goldens on the honoured run") {
  auto reg = fixtures::insurance_registry();
  auto l = fixtures::make_ledger(fixtures::honoured_run());

  SUBCASE("bundle completion is reachable from step 3") {
    QueryAst ast;
    ast.formula = parse_formula("EXF bc(Cd)");
    ast.at = 3;
    ast.horizon = 6;
    auto res = run_query(l, reg, {"Cd"}, ast);
    CHECK(res.verdict);
    CHECK(!res.witnesses.empty());
  }
  SUBCASE("interval holding of damageDoc by insurer over [4..9]") {
    std::string q;
    for (int t = 4; t <= 9; ++t) {
      if (!q.empty()) q += " and ";
      q += "hol(damageDoc,insurer," + std::to_string(t) + ")";
    }
    QueryAst ast;
    ast.formula = parse_formula(q);
    auto res = run_query(l, reg, {"Cd"}, ast);
    CHECK(res.verdict);
  }
  SUBCASE("hol is false before the hand-over") {
    QueryAst ast;
    ast.formula = parse_formula("hol(damageDoc,insurer,3)");
    auto res = run_query(l, reg, {"Cd"}, ast);
    CHECK(!res.verdict);
  }
  SUBCASE("phi distinguishes recorded steps") {
    QueryAst ast;
    ast.formula = parse_formula("phi(9)");
    auto res = run_query(l, reg, {"Cd"}, ast);
    CHECK(res.verdict);
    ast.formula = parse_formula("not phi(9)");
    ast.at = 4;
    // The 4-prefix is a strict prefix of the established 9-trace, so it still
    // belongs to E_9.
    CHECK(!run_query(l, reg, {"Cd"}, ast).verdict);
  }
}

TEST_CASE("contract_state_at reports the paper's states") {
  auto c = fixtures::insurance_contract();
  auto l = fixtures::make_ledger(fixtures::honoured_run());

  auto at8 = contract_state_at(l, *c, 8);
  CHECK(at8.legalState == "Accepted");
  CHECK(at8.execState == "Accepted/{dropOldPrem,refund}");
  CHECK(!at8.outcome.has_value());

  auto at9 = contract_state_at(l, *c, 9);
  CHECK(at9.legalState == "Refunded");
  CHECK(at9.execState == "Refunded");
  REQUIRE(at9.outcome.has_value());
  CHECK(*at9.outcome == Outcome::Honoured);

  auto at0 = contract_state_at(l, *c, 0);
  CHECK(at0.legalState == "In");
}

TEST_CASE("hypothetical reasoning: not yet reached but reachable from a past") {
  auto reg = fixtures::insurance_registry();
  auto run = fixtures::honoured_run();
  // Timeout fires after the claim: Out0 is reached, the offer never happened,
  // but a past state could still have evolved toward it.
  auto l = fixtures::make_ledger({run[0], run[1], run[2], tr("out0", "TOP", "BOT")});
  QueryAst ast;
  ast.formula = parse_formula(
      "not app((offer,TOP,customer)) and PAST EXF app((offer,TOP,customer))");
  ast.horizon = 6;
  auto res = run_query(l, reg, {"Cd"}, ast);
  CHECK(res.verdict);

  // The same formula fails when the offer actually happened.
  auto l2 = fixtures::make_ledger(run);
  CHECK(!run_query(l2, reg, {"Cd"}, ast).verdict);
}

TEST_CASE("audit_pattern finds laundering-style repetitions") {
  AppendMeta meta;
  LedgerState l;
  auto put = [&](const Transfer& t) {
    l = append_record(l, "M", t, meta, AppendMode::Permissive);
  };
  put(tr("m", "bob", "alice"));    // 0
  put(tr("n", "x", "y"));          // 1
  put(tr("m", "alice", "george")); // 2
  put(tr("m", "george", "bob"));   // 3
  put(tr("m", "bob", "alice"));    // 4
  put(tr("m", "alice", "george")); // 5

  auto hits = audit_pattern(l, tr("m", "bob", "alice"), tr("m", "alice", "george"));
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].firstIndex == 0);
  CHECK(hits[0].thenIndex == 2);
  CHECK(hits[1].firstIndex == 4);
  CHECK(hits[1].thenIndex == 5);

  CHECK(audit_pattern(l, tr("z", "a", "b"), tr("m", "alice", "george")).empty());
}

TEST_CASE("query verdicts agree with direct library evaluation") {
  auto reg = fixtures::insurance_registry();
  auto l = fixtures::make_ledger(fixtures::honoured_run());
  auto lu = std::make_shared<LedgerUniverse>(l, reg, std::set<std::string>{"Cd"}, 3);
  LedgerEvalContext lec(lu);

  for (const std::string& q :
       {std::string("EXF bc(Cd)"), std::string("phi(4)"),
        std::string("PAST app((claim,TOP,insurer))"),
        std::string("hol(oldPrem,BOT,9)")}) {
    QueryAst ast;
    ast.formula = parse_formula(q);
    ast.horizon = 3;
    auto viaQuery = run_query(l, reg, {"Cd"}, ast);
    bool direct = eval_formula(ast.formula, lu->established(9), lec.ctx());
    CHECK(viaQuery.verdict == direct);
  }
}
