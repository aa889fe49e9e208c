// Expression grammar: lexing, parsing, canonical printing, and the factories.
#include <set>
#include <string>
#include <vector>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/rng.hpp"
#include "alphadesk/dsl/expr.hpp"
#include "alphadesk/dsl/parser.hpp"
#include "alphadesk/dsl/registry.hpp"
#include "alphadesk/miner/config.hpp"
#include "alphadesk/miner/generate.hpp"
#include "doctest.h"

using namespace alphadesk;
using dsl::parse;
using dsl::print;

TEST_SUITE_BEGIN("dsl_parse");

TEST_CASE("the canonical long-short example survives a verbatim round-trip") {
  const std::string text = "-ts_corr(rank(close), rank(volume), 50)";
  const auto expr = parse(text);
  CHECK(print(expr) == text);
  CHECK(expr->name == "neg");
  const auto& corr = *expr->children[0];
  CHECK(corr.name == "ts_corr");
  CHECK(corr.param.window == 50);
  REQUIRE(corr.children.size() == 2);
  CHECK(corr.children[0]->name == "rank");
  CHECK(corr.children[1]->children[0]->name == "volume");
}

TEST_CASE("infix arithmetic parses to named calls with standard precedence") {
  // [DERIVED] each case pairs an infix input with its canonical call form.
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"close + volume * open", "add(close, mul(volume, open))"},
      {"close - volume - open", "sub(sub(close, volume), open)"},
      {"close / volume * open", "mul(safe_div(close, volume), open)"},
      {"(0 + close) + volume", ""},  // grouping is not in the grammar
      {"-close * volume", "mul(-close, volume)"},
      {"-close + volume", "add(-close, volume)"},
      {"- - close", "--close"},
      {"rank(close) - rank(volume)", "sub(rank(close), rank(volume))"},
      {"2 * close", "mul(2, close)"},
  };
  for (const auto& [input, expected] : cases) {
    CAPTURE(input);
    if (expected.empty()) {
      CHECK_THROWS_AS((void)parse(input), DataError);
      continue;
    }
    CHECK(print(parse(input)) == expected);
    // The canonical form re-parses to itself (fixed point).
    CHECK(print(parse(expected)) == expected);
  }
}

TEST_CASE("negative literals fold into constants") {
  const auto e = parse("-0.5");
  CHECK(e->kind == dsl::NodeKind::constant);
  CHECK(e->value == -0.5);
  CHECK(print(e) == "-0.5");
  // Folding happens through the factory, so neg(constant) never nests.
  const auto f = dsl::neg(dsl::constant(2.0));
  CHECK(f->kind == dsl::NodeKind::constant);
  CHECK(f->value == -2.0);
  // But neg over a non-constant stays a node.
  const auto g = dsl::neg(dsl::meta("close"));
  CHECK(g->name == "neg");
  CHECK(print(g) == "-close");
}

TEST_CASE("scientific and decimal number forms parse") {
  CHECK(parse("1e3")->value == 1000.0);
  CHECK(parse("2.5E-2")->value == 0.025);
  CHECK(parse("0.25")->value == 0.25);
  CHECK_THROWS_AS((void)parse("1."), DataError);
  CHECK_THROWS_AS((void)parse("1e"), DataError);
  CHECK_THROWS_AS((void)parse(".5"), DataError);
}

TEST_CASE("parse errors carry the byte offset of the problem") {
  const auto offset_of = [](const std::string& text) -> std::string {
    try {
      (void)parse(text);
      return "<no error>";
    } catch (const DataError& e) {
      return e.what();
    }
  };
  // [TRIVIAL] the prefix is pinned; the offset points at the offending token.
  CHECK(offset_of("rank(close))").find("parse error at offset 11") == 0);
  CHECK(offset_of("rank(").find("parse error at offset 5") == 0);
  CHECK(offset_of("?close").find("parse error at offset 0") == 0);
  CHECK(offset_of("close + ").find("parse error at offset 8") == 0);
}

TEST_CASE("operator misuse is rejected") {
  CHECK_THROWS_AS((void)parse(""), DataError);
  CHECK_THROWS_AS((void)parse("nosuchop(close)"), DataError);
  CHECK_THROWS_AS((void)parse("rank(close, volume)"), DataError);   // arity 1
  CHECK_THROWS_AS((void)parse("add(close)"), DataError);            // arity 2
  CHECK_THROWS_AS((void)parse("ts_mean(close)"), DataError);        // missing window
  CHECK_THROWS_AS((void)parse("ts_mean(close, 1)"), DataError);     // window < 2
  CHECK_THROWS_AS((void)parse("ts_mean(close, 2.5)"), DataError);   // non-integer
  CHECK_THROWS_AS((void)parse("ts_mean(close, volume)"), DataError);
  CHECK_THROWS_AS((void)parse("winsorize(close, 0.5)"), DataError); // fraction cap
  CHECK_THROWS_AS((void)parse("winsorize(close, sector)"), DataError);
  CHECK_THROWS_AS((void)parse("group_rank(close, 3)"), DataError);  // group name
  CHECK_THROWS_AS((void)parse("rank close"), DataError);
}

TEST_CASE("factories enforce the same contracts as the parser") {
  CHECK_THROWS_AS((void)dsl::call("nosuchop", {dsl::meta("x")}), DataError);
  CHECK_THROWS_AS((void)dsl::call("rank", {}), DataError);
  CHECK_THROWS_AS((void)dsl::call("rank", {dsl::meta("a"), dsl::meta("b")}), DataError);
  CHECK_THROWS_AS((void)dsl::windowed("ts_mean", {dsl::meta("a")}, 1), DataError);
  // Parameterized ops demand their parameter and reject foreign kinds.
  CHECK_THROWS_AS((void)dsl::call("ts_mean", {dsl::meta("a")}), DataError);
  dsl::Param frac;
  frac.kind = dsl::ParamKind::fraction;
  frac.fraction = 0.7;
  CHECK_THROWS_AS((void)dsl::call("winsorize", {dsl::meta("a")}, frac), DataError);
}

TEST_CASE("required_fields collects meta leaves and group parameters") {
  const auto e = parse("group_demean(safe_div(close, ts_mean(volume, 5)), sector)");
  const auto fields = dsl::required_fields(*e);
  CHECK(fields == std::set<std::string>{"close", "volume", "sector"});
}

TEST_CASE("node_count and depth match hand counts") {
  const auto e = parse("-ts_corr(rank(close), rank(volume), 50)");
  // neg, ts_corr, rank, close, rank, volume.
  CHECK(dsl::node_count(*e) == 6);
  CHECK(dsl::depth(*e) == 4);
  CHECK(dsl::node_count(*parse("close")) == 1);
  CHECK(dsl::depth(*parse("close")) == 1);
}

TEST_CASE("structural equality is print equality") {
  const auto a = parse("add(rank(close), 0.5)");
  const auto b = parse("rank(close) + 0.5");
  CHECK(dsl::equal(a, b));
  CHECK(!dsl::equal(a, parse("add(rank(close), 0.25)")));
  CHECK(!dsl::equal(parse("ts_mean(close, 5)"), parse("ts_mean(close, 6)")));
  CHECK(!dsl::equal(parse("group_rank(close, sector)"), parse("group_rank(close, industry)")));
}

TEST_CASE("random expressions round-trip through print and parse") {
  // [DERIVED] property over the generator used by the search itself.
  miner::MinerConfig cfg;
  cfg.fields = {"close", "volume", "open", "sector"};
  for (const auto& info : dsl::OperatorRegistry::instance().all()) {
    cfg.operators.push_back(info.name);
  }
  RngStream rng(2024);
  for (int i = 0; i < 500; ++i) {
    auto stream = rng.derive(static_cast<std::uint64_t>(i));
    const auto e = miner::random_expr(cfg, stream);
    const std::string text = print(e);
    const auto back = parse(text);
    CHECK(dsl::equal(e, back));
    CHECK(print(back) == text);
  }
}

TEST_SUITE_END();
