// Persistence layer: content-addressed ids, append-only commits with
// dependency validation, topological scheduling, and the JSONL format.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/io.hpp"
#include "alphadesk/common/rng.hpp"
#include "alphadesk/dsl/parser.hpp"
#include "alphadesk/factorbase/factorbase.hpp"
#include "alphadesk/metrics/report.hpp"
#include "doctest.h"

using namespace alphadesk;

namespace {

factorbase::FactorRecord simple_record(const std::string& expr,
                                       const std::string& name) {
  metrics::FactorReport report;
  report.ic_mean = 0.05;
  report.icir = 1.1;
  report.n_dates_evaluated = 40;
  return factorbase::make_record(expr, name, report);
}

}  // namespace

TEST_SUITE_BEGIN("factorbase");

TEST_CASE("record ids are the first 128 bits of the content hash") {
  // Pinned against the well-known digests of "abc" and the empty string:
  //   sha256("abc") = ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad
  //   sha256("")    = e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855
  CHECK(factorbase::record_id("abc") == "ba7816bf8f01cfea414140de5dae2223");
  CHECK(factorbase::record_id("") == "e3b0c44298fc1c149afbf4c8996fb924");
}

TEST_CASE("make_record canonicalizes and derives dependencies") {
  auto rec = simple_record("-ts_corr(rank(close),rank(volume),50)", "pv_rev");
  CHECK(rec.expr_text == "-ts_corr(rank(close), rank(volume), 50)");
  CHECK(rec.id == factorbase::record_id(rec.expr_text));
  CHECK(rec.id.size() == 32);
  CHECK(rec.depends_on == std::set<std::string>{"close", "volume"});
  CHECK(rec.name == "pv_rev");
  CHECK(rec.ic_mean == 0.05);
  CHECK(rec.n_dates == 40);

  // Structurally equal expressions share an id regardless of spelling.
  auto other = simple_record("neg(ts_corr(rank(close), rank(volume), 50))",
                             "same_thing");
  CHECK(other.id == rec.id);
}

TEST_CASE("commit assigns ids, resolves lookups, and rejects duplicates") {
  factorbase::FactorBase base;
  auto rec = simple_record("rank(close)", "r1");
  rec.id.clear();  // commit must fill it back in
  std::string id = base.commit(rec);
  CHECK(id == factorbase::record_id("rank(close)"));
  CHECK(base.size() == 1);
  REQUIRE(base.find(id) != nullptr);
  CHECK(base.find(id)->name == "r1");
  CHECK(base.find("deadbeefdeadbeefdeadbeefdeadbeef") == nullptr);

  // The same structure under different spelling is the same factor.
  auto dup = simple_record("rank( close )", "respelled");
  CHECK_THROWS_WITH_AS(base.commit(dup), doctest::Contains("duplicate factor"),
                       DataError);
}

TEST_CASE("commit validates integrity, status, and dependency resolution") {
  factorbase::FactorBase base;

  auto bad_id = simple_record("rank(close)", "x");
  bad_id.id = "00000000000000000000000000000000";
  CHECK_THROWS_WITH_AS(base.commit(bad_id),
                       doctest::Contains("integrity error"), DataError);

  auto bad_status = simple_record("rank(close)", "x");
  bad_status.status = "zombie";
  CHECK_THROWS_AS(base.commit(bad_status), DataError);

  // A dependency that is neither a committed record nor a field the
  // expression reads is a forward reference, and those never commit.
  auto fwd = simple_record("rank(close)", "x");
  fwd.depends_on.insert(factorbase::record_id("rank(volume)"));
  CHECK_THROWS_WITH_AS(base.commit(fwd),
                       doctest::Contains("unresolved dependency"), DataError);

  auto selfered = simple_record("rank(close)", "x");
  selfered.depends_on.insert(factorbase::record_id("rank(close)"));
  CHECK_THROWS_WITH_AS(base.commit(selfered),
                       doctest::Contains("dependency cycle"), DomainError);

  auto broken = simple_record("rank(close)", "x");
  broken.expr_text = "rank(close";  // make_record's id no longer matches
  CHECK_THROWS_AS(base.commit(broken), DataError);
}

TEST_CASE("schedule orders a diamond and breaks ties by id") {
  factorbase::FactorBase base;
  std::string a = base.commit(simple_record("rank(close)", "a"));
  auto rb = simple_record("rank(volume)", "b");
  rb.depends_on.insert(a);
  std::string b = base.commit(rb);
  auto rc = simple_record("ts_mean(close, 5)", "c");
  rc.depends_on.insert(a);
  std::string c = base.commit(rc);
  auto rd = simple_record("ts_mean(volume, 5)", "d");
  rd.depends_on.insert(b);
  rd.depends_on.insert(c);
  std::string d = base.commit(rd);

  const auto plan = base.schedule({d});
  REQUIRE(plan.size() == 4);
  CHECK(plan[0] == a);
  CHECK(plan[3] == d);
  // b and c become ready together once a is done; ascending id decides.
  CHECK(plan[1] == std::min(b, c));
  CHECK(plan[2] == std::max(b, c));

  // Meta-field dependencies are inputs, never scheduled nodes.
  for (const auto& id : plan) {
    CHECK(id.size() == 32);
    CHECK(base.find(id) != nullptr);
  }

  // A mid-graph target pulls in only its own prerequisites.
  const auto partial = base.schedule({b});
  REQUIRE(partial.size() == 2);
  CHECK(partial[0] == a);
  CHECK(partial[1] == b);

  CHECK_THROWS_WITH_AS(base.schedule({"ffffffffffffffffffffffffffffffff"}),
                       doctest::Contains("unknown target"), DataError);
}

TEST_CASE("random commit graphs stay acyclic and schedules respect prereqs") {
  RngStream rng(606);
  for (int trial = 0; trial < 30; ++trial) {
    factorbase::FactorBase base;
    std::vector<std::string> ids;
    const std::size_t n = 8 + rng.uniform_int(16);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string field = rng.uniform01() < 0.5 ? "close" : "volume";
      auto rec = simple_record(
          "ts_mean(" + field + ", " + std::to_string(100 * trial + i + 2) + ")",
          "n" + std::to_string(i));
      const std::size_t n_deps = i == 0 ? 0 : rng.uniform_int(std::min<std::size_t>(i, 3) + 1);
      for (std::size_t k = 0; k < n_deps; ++k) {
        rec.depends_on.insert(ids[rng.uniform_int(i)]);
      }
      ids.push_back(base.commit(rec));
    }

    // Target a random subset; the plan must be exactly the transitive
    // closure, each node after all of its prerequisites.
    std::vector<std::string> targets;
    for (const auto& id : ids) {
      if (rng.uniform01() < 0.4) targets.push_back(id);
    }
    if (targets.empty()) targets.push_back(ids[0]);
    const auto plan = base.schedule(targets);
    CHECK(plan == base.schedule(targets));  // deterministic

    std::set<std::string> closure;
    std::vector<std::string> frontier = targets;
    while (!frontier.empty()) {
      std::string cur = frontier.back();
      frontier.pop_back();
      if (!closure.insert(cur).second) continue;
      for (const auto& dep : base.find(cur)->depends_on) {
        if (base.find(dep) != nullptr) frontier.push_back(dep);
      }
    }
    CHECK(plan.size() == closure.size());

    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      CHECK(closure.count(plan[i]) == 1);
      pos[plan[i]] = i;
    }
    for (const auto& id : plan) {
      for (const auto& dep : base.find(id)->depends_on) {
        if (base.find(dep) == nullptr) continue;  // meta field
        CHECK(pos.at(dep) < pos.at(id));
      }
    }
  }
}

TEST_CASE("serialize and deserialize round-trip every field") {
  factorbase::FactorBase base;
  auto ra = simple_record("rank(close)", "alpha one");
  ra.created_at = "2024-06-01T12:00:00Z";
  ra.sharpe = std::nan("");  // degenerate stat must survive as null
  ra.max_drawdown = 0.12;
  ra.status = "retired";
  std::string a = base.commit(ra);
  auto rb = simple_record("safe_div(close, volume)", "b");
  rb.depends_on.insert(a);
  std::string b = base.commit(rb);

  const std::string text = base.serialize();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  auto loaded = factorbase::FactorBase::deserialize(text, "mem");
  REQUIRE(loaded.size() == 2);
  const auto* la = loaded.find(a);
  REQUIRE(la != nullptr);
  CHECK(la->name == "alpha one");
  CHECK(la->created_at == "2024-06-01T12:00:00Z");
  CHECK(la->expr_text == "rank(close)");
  CHECK(la->ic_mean == 0.05);
  CHECK(la->icir == 1.1);
  CHECK(std::isnan(la->sharpe));
  CHECK(la->max_drawdown == 0.12);
  CHECK(la->n_dates == 40);
  CHECK(la->status == "retired");
  CHECK(la->depends_on == std::set<std::string>{"close"});
  const auto* lb = loaded.find(b);
  REQUIRE(lb != nullptr);
  CHECK(lb->depends_on == (std::set<std::string>{a, "close", "volume"}));

  // Round-trip is a fixpoint: serializing the loaded base is byte-identical.
  CHECK(loaded.serialize() == text);
}

TEST_CASE("deserialize accepts forward references across lines") {
  factorbase::FactorBase base;
  std::string a = base.commit(simple_record("rank(close)", "a"));
  auto rb = simple_record("rank(volume)", "b");
  rb.depends_on.insert(a);
  base.commit(rb);

  // Stored order is append order; reversing the lines makes record b
  // reference an id that only appears later in the file.
  auto lines = split_lines(base.serialize());
  REQUIRE(lines.size() == 2);
  const std::string reversed = lines[1] + "\n" + lines[0] + "\n";
  auto loaded = factorbase::FactorBase::deserialize(reversed, "mem");
  CHECK(loaded.size() == 2);
  CHECK(loaded.find(a) != nullptr);
}

TEST_CASE("deserialize rejects cycles with the offending path") {
  factorbase::FactorBase base;
  std::string a = base.commit(simple_record("rank(close)", "a"));
  auto rb = simple_record("rank(volume)", "b");
  rb.depends_on.insert(a);
  std::string b = base.commit(rb);

  // Close the loop by hand: add b to a's dependency list in the stored text.
  std::string text = base.serialize();
  const std::string needle = "\"depends_on\":[\"close\"]";
  auto at = text.find(needle);
  REQUIRE(at != std::string::npos);
  text.replace(at, needle.size(), "\"depends_on\":[\"" + b + "\",\"close\"]");
  CHECK_THROWS_WITH_AS(factorbase::FactorBase::deserialize(text, "mem"),
                       doctest::Contains("dependency cycle"), DomainError);
}

TEST_CASE("deserialize reports corruption with file and line") {
  factorbase::FactorBase base;
  base.commit(simple_record("rank(close)", "a"));
  const std::string good = base.serialize();

  CHECK_THROWS_WITH_AS(
      factorbase::FactorBase::deserialize(good + "{not json\n", "db.jsonl"),
      doctest::Contains("db.jsonl:2"), DataError);
  CHECK_THROWS_WITH_AS(
      factorbase::FactorBase::deserialize(good + good, "db.jsonl"),
      doctest::Contains("duplicate factor"), DataError);

  // Tampering with the expression breaks the content hash.
  std::string tampered = good;
  const std::string needle = "\"expr\":\"rank(close)\"";
  auto at = tampered.find(needle);
  REQUIRE(at != std::string::npos);
  tampered.replace(at, needle.size(), "\"expr\":\"rank(volume)\"");
  CHECK_THROWS_WITH_AS(factorbase::FactorBase::deserialize(tampered, "db.jsonl"),
                       doctest::Contains("integrity error"), DataError);

  // Records whose expression no longer parses are data errors too.
  std::string broken = good;
  const std::string nd = "\"expr\":\"rank(close)\"";
  at = broken.find(nd);
  REQUIRE(at != std::string::npos);
  broken.replace(at, nd.size(), "\"expr\":\"rank(close()\"");
  CHECK_THROWS_WITH_AS(factorbase::FactorBase::deserialize(broken, "db.jsonl"),
                       doctest::Contains("does not parse"), DataError);

  // Blank lines are tolerated; they carry no record.
  auto loaded = factorbase::FactorBase::deserialize("\n" + good + "\n", "db.jsonl");
  CHECK(loaded.size() == 1);
}

TEST_CASE("save and load round-trip through a file") {
  factorbase::FactorBase base;
  std::string a = base.commit(simple_record("rank(close)", "a"));
  const std::string path = "/tmp/alphadesk_test_factorbase.jsonl";
  base.save(path);
  auto loaded = factorbase::FactorBase::load(path);
  CHECK(loaded.size() == 1);
  CHECK(loaded.find(a)->name == "a");
  std::remove(path.c_str());
  CHECK_THROWS_AS(factorbase::FactorBase::load(path), DataError);
}

TEST_SUITE_END();
