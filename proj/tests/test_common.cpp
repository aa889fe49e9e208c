// Foundations: deterministic RNG streams, numeric formatting, parallel_for,
// and the flat-file helpers everything else leans on.
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/io.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/common/parallel.hpp"
#include "alphadesk/common/rng.hpp"
#include "doctest.h"

using namespace alphadesk;

TEST_SUITE_BEGIN("common");

TEST_CASE("rng streams are deterministic and label-separated") {
  alphadesk::RngStream a(42);
  alphadesk::RngStream b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == b.uniform01());

  // [TRIVIAL] different labels diverge, same labels agree.
  auto c = alphadesk::RngStream(42).derive("mutate");
  auto d = alphadesk::RngStream(42).derive("mutate");
  auto e = alphadesk::RngStream(42).derive("crossover");
  const double cv = c.uniform01();
  CHECK(cv == d.uniform01());
  CHECK(cv != e.uniform01());

  // Index derivation is independent of draws made on the parent.
  alphadesk::RngStream p1(7);
  auto p1c = p1.derive(3);
  alphadesk::RngStream p2(7);
  (void)p2.uniform01();
  auto p2c = p2.derive(3);
  CHECK(p1c.uniform01() == p2c.uniform01());
}

TEST_CASE("rng draws land in their documented ranges") {
  alphadesk::RngStream rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
    const auto k = rng.uniform_int(7);
    CHECK(k < 7);
  }
  // [DERIVED] normal() mean/std over a large sample, loose 5-sigma bands.
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("format_double round-trips through parse_double") {
  alphadesk::RngStream rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-8.0, 8.0));
    const auto back = alphadesk::parse_double(alphadesk::format_double(v));
    REQUIRE(back.has_value());
    CHECK(*back == doctest::Approx(v).epsilon(1e-15));
  }
  CHECK(alphadesk::format_double(1.0) == "1");
  CHECK(alphadesk::format_double(-0.25) == "-0.25");
  CHECK(!alphadesk::parse_double("nope").has_value());
  CHECK(!alphadesk::parse_double("").has_value());
}

TEST_CASE("parse_int rejects junk and accepts integers") {
  CHECK(alphadesk::parse_int("42").value() == 42);
  CHECK(alphadesk::parse_int("-3").value() == -3);
  CHECK(!alphadesk::parse_int("4.2").has_value());
  CHECK(!alphadesk::parse_int("x").has_value());
  CHECK(!alphadesk::parse_int("").has_value());
}

TEST_CASE("split helpers") {
  const auto lines = alphadesk::split_lines("a\nb\r\nc\n");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "a");
  CHECK(lines[1] == "b");
  CHECK(lines[2] == "c");

  const auto cells = alphadesk::split_csv("x,,y");
  REQUIRE(cells.size() == 3);
  CHECK(cells[1].empty());

  const auto items = alphadesk::split_list(" a , b ,c ", ',');
  REQUIRE(items.size() == 3);
  CHECK(items[0] == "a");
  CHECK(items[1] == "b");
  CHECK(items[2] == "c");
}

TEST_CASE("atomic file write round-trips and overwrites") {
  const auto dir = std::filesystem::temp_directory_path() / "alphadesk_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "file.txt").string();
  alphadesk::write_file_atomic(path, "first\n");
  CHECK(alphadesk::read_file(path) == "first\n");
  alphadesk::write_file_atomic(path, "second\n");
  CHECK(alphadesk::read_file(path) == "second\n");
  CHECK_THROWS_AS((void)alphadesk::read_file((dir / "missing.txt").string()),
                  alphadesk::DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for covers every index exactly once, any worker count") {
  for (int workers : {1, 2, 4, 7}) {
    std::vector<std::atomic<int>> hits(257);
    for (auto& h : hits) h = 0;
    alphadesk::parallel_for(hits.size(), workers,
                         [&](std::size_t i) { hits[i].fetch_add(1); });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("error taxonomy carries the documented exit codes") {
  CHECK(alphadesk::ConfigError("x").exit_code() == 1);
  CHECK(alphadesk::DataError("x").exit_code() == 1);
  CHECK(alphadesk::DomainError("x").exit_code() == 2);
  CHECK(alphadesk::InternalError("x").exit_code() == 3);
  // All are catchable through the shared base.
  try {
    throw alphadesk::DomainError("boom");
  } catch (const alphadesk::Error& e) {
    CHECK(std::string(e.what()) == "boom");
    CHECK(e.exit_code() == 2);
  }
}

TEST_SUITE_END();
