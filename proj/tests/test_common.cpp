#include <doctest.h>

#include <cmath>
#include <set>

#include "raterkit/common.hpp"
#include "raterkit/config.hpp"
#include "raterkit/random.hpp"

using namespace raterkit;

TEST_CASE("rater references") {
  CHECK(parse_rater_ref("A") == RaterRef{"A", "current"});
  CHECK(parse_rater_ref(" A@2015 ") == RaterRef{"A", "2015"});
  CHECK(format_rater_ref({"A", "current"}) == "A");
  CHECK(format_rater_ref({"A", "2015"}) == "A@2015");
  CHECK_THROWS_AS(parse_rater_ref(""), Error);
  CHECK_THROWS_AS(parse_rater_ref("@2015"), Error);
}

TEST_CASE("canonical doubles round trip") {
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(200)) - 100);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
}

TEST_CASE("seeds and draws") {
  std::set<std::uint64_t> seen;
  for (const char* stage : {"split", "wtmf", "cluster"}) {
    for (const char* sub : {"", "a", "b"}) seen.insert(derive_seed(1, stage, sub));
  }
  seen.insert(derive_seed(2, "split"));
  CHECK(seen.size() == 10);
  CHECK(derive_seed(5, "x", "y") == derive_seed(5, "x", "y"));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.below(7) < 7);
    const double u = rng.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng a(3), b(3);
  std::vector<int> x{1, 2, 3, 4, 5}, y = x;
  a.shuffle(x);
  b.shuffle(y);
  CHECK(x == y);
}

TEST_CASE("toml subset") {
  auto j = config::parse_toml(R"(
# comment
title = "run"   # trailing
[inputs]
responses = "r.jsonl"
path = 'C:\raw'
[run]
seed = 42
rate = 1.5e-3
flag = true
[clustering]
seeds = [1,
  2, 3,]
names = ["A=Rater A", "x # not a comment"]
[a.b]
c = -4
)");
  CHECK(j["title"] == "run");
  CHECK(j["inputs"]["responses"] == "r.jsonl");
  CHECK(j["inputs"]["path"] == "C:\\raw");
  CHECK(j["run"]["seed"] == 42);
  CHECK(j["run"]["rate"].get<double>() == doctest::Approx(1.5e-3));
  CHECK(j["run"]["flag"] == true);
  CHECK(j["clustering"]["seeds"] == nlohmann::json::array({1, 2, 3}));
  CHECK(j["clustering"]["names"][1] == "x # not a comment");
  CHECK(j["a"]["b"]["c"] == -4);
  CHECK_THROWS_AS(config::parse_toml("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(config::parse_toml("[open\n"), Error);
  CHECK_THROWS_AS(config::parse_toml("x = \"unterminated\n"), Error);
  CHECK_THROWS_AS(config::parse_toml("novalue\n"), Error);
}
