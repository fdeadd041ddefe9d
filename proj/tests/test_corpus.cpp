#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "raterkit/corpus.hpp"
#include "raterkit/csv.hpp"
#include "raterkit/random.hpp"

using namespace raterkit;
using namespace raterkit::corpus;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Corpus load(const std::string& jsonl, const std::string& csv_text = "") {
  std::istringstream in(jsonl);
  Corpus base(parse_responses(in), {});
  if (csv_text.empty()) return base;
  std::istringstream sc(csv_text);
  return Corpus(base.responses(), parse_scores(sc));
}

const char* kThree =
    "{\"student_id\":\"s1\",\"task_id\":\"2a\",\"text\":\"\"}\n"
    "{\"student_id\":\"s2\",\"task_id\":\"2a\",\"text\":\"idk\"}\n"
    "\n"
    "{\"student_id\":\"s3\",\"task_id\":\"2a\",\"text\":\"the mean increases because of the outlier\"}\n";

}  // namespace

TEST_CASE("responses load and validate") {
  auto c = load(kThree);
  CHECK(c.responses().size() == 3);
  CHECK(c.task_ids() == std::vector<std::string>{"2a"});

  auto msg = error_of([] {
    load("{\"student_id\":\"s1\",\"task_id\":\"2a\",\"text\":\"a\"}\n{\"student_id\":\"s1\",\"task_id\":\"2a\",\"text\":\"b\"}\n");
  });
  CHECK(msg.find("(s1, 2a)") != std::string::npos);

  msg = error_of([] { load("{\"student_id\":\"s1\",\"task_id\":\"2a\",\"text\":\"a\"}\nnot json\n"); });
  CHECK(msg.find("line 2") != std::string::npos);
  msg = error_of([] { load("{\"student_id\":\"s1\",\"text\":\"a\"}\n"); });
  CHECK(msg.find("line 1") != std::string::npos);
}

TEST_CASE("scores load and validate") {
  const std::string header = "rater_id,student_id,task_id,label,epoch\n";
  auto c = load(kThree, header + "A,s1,2a,0,current\nA,s1,2a,1,2015\nC,s3,2a,2,current\n");
  CHECK(c.scores().size() == 3);
  CHECK(c.raters().size() == 3);
  CHECK(c.labels_of({"A", "2015"}).at({"s1", "2a"}) == 1);

  CHECK(error_of([&] { load(kThree, header + "A,s1,2a,3,current\n"); }).find("label") != std::string::npos);
  CHECK(error_of([&] { load(kThree, header + "A,s9,2a,1,current\n"); }).find("(s9, 2a)") != std::string::npos);
  CHECK_FALSE(error_of([&] { load(kThree, header + "A,s1,2a,1,current\nA,s1,2a,2,current\n"); }).empty());
  CHECK_FALSE(error_of([&] { load(kThree, header + "A,s1,2a,x,current\n"); }).empty());
  try {
    load(kThree, header + "A,s9,2a,1,current\n");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_found);
  }
}

TEST_CASE("earnest filter") {
  const std::string header = "rater_id,student_id,task_id,label,epoch\n";
  auto c = load(kThree, header + "A,s1,2a,0,current\nA,s3,2a,2,current\n");
  CHECK(earnest_filter(c, 0).corpus == c);
  auto f = earnest_filter(c, 2);
  REQUIRE(f.corpus.responses().size() == 1);
  CHECK(f.corpus.responses()[0].student_id == "s3");
  CHECK(f.removed.size() == 2);
  CHECK(f.scores_dropped == 1);
  CHECK(earnest_filter(c, 1).corpus.responses().size() == 2);
}

TEST_CASE("round trip through writers") {
  const std::string header = "rater_id,student_id,task_id,label,epoch\n";
  auto c = load(kThree, header + "A,s1,2a,0,current\nB,s3,2a,2,\"cur,rent\"\n");
  std::ostringstream r, s;
  write_responses(r, c);
  write_scores(s, c);
  CHECK(load(r.str(), s.str()) == c);
}

TEST_CASE("split sizes by largest remainder") {
  CHECK(split_sizes(100, kDefaultProportions) == std::array<std::size_t, 4>{72, 9, 9, 10});
  CHECK(split_sizes(7258, kDefaultProportions)[2] == 653);
  CHECK_THROWS_AS(split_sizes(10, {0.5, 0.2, 0.2, 0.2}), Error);
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    double w[4], total = 0;
    for (auto& x : w) total += (x = rng.unit() + 0.01);
    SplitProportions p{w[0] / total, w[1] / total, w[2] / total, 0};
    p[3] = 1.0 - p[0] - p[1] - p[2];
    const std::size_t n = rng.below(3000);
    auto sizes = split_sizes(n, p);
    CHECK(sizes[0] + sizes[1] + sizes[2] + sizes[3] == n);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(static_cast<double>(sizes[i]) - p[i] * static_cast<double>(n)) < 1.0);
    }
  }
}

TEST_CASE("split puts unanimous items in test first") {
  std::vector<ItemKey> items;
  std::map<ItemKey, int> rank;
  for (int i = 1; i <= 10; ++i) {
    ItemKey key{"s" + std::to_string(i), "2a"};
    items.push_back(key);
    rank[key] = i <= 3 ? 4 : 0;
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto split = split_dataset(items, {0.6, 0.1, 0.2, 0.1}, rank, seed);
    auto test = split.members(Partition::test);
    REQUIRE(test.size() == 2);
    for (const auto& key : test) CHECK(rank[key] == 4);
  }
  auto a = split_dataset(items, kDefaultProportions, rank, 5);
  auto b = split_dataset(items, kDefaultProportions, rank, 5);
  CHECK(a.partition == b.partition);
  auto shuffled = items;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(split_dataset(shuffled, kDefaultProportions, rank, 5).partition == a.partition);
  CHECK_THROWS_AS(split_dataset(items, {0.5, 0.5, 0.5, 0.5}, rank, 1), Error);
}

TEST_CASE("split csv round trip") {
  std::vector<ItemKey> items;
  for (int i = 0; i < 50; ++i) items.push_back({"s" + std::to_string(i), i % 2 ? "a" : "b"});
  auto split = split_dataset(items, kDefaultProportions, {}, 9);
  std::ostringstream out;
  write_split(out, split);
  std::istringstream in(out.str());
  CHECK(read_split(in).partition == split.partition);
}

TEST_CASE("paired labels and rating table") {
  const std::string header = "rater_id,student_id,task_id,label,epoch\n";
  std::string jsonl;
  for (int s = 1; s <= 5; ++s) {
    jsonl += "{\"student_id\":\"s" + std::to_string(s) + "\",\"task_id\":\"2a\",\"text\":\"x\"}\n";
  }
  auto c = load(jsonl, header +
                           "A,s1,2a,2,current\nA,s2,2a,0,current\nA,s3,2a,1,current\nA,s4,2a,1,current\n"
                           "C,s4,2a,2,current\nC,s3,2a,1,current\nC,s2,2a,0,current\nC,s1,2a,2,current\n"
                           "D,s1,2a,2,current\nD,s2,2a,1,current\nD,s5,2a,1,current\n"
                           "E,s1,2a,0,current\n");
  auto p = paired_labels(c, {"A", "current"}, {"C", "current"});
  REQUIRE(p.items.size() == 4);
  CHECK(p.items.front() == ItemKey{"s1", "2a"});
  CHECK(p.a == std::vector<int>{2, 0, 1, 1});
  CHECK(p.b == std::vector<int>{2, 0, 1, 2});
  CHECK(paired_labels(c, {"D", "current"}, {"X", "current"}).items.empty());

  auto t = rating_table(c, {{"A", "current"}, {"C", "current"}, {"D", "current"}});
  REQUIRE(t.items.size() == 2);
  CHECK(t.rows[0] == std::vector<std::int64_t>{0, 0, 3});
  CHECK(t.rows[1] == std::vector<std::int64_t>{2, 1, 0});
  CHECK(t.dropped_items == 3);
  auto t4 = rating_table(c, {{"A", "current"}, {"C", "current"}, {"D", "current"}, {"E", "current"}});
  CHECK(t4.rows == std::vector<std::vector<std::int64_t>>{{1, 0, 3}});
  CHECK_THROWS_AS(rating_table(c, {{"A", "current"}}), Error);
}

TEST_CASE("consensus labels and unanimity") {
  const std::string header = "rater_id,student_id,task_id,label,epoch\n";
  std::string jsonl;
  for (int s = 1; s <= 3; ++s) {
    jsonl += "{\"student_id\":\"s" + std::to_string(s) + "\",\"task_id\":\"2a\",\"text\":\"x\"}\n";
  }
  auto c = load(jsonl, header +
                           "A,s1,2a,2,current\nB,s1,2a,2,current\nC,s1,2a,1,current\nD,s1,2a,1,current\n"
                           "A,s2,2a,1,current\nB,s2,2a,1,current\nC,s2,2a,1,current\n"
                           "A,s3,2a,0,current\n");
  auto labels = consensus_labels(c);
  CHECK(labels.at({"s1", "2a"}) == 1);  // 2-2 split goes to the lower label
  CHECK(labels.at({"s2", "2a"}) == 1);
  auto rank = unanimity_rank(c);
  CHECK(rank.at({"s1", "2a"}) == 0);
  CHECK(rank.at({"s2", "2a"}) == 3);
  CHECK(rank.at({"s3", "2a"}) == 1);
  auto only_ab = resolve_labels(c, LabelSource::parse("consensus:A,B"));
  CHECK(only_ab.at({"s1", "2a"}) == 2);
  CHECK(resolve_labels(c, LabelSource::parse("C")).size() == 2);
  CHECK(LabelSource::parse("consensus:A,B@2015").describe() == "consensus:A,B@2015");
}

TEST_CASE("csv records") {
  std::istringstream in("a,\"b,c\",\"d\"\"e\"\r\n\"multi\nline\",x\n\nlast");
  std::size_t line = 0;
  auto r1 = csv::read_record(in, line);
  REQUIRE(r1);
  CHECK(*r1 == std::vector<std::string>{"a", "b,c", "d\"e"});
  auto r2 = csv::read_record(in, line);
  REQUIRE(r2);
  CHECK(*r2 == std::vector<std::string>{"multi\nline", "x"});
  auto r3 = csv::read_record(in, line);
  REQUIRE(r3);
  while (r3 && r3->size() == 1 && r3->front().empty()) r3 = csv::read_record(in, line);
  REQUIRE(r3);
  CHECK(*r3 == std::vector<std::string>{"last"});
  CHECK_FALSE(csv::read_record(in, line));
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("plain") == "plain");
}
