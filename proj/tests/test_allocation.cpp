#include <doctest.h>

#include <set>
#include <sstream>

#include "raterkit/allocation.hpp"
#include "raterkit/common.hpp"
#include "raterkit/random.hpp"

using namespace raterkit;
using namespace raterkit::allocation;

namespace {

std::vector<std::string> pool_of(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("s" + std::to_string(1000 + i));
  return out;
}

std::size_t intersect(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& s : a) n += b.count(s);
  return n;
}

const Check& check_named(const VerificationReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  return r.checks.front();
}

}  // namespace

TEST_CASE("750-student design") {
  AllocationDesign d{{"A", "B", "C"}, pool_of(750), 63, 63, std::nullopt};
  CHECK(d.multi_rated() == 252);
  auto a = design_allocation(d, 42);
  CHECK(a.multi_rated().size() == 252);
  std::size_t singles[3] = {0, 0, 0};
  const char* names[3] = {"A", "B", "C"};
  for (const auto& s : d.pool) {
    int n = 0, who = -1;
    for (int r = 0; r < 3; ++r) {
      if (a.of(names[r]).count(s)) {
        ++n;
        who = r;
      }
    }
    if (n == 1) ++singles[who];
  }
  CHECK(singles[0] == 166);
  CHECK(singles[1] == 166);
  CHECK(singles[2] == 166);
  CHECK(verify_allocation(a, d).pass());
  CHECK(extend_rater_all_shared(a, "D").of("D").size() == 252);
}

TEST_CASE("small designs") {
  AllocationDesign disjoint{{"A", "B", "C"}, pool_of(9), 0, 0, std::nullopt};
  auto a = design_allocation(disjoint, 1);
  for (const char* r : {"A", "B", "C"}) CHECK(a.of(r).size() == 3);
  CHECK(a.multi_rated().empty());
  CHECK(extend_rater_all_shared(a, "D").of("D").empty());

  AllocationDesign tiny{{"A", "B", "C"}, pool_of(12), 1, 1, std::nullopt};
  auto b = design_allocation(tiny, 1);
  CHECK(intersect(b.of("A"), b.of("B")) == 2);
  CHECK(intersect(b.of("A"), b.of("C")) == 2);
  CHECK(intersect(b.of("B"), b.of("C")) == 2);
  std::set<std::string> triple;
  for (const auto& s : b.of("A")) {
    if (b.of("B").count(s) && b.of("C").count(s)) triple.insert(s);
  }
  CHECK(triple.size() == 1);
  auto ext = extend_rater_all_shared(b, "D");
  CHECK(ext.of("D").size() == 4);
  CHECK(ext.of("D") == b.multi_rated());
}

TEST_CASE("infeasible designs name the inequality") {
  AllocationDesign d{{"A", "B", "C"}, pool_of(10), 3, 2, std::nullopt};
  try {
    design_allocation(d, 1);
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible);
    CHECK(std::string(e.what()).find("11") != std::string::npos);
  }
  CHECK_THROWS_AS(design_allocation({{"A"}, pool_of(5), 0, 0, std::nullopt}, 1), Error);
  CHECK_THROWS_AS(design_allocation({{"A", "A"}, pool_of(5), 0, 0, std::nullopt}, 1), Error);
  AllocationDesign pinned{{"A", "B"}, pool_of(20), 2, 2, PinnedConstraint{"A", {"s1000", "s1001"}, 3}};
  CHECK_THROWS_AS(design_allocation(pinned, 1), Error);
}

TEST_CASE("verification catches a moved student") {
  AllocationDesign d{{"A", "B", "C"}, pool_of(60), 5, 4, std::nullopt};
  auto a = design_allocation(d, 3);
  // Move one student of the A&B block into the A&C block.
  std::string moved;
  for (const auto& s : a.of("A")) {
    if (a.of("B").count(s) && !a.of("C").count(s)) {
      moved = s;
      break;
    }
  }
  REQUIRE_FALSE(moved.empty());
  auto broken = a;
  broken.assigned["B"].erase(moved);
  broken.assigned["C"].insert(moved);
  auto report = verify_allocation(broken, d);
  CHECK_FALSE(report.pass());
  int failing_pairs = 0;
  for (const auto& c : report.checks) {
    if (c.name.rfind("pairwise", 0) == 0 && !c.pass) ++failing_pairs;
  }
  CHECK(failing_pairs == 2);
  CHECK_FALSE(check_named(report, "pairwise A&B").pass);
  CHECK(check_named(report, "pairwise A&C").actual == 10);
}

TEST_CASE("random feasible designs verify") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    AllocationDesign d;
    const std::size_t n = 2 + rng.below(4);
    for (std::size_t r = 0; r < n; ++r) d.raters.push_back(std::string(1, static_cast<char>('A' + r)));
    d.pair_size = rng.below(6);
    d.consensus_size = rng.below(6);
    const std::size_t need = d.multi_rated();
    d.pool = pool_of(need + rng.below(40));
    if (rng.below(2) == 0 && d.pool.size() > 4) {
      PinnedConstraint pin{"B", {}, 0};
      for (std::size_t i = 0; i < d.pool.size(); i += 3) pin.required.insert(d.pool[i]);
      pin.min_overlap = std::min<std::size_t>(pin.required.size(), 1 + rng.below(3));
      d.pinned = pin;
    }
    Allocation a;
    try {
      a = design_allocation(d, rng.next());
    } catch (const Error& e) {
      CHECK(e.code() == Errc::infeasible);
      continue;
    }
    auto report = verify_allocation(a, d);
    CHECK_MESSAGE(report.pass(), report.to_json());
    std::size_t covered = 0;
    for (const auto& s : d.pool) {
      bool any = false;
      for (const auto& r : d.raters) any = any || a.of(r).count(s);
      covered += any;
    }
    CHECK(covered == d.pool.size());
  }
}

TEST_CASE("allocation is a function of the seed") {
  AllocationDesign d{{"A", "B", "C"}, pool_of(100), 4, 5, std::nullopt};
  CHECK(design_allocation(d, 9).assigned == design_allocation(d, 9).assigned);
  CHECK(design_allocation(d, 9).assigned != design_allocation(d, 10).assigned);
  std::ostringstream out;
  write_allocation(out, design_allocation(d, 9));
  CHECK(out.str().rfind("rater_id,student_id\n", 0) == 0);
}
