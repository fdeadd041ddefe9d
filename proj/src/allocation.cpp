#include "raterkit/allocation.hpp"

#include <algorithm>
#include <ostream>

#include <nlohmann/json.hpp>

#include "raterkit/common.hpp"
#include "raterkit/csv.hpp"
#include "raterkit/random.hpp"

namespace raterkit::allocation {
namespace {

std::size_t pairs_of(std::size_t n) { return n * (n - 1) / 2; }

/// Number of singly-assigned students each rater gets under round-robin.
std::vector<std::size_t> single_counts(std::size_t raters, std::size_t singles) {
  std::vector<std::size_t> out(raters, singles / raters);
  for (std::size_t i = 0; i < singles % raters; ++i) {
    ++out[i];
  }
  return out;
}

std::size_t rater_index(const std::vector<std::string>& raters, const std::string& id) {
  auto it = std::find(raters.begin(), raters.end(), id);
  if (it == raters.end()) {
    throw Error(Errc::invalid_argument, "pinned rater '" + id + "' is not a core rater");
  }
  return static_cast<std::size_t>(it - raters.begin());
}

std::size_t required_in_pool(const AllocationDesign& d) {
  std::size_t n = 0;
  for (const auto& s : d.pool) {
    n += d.pinned->required.count(s);
  }
  return n;
}

}  // namespace

std::size_t AllocationDesign::multi_rated() const {
  return pair_size * pairs_of(raters.size()) + consensus_size;
}

void AllocationDesign::validate() const {
  if (raters.size() < 2) {
    throw Error(Errc::infeasible, "allocation needs at least 2 raters");
  }
  if (std::set<std::string>(raters.begin(), raters.end()).size() != raters.size()) {
    throw Error(Errc::invalid_argument, "duplicate rater id in design");
  }
  if (std::set<std::string>(pool.begin(), pool.end()).size() != pool.size()) {
    throw Error(Errc::invalid_argument, "duplicate student id in pool");
  }
  if (multi_rated() > pool.size()) {
    throw Error(Errc::infeasible, "pair_size x C(raters,2) + consensus_size <= |pool| violated: " +
                                      std::to_string(pair_size) + " x " + std::to_string(pairs_of(raters.size())) +
                                      " + " + std::to_string(consensus_size) + " = " +
                                      std::to_string(multi_rated()) + " > " + std::to_string(pool.size()));
  }
  if (pinned) {
    const auto& p = *pinned;
    if (p.min_overlap > p.required.size()) {
      throw Error(Errc::infeasible, "min_overlap <= |required| violated: " + std::to_string(p.min_overlap) +
                                        " > " + std::to_string(p.required.size()));
    }
    const std::size_t idx = rater_index(raters, p.rater_id);
    const std::size_t capacity = consensus_size + pair_size * (raters.size() - 1) +
                                 single_counts(raters.size(), pool.size() - multi_rated())[idx];
    const std::size_t available = required_in_pool(*this);
    if (p.min_overlap > std::min(available, capacity)) {
      throw Error(Errc::infeasible, "min_overlap <= min(|required in pool|, rater capacity) violated: " +
                                        std::to_string(p.min_overlap) + " > min(" + std::to_string(available) +
                                        ", " + std::to_string(capacity) + ")");
    }
  }
}

const std::set<std::string>& Allocation::of(const std::string& rater) const {
  auto it = assigned.find(rater);
  if (it == assigned.end()) {
    throw Error(Errc::not_found, "rater '" + rater + "' not in allocation");
  }
  return it->second;
}

std::set<std::string> Allocation::multi_rated() const {
  std::map<std::string, int> counts;
  for (const auto& r : core_raters) {
    for (const auto& s : of(r)) {
      ++counts[s];
    }
  }
  std::set<std::string> out;
  for (const auto& [s, c] : counts) {
    if (c >= 2) {
      out.insert(s);
    }
  }
  return out;
}

Allocation design_allocation(const AllocationDesign& design, std::uint64_t seed) {
  design.validate();
  const std::size_t n = design.raters.size();

  // Slots in block order: consensus, pairwise blocks, then round-robin singles.
  std::vector<std::vector<std::size_t>> slots;
  std::vector<std::size_t> everyone(n);
  for (std::size_t i = 0; i < n; ++i) {
    everyone[i] = i;
  }
  slots.insert(slots.end(), design.consensus_size, everyone);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      slots.insert(slots.end(), design.pair_size, std::vector<std::size_t>{i, j});
    }
  }
  const std::size_t singles = design.pool.size() - design.multi_rated();
  for (std::size_t s = 0; s < singles; ++s) {
    slots.push_back({s % n});
  }

  std::vector<std::string> order = design.pool;
  Rng rng(derive_seed(seed, "allocation"));
  rng.shuffle(order);

  if (design.pinned) {
    const std::size_t pinned_idx = rater_index(design.raters, design.pinned->rater_id);
    std::stable_partition(slots.begin(), slots.end(), [&](const std::vector<std::size_t>& owners) {
      return std::find(owners.begin(), owners.end(), pinned_idx) != owners.end();
    });
    std::stable_partition(order.begin(), order.end(),
                          [&](const std::string& s) { return design.pinned->required.count(s) > 0; });
  }

  Allocation out;
  out.core_raters = design.raters;
  for (const auto& r : design.raters) {
    out.assigned[r];
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (std::size_t owner : slots[i]) {
      out.assigned[design.raters[owner]].insert(order[i]);
    }
  }
  return out;
}

Allocation extend_rater_all_shared(const Allocation& allocation, const std::string& new_rater) {
  if (allocation.assigned.count(new_rater)) {
    throw Error(Errc::invalid_argument, "rater '" + new_rater + "' already in allocation");
  }
  Allocation out = allocation;
  out.extra_raters.push_back(new_rater);
  out.assigned[new_rater] = allocation.multi_rated();
  return out;
}

bool VerificationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["pass"] = pass();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json j;
    j["check"] = c.name;
    j["expected"] = c.expected;
    j["actual"] = c.actual;
    j["pass"] = c.pass;
    list.push_back(j);
  }
  doc["checks"] = list;
  return doc.dump(2);
}

VerificationReport verify_allocation(const Allocation& allocation, const AllocationDesign& design) {
  VerificationReport report;
  auto add = [&](std::string name, std::int64_t expected, std::int64_t actual, bool pass) {
    report.checks.push_back({std::move(name), expected, actual, pass});
  };
  auto sz = [](std::size_t v) { return static_cast<std::int64_t>(v); };
  static const std::set<std::string> kEmpty;
  auto set_of = [&](const std::string& r) -> const std::set<std::string>& {
    auto it = allocation.assigned.find(r);
    return it == allocation.assigned.end() ? kEmpty : it->second;
  };

  const auto& raters = design.raters;
  const std::size_t pairwise_expected = design.pair_size + design.consensus_size;
  for (std::size_t i = 0; i < raters.size(); ++i) {
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      std::vector<std::string> common;
      std::set_intersection(set_of(raters[i]).begin(), set_of(raters[i]).end(), set_of(raters[j]).begin(),
                            set_of(raters[j]).end(), std::back_inserter(common));
      add("pairwise " + raters[i] + "&" + raters[j], sz(pairwise_expected), sz(common.size()),
          common.size() == pairwise_expected);
    }
  }

  if (!raters.empty()) {
    std::set<std::string> all = set_of(raters.front());
    for (std::size_t i = 1; i < raters.size(); ++i) {
      std::set<std::string> next;
      std::set_intersection(all.begin(), all.end(), set_of(raters[i]).begin(), set_of(raters[i]).end(),
                            std::inserter(next, next.end()));
      all = std::move(next);
    }
    // With two raters the pairwise block is also shared by "all" raters.
    const std::size_t expected = design.consensus_size + (raters.size() == 2 ? design.pair_size : 0);
    add("full intersection", sz(expected), sz(all.size()), all.size() == expected);
  }

  std::map<std::string, int> times;
  for (const auto& r : raters) {
    for (const auto& s : set_of(r)) {
      ++times[s];
    }
  }
  std::size_t covered = 0;
  std::size_t multi = 0;
  for (const auto& s : design.pool) {
    auto it = times.find(s);
    covered += it != times.end();
    multi += it != times.end() && it->second >= 2;
  }
  add("pool coverage", sz(design.pool.size()), sz(covered), covered == design.pool.size());
  add("multi-rated students", sz(design.multi_rated()), sz(multi), multi == design.multi_rated());
  std::size_t outsiders = 0;
  std::set<std::string> pool(design.pool.begin(), design.pool.end());
  for (const auto& [s, c] : times) {
    outsiders += pool.count(s) == 0;
  }
  add("students outside pool", 0, sz(outsiders), outsiders == 0);

  if (!raters.empty()) {
    std::size_t lo = SIZE_MAX;
    std::size_t hi = 0;
    for (const auto& r : raters) {
      std::size_t singles = 0;
      for (const auto& s : set_of(r)) {
        singles += times[s] == 1;
      }
      lo = std::min(lo, singles);
      hi = std::max(hi, singles);
    }
    add("single-assignment balance spread", 1, sz(hi - lo), hi - lo <= 1);
  }

  if (design.pinned) {
    std::size_t overlap = 0;
    for (const auto& s : set_of(design.pinned->rater_id)) {
      overlap += design.pinned->required.count(s);
    }
    add("pinned overlap " + design.pinned->rater_id, sz(design.pinned->min_overlap), sz(overlap),
        overlap >= design.pinned->min_overlap);
  }

  for (const auto& extra : allocation.extra_raters) {
    auto expected = allocation.multi_rated();
    add("extended rater " + extra, sz(expected.size()), sz(set_of(extra).size()), set_of(extra) == expected);
  }
  return report;
}

void write_allocation(std::ostream& out, const Allocation& allocation) {
  out << "rater_id,student_id\n";
  std::vector<std::string> order = allocation.core_raters;
  order.insert(order.end(), allocation.extra_raters.begin(), allocation.extra_raters.end());
  for (const auto& r : order) {
    for (const auto& s : allocation.of(r)) {
      out << csv::join({r, s}) << '\n';
    }
  }
}

}  // namespace raterkit::allocation
