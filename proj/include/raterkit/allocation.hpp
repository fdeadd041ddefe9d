#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace raterkit::allocation {

struct PinnedConstraint {
  std::string rater_id;
  std::set<std::string> required;
  std::size_t min_overlap = 0;
};

/// Combinatorial rater assignment: every pair of core raters shares an
/// exclusive block of pair_size students, all core raters share a consensus
/// block, and the rest of the pool is dealt out one rater per student.
struct AllocationDesign {
  std::vector<std::string> raters;
  std::vector<std::string> pool;
  std::size_t pair_size = 0;
  std::size_t consensus_size = 0;
  std::optional<PinnedConstraint> pinned;

  std::size_t multi_rated() const;
  /// Throws Errc::infeasible naming the violated inequality.
  void validate() const;
};

struct Allocation {
  std::vector<std::string> core_raters;
  std::vector<std::string> extra_raters;
  std::map<std::string, std::set<std::string>> assigned;

  const std::set<std::string>& of(const std::string& rater) const;
  /// Students assigned to two or more core raters.
  std::set<std::string> multi_rated() const;
};

Allocation design_allocation(const AllocationDesign& design, std::uint64_t seed);

/// Adds a rater who receives every student shared by at least two core raters.
Allocation extend_rater_all_shared(const Allocation& allocation, const std::string& new_rater);

struct Check {
  std::string name;
  std::int64_t expected = 0;
  std::int64_t actual = 0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<Check> checks;
  bool pass() const;
  std::string to_json() const;
};

VerificationReport verify_allocation(const Allocation& allocation, const AllocationDesign& design);

void write_allocation(std::ostream& out, const Allocation& allocation);

}  // namespace raterkit::allocation
