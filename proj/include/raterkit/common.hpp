#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace raterkit {

enum class Errc {
  invalid_argument = 1,
  parse = 2,
  io = 3,
  degenerate = 4,
  infeasible = 5,
  not_found = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Identifies one task-response: a student's answer to one task.
/// Ordering is (student_id, task_id) lexicographic, which is the canonical
/// item order used everywhere downstream.
struct ItemKey {
  std::string student_id;
  std::string task_id;

  auto operator<=>(const ItemKey&) const = default;
  bool operator==(const ItemKey&) const = default;
};

std::string to_string(const ItemKey& key);

/// A rater at one scoring session. The same person scoring in two sessions
/// is two distinct RaterRefs.
struct RaterRef {
  std::string rater_id;
  std::string epoch;

  auto operator<=>(const RaterRef&) const = default;
  bool operator==(const RaterRef&) const = default;
};

inline constexpr std::string_view kDefaultEpoch = "current";
inline constexpr int kNumLabels = 3;

/// Parses "A" (default epoch) or "A@2015".
RaterRef parse_rater_ref(std::string_view text);
std::string format_rater_ref(const RaterRef& ref);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

std::vector<std::string> split_string(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace raterkit
