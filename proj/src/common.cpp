#include "raterkit/common.hpp"

#include <charconv>
#include <cmath>

namespace raterkit {

std::string to_string(const ItemKey& key) {
  return "(" + key.student_id + ", " + key.task_id + ")";
}

RaterRef parse_rater_ref(std::string_view text) {
  text = trim(text);
  if (text.empty()) {
    throw Error(Errc::invalid_argument, "empty rater reference");
  }
  auto at = text.find('@');
  if (at == std::string_view::npos) {
    return {std::string(text), std::string(kDefaultEpoch)};
  }
  auto id = trim(text.substr(0, at));
  auto epoch = trim(text.substr(at + 1));
  if (id.empty() || epoch.empty()) {
    throw Error(Errc::invalid_argument, "malformed rater reference '" + std::string(text) + "'");
  }
  return {std::string(id), std::string(epoch)};
}

std::string format_rater_ref(const RaterRef& ref) {
  if (ref.epoch == kDefaultEpoch) {
    return ref.rater_id;
  }
  return ref.rater_id + "@" + ref.epoch;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw Error(Errc::invalid_argument, "cannot format value");
  }
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw Error(Errc::parse, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_string(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const char* ws = " \t\r\n";
  auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) {
    return {};
  }
  auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

}  // namespace raterkit
