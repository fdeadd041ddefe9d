#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace raterkit::csv {

/// Reads one RFC 4180 record (quoted fields may span lines). Returns nullopt
/// at end of input. Line endings may be LF or CRLF.
std::optional<std::vector<std::string>> read_record(std::istream& in, std::size_t& line_no);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace raterkit::csv
