#include "raterkit/csv.hpp"

#include "raterkit/common.hpp"

namespace raterkit::csv {

std::optional<std::vector<std::string>> read_record(std::istream& in, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) {
    return std::nullopt;
  }
  ++line_no;
  const std::size_t start_line = line_no;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i >= line.size()) {
      if (quoted) {
        // Quoted field continues on the next physical line.
        std::string next;
        if (!std::getline(in, next)) {
          throw Error(Errc::parse, "line " + std::to_string(start_line) + ": unterminated quoted field");
        }
        ++line_no;
        field += '\n';
        line = std::move(next);
        i = 0;
        continue;
      }
      break;
    }
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // CRLF line ending
    } else {
      field += c;
    }
    ++i;
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) {
      out += ',';
    }
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace raterkit::csv
