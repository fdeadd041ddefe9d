#include "raterkit/config.hpp"

#include <fstream>
#include <sstream>

#include "raterkit/common.hpp"

namespace raterkit::config {
namespace {

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  nlohmann::json parse_all() {
    auto v = parse_value();
    skip_ws();
    if (pos_ != s_.size()) {
      fail("unexpected trailing characters");
    }
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::parse, "config line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  nlohmann::json parse_value() {
    skip_ws();
    if (pos_ >= s_.size()) {
      fail("missing value");
    }
    char c = s_[pos_];
    if (c == '"') {
      return parse_basic_string();
    }
    if (c == '\'') {
      auto end = s_.find('\'', pos_ + 1);
      if (end == std::string_view::npos) {
        fail("unterminated string");
      }
      std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return out;
    }
    if (c == '[') {
      ++pos_;
      nlohmann::json arr = nlohmann::json::array();
      while (true) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(parse_value());
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
        } else if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return arr;
        } else {
          fail("expected ',' or ']' in array");
        }
      }
    }
    auto end = s_.find_first_of(",] \t\r\n#", pos_);
    std::string_view word = s_.substr(pos_, end == std::string_view::npos ? s_.size() - pos_ : end - pos_);
    pos_ += word.size();
    if (word == "true") {
      return true;
    }
    if (word == "false") {
      return false;
    }
    std::string digits;
    for (char ch : word) {
      if (ch != '_') {
        digits += ch;
      }
    }
    if (!digits.empty() && digits.find_first_of(".eEn") == std::string::npos) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(digits, &used);
        if (used == digits.size()) {
          return v;
        }
      } catch (const std::exception&) {
      }
    }
    try {
      return parse_double(digits);
    } catch (const Error&) {
      fail("cannot parse value '" + std::string(word) + "'");
    }
  }

  std::string parse_basic_string() {
    std::string out;
    ++pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_++];
      if (c == '"') {
        return out;
      }
      if (c == '\\') {
        if (pos_ >= s_.size()) {
          break;
        }
        char e = s_[pos_++];
        switch (e) {
          case 'n':
            out += '\n';
            break;
          case 't':
            out += '\t';
            break;
          case 'r':
            out += '\r';
            break;
          case '"':
            out += '"';
            break;
          case '\\':
            out += '\\';
            break;
          default:
            fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    fail("unterminated string");
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

int bracket_balance(std::string_view line) {
  int depth = 0;
  bool in_basic = false;
  bool in_literal = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_basic) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_basic = false;
      }
    } else if (in_literal) {
      if (c == '\'') {
        in_literal = false;
      }
    } else if (c == '"') {
      in_basic = true;
    } else if (c == '\'') {
      in_literal = true;
    } else if (c == '#') {
      break;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    }
  }
  return depth;
}

nlohmann::json* table_at(nlohmann::json& root, const std::string& dotted, std::size_t line) {
  nlohmann::json* node = &root;
  for (const auto& part : split_string(dotted, '.')) {
    auto key = std::string(trim(part));
    if (key.empty()) {
      throw Error(Errc::parse, "config line " + std::to_string(line) + ": empty table name");
    }
    auto& child = (*node)[key];
    if (child.is_null()) {
      child = nlohmann::json::object();
    } else if (!child.is_object()) {
      throw Error(Errc::parse, "config line " + std::to_string(line) + ": '" + key + "' is not a table");
    }
    node = &child;
  }
  return node;
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* current = &root;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') {
      continue;
    }
    if (body.front() == '[') {
      auto close = body.find(']');
      if (close == std::string_view::npos) {
        throw Error(Errc::parse, "config line " + std::to_string(line_no) + ": unterminated table header");
      }
      current = table_at(root, std::string(body.substr(1, close - 1)), line_no);
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::parse, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(body.substr(0, eq)));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') {
      key = key.substr(1, key.size() - 2);
    }
    std::string value(trim(body.substr(eq + 1)));
    const std::size_t start_line = line_no;
    int depth = bracket_balance(value);
    while (depth > 0 && std::getline(in, line)) {
      ++line_no;
      value += "\n" + line;
      depth = bracket_balance(value);
    }
    if (current->contains(key)) {
      throw Error(Errc::parse, "config line " + std::to_string(start_line) + ": duplicate key '" + key + "'");
    }
    (*current)[key] = ValueParser(value, start_line).parse_all();
  }
  return root;
}

nlohmann::json load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot open config '" + path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  auto body = trim(text);
  if (!body.empty() && body.front() == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse, std::string("config: ") + e.what());
    }
  }
  return parse_toml(text);
}

}  // namespace raterkit::config
