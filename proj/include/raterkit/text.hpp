#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace raterkit::text {

/// Lowercases and splits on every maximal run of non-alphanumeric code points.
/// Input is UTF-8; invalid byte sequences act as separators.
///
/// Letter/digit classification: ASCII by the usual rules; outside ASCII,
/// everything is treated as alphanumeric except whitespace, controls, and the
/// punctuation/symbol blocks (Latin-1 punctuation, General Punctuation,
/// currency, arrows through dingbats, CJK punctuation, fullwidth ASCII
/// punctuation, emoji). Case folding covers Latin-1, Latin Extended-A, Greek
/// and Cyrillic.
std::vector<std::string> tokenize(std::string_view utf8);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace raterkit::text
