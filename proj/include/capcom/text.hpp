#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace capcom {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

// Canonical tokenizer shared by every n-gram and coverage metric: ASCII
// lowercase, punctuation replaced by a space except a hyphen that sits
// between two alphanumerics, split on whitespace. Non-ASCII bytes are kept
// as word characters.
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces every run of '\r'/'\n' with a single space.
std::string collapse_newlines(std::string_view s);

}  // namespace capcom
