#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kgprompt::text {

// Whitespace-separated words, as written.
std::vector<std::string> split_words(std::string_view s);

std::size_t word_count(std::string_view s);

// First `max_words` words joined by single spaces; unchanged if shorter.
std::string truncate_words(std::string_view s, std::size_t max_words);

// Lower-cased word tokens with leading/trailing ASCII punctuation stripped.
// Used for embedding lookups.
std::vector<std::string> tokens(std::string_view s);

std::string trim(std::string_view s);

}  // namespace kgprompt::text
