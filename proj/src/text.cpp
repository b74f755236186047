#include "kgprompt/text.hpp"

#include <cctype>

namespace kgprompt::text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::size_t word_count(std::string_view s) { return split_words(s).size(); }

std::string truncate_words(std::string_view s, std::size_t max_words) {
    auto words = split_words(s);
    if (words.size() <= max_words) return trim(s);
    std::string out;
    for (std::size_t i = 0; i < max_words; ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    for (auto& w : split_words(s)) {
        std::size_t b = 0;
        std::size_t e = w.size();
        while (b < e && is_punct(w[b])) ++b;
        while (e > b && is_punct(w[e - 1])) --e;
        if (b == e) continue;
        std::string t = w.substr(b, e - b);
        for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(t));
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace kgprompt::text
