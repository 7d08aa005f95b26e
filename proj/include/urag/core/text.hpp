#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "urag/core/errors.hpp"

namespace urag::core {

// Trim + collapse internal whitespace runs to single spaces.
inline std::string normalize_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // leading whitespace dropped
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(static_cast<char>(c));
            in_space = false;
        }
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Token budgets are enforced with a 4-characters-per-token proxy; exact
// tokenizers are backend-specific and unavailable over the wire.
inline std::size_t token_estimate(std::string_view s) {
    return (s.size() + 3) / 4;
}

inline std::size_t token_budget_chars(std::size_t tokens) {
    return tokens * 4;
}

// Truncates to a token budget. Returns true if anything was cut.
inline bool truncate_to_tokens(std::string& s, std::size_t budget_tokens) {
    std::size_t max_chars = token_budget_chars(budget_tokens);
    if (s.size() <= max_chars) return false;
    s.resize(max_chars);
    return true;
}

inline char option_letter(std::size_t index) {
    if (index >= 26) throw ArgumentError("option index too large for letter labels");
    return static_cast<char>('A' + index);
}

inline std::string option_label(std::size_t index) {
    return std::string(1, option_letter(index));
}

// Reverse of option_letter; returns npos for non-letters.
inline std::size_t letter_index(char c) {
    if (c >= 'A' && c <= 'Z') return static_cast<std::size_t>(c - 'A');
    if (c >= 'a' && c <= 'z') return static_cast<std::size_t>(c - 'a');
    return std::string::npos;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

}  // namespace urag::core
