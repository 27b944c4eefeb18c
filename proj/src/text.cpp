#include "atlas/text.hpp"

#include <cctype>

namespace atlas::text {

namespace {

bool is_curly_quote(std::string_view s, size_t i) {
    // U+2018, U+2019, U+201C, U+201D encode as E2 80 98/99/9C/9D.
    if (i + 2 >= s.size()) return false;
    const auto b0 = static_cast<unsigned char>(s[i]);
    const auto b1 = static_cast<unsigned char>(s[i + 1]);
    const auto b2 = static_cast<unsigned char>(s[i + 2]);
    return b0 == 0xE2 && b1 == 0x80 &&
           (b2 == 0x98 || b2 == 0x99 || b2 == 0x9C || b2 == 0x9D);
}

}  // namespace

std::string normalize_surface(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    auto push = [&](char c) {
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    };
    for (size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (is_curly_quote(s, i)) {
            i += 2;
            continue;
        }
        if (c == '\'' || c == '"' || c == '`') continue;
        if (c < 0x80) {
            if (std::isalnum(c)) {
                push(static_cast<char>(std::tolower(c)));
            } else {
                pending_space = true;  // whitespace and punctuation both separate
            }
        } else {
            push(static_cast<char>(c));
        }
    }
    return out;
}

std::string embed_key(std::string_view s) {
    std::string key = normalize_surface(s);
    for (auto& c : key)
        if (c == ' ') c = '_';
    return key;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace atlas::text
