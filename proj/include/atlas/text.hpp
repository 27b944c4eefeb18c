#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace atlas::text {

// Canonical surface normalization used for membership phrases, toponym
// surfaces, and gold/override files: quote characters (straight and curly)
// are dropped, remaining punctuation becomes a space, ASCII letters are
// lowercased, and whitespace runs collapse to a single space.
std::string normalize_surface(std::string_view s);

// Embedding-table key form of a surface: normalize_surface with spaces
// replaced by underscores.
std::string embed_key(std::string_view s);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace atlas::text
