#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace atlas::csv {

// Quotes a field when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

std::string row(const std::vector<std::string>& fields);

// Splits one CSV line honoring double-quoted fields.
std::vector<std::string> parse_line(std::string_view line);

// Splits a whole document into rows, skipping blank lines.
std::vector<std::vector<std::string>> parse(std::string_view content);

}  // namespace atlas::csv
