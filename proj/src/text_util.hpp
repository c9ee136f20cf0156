#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace matt::detail {

std::string_view trim(std::string_view s);
/// Splits on commas; fields are trimmed. No quoting support.
std::vector<std::string> split_csv_line(std::string_view line);
std::vector<std::string> split(std::string_view s, char sep);
float parse_float(std::string_view field, std::size_t line_no);

}  // namespace matt::detail
