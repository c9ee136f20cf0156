#include "text_util.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "matt/error.hpp"

namespace matt::detail {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) { return split(line, ','); }

float parse_float(std::string_view field, std::size_t line_no) {
    const std::string text(field);
    char* end = nullptr;
    errno = 0;
    const float value = std::strtof(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::FormatError,
                    "line " + std::to_string(line_no) + ": cannot parse '" + text + "' as a finite number");
    }
    return value;
}

}  // namespace matt::detail
