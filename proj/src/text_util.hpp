#pragma once

// Small shared helpers for the line-oriented CSV surfaces.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "fieldops/error.hpp"

namespace fieldops::text {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Splits on '\n'; a trailing newline does not produce an extra line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t end = line.find(sep, start);
        if (end == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    return fields;
}

inline bool try_parse_double(std::string_view field, double& out) {
    field = trim(field);
    if (field.empty()) return false;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline double parse_double(std::string_view field, const std::string& context) {
    double v = 0.0;
    if (!try_parse_double(field, v))
        throw Error(ErrorKind::Parse,
                    context + ": invalid number '" + std::string(trim(field)) + "'");
    return v;
}

}  // namespace fieldops::text
