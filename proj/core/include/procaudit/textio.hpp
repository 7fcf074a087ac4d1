#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace procaudit {

// Shortest decimal form that parses back to the identical double. All
// persisted formats (CSV, stats files, model containers) use this, which is
// what makes their round-trips bit-stable.
std::string format_double(double value);

// Strict full-token parses. On failure they throw ParseError with `context`
// in the message.
double parse_double(std::string_view token, std::string_view context);
std::int64_t parse_int64(std::string_view token, std::string_view context);

// Trims ASCII whitespace (incl. trailing CR from CRLF files).
std::string_view trim(std::string_view s);

// Whole-file helpers; throw IoError with the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

} // namespace procaudit
