#pragma once
#include <array>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace mgbid::csv {

// Shortest representation that round-trips the exact double value.
inline std::string format_double(double x) {
  std::array<char, 32> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), static_cast<std::size_t>(p - buf.data()));
}

// Splits one CSV line on commas. Fields in this project are numeric tokens or
// plain identifiers, so no quoting rules apply; a trailing \r is stripped.
inline std::vector<std::string_view> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

inline bool parse_long(std::string_view s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

}  // namespace mgbid::csv
