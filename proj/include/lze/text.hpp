#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lze::text {

// Shortest decimal form is not needed; 17 significant digits round-trip any
// double and keep output byte-stable.
std::string format_real(double x);

std::vector<std::string_view> split(std::string_view s, char sep);

std::optional<double> parse_real(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::string_view trim(std::string_view s);

// `kind<TAB>key=value<TAB>...`
struct TaggedLine {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;

  const std::string* find(std::string_view key) const;
  friend bool operator==(const TaggedLine&, const TaggedLine&) = default;
};

std::string format_tagged(const TaggedLine& line);
std::optional<TaggedLine> parse_tagged(std::string_view line);

}  // namespace lze::text
