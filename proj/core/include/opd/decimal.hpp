#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace opd {

/// Fixed-point text with exactly `places` decimals, rounded half away from
/// zero on the shortest round-trip decimal form of `value` (so 0.125 at two
/// places is "0.13", as a spreadsheet would show it).
std::string format_fixed(double value, int places);

inline std::string format_fixed8(double value) { return format_fixed(value, 8); }

/// The double nearest to format_fixed(value, 8).
double round8(double value);

/// Shortest text that parses back to the same double.
std::string format_shortest(double value);

std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<std::uint64_t> parse_u64(std::string_view text) noexcept;

}  // namespace opd
