#include "opd/decimal.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace opd {

std::string format_fixed(double value, int places) {
  if (!std::isfinite(value)) throw std::invalid_argument("format_fixed: non-finite value");
  std::array<char, 512> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  if (res.ec != std::errc()) throw std::runtime_error("format_fixed: buffer too small");
  std::string_view text(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));

  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  std::string int_part(text.substr(0, dot));
  std::string frac_part = dot == std::string_view::npos ? std::string() : std::string(text.substr(dot + 1));

  bool round_up = frac_part.size() > static_cast<std::size_t>(places) &&
                  frac_part[static_cast<std::size_t>(places)] >= '5';
  frac_part.resize(static_cast<std::size_t>(places), '0');

  // Digits as one string so the carry can run through the decimal point.
  std::string digits = int_part + frac_part;
  if (round_up) {
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (digits[i] == '9') {
        digits[i] = '0';
      } else {
        ++digits[i];
        break;
      }
      if (i == 0) digits.insert(digits.begin(), '1');
    }
  }
  const std::size_t int_len = digits.size() - static_cast<std::size_t>(places);
  std::string out;
  bool all_zero = digits.find_first_not_of('0') == std::string::npos;
  if (negative && !all_zero) out.push_back('-');
  out.append(digits, 0, int_len);
  if (places > 0) {
    out.push_back('.');
    out.append(digits, int_len, std::string::npos);
  }
  return out;
}

double round8(double value) { return *parse_double(format_fixed8(value)); }

std::string format_shortest(double value) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view text) noexcept {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view text) noexcept {
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return v;
}

}  // namespace opd
