#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace opd {

/// Binary: goodware vs malware. Family: goodware plus five ransomware families.
enum class LabelScheme { binary, family };

/// Class names of a scheme, in their canonical order. This order is the
/// nominal order in ARFF headers and the row/column order of confusion
/// matrices.
std::span<const std::string_view> scheme_classes(LabelScheme scheme) noexcept;

std::string_view scheme_name(LabelScheme scheme) noexcept;
std::optional<LabelScheme> parse_scheme(std::string_view name) noexcept;

/// Case-insensitive lookup of a class name within a scheme.
std::optional<std::size_t> class_index(LabelScheme scheme, std::string_view name) noexcept;

struct ClassLabel {
  LabelScheme scheme = LabelScheme::binary;
  std::size_t index = 0;

  std::string_view name() const noexcept { return scheme_classes(scheme)[index]; }

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

std::optional<ClassLabel> resolve_label(LabelScheme scheme, std::string_view name) noexcept;

}  // namespace opd
