#include "opd/labels.hpp"

#include <array>
#include <cctype>

namespace opd {
namespace {

constexpr std::array<std::string_view, 2> kBinary = {"good", "malware"};
constexpr std::array<std::string_view, 6> kFamily = {
    "good", "Torrentlocker", "TeslaCrypt", "Locky", "CryptoWall", "Cerber"};

bool iequals(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

}  // namespace

std::span<const std::string_view> scheme_classes(LabelScheme scheme) noexcept {
  if (scheme == LabelScheme::binary) return kBinary;
  return kFamily;
}

std::string_view scheme_name(LabelScheme scheme) noexcept {
  return scheme == LabelScheme::binary ? "binary" : "family";
}

std::optional<LabelScheme> parse_scheme(std::string_view name) noexcept {
  if (iequals(name, "binary")) return LabelScheme::binary;
  if (iequals(name, "family")) return LabelScheme::family;
  return std::nullopt;
}

std::optional<std::size_t> class_index(LabelScheme scheme, std::string_view name) noexcept {
  auto classes = scheme_classes(scheme);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (iequals(classes[i], name)) return i;
  }
  return std::nullopt;
}

std::optional<ClassLabel> resolve_label(LabelScheme scheme, std::string_view name) noexcept {
  if (auto idx = class_index(scheme, name)) return ClassLabel{scheme, *idx};
  return std::nullopt;
}

}  // namespace opd
