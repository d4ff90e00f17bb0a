#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace opd {

enum class KernelFamily { poly, normalized_poly, rbf, puk };

std::string_view kernel_name(KernelFamily family) noexcept;
std::optional<KernelFamily> parse_kernel(std::string_view name) noexcept;

struct KernelSpec {
  KernelFamily family = KernelFamily::poly;
  double exponent = 1.0;
  bool use_lower_order = false;
  double gamma = 0.01;
  double sigma = 1.0;
  double omega = 1.0;
  double complexity = 1.0;  // C

  /// Throws invalid_argument when a parameter the family reads is out of range.
  void validate() const;
};

double dot(std::span<const double> x, std::span<const double> y);
double squared_distance(std::span<const double> x, std::span<const double> y);

/// poly:            (x.y)^E, or (x.y + 1)^E with lower-order terms
/// normalized_poly: poly(x,y) / sqrt(poly(x,x) poly(y,y))
/// rbf:             exp(-gamma |x-y|^2)
/// puk:             1 / (1 + (2 |x-y| sqrt(2^(1/omega) - 1) / sigma)^2)^omega
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

}  // namespace opd
