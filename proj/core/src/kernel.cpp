#include "opd/kernel.hpp"

#include <cmath>
#include <string>

#include "opd/error.hpp"

namespace opd {
namespace {

double poly(const KernelSpec& spec, double d) {
  return std::pow(spec.use_lower_order ? d + 1.0 : d, spec.exponent);
}

}  // namespace

std::string_view kernel_name(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::poly: return "poly";
    case KernelFamily::normalized_poly: return "normalized_poly";
    case KernelFamily::rbf: return "rbf";
    case KernelFamily::puk: return "puk";
  }
  return "poly";
}

std::optional<KernelFamily> parse_kernel(std::string_view name) noexcept {
  if (name == "poly") return KernelFamily::poly;
  if (name == "normalized_poly" || name == "normalized-poly" || name == "npoly") return KernelFamily::normalized_poly;
  if (name == "rbf") return KernelFamily::rbf;
  if (name == "puk") return KernelFamily::puk;
  return std::nullopt;
}

void KernelSpec::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(Errc::invalid_argument, std::string(what) + " must be positive");
  };
  positive(complexity, "C");
  switch (family) {
    case KernelFamily::poly:
    case KernelFamily::normalized_poly: positive(exponent, "exponent"); break;
    case KernelFamily::rbf: positive(gamma, "gamma"); break;
    case KernelFamily::puk:
      positive(sigma, "sigma");
      positive(omega, "omega");
      break;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(Errc::dimension_mismatch,
         "kernel arguments have lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  switch (spec.family) {
    case KernelFamily::poly:
      return poly(spec, dot(x, y));
    case KernelFamily::normalized_poly: {
      const double xx = poly(spec, dot(x, x));
      const double yy = poly(spec, dot(y, y));
      if (xx == 0.0 || yy == 0.0) fail(Errc::normalized_poly_zero_norm, "normalized poly kernel of a zero vector");
      return poly(spec, dot(x, y)) / std::sqrt(xx * yy);
    }
    case KernelFamily::rbf:
      return std::exp(-spec.gamma * squared_distance(x, y));
    case KernelFamily::puk: {
      const double dist = std::sqrt(squared_distance(x, y));
      const double t = 2.0 * dist * std::sqrt(std::pow(2.0, 1.0 / spec.omega) - 1.0) / spec.sigma;
      return 1.0 / std::pow(1.0 + t * t, spec.omega);
    }
  }
  return 0.0;
}

}  // namespace opd
