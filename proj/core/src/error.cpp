#include "opd/error.hpp"

namespace opd {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_line: return "malformed_line";
    case Errc::duplicate_mnemonic: return "duplicate_mnemonic";
    case Errc::empty_report: return "empty_report";
    case Errc::no_files_found: return "no_files_found";
    case Errc::unresolved_label: return "unresolved_label";
    case Errc::not_pe: return "not_pe";
    case Errc::truncated: return "truncated";
    case Errc::not_32bit: return "not_32bit";
    case Errc::no_executable_section: return "no_executable_section";
    case Errc::zero_total: return "zero_total";
    case Errc::unknown_mnemonic: return "unknown_mnemonic";
    case Errc::too_few_instances: return "too_few_instances";
    case Errc::empty_result: return "empty_result";
    case Errc::schema_mismatch: return "schema_mismatch";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::normalized_poly_zero_norm: return "normalized_poly_zero_norm";
    case Errc::single_class: return "single_class";
    case Errc::degenerate_targets: return "degenerate_targets";
    case Errc::degenerate_matrix: return "degenerate_matrix";
    case Errc::unknown_attribute: return "unknown_attribute";
    case Errc::list_too_long: return "list_too_long";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::unknown_label: return "unknown_label";
    case Errc::k_too_large: return "k_too_large";
    case Errc::empty_test_set: return "empty_test_set";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io: return "io";
  }
  return "unknown";
}

bool is_numeric_failure(Errc code) noexcept {
  switch (code) {
    case Errc::normalized_poly_zero_norm:
    case Errc::degenerate_targets:
    case Errc::degenerate_matrix:
      return true;
    default:
      return false;
  }
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace opd
