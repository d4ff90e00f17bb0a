#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opd {

enum class Errc {
  // ingest
  malformed_line,
  duplicate_mnemonic,
  empty_report,
  no_files_found,
  unresolved_label,
  // pe / decoder
  not_pe,
  truncated,
  not_32bit,
  no_executable_section,
  // dataset
  zero_total,
  unknown_mnemonic,
  too_few_instances,
  empty_result,
  schema_mismatch,
  // svm
  dimension_mismatch,
  normalized_poly_zero_norm,
  single_class,
  degenerate_targets,
  // featsel
  degenerate_matrix,
  unknown_attribute,
  list_too_long,
  // evaluation
  length_mismatch,
  unknown_label,
  k_too_large,
  empty_test_set,
  // general
  invalid_argument,
  io,
};

/// Stable snake_case identifier, used in machine-readable diagnostics.
std::string_view errc_name(Errc code) noexcept;

/// True for failures of numerical routines (as opposed to bad input data).
bool is_numeric_failure(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace opd
