#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opd/labels.hpp"

namespace opd {

enum class HistogramSource { report, disassembly };

/// Opcode occurrence counts of one sample. Mnemonics are lowercase.
struct OpcodeHistogram {
  std::string sample_id;
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  HistogramSource source = HistogramSource::report;

  std::uint64_t counted() const noexcept;
};

struct LabeledHistogram {
  OpcodeHistogram histogram;
  ClassLabel label;
};

/// Parses an opcode-count report. Data lines are
///   <rank>.<ws><count><ws><density>%<ws><mnemonic>
/// with an optional `TOTAL <n>` line; blank lines are skipped. The printed
/// density column is validated but not kept.
OpcodeHistogram parse_report(std::string_view text, std::string sample_id);

/// Inverse of parse_report: ranks by descending count (ties by mnemonic),
/// 4-digit ranks, 6-digit zero-padded counts, 2-decimal densities and an
/// explicit TOTAL line.
std::string format_report(const OpcodeHistogram& histogram);

using Manifest = std::map<std::string, std::string>;

/// Reads a two-column `sample_id,label` CSV. A header row whose first field
/// is `sample_id` is skipped.
Manifest parse_manifest(std::string_view text);

struct FileFailure {
  std::filesystem::path path;
  std::string code;
  std::string message;
};

struct ScanResult {
  std::vector<LabeledHistogram> samples;  // ascending sample_id
  std::vector<FileFailure> failures;      // ascending path
};

/// Parses every `.txt` report below `root`. The label comes from the
/// manifest when it names the sample, else from the immediate parent
/// directory. Per-file problems are collected, not thrown.
ScanResult scan_directory(const std::filesystem::path& root, LabelScheme scheme,
                          const std::optional<Manifest>& manifest = std::nullopt);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace opd
