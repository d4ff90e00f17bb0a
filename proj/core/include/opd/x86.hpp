#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace opd::x86 {

/// Instruction families the 32-bit decoder accepts. The general-purpose
/// one-byte and two-byte maps are always on.
struct DecoderProfile {
  bool x87 = true;
  bool sse = true;  // MMX/SSE..SSE4.2 and the 0F38/0F3A maps
  /// `wait` followed by a no-wait x87 control op decodes as the waiting
  /// form (9B DF E0 -> fstsw).
  bool merge_fwait = true;
};

struct Instruction {
  std::string_view mnemonic;  // lowercase, static storage
  std::uint8_t length = 0;
};

/// Decodes one instruction at the start of `code` in 32-bit protected mode.
/// Returns nullopt when the bytes are not a valid instruction of the profile
/// or the instruction would extend past the end of `code`.
std::optional<Instruction> decode(std::span<const std::uint8_t> code,
                                  const DecoderProfile& profile = {});

struct SweepCounts {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t unknown_bytes = 0;
  std::uint64_t decoded_instructions = 0;
};

/// Linear sweep over one code region, accumulating into `into`. Undecodable
/// bytes are skipped one at a time.
void sweep(std::span<const std::uint8_t> code, const DecoderProfile& profile, SweepCounts& into);

}  // namespace opd::x86
