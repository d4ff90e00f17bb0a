#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "opd/ingest.hpp"
#include "opd/x86.hpp"

namespace opd {

enum class Machine { x86_32, other };

struct Section {
  std::string name;  // up to 8 bytes, NUL padding stripped
  std::uint32_t virtual_address = 0;
  std::uint32_t raw_offset = 0;
  std::uint32_t characteristics = 0;
  std::span<const std::uint8_t> raw_data;  // view into the parsed buffer

  bool executable() const noexcept;
};

/// Views into the byte buffer passed to parse_pe, which must outlive it.
struct PeImage {
  Machine machine = Machine::other;
  std::uint16_t machine_code = 0;
  std::uint32_t entry_rva = 0;
  std::vector<Section> sections;
};

inline constexpr std::uint32_t kScnCntCode = 0x00000020;
inline constexpr std::uint32_t kScnMemExecute = 0x20000000;

PeImage parse_pe(std::span<const std::uint8_t> bytes);

using DecodedCount = x86::SweepCounts;

DecodedCount count_opcodes(const PeImage& image, const x86::DecoderProfile& profile = {});

OpcodeHistogram histogram_from_pe(std::span<const std::uint8_t> bytes, std::string sample_id,
                                  const x86::DecoderProfile& profile = {});

}  // namespace opd
