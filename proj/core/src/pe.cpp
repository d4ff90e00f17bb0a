#include "opd/pe.hpp"

#include <algorithm>
#include <cstdio>

#include "opd/error.hpp"

namespace opd {
namespace {

constexpr std::uint16_t kMachineI386 = 0x014c;
constexpr std::uint16_t kOptionalMagicPe32Plus = 0x020b;

class ByteView {
 public:
  explicit ByteView(std::span<const std::uint8_t> b) : b_(b) {}

  void need(std::size_t offset, std::size_t n) const {
    if (offset > b_.size() || n > b_.size() - offset) {
      fail(Errc::truncated, "truncated at offset " + std::to_string(offset));
    }
  }
  std::uint16_t u16(std::size_t offset) const {
    need(offset, 2);
    return static_cast<std::uint16_t>(b_[offset] | (b_[offset + 1] << 8));
  }
  std::uint32_t u32(std::size_t offset) const {
    need(offset, 4);
    return static_cast<std::uint32_t>(b_[offset]) | (static_cast<std::uint32_t>(b_[offset + 1]) << 8) |
           (static_cast<std::uint32_t>(b_[offset + 2]) << 16) |
           (static_cast<std::uint32_t>(b_[offset + 3]) << 24);
  }
  std::span<const std::uint8_t> slice(std::size_t offset, std::size_t n) const {
    need(offset, n);
    return b_.subspan(offset, n);
  }

 private:
  std::span<const std::uint8_t> b_;
};

}  // namespace

bool Section::executable() const noexcept {
  return (characteristics & (kScnMemExecute | kScnCntCode)) != 0;
}

PeImage parse_pe(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 64) fail(Errc::truncated, "truncated at offset " + std::to_string(bytes.size()));
  if (bytes[0] != 'M' || bytes[1] != 'Z') fail(Errc::not_pe, "missing MZ signature");
  const ByteView v(bytes);
  const std::uint32_t pe_off = v.u32(0x3C);
  const auto sig = v.slice(pe_off, 4);
  if (sig[0] != 'P' || sig[1] != 'E' || sig[2] != 0 || sig[3] != 0) fail(Errc::not_pe, "missing PE signature");

  const std::size_t coff = static_cast<std::size_t>(pe_off) + 4;
  PeImage img;
  img.machine_code = v.u16(coff);
  const std::uint16_t nsections = v.u16(coff + 2);
  const std::uint16_t opt_size = v.u16(coff + 16);
  const std::size_t opt = coff + 20;
  if (img.machine_code != kMachineI386) {
    fail(Errc::not_32bit, "COFF machine 0x" + [&] {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%04x", img.machine_code);
      return std::string(buf);
    }() + " is not x86-32");
  }
  if (opt_size >= 2 && v.u16(opt) == kOptionalMagicPe32Plus) fail(Errc::not_32bit, "PE32+ optional header");
  img.machine = Machine::x86_32;
  if (opt_size >= 20) img.entry_rva = v.u32(opt + 16);

  const std::size_t table = opt + opt_size;
  v.need(table, static_cast<std::size_t>(nsections) * 40);
  for (std::size_t i = 0; i < nsections; ++i) {
    const std::size_t h = table + i * 40;
    Section s;
    const auto raw_name = v.slice(h, 8);
    for (auto c : raw_name) {
      if (c == 0) break;
      s.name.push_back(static_cast<char>(c));
    }
    const std::uint32_t virtual_size = v.u32(h + 8);
    s.virtual_address = v.u32(h + 12);
    const std::uint32_t raw_size = v.u32(h + 16);
    s.raw_offset = v.u32(h + 20);
    s.characteristics = v.u32(h + 36);
    std::uint32_t size = raw_size;
    if (virtual_size != 0) size = std::min(size, virtual_size);
    if (size == 0) {
      s.raw_data = {};
    } else {
      s.raw_data = v.slice(s.raw_offset, size);
    }
    img.sections.push_back(std::move(s));
  }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  for (const auto& s : img.sections) {
    if (!s.raw_data.empty()) spans.emplace_back(s.raw_offset, s.raw_offset + s.raw_data.size());
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].first < spans[i - 1].second) fail(Errc::not_pe, "overlapping section raw data");
  }
  return img;
}

DecodedCount count_opcodes(const PeImage& image, const x86::DecoderProfile& profile) {
  if (image.machine != Machine::x86_32) fail(Errc::not_32bit, "image is not x86-32");
  DecodedCount out;
  bool any = false;
  for (const auto& s : image.sections) {
    if (!s.executable()) continue;
    any = true;
    x86::sweep(s.raw_data, profile, out);
  }
  if (!any) fail(Errc::no_executable_section, "no executable section");
  return out;
}

OpcodeHistogram histogram_from_pe(std::span<const std::uint8_t> bytes, std::string sample_id,
                                  const x86::DecoderProfile& profile) {
  const auto counts = count_opcodes(parse_pe(bytes), profile);
  OpcodeHistogram h;
  h.sample_id = std::move(sample_id);
  h.counts = counts.counts;
  h.total = counts.decoded_instructions;
  h.source = HistogramSource::disassembly;
  return h;
}

}  // namespace opd
