#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "opd/ingest.hpp"

namespace opd {

struct SynthConfig {
  std::size_t n_per_class = 20;
  std::size_t classes = 2;      // 2 = binary scheme, 3..6 = family scheme prefix
  std::size_t informative = 5;  // opcodes whose frequency depends on the class
  std::uint64_t seed = 42;
};

/// Mnemonic pool the generator draws from, most frequent first.
std::span<const std::string_view> synth_pool() noexcept;

/// Opcodes that carry the class signal, in the order they are assigned.
std::span<const std::string_view> synth_informative_pool() noexcept;

/// Per-sample opcode proportions are Dirichlet draws around a shared base
/// profile; class c scales informative opcode j up when bit (j mod 3) of
/// c + 1 is set. Totals are log-uniform.
std::vector<LabeledHistogram> synthesize(const SynthConfig& config);

/// Writes <out>/<class>/<sample_id>.txt report files.
void write_corpus(std::span<const LabeledHistogram> corpus, const std::filesystem::path& out);

}  // namespace opd
