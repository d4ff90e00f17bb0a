#include "opd/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "opd/error.hpp"
#include "opd/random.hpp"

namespace opd {
namespace {

struct PoolEntry {
  std::string_view name;
  double weight;
};

// Rough shape of real 32-bit code: mov and push dominate, x87 and SSE are rare.
constexpr std::array<PoolEntry, 60> kPool = {{
    {"mov", 300},    {"push", 120},  {"call", 60},   {"lea", 50},    {"pop", 45},    {"cmp", 40},
    {"add", 38},     {"jz", 30},     {"test", 28},   {"jmp", 26},    {"xor", 24},    {"jnz", 22},
    {"sub", 20},     {"ret", 15},   {"movzx", 12},  {"inc", 10},    {"dec", 9},     {"or", 9},
    {"shl", 7},      {"shr", 7},     {"imul", 6},    {"jb", 6},      {"jl", 5},      {"jle", 5},
    {"jg", 5},       {"jge", 5},     {"sar", 4},     {"neg", 4},     {"not", 4},     {"movsx", 4},
    {"leave", 4},    {"cdq", 3},     {"idiv", 3},    {"div", 3},     {"mul", 3},     {"sbb", 3},
    {"adc", 2},      {"setz", 2},    {"setnz", 2},   {"stos", 2},    {"lods", 1.5},  {"scas", 1.5},
    {"fld", 1.5},    {"fstp", 1.5},  {"fxch", 1},    {"fmul", 1},    {"fadd", 1},    {"rol", 1},
    {"ror", 1},      {"bswap", 0.8}, {"cmc", 0.5},   {"std", 0.5},   {"cld", 0.5},   {"nop", 2},
    {"int3", 1},     {"setl", 0.3},  {"fstsw", 0.4}, {"fabs", 0.4}, {"fldz", 0.3},  {"frndint", 0.3},
}};

constexpr std::array<PoolEntry, 12> kInformative = {{
    {"fdivp", 0.6},  {"and", 6},     {"setle", 0.6}, {"xchg", 1.2},  {"setnbe", 0.5}, {"fild", 0.6},
    {"fsubrp", 0.4}, {"setbe", 0.5}, {"ja", 3},      {"fistp", 0.6}, {"fsub", 0.5},   {"setnle", 0.4},
}};

constexpr double kConcentration = 400.0;
constexpr double kBoost = 6.0;
constexpr double kMinTotal = 2000.0;
constexpr double kMaxTotal = 200000.0;

std::array<std::string_view, 60> pool_names() {
  std::array<std::string_view, 60> out{};
  for (std::size_t i = 0; i < kPool.size(); ++i) out[i] = kPool[i].name;
  return out;
}

std::array<std::string_view, 12> informative_names() {
  std::array<std::string_view, 12> out{};
  for (std::size_t i = 0; i < kInformative.size(); ++i) out[i] = kInformative[i].name;
  return out;
}

}  // namespace

std::span<const std::string_view> synth_pool() noexcept {
  static const auto names = pool_names();
  return names;
}

std::span<const std::string_view> synth_informative_pool() noexcept {
  static const auto names = informative_names();
  return names;
}

std::vector<LabeledHistogram> synthesize(const SynthConfig& config) {
  if (config.classes < 2 || config.classes > 6) fail(Errc::invalid_argument, "classes must be between 2 and 6");
  if (config.n_per_class == 0) fail(Errc::invalid_argument, "n_per_class must be positive");
  if (config.informative > kInformative.size()) {
    fail(Errc::invalid_argument, "at most " + std::to_string(kInformative.size()) + " informative opcodes");
  }
  const auto scheme = config.classes == 2 ? LabelScheme::binary : LabelScheme::family;
  Rng rng(config.seed);

  std::vector<PoolEntry> entries(kPool.begin(), kPool.end());
  for (std::size_t j = 0; j < config.informative; ++j) entries.push_back(kInformative[j]);

  std::vector<LabeledHistogram> out;
  for (std::size_t c = 0; c < config.classes; ++c) {
    std::vector<double> base;
    for (const auto& e : entries) base.push_back(e.weight);
    for (std::size_t j = 0; j < config.informative; ++j) {
      if (((c + 1) >> (j % 3)) & 1u) base[kPool.size() + j] *= kBoost;
    }
    double base_sum = 0.0;
    for (double w : base) base_sum += w;

    for (std::size_t s = 0; s < config.n_per_class; ++s) {
      std::vector<double> p(base.size());
      double sum = 0.0;
      for (std::size_t j = 0; j < base.size(); ++j) {
        p[j] = rng.gamma(kConcentration * base[j] / base_sum);
        sum += p[j];
      }
      const double total = std::exp(std::log(kMinTotal) + rng.uniform01() * (std::log(kMaxTotal) - std::log(kMinTotal)));
      char id[17];
      std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(rng.next_u64()));

      LabeledHistogram lh;
      lh.label = ClassLabel{scheme, c};
      lh.histogram.sample_id = id;
      lh.histogram.source = HistogramSource::report;
      for (std::size_t j = 0; j < base.size(); ++j) {
        const auto count = static_cast<std::uint64_t>(std::llround(p[j] / sum * total));
        if (count > 0) lh.histogram.counts[std::string(entries[j].name)] = count;
      }
      if (lh.histogram.counts.empty()) lh.histogram.counts["mov"] = 1;
      lh.histogram.total = lh.histogram.counted();
      out.push_back(std::move(lh));
    }
  }
  return out;
}

void write_corpus(std::span<const LabeledHistogram> corpus, const std::filesystem::path& out) {
  for (const auto& lh : corpus) {
    write_file(out / std::string(lh.label.name()) / (lh.histogram.sample_id + ".txt"), format_report(lh.histogram));
  }
}

}  // namespace opd
