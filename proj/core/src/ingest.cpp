#include "opd/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "opd/decimal.hpp"
#include "opd/error.hpp"

namespace opd {
namespace {

bool is_ws(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f' || c == '\n';
}

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  std::size_t skip_ws() {
    std::size_t n = 0;
    while (pos_ < s_.size() && is_ws(s_[pos_])) ++pos_, ++n;
    return n;
  }
  std::string_view digits() {
    const auto start = pos_;
    while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  std::string_view non_ws() {
    const auto start = pos_;
    while (pos_ < s_.size() && !is_ws(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool eat(std::string_view word) {
    if (s_.substr(pos_).starts_with(word)) {
      pos_ += word.size();
      return true;
    }
    return false;
  }
  bool done() const noexcept { return pos_ == s_.size(); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

struct DataLine {
  std::uint64_t count;
  std::string mnemonic;
};

std::optional<DataLine> match_data_line(std::string_view line) {
  Cursor c(line);
  c.skip_ws();
  if (c.digits().empty() || !c.eat('.')) return std::nullopt;
  if (c.skip_ws() == 0) return std::nullopt;
  auto count_text = c.digits();
  if (count_text.empty()) return std::nullopt;
  if (c.skip_ws() == 0) return std::nullopt;
  if (c.digits().empty() || !c.eat('.') || c.digits().empty() || !c.eat('%')) return std::nullopt;
  if (c.skip_ws() == 0) return std::nullopt;
  auto mnemonic = c.non_ws();
  if (mnemonic.empty()) return std::nullopt;
  c.skip_ws();
  if (!c.done()) return std::nullopt;
  auto count = parse_u64(count_text);
  if (!count) return std::nullopt;
  std::string lowered(mnemonic);
  for (char& ch : lowered) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return DataLine{*count, std::move(lowered)};
}

std::optional<std::uint64_t> match_total_line(std::string_view line) {
  Cursor c(line);
  c.skip_ws();
  if (!c.eat(std::string_view("TOTAL"))) return std::nullopt;
  if (c.skip_ws() == 0) return std::nullopt;
  auto n = c.digits();
  if (n.empty()) return std::nullopt;
  c.skip_ws();
  if (!c.done()) return std::nullopt;
  return parse_u64(n);
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), is_ws);
}

}  // namespace

std::uint64_t OpcodeHistogram::counted() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& [_, n] : counts) sum += n;
  return sum;
}

OpcodeHistogram parse_report(std::string_view text, std::string sample_id) {
  OpcodeHistogram h;
  h.sample_id = std::move(sample_id);
  h.source = HistogramSource::report;

  std::optional<std::uint64_t> explicit_total;
  std::size_t total_line_no = 0;
  std::uint64_t sum = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (blank(line)) {
      if (end == text.size()) break;
      continue;
    }
    if (auto row = match_data_line(line)) {
      if (explicit_total) {
        fail(Errc::malformed_line, "line " + std::to_string(line_no) + ": data row after TOTAL line");
      }
      if (!h.counts.emplace(row->mnemonic, row->count).second) {
        fail(Errc::duplicate_mnemonic, "duplicate mnemonic '" + row->mnemonic + "'");
      }
      if (sum + row->count < sum) {
        fail(Errc::malformed_line, "line " + std::to_string(line_no) + ": count overflow");
      }
      sum += row->count;
    } else if (auto total = match_total_line(line)) {
      if (explicit_total) {
        fail(Errc::malformed_line, "line " + std::to_string(line_no) + ": second TOTAL line");
      }
      explicit_total = *total;
      total_line_no = line_no;
    } else {
      fail(Errc::malformed_line, "line " + std::to_string(line_no) + ": unrecognised report line");
    }
    if (end == text.size()) break;
  }

  if (h.counts.empty()) fail(Errc::empty_report, "report contains no opcode rows");
  if (explicit_total) {
    if (*explicit_total < sum) {
      fail(Errc::malformed_line, "line " + std::to_string(total_line_no) +
                                     ": TOTAL is smaller than the sum of listed counts");
    }
    h.total = *explicit_total;
  } else {
    h.total = sum;
  }
  if (h.total == 0) fail(Errc::empty_report, "report has zero opcode occurrences");
  return h;
}

std::string format_report(const OpcodeHistogram& histogram) {
  std::vector<std::pair<std::string, std::uint64_t>> rows(histogram.counts.begin(),
                                                           histogram.counts.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string out;
  char buf[64];
  std::size_t rank = 0;
  for (const auto& [name, count] : rows) {
    ++rank;
    std::snprintf(buf, sizeof buf, "%04zu.\t%06llu\t", rank, static_cast<unsigned long long>(count));
    out += buf;
    const double pct = histogram.total == 0 ? 0.0
                                            : 100.0 * static_cast<double>(count) /
                                                  static_cast<double>(histogram.total);
    out += format_fixed(pct, 2);
    out += "%\t";
    out += name;
    out += '\n';
  }
  out += "TOTAL\t" + std::to_string(histogram.total) + "\n";
  return out;
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  auto trim = [](std::string s) {
    while (!s.empty() && is_ws(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && is_ws(s[i])) ++i;
    return s.substr(i);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      fail(Errc::malformed_line, "manifest line " + std::to_string(line_no) + ": expected sample_id,label");
    }
    auto id = trim(line.substr(0, comma));
    auto label = trim(line.substr(comma + 1));
    if (line_no == 1 && id == "sample_id") continue;
    if (id.empty() || label.empty()) {
      fail(Errc::malformed_line, "manifest line " + std::to_string(line_no) + ": empty field");
    }
    m[id] = label;
  }
  return m;
}

ScanResult scan_directory(const std::filesystem::path& root, LabelScheme scheme,
                          const std::optional<Manifest>& manifest) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(Errc::io, "not a directory: " + root.string());

  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".txt") files.push_back(it->path());
  }
  if (ec) fail(Errc::io, "cannot enumerate " + root.string() + ": " + ec.message());
  if (files.empty()) fail(Errc::no_files_found, "no .txt reports under " + root.string());
  std::sort(files.begin(), files.end());

  ScanResult result;
  std::set<std::string> seen;
  for (const auto& path : files) {
    const std::string id = path.stem().string();
    try {
      std::optional<ClassLabel> label;
      if (manifest) {
        if (auto it = manifest->find(id); it != manifest->end()) {
          label = resolve_label(scheme, it->second);
          if (!label) fail(Errc::unresolved_label, id + ": manifest label '" + it->second + "' is not a " +
                                                       std::string(scheme_name(scheme)) + " class");
        }
      }
      if (!label) {
        const auto parent = path.parent_path();
        if (fs::equivalent(parent, root)) {
          fail(Errc::unresolved_label, id + ": no manifest entry and no class directory");
        }
        label = resolve_label(scheme, parent.filename().string());
        if (!label) {
          fail(Errc::unresolved_label, id + ": directory '" + parent.filename().string() + "' is not a " +
                                           std::string(scheme_name(scheme)) + " class");
        }
      }
      if (!seen.insert(id).second) fail(Errc::invalid_argument, id + ": duplicate sample id");
      result.samples.push_back({parse_report(read_file(path), id), *label});
    } catch (const Error& e) {
      result.failures.push_back({path, std::string(errc_name(e.code())), e.what()});
    }
  }
  std::sort(result.samples.begin(), result.samples.end(),
            [](const auto& a, const auto& b) { return a.histogram.sample_id < b.histogram.sample_id; });
  return result;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(Errc::io, "cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

}  // namespace opd
