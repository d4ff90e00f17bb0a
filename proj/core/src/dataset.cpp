#include "opd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "opd/decimal.hpp"
#include "opd/error.hpp"
#include "opd/random.hpp"

namespace opd {
namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

double parse_cell(std::string_view text, std::size_t line_no) {
  auto v = parse_double(trim(text));
  if (!v) {
    fail(Errc::schema_mismatch, "line " + std::to_string(line_no) + ": bad numeric value '" +
                                    std::string(text) + "'");
  }
  return *v;
}

Dataset build_checked(LabelScheme scheme, std::vector<std::string> attrs, std::vector<std::vector<double>> rows,
                      std::vector<std::size_t> labels) {
  try {
    return Dataset(scheme, std::move(attrs), std::move(rows), std::move(labels));
  } catch (const Error& e) {
    fail(Errc::schema_mismatch, e.what());
  }
}

}  // namespace

Dataset::Dataset(LabelScheme scheme, std::vector<std::string> attributes, std::vector<std::vector<double>> rows,
                 std::vector<std::size_t> labels, std::vector<std::string> ids)
    : scheme_(scheme),
      attributes_(std::move(attributes)),
      rows_(std::move(rows)),
      labels_(std::move(labels)),
      ids_(std::move(ids)) {
  if (rows_.size() != labels_.size()) fail(Errc::invalid_argument, "row and label counts differ");
  if (!ids_.empty() && ids_.size() != rows_.size()) fail(Errc::invalid_argument, "row and id counts differ");
  std::set<std::string_view> seen;
  for (const auto& a : attributes_) {
    if (!seen.insert(a).second) fail(Errc::invalid_argument, "duplicate attribute '" + a + "'");
  }
  const auto nclasses = scheme_classes(scheme_).size();
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != attributes_.size()) {
      fail(Errc::invalid_argument, "instance " + std::to_string(i) + " has " + std::to_string(rows_[i].size()) +
                                       " values, expected " + std::to_string(attributes_.size()));
    }
    for (double v : rows_[i]) {
      if (!std::isfinite(v) || v < 0.0) {
        fail(Errc::invalid_argument, "instance " + std::to_string(i) + " has a negative or non-finite value");
      }
    }
    if (labels_[i] >= nclasses) fail(Errc::invalid_argument, "label index out of range");
  }
}

std::optional<std::size_t> Dataset::attribute_index(std::string_view name) const {
  for (std::size_t j = 0; j < attributes_.size(); ++j) {
    if (attributes_[j] == name) return j;
  }
  return std::nullopt;
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.at(j));
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> out(scheme_classes(scheme_).size(), 0);
  for (auto l : labels_) ++out[l];
  return out;
}

Dataset Dataset::with_rows(std::vector<std::size_t> order) const {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;
  rows.reserve(order.size());
  labels.reserve(order.size());
  for (auto i : order) {
    rows.push_back(rows_.at(i));
    labels.push_back(labels_.at(i));
    if (!ids_.empty()) ids.push_back(ids_[i]);
  }
  Dataset out(scheme_, attributes_, std::move(rows), std::move(labels), std::move(ids));
  out.scaling_ = scaling_;
  return out;
}

Dataset Dataset::with_columns(std::span<const std::size_t> columns) const {
  std::vector<std::string> attrs;
  for (auto j : columns) attrs.push_back(attributes_.at(j));
  std::vector<std::vector<double>> rows;
  rows.reserve(rows_.size());
  for (const auto& r : rows_) {
    std::vector<double> row;
    row.reserve(columns.size());
    for (auto j : columns) row.push_back(r[j]);
    rows.push_back(std::move(row));
  }
  Dataset out(scheme_, std::move(attrs), std::move(rows), labels_, ids_);
  if (scaling_) {
    ScalingParams p;
    for (auto j : columns) {
      p.min.push_back(scaling_->min[j]);
      p.max.push_back(scaling_->max[j]);
    }
    out.scaling_ = std::move(p);
  }
  return out;
}

std::vector<std::string> build_master_list(std::span<const LabeledHistogram> histograms) {
  if (histograms.empty()) fail(Errc::invalid_argument, "no histograms to build a master list from");
  std::set<std::string> names;
  for (const auto& h : histograms) {
    for (const auto& [name, _] : h.histogram.counts) names.insert(name);
  }
  return {names.begin(), names.end()};
}

double density(std::uint64_t count, std::uint64_t total) {
  if (total == 0) fail(Errc::zero_total, "density with zero total");
  if (count > total) fail(Errc::invalid_argument, "count exceeds total");
  __extension__ using u128 = unsigned __int128;
  const u128 scaled = (static_cast<u128>(count) * 200000000u + total) / (static_cast<u128>(total) * 2u);
  return static_cast<double>(static_cast<std::uint64_t>(scaled)) / 1e8;
}

Dataset assemble(std::span<const LabeledHistogram> histograms, std::span<const std::string> master,
                 bool dedupe) {
  if (histograms.empty()) fail(Errc::invalid_argument, "no histograms to assemble");
  std::map<std::string_view, std::size_t> column;
  for (std::size_t j = 0; j < master.size(); ++j) column.emplace(master[j], j);

  std::vector<std::size_t> order(histograms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return histograms[a].histogram.sample_id < histograms[b].histogram.sample_id;
  });

  const LabelScheme scheme = histograms[0].label.scheme;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;
  std::set<std::vector<double>> seen;
  for (auto i : order) {
    const auto& lh = histograms[i];
    if (lh.label.scheme != scheme) fail(Errc::invalid_argument, "histograms use different label schemes");
    std::vector<double> row(master.size(), 0.0);
    for (const auto& [name, count] : lh.histogram.counts) {
      auto it = column.find(name);
      if (it == column.end()) fail(Errc::unknown_mnemonic, "mnemonic '" + name + "' is not in the master list");
      row[it->second] = density(count, lh.histogram.total);
    }
    if (dedupe && !seen.insert(row).second) continue;
    rows.push_back(std::move(row));
    labels.push_back(lh.label.index);
    ids.push_back(lh.histogram.sample_id);
  }
  return Dataset(scheme, {master.begin(), master.end()}, std::move(rows), std::move(labels), std::move(ids));
}

Dataset sort_attributes_by_mean_density(const Dataset& ds) {
  const auto w = ds.width();
  std::vector<double> mean(w, 0.0);
  for (const auto& r : ds.rows()) {
    for (std::size_t j = 0; j < w; ++j) mean[j] += r[j];
  }
  if (!ds.empty()) {
    for (auto& m : mean) m /= static_cast<double>(ds.size());
  }
  std::vector<std::size_t> cols(w);
  std::iota(cols.begin(), cols.end(), 0);
  std::sort(cols.begin(), cols.end(), [&](auto a, auto b) {
    if (mean[a] != mean[b]) return mean[a] > mean[b];
    return ds.attributes()[a] < ds.attributes()[b];
  });
  return ds.with_columns(cols);
}

Scaled minmax_scale(const Dataset& ds) {
  if (ds.empty()) fail(Errc::invalid_argument, "cannot scale an empty dataset");
  ScalingParams p;
  p.min.assign(ds.width(), 0.0);
  p.max.assign(ds.width(), 0.0);
  for (std::size_t j = 0; j < ds.width(); ++j) {
    double lo = ds.rows()[0][j];
    double hi = lo;
    for (const auto& r : ds.rows()) {
      lo = std::min(lo, r[j]);
      hi = std::max(hi, r[j]);
    }
    p.min[j] = lo;
    p.max[j] = hi;
  }
  return {apply_scaling(ds, p), p};
}

std::vector<double> scale_vector(std::span<const double> x, const ScalingParams& params) {
  if (x.size() != params.min.size()) fail(Errc::dimension_mismatch, "vector width differs from scaling params");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double range = params.max[j] - params.min[j];
    if (range <= 0.0) {
      out[j] = 0.0;
    } else {
      out[j] = std::clamp((x[j] - params.min[j]) / range, 0.0, 1.0);
    }
  }
  return out;
}

Dataset apply_scaling(const Dataset& ds, const ScalingParams& params) {
  std::vector<std::vector<double>> rows;
  rows.reserve(ds.size());
  for (const auto& r : ds.rows()) rows.push_back(scale_vector(r, params));
  Dataset out(ds.scheme(), ds.attributes(), std::move(rows), ds.labels(), ds.ids());
  out.set_scaling(params);
  return out;
}

double quantile(std::span<const double> sorted, double q) {
  const auto n = sorted.size();
  if (n == 0) fail(Errc::invalid_argument, "quantile of empty data");
  const double pos = std::clamp((static_cast<double>(n) + 1.0) * q, 1.0, static_cast<double>(n));
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo >= n) return sorted[n - 1];
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

IqrFlags iqr_flag(const Dataset& ds, const IqrConfig& config) {
  if (ds.size() < 4) fail(Errc::too_few_instances, "IQR flagging needs at least 4 instances");
  IqrFlags flags;
  flags.config = config;
  flags.outlier.assign(ds.size(), false);
  flags.extreme.assign(ds.size(), false);
  for (std::size_t j = 0; j < ds.width(); ++j) {
    auto col = ds.column(j);
    std::sort(col.begin(), col.end());
    const double q1 = quantile(col, 0.25);
    const double q3 = quantile(col, 0.75);
    const double iqr = q3 - q1;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double v = ds.rows()[i][j];
      if (v < q1 - config.outlier_factor * iqr || v > q3 + config.outlier_factor * iqr) flags.outlier[i] = true;
      if (v < q1 - config.extreme_factor * iqr || v > q3 + config.extreme_factor * iqr) flags.extreme[i] = true;
    }
  }
  return flags;
}

std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

Dataset shuffle(const Dataset& ds, std::uint64_t seed) { return ds.with_rows(shuffle_order(ds.size(), seed)); }

Dataset split_percentage(const Dataset& ds, double percent, bool invert) {
  if (!(percent > 0.0 && percent < 100.0)) fail(Errc::invalid_argument, "percent must be in (0, 100)");
  const double exact = static_cast<double>(ds.size()) * percent / 100.0;
  // Guard against products like 3.0000000000000004 rounding up a whole step.
  const auto removed = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if ((i < removed) == invert) keep.push_back(i);
  }
  if (keep.empty()) fail(Errc::empty_result, "percentage split leaves an empty side");
  if (keep.size() == ds.size()) fail(Errc::empty_result, "percentage split leaves an empty side");
  return ds.with_rows(std::move(keep));
}

std::string write_dataset(const Dataset& ds, DatasetFormat format) {
  std::string out;
  const auto classes = scheme_classes(ds.scheme());
  if (format == DatasetFormat::csv) {
    for (const auto& a : ds.attributes()) out += a + ",";
    out += "class\n";
  } else {
    out += "@relation opcode_density\n\n";
    for (const auto& a : ds.attributes()) out += "@attribute " + a + " numeric\n";
    out += "@attribute class {";
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (c) out += ',';
      out += classes[c];
    }
    out += "}\n\n@data\n";
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.rows()[i]) {
      out += format_fixed8(v);
      out += ',';
    }
    out += classes[ds.labels()[i]];
    out += '\n';
  }
  return out;
}

namespace {

Dataset read_csv(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) fail(Errc::schema_mismatch, "CSV has no header");
  const auto header = split_fields(trim(lines[first]), ',');
  if (header.empty() || !iequals(trim(header.back()), "class")) {
    fail(Errc::schema_mismatch, "CSV header must end with a 'class' column");
  }
  std::vector<std::string> attrs;
  for (std::size_t j = 0; j + 1 < header.size(); ++j) attrs.emplace_back(trim(header[j]));

  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;
  for (std::size_t k = first + 1; k < lines.size(); ++k) {
    const auto line = trim(lines[k]);
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != header.size()) {
      fail(Errc::schema_mismatch, "line " + std::to_string(k + 1) + ": " + std::to_string(fields.size()) +
                                      " fields, header has " + std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(attrs.size());
    for (std::size_t j = 0; j + 1 < fields.size(); ++j) row.push_back(parse_cell(fields[j], k + 1));
    rows.push_back(std::move(row));
    names.emplace_back(trim(fields.back()));
  }

  bool all_binary = true;
  for (const auto& n : names) all_binary = all_binary && class_index(LabelScheme::binary, n).has_value();
  const auto scheme = all_binary ? LabelScheme::binary : LabelScheme::family;
  std::vector<std::size_t> labels;
  for (const auto& n : names) {
    auto idx = class_index(scheme, n);
    if (!idx) fail(Errc::schema_mismatch, "class '" + n + "' is not a known label");
    labels.push_back(*idx);
  }
  return build_checked(scheme, std::move(attrs), std::move(rows), std::move(labels));
}

Dataset read_arff(std::string_view text) {
  const auto lines = lines_of(text);
  std::vector<std::string> attrs;
  std::optional<LabelScheme> scheme;
  std::vector<std::string> nominal;
  bool in_data = false;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto line = trim(lines[k]);
    if (line.empty() || line.front() == '%') continue;
    const auto line_no = std::to_string(k + 1);
    if (!in_data) {
      if (line.front() != '@') fail(Errc::schema_mismatch, "line " + line_no + ": expected a declaration");
      const auto sp = line.find_first_of(" \t");
      const auto keyword = line.substr(0, sp);
      if (iequals(keyword, "@relation")) continue;
      if (iequals(keyword, "@data")) {
        if (!scheme) fail(Errc::schema_mismatch, "missing nominal class attribute");
        in_data = true;
        continue;
      }
      if (!iequals(keyword, "@attribute") || sp == std::string_view::npos) {
        fail(Errc::schema_mismatch, "line " + line_no + ": unsupported declaration");
      }
      auto rest = trim(line.substr(sp));
      const auto name_end = rest.find_first_of(" \t");
      if (name_end == std::string_view::npos) fail(Errc::schema_mismatch, "line " + line_no + ": attribute type missing");
      const auto name = rest.substr(0, name_end);
      const auto type = trim(rest.substr(name_end));
      if (scheme) fail(Errc::schema_mismatch, "line " + line_no + ": class must be the last attribute");
      if (type.front() == '{') {
        if (!iequals(name, "class") || type.back() != '}') {
          fail(Errc::schema_mismatch, "line " + line_no + ": only the class attribute may be nominal");
        }
        for (auto v : split_fields(type.substr(1, type.size() - 2), ',')) nominal.emplace_back(trim(v));
        for (auto s : {LabelScheme::binary, LabelScheme::family}) {
          const auto cls = scheme_classes(s);
          if (cls.size() == nominal.size() &&
              std::equal(cls.begin(), cls.end(), nominal.begin(), [](auto a, const auto& b) { return iequals(a, b); })) {
            scheme = s;
          }
        }
        if (!scheme) fail(Errc::schema_mismatch, "line " + line_no + ": class values match no label scheme");
      } else if (iequals(type, "numeric") || iequals(type, "real")) {
        attrs.emplace_back(name);
      } else {
        fail(Errc::schema_mismatch, "line " + line_no + ": unsupported attribute type");
      }
      continue;
    }
    const auto fields = split_fields(line, ',');
    if (fields.size() != attrs.size() + 1) {
      fail(Errc::schema_mismatch, "line " + line_no + ": " + std::to_string(fields.size()) + " values, header declares " +
                                      std::to_string(attrs.size() + 1));
    }
    std::vector<double> row;
    row.reserve(attrs.size());
    for (std::size_t j = 0; j < attrs.size(); ++j) row.push_back(parse_cell(fields[j], k + 1));
    auto idx = class_index(*scheme, trim(fields.back()));
    if (!idx) fail(Errc::schema_mismatch, "line " + line_no + ": undeclared class value");
    rows.push_back(std::move(row));
    labels.push_back(*idx);
  }
  if (!scheme) fail(Errc::schema_mismatch, "missing nominal class attribute");
  return build_checked(*scheme, std::move(attrs), std::move(rows), std::move(labels));
}

}  // namespace

Dataset read_dataset(std::string_view text, DatasetFormat format) {
  return format == DatasetFormat::csv ? read_csv(text) : read_arff(text);
}

std::optional<DatasetFormat> format_for_path(std::string_view path) {
  auto ends = [&](std::string_view ext) {
    return path.size() >= ext.size() && iequals(path.substr(path.size() - ext.size()), ext);
  };
  if (ends(".csv")) return DatasetFormat::csv;
  if (ends(".arff")) return DatasetFormat::arff;
  return std::nullopt;
}

Dataset load_dataset(const std::string& path) {
  auto fmt = format_for_path(path);
  if (!fmt) fail(Errc::invalid_argument, "unknown dataset extension: " + path);
  return read_dataset(read_file(path), *fmt);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  auto fmt = format_for_path(path);
  if (!fmt) fail(Errc::invalid_argument, "unknown dataset extension: " + path);
  write_file(path, write_dataset(ds, *fmt));
}

}  // namespace opd
