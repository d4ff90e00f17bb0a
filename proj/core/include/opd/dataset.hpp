#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opd/ingest.hpp"
#include "opd/labels.hpp"

namespace opd {

/// Per-attribute bounds of the training data used for (0,1) scaling.
struct ScalingParams {
  std::vector<double> min;
  std::vector<double> max;
};

/// Instance matrix over a named attribute list. The class column is kept
/// separately as indices into scheme_classes(scheme).
class Dataset {
 public:
  Dataset() = default;
  Dataset(LabelScheme scheme, std::vector<std::string> attributes, std::vector<std::vector<double>> rows,
          std::vector<std::size_t> labels, std::vector<std::string> ids = {});

  LabelScheme scheme() const noexcept { return scheme_; }
  const std::vector<std::string>& attributes() const noexcept { return attributes_; }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  /// Sample ids, empty when the dataset was read from a file.
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::optional<ScalingParams>& scaling() const noexcept { return scaling_; }

  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t width() const noexcept { return attributes_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  ClassLabel label(std::size_t i) const { return {scheme_, labels_.at(i)}; }
  std::optional<std::size_t> attribute_index(std::string_view name) const;
  std::vector<double> column(std::size_t j) const;
  /// Number of instances per class of the scheme.
  std::vector<std::size_t> class_counts() const;

  Dataset with_rows(std::vector<std::size_t> order) const;
  Dataset with_columns(std::span<const std::size_t> columns) const;
  void set_scaling(std::optional<ScalingParams> s) { scaling_ = std::move(s); }

 private:
  LabelScheme scheme_ = LabelScheme::binary;
  std::vector<std::string> attributes_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::size_t> labels_;
  std::vector<std::string> ids_;
  std::optional<ScalingParams> scaling_;
};

/// Sorted union of every mnemonic in the histograms.
std::vector<std::string> build_master_list(std::span<const LabeledHistogram> histograms);

/// count/total rounded half-up at 8 decimals, computed in integers.
double density(std::uint64_t count, std::uint64_t total);

/// One instance per histogram in sample_id order. With `dedupe`, instances
/// whose density vector equals an earlier one are dropped.
Dataset assemble(std::span<const LabeledHistogram> histograms, std::span<const std::string> master,
                 bool dedupe = false);

/// Columns by descending mean, ties by name.
Dataset sort_attributes_by_mean_density(const Dataset& ds);

struct Scaled {
  Dataset data;
  ScalingParams params;
};

Scaled minmax_scale(const Dataset& ds);
Dataset apply_scaling(const Dataset& ds, const ScalingParams& params);
/// Scales one raw vector with clamping to [0,1].
std::vector<double> scale_vector(std::span<const double> x, const ScalingParams& params);

struct IqrConfig {
  double outlier_factor = 3.0;
  double extreme_factor = 6.0;
};

struct IqrFlags {
  std::vector<bool> outlier;
  std::vector<bool> extreme;
  IqrConfig config;
};

/// Quantile by linear interpolation at 1-based position (n+1)q, clamped to
/// [1, n]. `sorted` must be ascending.
double quantile(std::span<const double> sorted, double q);

IqrFlags iqr_flag(const Dataset& ds, const IqrConfig& config = {});

/// Fisher-Yates: for i = n-1 down to 1, swap i with a uniform j in [0, i].
std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed);
Dataset shuffle(const Dataset& ds, std::uint64_t seed);

/// Removes the first ceil(n*percent/100) instances, or keeps only them when
/// `invert` is set.
Dataset split_percentage(const Dataset& ds, double percent, bool invert);

enum class DatasetFormat { csv, arff };

std::string write_dataset(const Dataset& ds, DatasetFormat format);
Dataset read_dataset(std::string_view text, DatasetFormat format);

/// Format from a file extension (.csv or .arff).
std::optional<DatasetFormat> format_for_path(std::string_view path);

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

}  // namespace opd
