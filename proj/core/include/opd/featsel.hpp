#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opd/dataset.hpp"

namespace opd {

enum class Evaluator { cfs_subset, correlation, gain_ratio, info_gain, one_r, pca, relieff, symm_uncert };
enum class Search { best_first, greedy_stepwise, ranker };

std::string_view evaluator_name(Evaluator e) noexcept;
std::optional<Evaluator> parse_evaluator(std::string_view name) noexcept;
std::string_view search_name(Search s) noexcept;
std::optional<Search> parse_search(std::string_view name) noexcept;

struct AttributeScore {
  std::string attribute;
  double score = 0.0;
};

inline constexpr double kNoThreshold = std::numeric_limits<double>::lowest();

struct SelectionResult {
  Evaluator evaluator = Evaluator::info_gain;
  Search search = Search::ranker;
  std::vector<std::string> retained;
  std::optional<std::vector<AttributeScore>> scores;
  double threshold = kNoThreshold;
  std::optional<std::size_t> num_to_select;
  std::map<std::string, std::string> parameters;  // echoed into the serialized form
};

std::string selection_to_json(const SelectionResult& s);
SelectionResult selection_from_json(std::string_view text);

// --- discretization and entropy measures ---------------------------------

struct DiscretizedAttribute {
  std::vector<double> cuts;       // ascending; value > cut[k] moves past bin k
  std::vector<std::size_t> bins;  // per instance, in [0, cuts.size()]

  std::size_t bin_count() const noexcept { return cuts.size() + 1; }
};

/// Cut points halfway between the sorted values at positions round(k n / bins);
/// cuts that would split equal values are dropped.
DiscretizedAttribute discretize_equal_frequency(std::span<const double> values, std::size_t bins = 10);

/// Base-2 entropy of a label sequence.
double entropy(std::span<const std::size_t> labels);

double info_gain(const DiscretizedAttribute& attr, std::span<const std::size_t> labels);
double gain_ratio(const DiscretizedAttribute& attr, std::span<const std::size_t> labels);
double symm_uncert(const DiscretizedAttribute& attr, std::span<const std::size_t> labels);
/// Symmetrical uncertainty between two label-like sequences.
double symm_uncert(std::span<const std::size_t> a, std::span<const std::size_t> b);

double pearson(std::span<const double> x, std::span<const double> y);

/// |r| against the class indicator, support-weighted over one-vs-rest
/// indicators when more than two classes are present.
double correlation_eval(std::span<const double> column, std::span<const std::size_t> labels);

/// Training accuracy of a one-attribute rule with buckets of at least
/// `min_bucket` majority-class instances.
double one_r_eval(std::span<const double> column, std::span<const std::size_t> labels, std::size_t min_bucket = 6);

struct ReliefOptions {
  std::size_t k = 10;
  std::size_t sample = 0;  // 0 = every instance
  std::uint64_t seed = 42;
};

std::vector<AttributeScore> relieff_eval(const Dataset& ds, const ReliefOptions& options = {});

enum class PcaMatrix { correlation, covariance };

struct PcaResult {
  std::vector<double> eigenvalues;                // descending, all of them
  std::vector<std::vector<double>> components;    // retained eigenvectors
  std::size_t retained = 0;
  std::vector<std::vector<double>> transformed;   // instances x retained
  SelectionResult selection;                      // every attribute, unscored
};

PcaResult pca_eval(const Dataset& ds, PcaMatrix matrix = PcaMatrix::correlation, double variance_cover = 0.95);

// --- subset evaluation ----------------------------------------------------

/// k r_cf / sqrt(k + k(k-1) r_ff) from the mean attribute-class and mean
/// inter-attribute correlations.
double cfs_merit_from_means(std::size_t k, double mean_rcf, double mean_rff);

/// Same, from per-attribute class correlations and a symmetric
/// inter-attribute correlation matrix over the subset.
double cfs_merit_from_correlations(std::span<const double> rcf, const std::vector<std::vector<double>>& rff);

/// CFS merit with symmetrical uncertainty over equal-frequency bins;
/// correlations are computed once and cached.
class CfsEvaluator {
 public:
  explicit CfsEvaluator(const Dataset& ds, std::size_t bins = 10);

  double merit(std::span<const std::size_t> subset);
  double class_correlation(std::size_t a) const { return rcf_.at(a); }
  double attribute_correlation(std::size_t a, std::size_t b);

 private:
  std::vector<DiscretizedAttribute> disc_;
  std::vector<double> rcf_;
  std::map<std::pair<std::size_t, std::size_t>, double> rff_;
};

double cfs_merit(std::span<const std::size_t> subset, const Dataset& ds);

using MeritFn = std::function<double(std::span<const std::size_t>)>;

enum class Direction { forward, backward };

/// Subsets are compared by merit, then by their sorted attribute names.
SelectionResult search_best_first(std::span<const std::string> attributes, const MeritFn& merit,
                                  std::size_t backtrack_limit = 5, Direction direction = Direction::forward);

SelectionResult search_greedy_stepwise(std::span<const std::string> attributes, const MeritFn& merit,
                                       std::optional<std::size_t> num_to_select = std::nullopt,
                                       double threshold = kNoThreshold, bool generate_ranking = false);

/// Score-descending (ties by name); scores <= threshold dropped; then the
/// first num_to_select kept.
SelectionResult ranker_select(std::vector<AttributeScore> scores, double threshold = kNoThreshold,
                              std::optional<std::size_t> num_to_select = std::nullopt);

/// Keeps the retained attributes in the dataset's column order.
Dataset reduce_dataset(const Dataset& ds, const SelectionResult& selection);

/// Per-attribute scores of a single-attribute evaluator.
std::vector<AttributeScore> score_attributes(const Dataset& ds, Evaluator evaluator, const ReliefOptions& relief = {},
                                             std::size_t bins = 10, std::size_t min_bucket = 6);

struct SelectionConfig {
  Evaluator evaluator = Evaluator::info_gain;
  Search search = Search::ranker;
  double threshold = kNoThreshold;
  std::optional<std::size_t> num_to_select;
  std::size_t bins = 10;
  std::size_t min_bucket = 6;
  ReliefOptions relief;
  std::size_t backtrack_limit = 5;
  bool generate_ranking = false;
  PcaMatrix pca_matrix = PcaMatrix::correlation;
  double variance_cover = 0.95;
};

/// Runs an evaluator with a search. CFS pairs with best_first or
/// greedy_stepwise; every other evaluator with ranker.
SelectionResult run_selection(const Dataset& ds, const SelectionConfig& config);

// --- threshold tuning -----------------------------------------------------

/// Metric of a classifier trained on the first dataset, evaluated on the second.
using ClassifierFn = std::function<double(const Dataset&, const Dataset&)>;

struct ThresholdStep {
  double threshold = kNoThreshold;
  std::size_t attributes = 0;
  double metric = 0.0;
};

struct ThresholdTuning {
  double baseline_metric = 0.0;
  double best_threshold = kNoThreshold;
  SelectionResult selection;
  std::vector<ThresholdStep> sweep;  // baseline first, then ascending thresholds
};

/// Raises the discard threshold through the sorted unique scores and keeps the
/// smallest attribute set whose metric is not below the all-attribute baseline.
ThresholdTuning tune_threshold(const Dataset& train, const Dataset& test, std::span<const AttributeScore> scores,
                               const ClassifierFn& classifier, Evaluator evaluator = Evaluator::correlation);

// --- rank aggregation -----------------------------------------------------

inline constexpr std::size_t kAggregateLists = 7;
inline constexpr std::size_t kAggregateDepth = 21;

struct RankedWeight {
  std::string attribute;
  std::uint64_t total = 0;
};

struct AggregateRanking {
  std::vector<RankedWeight> entries;  // total descending, ties by name
  std::vector<std::vector<std::string>> sources;

  std::uint64_t weight_of(std::string_view attribute) const;
};

/// Rank r (1-based) in a list earns 22 - r. Names are lowercased.
AggregateRanking aggregate_rank(const std::vector<std::vector<std::string>>& lists);

/// Table with rank, opcode and total weight columns.
std::string format_aggregate(const AggregateRanking& ranking);

}  // namespace opd
