#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opd/dataset.hpp"
#include "opd/svm.hpp"

namespace opd {

/// Rows are actual classes, columns predicted.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::uint64_t>> cells;

  std::uint64_t total() const noexcept;
  std::uint64_t row_sum(std::size_t c) const;
  std::uint64_t column_sum(std::size_t c) const;
  std::uint64_t trace() const noexcept;
};

ConfusionMatrix empty_confusion(std::vector<std::string> classes);

/// Labels are indices into `classes`.
ConfusionMatrix confusion_matrix(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                 std::vector<std::string> classes);
/// Labels are class names, matched exactly.
ConfusionMatrix confusion_matrix(std::span<const std::string> actual, std::span<const std::string> predicted,
                                 std::vector<std::string> classes);

struct ClassMetrics {
  std::string name;
  std::uint64_t support = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  double tpr = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

struct EvalReport {
  std::vector<ClassMetrics> per_class;
  ClassMetrics weighted;  // support-weighted averages of the rates
  double accuracy = 0.0;
  std::size_t attributes = 0;
  ConfusionMatrix matrix;
  std::map<std::string, std::string> config;  // echoed into rendered reports
};

/// Rates with 0/0 taken as 0; averages weighted by actual-class support.
EvalReport class_metrics(const ConfusionMatrix& cm);

using TrainerFn = std::function<MulticlassSvmModel(const Dataset&)>;

/// Fold of every instance: classes in scheme order, each class's instances in
/// seeded-shuffle order, dealt round-robin with the fold counter carried over.
std::vector<std::size_t> stratified_folds(const Dataset& ds, std::size_t k, std::uint64_t seed);

/// Pooled confusion matrix over the held-out predictions of all folds.
EvalReport cross_validate(const Dataset& ds, std::size_t k, std::uint64_t seed, const TrainerFn& trainer);

EvalReport holdout_evaluate(const MulticlassSvmModel& model, const Dataset& test);

struct Grid {
  KernelFamily family = KernelFamily::poly;
  std::vector<double> complexity;
  std::vector<double> exponent;  // poly and normalized_poly
  std::vector<double> gamma;     // rbf
  std::vector<double> sigma;     // puk
  std::vector<double> omega;     // puk
  bool use_lower_order = false;
};

/// C in {0.1, 1, 10, 100}; E in {1, 2, 3}; gamma in {0.01, 0.1, 1, 10};
/// PUK at sigma = omega = 1.
Grid default_grid(KernelFamily family);

std::vector<KernelSpec> expand_grid(const Grid& grid);

struct GridCell {
  KernelSpec spec;
  std::optional<EvalReport> report;
  std::size_t support_vectors = 0;
  std::string error;  // set when training or evaluation failed
};

/// Every cell of every grid. The result is ordered by weighted precision
/// (descending), then support-vector count; failed cells go last.
std::vector<GridCell> grid_search(const Dataset& train, const Dataset& test, std::span<const Grid> grids,
                                  const TrainerConfig& config);

std::string format_report_text(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace opd
