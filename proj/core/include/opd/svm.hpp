#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opd/dataset.hpp"
#include "opd/kernel.hpp"

namespace opd {

struct TrainerConfig {
  double tolerance = 1e-3;  // KKT tolerance
  double epsilon = 1e-12;   // round-off guard; also the support-vector cutoff
  std::uint64_t max_iterations = 1'000'000;  // successful pair updates
  bool calibrate = false;
  std::uint64_t seed = 42;

  void validate() const;
};

struct Sigmoid {
  double a = 0.0;
  double b = 0.0;

  /// P(y = +1 | f) = 1 / (1 + exp(a f + b)).
  double probability(double f) const;
};

struct BinarySvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alphas;
  std::vector<int> labels;  // +1 / -1
  double b = 0.0;
  KernelSpec kernel;
  std::size_t negative_class = 0;  // scheme class index for y = -1
  std::size_t positive_class = 1;  // scheme class index for y = +1
  std::optional<Sigmoid> sigmoid;
  bool converged = true;
  std::uint64_t iterations = 0;

  /// f(x) = sum_i alpha_i y_i K(sv_i, x) + b
  double decision(std::span<const double> x) const;
};

/// Trains on rows whose labels are `negative_class` / `positive_class`.
/// Rows are used as given; no scaling is applied here.
BinarySvmModel smo_train_binary(std::span<const std::vector<double>> rows, std::span<const int> y,
                                const KernelSpec& spec, const TrainerConfig& config);

/// Dual objective W(alpha) = sum alpha - 1/2 sum sum alpha_i alpha_j y_i y_j K_ij,
/// evaluated over the model's support vectors.
double dual_objective(const BinarySvmModel& model);

/// Platt scaling by regularised maximum likelihood (Newton with backtracking).
Sigmoid fit_sigmoid(std::span<const double> decision_values, std::span<const int> y);

struct MulticlassSvmModel {
  LabelScheme scheme = LabelScheme::binary;
  std::vector<std::string> attributes;
  std::vector<std::size_t> classes;  // scheme indices present in training, ascending
  std::optional<ScalingParams> scaling;
  KernelSpec kernel;
  TrainerConfig config;
  std::vector<BinarySvmModel> machines;  // pairs (a, b), a < b, in lexicographic pair order

  std::size_t support_vector_count() const noexcept;
};

/// One binary machine per pair of present classes, trained concurrently.
/// Uses ds.scaling() as the model's stored scaling; the rows must already be
/// scaled with it.
MulticlassSvmModel train_multiclass(const Dataset& ds, const KernelSpec& spec, const TrainerConfig& config);

struct Prediction {
  std::size_t label = 0;            // scheme class index
  std::vector<std::size_t> votes;   // per scheme class
  std::vector<double> margins;      // per machine, f(x)
  std::vector<double> probabilities;  // per scheme class; empty unless calibrated
};

/// `x` is a raw density vector; the stored scaling is applied first.
Prediction predict(const MulticlassSvmModel& model, std::span<const double> x);
/// `x` already lives in the model's (scaled) feature space.
Prediction predict_scaled(const MulticlassSvmModel& model, std::span<const double> x);

std::string model_to_json(const MulticlassSvmModel& model);
MulticlassSvmModel model_from_json(std::string_view text);

}  // namespace opd
