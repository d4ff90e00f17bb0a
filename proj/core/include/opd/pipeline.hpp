#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "opd/dataset.hpp"
#include "opd/evaluation.hpp"
#include "opd/featsel.hpp"
#include "opd/pe.hpp"
#include "opd/svm.hpp"
#include "opd/synth.hpp"

// File-to-file pipeline stages. Each stage reads its inputs, writes its
// outputs, and prints a short summary to `log`; identical inputs give
// byte-identical outputs unless `stamp` is set.
namespace opd::pipeline {

namespace fs = std::filesystem;

struct SynthOptions {
  SynthConfig config;
  fs::path out;
};
void synth(const SynthOptions& o, std::ostream& log);

struct IngestOptions {
  fs::path root;
  std::optional<fs::path> manifest;
  LabelScheme scheme = LabelScheme::binary;
  fs::path out;
  bool dedupe = false;
};

struct IngestResult {
  Dataset dataset;
  std::vector<FileFailure> failures;
  std::vector<std::uint64_t> opcodes_per_class;  // summed histogram totals, scheme order
};
IngestResult ingest(const IngestOptions& o, std::ostream& log, std::ostream& diag);

struct DisasmOptions {
  std::vector<fs::path> inputs;  // PE files
  fs::path out_dir;              // one report per input, named <stem>.txt
  x86::DecoderProfile profile;
};
/// Returns the number of inputs that failed.
std::size_t disasm(const DisasmOptions& o, std::ostream& log, std::ostream& diag);

struct PreprocessOptions {
  fs::path in;
  fs::path out;
  std::uint64_t seed = 42;
  std::optional<fs::path> iqr_report;
  IqrConfig iqr;
};
void preprocess(const PreprocessOptions& o, std::ostream& log);

struct SplitOptions {
  fs::path in;
  double percent = 30.0;
  fs::path out_train;
  fs::path out_test;
};
void split(const SplitOptions& o, std::ostream& log);

struct TrainOptions {
  fs::path train;
  KernelSpec kernel;
  TrainerConfig trainer;
  fs::path out_model;
};
void train(const TrainOptions& o, std::ostream& log);

struct EvalOptions {
  fs::path model;
  fs::path test;
  fs::path out_report;
  bool stamp = false;
};
EvalReport evaluate(const EvalOptions& o, std::ostream& log);

struct CvOptions {
  fs::path train;
  std::size_t k = 10;
  std::uint64_t seed = 42;
  KernelSpec kernel;
  TrainerConfig trainer;
  fs::path out_report;
  bool stamp = false;
};
EvalReport cv(const CvOptions& o, std::ostream& log);

struct SelectOptions {
  fs::path train;
  SelectionConfig config;
  fs::path out_selection;
};
SelectionResult select(const SelectOptions& o, std::ostream& log);

struct ReduceOptions {
  fs::path in;
  fs::path selection;
  fs::path out;
};
void reduce(const ReduceOptions& o, std::ostream& log);

struct TuneOptions {
  fs::path train;
  fs::path test;
  std::vector<Grid> grids;
  TrainerConfig trainer;
  fs::path out_report;
  bool stamp = false;
};
std::vector<GridCell> tune(const TuneOptions& o, std::ostream& log);

struct TuneThresholdOptions {
  fs::path train;
  fs::path test;
  SelectionConfig scoring;  // evaluator used to score attributes on the training set
  KernelSpec kernel;
  TrainerConfig trainer;
  fs::path out_selection;
  fs::path out_report;
  bool stamp = false;
};
ThresholdTuning tune_threshold(const TuneThresholdOptions& o, std::ostream& log);

struct RankAggregateOptions {
  std::vector<fs::path> selections;
  fs::path out_table;
};
AggregateRanking rank_aggregate(const RankAggregateOptions& o, std::ostream& log);

/// Weighted precision of a model trained on `train` and scored on `test`.
double holdout_precision(const Dataset& train, const Dataset& test, const KernelSpec& kernel,
                         const TrainerConfig& trainer);

}  // namespace opd::pipeline
