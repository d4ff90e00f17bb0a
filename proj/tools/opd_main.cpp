#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opd/error.hpp"
#include "opd/pipeline.hpp"

namespace fs = std::filesystem;
using namespace opd;

namespace {

enum Exit { ok = 0, usage = 1, data = 2, numeric = 3 };

int report_error(std::string_view code, const std::string& message, int exit_code) {
  nlohmann::ordered_json j{{"error", code}, {"message", message}, {"exit", exit_code}};
  std::cerr << j.dump() << "\n";
  return exit_code;
}

struct KernelFlags {
  std::string family = "poly";
  double c = 1.0;
  double exponent = 1.0;
  bool lower_order = false;
  double gamma = 0.01;
  double sigma = 1.0;
  double omega = 1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--kernel", family, "poly, normalized_poly, rbf or puk")->capture_default_str();
    cmd->add_option("--C,--complexity", c, "complexity constant")->capture_default_str();
    cmd->add_option("--E,--exponent", exponent, "poly exponent")->capture_default_str();
    cmd->add_flag("--lower-order", lower_order, "include lower-order poly terms");
    cmd->add_option("--gamma", gamma, "rbf gamma")->capture_default_str();
    cmd->add_option("--sigma", sigma, "puk sigma")->capture_default_str();
    cmd->add_option("--omega", omega, "puk omega")->capture_default_str();
  }

  KernelSpec spec() const {
    const auto f = parse_kernel(family);
    if (!f) fail(Errc::invalid_argument, "unknown kernel '" + family + "'");
    KernelSpec k;
    k.family = *f;
    k.complexity = c;
    k.exponent = exponent;
    k.use_lower_order = lower_order;
    k.gamma = gamma;
    k.sigma = sigma;
    k.omega = omega;
    k.validate();
    return k;
  }
};

struct TrainerFlags {
  TrainerConfig config;

  void add(CLI::App* cmd) {
    cmd->add_option("--tolerance", config.tolerance, "KKT tolerance")->capture_default_str();
    cmd->add_option("--max-iterations", config.max_iterations, "SMO step cap per machine")->capture_default_str();
    cmd->add_flag("--calibrate", config.calibrate, "fit logistic models to the outputs");
    cmd->add_option("--trainer-seed", config.seed, "seed for SMO tie-breaking")->capture_default_str();
  }
};

struct SelectionFlags {
  std::string evaluator = "info_gain";
  std::optional<std::string> search;
  std::optional<double> threshold;
  std::optional<std::size_t> num_to_select;
  SelectionConfig config;
  std::string pca_matrix = "correlation";

  void add(CLI::App* cmd, bool with_search) {
    cmd->add_option("--evaluator", evaluator,
                    "cfs_subset, correlation, gain_ratio, info_gain, one_r, pca, relieff, symm_uncert")
        ->capture_default_str();
    if (with_search) {
      cmd->add_option("--search", search, "best_first, greedy_stepwise or ranker");
      cmd->add_option("--threshold", threshold, "drop attributes scoring at or below this");
      cmd->add_option("--num-to-select", num_to_select, "keep at most this many attributes");
      cmd->add_option("--backtrack-limit", config.backtrack_limit, "best-first stale expansions")->capture_default_str();
      cmd->add_flag("--generate-ranking", config.generate_ranking, "greedy stepwise runs to completion");
      cmd->add_option("--pca-matrix", pca_matrix, "correlation or covariance")->capture_default_str();
      cmd->add_option("--variance-cover", config.variance_cover, "PCA variance to retain")->capture_default_str();
    }
    cmd->add_option("--bins", config.bins, "equal-frequency bins for entropy measures")->capture_default_str();
    cmd->add_option("--min-bucket", config.min_bucket, "OneR minimum bucket size")->capture_default_str();
    cmd->add_option("--relief-k", config.relief.k, "ReliefF neighbours")->capture_default_str();
    cmd->add_option("--relief-sample", config.relief.sample, "ReliefF sampled instances, 0 = all")
        ->capture_default_str();
    cmd->add_option("--relief-seed", config.relief.seed, "ReliefF sampling seed")->capture_default_str();
  }

  SelectionConfig resolve() const {
    SelectionConfig c = config;
    const auto e = parse_evaluator(evaluator);
    if (!e) fail(Errc::invalid_argument, "unknown evaluator '" + evaluator + "'");
    c.evaluator = *e;
    if (search) {
      const auto s = parse_search(*search);
      if (!s) fail(Errc::invalid_argument, "unknown search '" + *search + "'");
      c.search = *s;
    } else {
      c.search = c.evaluator == Evaluator::cfs_subset ? Search::best_first : Search::ranker;
    }
    if (threshold) c.threshold = *threshold;
    c.num_to_select = num_to_select;
    if (pca_matrix == "correlation") {
      c.pca_matrix = PcaMatrix::correlation;
    } else if (pca_matrix == "covariance") {
      c.pca_matrix = PcaMatrix::covariance;
    } else {
      fail(Errc::invalid_argument, "unknown PCA matrix '" + pca_matrix + "'");
    }
    return c;
  }
};

LabelScheme scheme_flag(const std::string& s) {
  const auto v = parse_scheme(s);
  if (!v) fail(Errc::invalid_argument, "unknown label scheme '" + s + "'");
  return *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opcode-density malware classification pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "opd 0.1.0");

  // synth
  pipeline::SynthOptions synth_o;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic report corpus");
  synth->add_option("--n-per-class", synth_o.config.n_per_class, "samples per class")->capture_default_str();
  synth->add_option("--classes", synth_o.config.classes, "2 (binary) or 3..6 (family)")->capture_default_str();
  synth->add_option("--informative-opcodes", synth_o.config.informative, "opcodes carrying the class signal")
      ->capture_default_str();
  synth->add_option("--seed", synth_o.config.seed, "generator seed")->capture_default_str();
  synth->add_option("--out", synth_o.out, "output directory")->required();

  // ingest
  pipeline::IngestOptions ingest_o;
  std::string ingest_scheme = "binary";
  std::string ingest_manifest;
  auto* ingest = app.add_subcommand("ingest", "Build a density dataset from report files");
  ingest->add_option("--root", ingest_o.root, "directory of report files")->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--manifest", ingest_manifest, "CSV mapping sample ids to labels")->check(CLI::ExistingFile);
  ingest->add_option("--scheme", ingest_scheme, "binary or family")->capture_default_str();
  ingest->add_flag("--dedupe", ingest_o.dedupe, "drop instances with identical density vectors");
  ingest->add_option("--out", ingest_o.out, "dataset file (.csv or .arff)")->required();

  // disasm
  pipeline::DisasmOptions disasm_o;
  bool no_x87 = false;
  bool no_sse = false;
  bool no_fwait_merge = false;
  auto* disasm = app.add_subcommand("disasm", "Count opcodes of 32-bit PE files into report files");
  disasm->add_option("inputs", disasm_o.inputs, "PE files")->required()->check(CLI::ExistingFile);
  disasm->add_option("--out", disasm_o.out_dir, "output directory")->required();
  disasm->add_flag("--no-x87", no_x87, "treat x87 escapes as unknown bytes");
  disasm->add_flag("--no-sse", no_sse, "treat MMX/SSE opcodes as unknown bytes");
  disasm->add_flag("--no-fwait-merge", no_fwait_merge, "count wait separately from the following x87 op");

  // preprocess
  pipeline::PreprocessOptions pre_o;
  std::string iqr_report;
  auto* pre = app.add_subcommand("preprocess", "Scale to [0,1], flag IQR outliers, shuffle");
  pre->add_option("--in", pre_o.in, "input dataset")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_o.out, "output dataset")->required();
  pre->add_option("--seed", pre_o.seed, "shuffle seed")->capture_default_str();
  pre->add_option("--iqr-report", iqr_report, "write per-instance outlier flags here");
  pre->add_option("--outlier-factor", pre_o.iqr.outlier_factor, "IQR multiple for outliers")->capture_default_str();
  pre->add_option("--extreme-factor", pre_o.iqr.extreme_factor, "IQR multiple for extreme values")
      ->capture_default_str();

  // split
  pipeline::SplitOptions split_o;
  auto* split = app.add_subcommand("split", "Percentage split into train and test sets");
  split->add_option("--in", split_o.in, "input dataset")->required()->check(CLI::ExistingFile);
  split->add_option("--percent", split_o.percent, "percentage held out for testing")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 100.0));
  split->add_option("--out-train", split_o.out_train, "training set")->required();
  split->add_option("--out-test", split_o.out_test, "test set")->required();

  // train
  pipeline::TrainOptions train_o;
  KernelFlags train_k;
  TrainerFlags train_t;
  auto* train = app.add_subcommand("train", "Train an SMO support vector machine");
  train->add_option("--train", train_o.train, "training set")->required()->check(CLI::ExistingFile);
  train_k.add(train);
  train_t.add(train);
  train->add_option("--out", train_o.out_model, "model file")->required();

  // eval
  pipeline::EvalOptions eval_o;
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a test set");
  eval->add_option("--model", eval_o.model, "model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--test", eval_o.test, "test set")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_o.out_report, "report file")->required();
  eval->add_flag("--stamp", eval_o.stamp, "add a generation timestamp to the report");

  // cv
  pipeline::CvOptions cv_o;
  KernelFlags cv_k;
  TrainerFlags cv_t;
  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv->add_option("--train", cv_o.train, "dataset")->required()->check(CLI::ExistingFile);
  cv->add_option("--k", cv_o.k, "folds")->capture_default_str();
  cv->add_option("--seed", cv_o.seed, "fold assignment seed")->capture_default_str();
  cv_k.add(cv);
  cv_t.add(cv);
  cv->add_option("--out", cv_o.out_report, "report file")->required();
  cv->add_flag("--stamp", cv_o.stamp, "add a generation timestamp to the report");

  // select
  pipeline::SelectOptions select_o;
  SelectionFlags select_f;
  auto* select = app.add_subcommand("select", "Run an attribute evaluator with a search method");
  select->add_option("--train", select_o.train, "dataset")->required()->check(CLI::ExistingFile);
  select_f.add(select, true);
  select->add_option("--out", select_o.out_selection, "selection file")->required();

  // reduce
  pipeline::ReduceOptions reduce_o;
  auto* reduce = app.add_subcommand("reduce", "Keep only the attributes of a selection");
  reduce->add_option("--in", reduce_o.in, "dataset")->required()->check(CLI::ExistingFile);
  reduce->add_option("--selection", reduce_o.selection, "selection file")->required()->check(CLI::ExistingFile);
  reduce->add_option("--out", reduce_o.out, "reduced dataset")->required();

  // tune
  pipeline::TuneOptions tune_o;
  std::vector<std::string> tune_grids;
  TrainerFlags tune_t;
  auto* tune = app.add_subcommand("tune", "Grid search over kernels and parameters");
  tune->add_option("--train", tune_o.train, "training set")->required()->check(CLI::ExistingFile);
  tune->add_option("--test", tune_o.test, "test set")->required()->check(CLI::ExistingFile);
  tune->add_option("--grid", tune_grids, "kernel families to search (default: all four)");
  tune_t.add(tune);
  tune->add_option("--out", tune_o.out_report, "report file")->required();
  tune->add_flag("--stamp", tune_o.stamp, "add a generation timestamp to the report");

  // tune-threshold
  pipeline::TuneThresholdOptions tt_o;
  SelectionFlags tt_f;
  tt_f.evaluator = "correlation";
  KernelFlags tt_k;
  tt_k.family = "puk";
  TrainerFlags tt_t;
  auto* tt = app.add_subcommand("tune-threshold", "Raise the ranker threshold while hold-out precision holds");
  tt->add_option("--train", tt_o.train, "training set")->required()->check(CLI::ExistingFile);
  tt->add_option("--test", tt_o.test, "test set")->required()->check(CLI::ExistingFile);
  tt_f.add(tt, false);
  tt_k.add(tt);
  tt_t.add(tt);
  tt->add_option("--out-selection", tt_o.out_selection, "selection file")->required();
  tt->add_option("--out", tt_o.out_report, "report file")->required();
  tt->add_flag("--stamp", tt_o.stamp, "add a generation timestamp to the report");

  // rank-aggregate
  pipeline::RankAggregateOptions ra_o;
  auto* ra = app.add_subcommand("rank-aggregate", "Weighted rank aggregation over seven ranked selections");
  ra->add_option("selections", ra_o.selections, "selection files")
      ->required()
      ->expected(static_cast<int>(kAggregateLists))
      ->check(CLI::ExistingFile);
  ra->add_option("--out", ra_o.out_table, "table file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Exit::ok : Exit::usage;
  }

  try {
    auto& log = std::cout;
    if (*synth) {
      pipeline::synth(synth_o, log);
    } else if (*ingest) {
      ingest_o.scheme = scheme_flag(ingest_scheme);
      if (!ingest_manifest.empty()) ingest_o.manifest = ingest_manifest;
      pipeline::ingest(ingest_o, log, std::cerr);
    } else if (*disasm) {
      disasm_o.profile.x87 = !no_x87;
      disasm_o.profile.sse = !no_sse;
      disasm_o.profile.merge_fwait = !no_fwait_merge;
      const auto failed = pipeline::disasm(disasm_o, log, std::cerr);
      if (failed == disasm_o.inputs.size()) return report_error("empty_result", "no input could be decoded", Exit::data);
    } else if (*pre) {
      if (!iqr_report.empty()) pre_o.iqr_report = iqr_report;
      pipeline::preprocess(pre_o, log);
    } else if (*split) {
      pipeline::split(split_o, log);
    } else if (*train) {
      train_o.kernel = train_k.spec();
      train_o.trainer = train_t.config;
      pipeline::train(train_o, log);
    } else if (*eval) {
      pipeline::evaluate(eval_o, log);
    } else if (*cv) {
      cv_o.kernel = cv_k.spec();
      cv_o.trainer = cv_t.config;
      pipeline::cv(cv_o, log);
    } else if (*select) {
      select_o.config = select_f.resolve();
      pipeline::select(select_o, log);
    } else if (*reduce) {
      pipeline::reduce(reduce_o, log);
    } else if (*tune) {
      if (tune_grids.empty()) tune_grids = {"poly", "normalized_poly", "rbf", "puk"};
      for (const auto& g : tune_grids) {
        const auto f = parse_kernel(g);
        if (!f) fail(Errc::invalid_argument, "unknown kernel '" + g + "'");
        tune_o.grids.push_back(default_grid(*f));
      }
      tune_o.trainer = tune_t.config;
      pipeline::tune(tune_o, log);
    } else if (*tt) {
      tt_o.scoring = tt_f.resolve();
      tt_o.kernel = tt_k.spec();
      tt_o.trainer = tt_t.config;
      pipeline::tune_threshold(tt_o, log);
    } else if (*ra) {
      pipeline::rank_aggregate(ra_o, log);
    }
  } catch (const Error& e) {
    const int rc = e.code() == Errc::invalid_argument ? Exit::usage
                   : is_numeric_failure(e.code())     ? Exit::numeric
                                                      : Exit::data;
    return report_error(errc_name(e.code()), e.what(), rc);
  } catch (const std::exception& e) {
    return report_error("io", e.what(), Exit::data);
  }
  return Exit::ok;
}
