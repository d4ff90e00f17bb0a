#include "opd/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <ostream>

#include <nlohmann/json.hpp>

#include "opd/decimal.hpp"
#include "opd/error.hpp"

namespace opd::pipeline {
namespace {

using Json = nlohmann::ordered_json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string stamped(const std::string& json_text, bool stamp) {
  if (!stamp) return json_text;
  auto j = Json::parse(json_text);
  j["generated_at"] = utc_now();
  return j.dump(1) + "\n";
}

Json kernel_echo(const KernelSpec& k) {
  Json j{{"family", kernel_name(k.family)}, {"C", k.complexity}};
  switch (k.family) {
    case KernelFamily::poly:
    case KernelFamily::normalized_poly:
      j["exponent"] = k.exponent;
      j["use_lower_order"] = k.use_lower_order;
      break;
    case KernelFamily::rbf: j["gamma"] = k.gamma; break;
    case KernelFamily::puk:
      j["sigma"] = k.sigma;
      j["omega"] = k.omega;
      break;
  }
  return j;
}

std::string kernel_label(const KernelSpec& k) {
  std::string s = std::string(kernel_name(k.family)) + " C=" + format_shortest(k.complexity);
  switch (k.family) {
    case KernelFamily::poly:
    case KernelFamily::normalized_poly: s += " E=" + format_shortest(k.exponent); break;
    case KernelFamily::rbf: s += " gamma=" + format_shortest(k.gamma); break;
    case KernelFamily::puk: s += " sigma=" + format_shortest(k.sigma) + " omega=" + format_shortest(k.omega); break;
  }
  return s;
}

void echo_training(EvalReport& r, const KernelSpec& k, const TrainerConfig& t) {
  r.config["kernel"] = std::string(kernel_name(k.family));
  r.config["C"] = format_shortest(k.complexity);
  switch (k.family) {
    case KernelFamily::poly:
    case KernelFamily::normalized_poly:
      r.config["exponent"] = format_shortest(k.exponent);
      r.config["use_lower_order"] = k.use_lower_order ? "true" : "false";
      break;
    case KernelFamily::rbf: r.config["gamma"] = format_shortest(k.gamma); break;
    case KernelFamily::puk:
      r.config["sigma"] = format_shortest(k.sigma);
      r.config["omega"] = format_shortest(k.omega);
      break;
  }
  r.config["tolerance"] = format_shortest(t.tolerance);
  r.config["calibrate"] = t.calibrate ? "true" : "false";
}

}  // namespace

void synth(const SynthOptions& o, std::ostream& log) {
  const auto corpus = synthesize(o.config);
  write_corpus(corpus, o.out);
  log << "wrote " << corpus.size() << " reports (" << o.config.classes << " classes x " << o.config.n_per_class
      << ") to " << o.out.string() << "\n";
}

IngestResult ingest(const IngestOptions& o, std::ostream& log, std::ostream& diag) {
  std::optional<Manifest> manifest;
  if (o.manifest) manifest = parse_manifest(read_file(*o.manifest));
  auto scan = scan_directory(o.root, o.scheme, manifest);
  for (const auto& f : scan.failures) diag << "warning: " << f.path.string() << ": " << f.code << ": " << f.message << "\n";
  if (scan.samples.empty()) {
    fail(Errc::empty_result, "no report could be used (" + std::to_string(scan.failures.size()) + " failures)");
  }
  const auto master = build_master_list(scan.samples);
  IngestResult result{sort_attributes_by_mean_density(assemble(scan.samples, master, o.dedupe)),
                      std::move(scan.failures),
                      std::vector<std::uint64_t>(scheme_classes(o.scheme).size(), 0)};
  for (const auto& s : scan.samples) result.opcodes_per_class[s.label.index] += s.histogram.total;
  save_dataset(result.dataset, o.out.string());

  log << "samples: " << result.dataset.size() << "  attributes: " << result.dataset.width()
      << "  failures: " << result.failures.size() << "\n";
  const auto counts = result.dataset.class_counts();
  const auto names = scheme_classes(o.scheme);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-14s %8s %24s\n", "class", "samples", "total extracted opcodes");
  log << buf;
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%-14s %8zu %24llu\n", std::string(names[c]).c_str(), counts[c],
                  static_cast<unsigned long long>(result.opcodes_per_class[c]));
    log << buf;
  }
  return result;
}

std::size_t disasm(const DisasmOptions& o, std::ostream& log, std::ostream& diag) {
  std::size_t failed = 0;
  for (const auto& in : o.inputs) {
    try {
      const auto bytes = read_file(in);
      const std::span<const std::uint8_t> view(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size());
      const auto parsed = parse_pe(view);
      const auto counts = count_opcodes(parsed, o.profile);
      OpcodeHistogram h;
      h.sample_id = in.stem().string();
      h.counts = counts.counts;
      h.total = counts.decoded_instructions;
      h.source = HistogramSource::disassembly;
      if (h.counts.empty()) fail(Errc::empty_report, "no instruction decoded");
      write_file(o.out_dir / (h.sample_id + ".txt"), format_report(h));
      log << in.string() << ": " << counts.decoded_instructions << " instructions, " << counts.counts.size()
          << " mnemonics, " << counts.unknown_bytes << " unknown bytes\n";
    } catch (const Error& e) {
      ++failed;
      diag << "warning: " << in.string() << ": " << errc_name(e.code()) << ": " << e.what() << "\n";
    }
  }
  return failed;
}

void preprocess(const PreprocessOptions& o, std::ostream& log) {
  const auto ds = load_dataset(o.in.string());
  const auto scaled = minmax_scale(ds);
  if (o.iqr_report || ds.size() >= 4) {
    const auto flags = iqr_flag(scaled.data, o.iqr);
    std::size_t outliers = 0;
    std::size_t extremes = 0;
    std::string report = "instance,outlier,extreme\n";
    for (std::size_t i = 0; i < flags.outlier.size(); ++i) {
      outliers += flags.outlier[i];
      extremes += flags.extreme[i];
      report += std::to_string(i + 1) + "," + (flags.outlier[i] ? "1" : "0") + "," + (flags.extreme[i] ? "1" : "0") + "\n";
    }
    if (o.iqr_report) write_file(*o.iqr_report, report);
    log << "iqr: " << outliers << " outliers, " << extremes << " extreme (flagged only, not removed)\n";
  }
  const auto shuffled = shuffle(scaled.data, o.seed);
  save_dataset(shuffled, o.out.string());
  log << "scaled and shuffled " << shuffled.size() << " instances (seed " << o.seed << ")\n";
}

void split(const SplitOptions& o, std::ostream& log) {
  const auto ds = load_dataset(o.in.string());
  const auto train_set = split_percentage(ds, o.percent, false);
  const auto test_set = split_percentage(ds, o.percent, true);
  save_dataset(train_set, o.out_train.string());
  save_dataset(test_set, o.out_test.string());
  log << "train: " << train_set.size() << "  test: " << test_set.size() << "\n";
}

void train(const TrainOptions& o, std::ostream& log) {
  const auto ds = load_dataset(o.train.string());
  const auto model = train_multiclass(ds, o.kernel, o.trainer);
  write_file(o.out_model, model_to_json(model));
  log << "trained " << model.machines.size() << " machine(s), " << model.support_vector_count()
      << " support vectors, kernel " << kernel_label(o.kernel) << "\n";
  for (const auto& m : model.machines) {
    if (!m.converged) {
      log << "warning: machine " << scheme_classes(model.scheme)[m.negative_class] << "/"
          << scheme_classes(model.scheme)[m.positive_class] << " hit the iteration cap\n";
    }
  }
}

EvalReport evaluate(const EvalOptions& o, std::ostream& log) {
  const auto model = model_from_json(read_file(o.model));
  const auto test = load_dataset(o.test.string());
  auto report = holdout_evaluate(model, test);
  write_file(o.out_report, stamped(report_to_json(report), o.stamp));
  log << format_report_text(report);
  return report;
}

EvalReport cv(const CvOptions& o, std::ostream& log) {
  const auto ds = load_dataset(o.train.string());
  auto report = cross_validate(ds, o.k, o.seed, [&](const Dataset& d) { return train_multiclass(d, o.kernel, o.trainer); });
  echo_training(report, o.kernel, o.trainer);
  write_file(o.out_report, stamped(report_to_json(report), o.stamp));
  log << format_report_text(report);
  return report;
}

SelectionResult select(const SelectOptions& o, std::ostream& log) {
  const auto ds = load_dataset(o.train.string());
  const auto sel = run_selection(ds, o.config);
  write_file(o.out_selection, selection_to_json(sel));
  log << evaluator_name(sel.evaluator) << " + " << search_name(sel.search) << ": retained " << sel.retained.size()
      << " of " << ds.width() << " attributes\n";
  return sel;
}

void reduce(const ReduceOptions& o, std::ostream& log) {
  const auto ds = load_dataset(o.in.string());
  const auto sel = selection_from_json(read_file(o.selection));
  const auto out = reduce_dataset(ds, sel);
  save_dataset(out, o.out.string());
  log << "reduced " << ds.width() << " -> " << out.width() << " attributes\n";
}

std::vector<GridCell> tune(const TuneOptions& o, std::ostream& log) {
  const auto train_set = load_dataset(o.train.string());
  const auto test_set = load_dataset(o.test.string());
  const auto cells = grid_search(train_set, test_set, o.grids, o.trainer);
  Json j;
  j["format"] = "opd-grid-report";
  j["schema_version"] = 1;
  j["train"] = o.train.filename().string();
  j["test"] = o.test.filename().string();
  Json rows = Json::array();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%4s  %-36s %10s %10s %8s\n", "rank", "kernel", "precision", "accuracy", "SVs");
  log << buf;
  std::size_t rank = 0;
  for (const auto& c : cells) {
    ++rank;
    Json row{{"rank", rank}, {"kernel", kernel_echo(c.spec)}, {"support_vectors", c.support_vectors}};
    if (c.report) {
      row["weighted_precision"] = round8(c.report->weighted.precision);
      row["accuracy"] = round8(c.report->accuracy);
      row["weighted_fpr"] = round8(c.report->weighted.fpr);
      row["weighted_f_measure"] = round8(c.report->weighted.f_measure);
      row["error"] = nullptr;
      std::snprintf(buf, sizeof buf, "%4zu  %-36s %10s %10s %8zu\n", rank, kernel_label(c.spec).c_str(),
                    format_fixed(100.0 * c.report->weighted.precision, 1).c_str(),
                    format_fixed(100.0 * c.report->accuracy, 1).c_str(), c.support_vectors);
    } else {
      row["weighted_precision"] = nullptr;
      row["accuracy"] = nullptr;
      row["weighted_fpr"] = nullptr;
      row["weighted_f_measure"] = nullptr;
      row["error"] = c.error;
      std::snprintf(buf, sizeof buf, "%4zu  %-36s failed: %s\n", rank, kernel_label(c.spec).c_str(), c.error.c_str());
    }
    log << buf;
    rows.push_back(std::move(row));
  }
  j["cells"] = std::move(rows);
  write_file(o.out_report, stamped(j.dump(1) + "\n", o.stamp));
  return cells;
}

double holdout_precision(const Dataset& train_set, const Dataset& test_set, const KernelSpec& kernel,
                         const TrainerConfig& trainer) {
  const auto model = train_multiclass(train_set, kernel, trainer);
  return holdout_evaluate(model, test_set).weighted.precision;
}

ThresholdTuning tune_threshold(const TuneThresholdOptions& o, std::ostream& log) {
  const auto train_set = load_dataset(o.train.string());
  const auto test_set = load_dataset(o.test.string());
  const auto scores = score_attributes(train_set, o.scoring.evaluator, o.scoring.relief, o.scoring.bins,
                                       o.scoring.min_bucket);
  auto result = opd::tune_threshold(
      train_set, test_set, scores,
      [&](const Dataset& a, const Dataset& b) { return holdout_precision(a, b, o.kernel, o.trainer); },
      o.scoring.evaluator);
  write_file(o.out_selection, selection_to_json(result.selection));

  Json j;
  j["format"] = "opd-threshold-report";
  j["schema_version"] = 1;
  j["evaluator"] = evaluator_name(o.scoring.evaluator);
  j["kernel"] = kernel_echo(o.kernel);
  j["baseline_precision"] = round8(result.baseline_metric);
  j["best_threshold"] = result.best_threshold == kNoThreshold ? Json(nullptr) : Json(round8(result.best_threshold));
  j["attributes_before"] = train_set.width();
  j["attributes_after"] = result.selection.retained.size();
  Json sweep = Json::array();
  for (const auto& s : result.sweep) {
    sweep.push_back(Json{{"threshold", s.threshold == kNoThreshold ? Json(nullptr) : Json(round8(s.threshold))},
                         {"attributes", s.attributes},
                         {"weighted_precision", round8(s.metric)}});
  }
  j["sweep"] = std::move(sweep);
  write_file(o.out_report, stamped(j.dump(1) + "\n", o.stamp));

  const double reduction = train_set.width() == 0 ? 0.0
                                                  : 1.0 - static_cast<double>(result.selection.retained.size()) /
                                                              static_cast<double>(train_set.width());
  log << "baseline precision " << format_fixed(100.0 * result.baseline_metric, 1) << "% with " << train_set.width()
      << " attributes; kept " << result.selection.retained.size() << " ("
      << format_fixed(100.0 * reduction, 1) << "% reduction) over " << result.sweep.size() - 1 << " thresholds\n";
  return result;
}

AggregateRanking rank_aggregate(const RankAggregateOptions& o, std::ostream& log) {
  std::vector<std::vector<std::string>> lists;
  for (const auto& p : o.selections) {
    const auto sel = selection_from_json(read_file(p));
    if (sel.evaluator == Evaluator::pca) fail(Errc::invalid_argument, p.string() + ": PCA selections carry no ranking");
    lists.push_back(sel.retained);
  }
  const auto ranking = aggregate_rank(lists);
  const auto table = format_aggregate(ranking);
  write_file(o.out_table, table);
  log << table;
  return ranking;
}

}  // namespace opd::pipeline
