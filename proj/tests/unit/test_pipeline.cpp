#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "opd/dataset.hpp"
#include "opd/error.hpp"
#include "opd/ingest.hpp"
#include "opd/pipeline.hpp"
#include "opd/svm.hpp"

#include "../support/pipeline_run.hpp"
#include "../support/temp_dir.hpp"

using namespace opd;
namespace p = opd::pipeline;

namespace {

std::filesystem::path fixtures() { return std::filesystem::path(OPD_FIXTURE_DIR); }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("synth is deterministic per seed") {
  test::TempDir a;
  test::TempDir b;
  test::TempDir c;
  std::ostringstream log;
  SynthConfig cfg;
  cfg.n_per_class = 6;
  p::synth({cfg, a.path()}, log);
  p::synth({cfg, b.path()}, log);
  cfg.seed = 43;
  p::synth({cfg, c.path()}, log);
  const auto ta = test::read_tree(a.path());
  CHECK(ta.size() == 12);
  CHECK(ta == test::read_tree(b.path()));
  CHECK(ta != test::read_tree(c.path()));
}

TEST_CASE("six-class synth ingests under the family scheme") {
  test::TempDir dir;
  std::ostringstream log;
  std::ostringstream diag;
  SynthConfig cfg;
  cfg.classes = 6;
  cfg.n_per_class = 4;
  p::synth({cfg, dir.path() / "corpus"}, log);
  p::IngestOptions ing;
  ing.root = dir.path() / "corpus";
  ing.scheme = LabelScheme::family;
  ing.out = dir.path() / "ds.arff";
  const auto r = p::ingest(ing, log, diag);
  CHECK(r.failures.empty());
  CHECK(diag.str().empty());
  CHECK(r.dataset.size() == 24);
  for (auto n : r.dataset.class_counts()) CHECK(n == 4);
  const auto loaded = load_dataset(ing.out.string());
  CHECK(loaded.scheme() == LabelScheme::family);
  CHECK(loaded.labels() == r.dataset.labels());
}

TEST_CASE("ingest builds the union of mnemonics with the class column last") {
  test::TempDir dir;
  write_file(dir.path() / "in" / "good" / "a.txt", "0001.\t5\t50.00%\tmov\n0002.\t5\t50.00%\tpush\n");
  write_file(dir.path() / "in" / "good" / "b.txt", "0001.\t4\t100.00%\tfdivp\n");
  write_file(dir.path() / "in" / "malware" / "c.txt", "0001.\t1\t50.00%\tand\n0002.\t1\t50.00%\tmov\n");
  std::ostringstream log;
  std::ostringstream diag;
  p::IngestOptions ing;
  ing.root = dir.path() / "in";
  ing.out = dir.path() / "ds.csv";
  const auto r = p::ingest(ing, log, diag);
  CHECK(r.dataset.size() == 3);
  CHECK(r.dataset.width() == 4);
  const std::set<std::string> names(r.dataset.attributes().begin(), r.dataset.attributes().end());
  CHECK(names == std::set<std::string>{"and", "fdivp", "mov", "push"});
  const auto header = first_line(read_file(ing.out));
  CHECK(header.substr(header.rfind(',') + 1) == "class");
  CHECK(r.opcodes_per_class == std::vector<std::uint64_t>{14, 2});
  CHECK(log.str().find("samples: 3") != std::string::npos);
}

TEST_CASE("ingest keeps going past a broken report") {
  test::TempDir dir;
  for (int i = 0; i < 9; ++i) {
    write_file(dir.path() / "good" / ("s" + std::to_string(i) + ".txt"), "0001.\t3\t100.00%\tmov\n");
  }
  write_file(dir.path() / "malware" / "bad.txt", "0001.\tthree\t100.00%\tmov\n");
  std::ostringstream log;
  std::ostringstream diag;
  p::IngestOptions ing;
  ing.root = dir.path();
  ing.out = dir.path() / "out.csv";
  const auto r = p::ingest(ing, log, diag);
  CHECK(r.dataset.size() == 9);
  REQUIRE(r.failures.size() == 1);
  CHECK(diag.str().rfind("warning: ", 0) == 0);
  CHECK(diag.str().find("bad.txt") != std::string::npos);
}

TEST_CASE("ingest with nothing usable fails") {
  test::TempDir dir;
  write_file(dir.path() / "good" / "bad.txt", "garbage\n");
  std::ostringstream log;
  std::ostringstream diag;
  p::IngestOptions ing;
  ing.root = dir.path();
  ing.out = dir.path() / "out.csv";
  try {
    p::ingest(ing, log, diag);
    FAIL("expected empty_result");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_result);
  }
}

TEST_CASE("preprocess scales into the unit interval and reports outliers") {
  test::TempDir dir;
  std::ostringstream log;
  std::ostringstream diag;
  SynthConfig cfg;
  cfg.n_per_class = 15;
  p::synth({cfg, dir.path() / "corpus"}, log);
  p::IngestOptions ing;
  ing.root = dir.path() / "corpus";
  ing.out = dir.path() / "ds.csv";
  p::ingest(ing, log, diag);

  p::PreprocessOptions pre;
  pre.in = ing.out;
  pre.out = dir.path() / "a.arff";
  pre.iqr_report = dir.path() / "iqr.csv";
  p::preprocess(pre, log);
  const auto ds = load_dataset(pre.out.string());
  CHECK(ds.size() == 30);
  for (const auto& row : ds.rows()) {
    for (double v : row) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  const auto iqr = read_file(*pre.iqr_report);
  CHECK(first_line(iqr) == "instance,outlier,extreme");
  CHECK(std::count(iqr.begin(), iqr.end(), '\n') == 31);

  pre.out = dir.path() / "b.arff";
  p::preprocess(pre, log);
  CHECK(read_file(dir.path() / "a.arff") == read_file(pre.out));
}

TEST_CASE("train echoes the PUK defaults and fits separable synthetic data") {
  test::TempDir dir;
  std::ostringstream log;
  std::ostringstream diag;
  SynthConfig cfg;
  cfg.n_per_class = 20;
  p::synth({cfg, dir.path() / "corpus"}, log);
  p::IngestOptions ing;
  ing.root = dir.path() / "corpus";
  ing.out = dir.path() / "ds.csv";
  p::ingest(ing, log, diag);
  p::PreprocessOptions pre;
  pre.in = ing.out;
  pre.out = dir.path() / "pre.arff";
  p::preprocess(pre, log);

  p::TrainOptions tr;
  tr.train = pre.out;
  tr.kernel.family = KernelFamily::puk;
  tr.out_model = dir.path() / "model.json";
  p::train(tr, log);
  const auto text = read_file(tr.out_model);
  const auto model = model_from_json(text);
  CHECK(model.kernel.family == KernelFamily::puk);
  CHECK(model.kernel.sigma == 1.0);
  CHECK(model.kernel.omega == 1.0);
  CHECK(model.kernel.complexity == 1.0);

  p::EvalOptions ev;
  ev.model = tr.out_model;
  ev.test = pre.out;
  ev.out_report = dir.path() / "eval.json";
  const auto report = p::evaluate(ev, log);
  CHECK(report.accuracy == 1.0);
}

TEST_CASE("a full pipeline run is byte-reproducible") {
  test::TempDir a;
  test::TempDir b;
  SynthConfig cfg;
  cfg.n_per_class = 20;
  const auto ra = test::run_pipeline(a.path(), cfg);
  const auto rb = test::run_pipeline(b.path(), cfg);
  CHECK(ra.files.size() > 50);
  REQUIRE(ra.files.size() == rb.files.size());
  for (const auto& [name, bytes] : ra.files) {
    INFO(name);
    REQUIRE(rb.files.count(name) == 1);
    CHECK(bytes == rb.files.at(name));
  }
  CHECK(ra.tuning.selection.retained.size() <= ra.attributes);
}

TEST_CASE("rank aggregation over the seven published lists") {
  test::TempDir dir;
  p::RankAggregateOptions agg;
  for (const char* name :
       {"cfs_subset", "correlation", "gain_ratio", "info_gain", "one_r", "relieff", "symm_uncert"}) {
    agg.selections.push_back(fixtures() / "ranked_lists" / (std::string(name) + ".json"));
  }
  agg.out_table = dir.path() / "agg.txt";
  std::ostringstream log;
  const auto ranking = p::rank_aggregate(agg, log);
  REQUIRE(ranking.entries.size() >= 2);
  CHECK(ranking.entries[0].attribute == "fdivp");
  CHECK(ranking.entries[0].total == 84);
  CHECK(ranking.entries[1].attribute == "and");
  CHECK(ranking.entries[1].total == 82);
  const auto table = read_file(agg.out_table);
  CHECK(table.find("fdivp") < table.find("and "));
}
