#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "opd/error.hpp"
#include "opd/evaluation.hpp"
#include "opd/featsel.hpp"
#include "opd/svm.hpp"

using namespace opd;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an opd::Error");
  return Errc::io;
}

DiscretizedAttribute bins_of(std::vector<std::size_t> bins) {
  DiscretizedAttribute d;
  std::size_t top = 0;
  for (auto b : bins) top = std::max(top, b);
  for (std::size_t i = 0; i < top; ++i) d.cuts.push_back(static_cast<double>(i) + 0.5);
  d.bins = std::move(bins);
  return d;
}

// Class-indicator attribute "sig" with small noise, plus `noise` uniform columns.
Dataset signal_plus_noise(std::size_t n, std::size_t noise, std::uint64_t seed, double jitter = 0.05) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> attrs{"sig"};
  for (std::size_t j = 0; j < noise; ++j) attrs.push_back("n" + std::to_string(j));
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % 2;
    std::vector<double> r{static_cast<double>(c) + jitter * u(gen)};
    for (std::size_t j = 0; j < noise; ++j) r.push_back(u(gen));
    rows.push_back(r);
    labels.push_back(c);
  }
  return Dataset(LabelScheme::binary, attrs, rows, labels);
}

}  // namespace

TEST_CASE("equal-frequency discretization") {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  auto d = discretize_equal_frequency(v, 2);
  REQUIRE(d.cuts.size() == 1);
  CHECK(d.cuts[0] == 5.5);
  for (std::size_t i = 0; i < 10; ++i) CHECK(d.bins[i] == (i < 5 ? 0u : 1u));

  const std::vector<double> constant(7, 3.0);
  d = discretize_equal_frequency(constant, 10);
  CHECK(d.bin_count() == 1);
  CHECK(std::all_of(d.bins.begin(), d.bins.end(), [](auto b) { return b == 0; }));

  std::vector<double> outlier{1, 2, 3, 4, 5, 6, 7, 8, 9, 1000};
  d = discretize_equal_frequency(outlier, 2);
  REQUIRE(d.cuts.size() == 1);
  CHECK(d.cuts[0] == 5.5);
  CHECK(d.bins.back() == 1);
  CHECK(d.bins[4] == 0);

  CHECK(code_of([&] { discretize_equal_frequency(v, 1); }) == Errc::invalid_argument);
}

TEST_CASE("discretized bins are in range and monotone in the value") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + gen() % 60);
    for (auto& x : v) x = std::floor(u(gen) * 8.0);
    const auto d = discretize_equal_frequency(v, 10);
    REQUIRE(d.bin_count() <= 10);
    REQUIRE(std::is_sorted(d.cuts.begin(), d.cuts.end()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      REQUIRE(d.bins[i] < d.bin_count());
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[i] < v[j]) REQUIRE(d.bins[i] <= d.bins[j]);
      }
    }
  }
}

TEST_CASE("entropy measures on hand-computed cases") {
  const std::vector<std::size_t> cls{0, 0, 1, 1};
  const auto perfect = bins_of({0, 0, 1, 1});
  CHECK(info_gain(perfect, cls) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gain_ratio(perfect, cls) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(symm_uncert(perfect, cls) == doctest::Approx(1.0).epsilon(1e-15));

  const auto single = bins_of({0, 0, 0, 0});
  CHECK(info_gain(single, cls) == 0.0);
  CHECK(gain_ratio(single, cls) == 0.0);
  CHECK(symm_uncert(single, cls) == 0.0);

  const auto isolate = bins_of({0, 0, 0, 1});
  CHECK(std::abs(info_gain(isolate, cls) - 0.31127812445913283) <= 1e-9);
  CHECK(std::abs(gain_ratio(isolate, cls) - 0.3836885465963443) <= 1e-9);
  CHECK(std::abs(symm_uncert(isolate, cls) - 0.34371101848545077) <= 1e-9);

  const auto independent = bins_of({0, 1, 0, 1});
  CHECK(info_gain(independent, cls) == 0.0);
  CHECK(symm_uncert(independent, cls) == 0.0);

  CHECK(entropy(cls) == 1.0);
  const std::vector<std::size_t> none;
  CHECK(entropy(none) == 0.0);
}

TEST_CASE("entropy measures stay in range and SU is symmetric") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 40;
    const std::size_t k = 2 + gen() % 5;
    std::vector<std::size_t> labels(n);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = gen() % k;
      col[i] = static_cast<double>(gen() % 13);
    }
    const auto d = discretize_equal_frequency(col, 10);
    const double ig = info_gain(d, labels);
    const double bound = std::log2(static_cast<double>(std::min(d.bin_count(), k)));
    REQUIRE(ig >= 0.0);
    REQUIRE(ig <= bound + 1e-12);
    const double gr = gain_ratio(d, labels);
    const double su = symm_uncert(d, labels);
    REQUIRE((gr >= 0.0 && gr <= 1.0 + 1e-12));
    REQUIRE((su >= 0.0 && su <= 1.0 + 1e-12));
    REQUIRE(symm_uncert(d.bins, labels) == doctest::Approx(symm_uncert(labels, d.bins)).epsilon(1e-14));
  }
}

TEST_CASE("correlation evaluator") {
  const std::vector<std::size_t> cls{0, 0, 1, 1};
  const std::vector<double> ramp{1, 2, 3, 4};
  CHECK(std::abs(correlation_eval(ramp, cls) - 0.8944271909999159) <= 1e-9);
  const std::vector<double> indicator{0, 0, 1, 1};
  CHECK(correlation_eval(indicator, cls) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> constant{5, 5, 5, 5};
  CHECK(correlation_eval(constant, cls) == 0.0);
  const std::vector<double> short_col{1, 2};
  CHECK(code_of([&] { correlation_eval(short_col, cls); }) == Errc::length_mismatch);
}

TEST_CASE("correlation is invariant under positive affine maps and sign flips") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + gen() % 30;
    std::vector<double> col(n);
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = u(gen);
      labels[i] = gen() % 3;
    }
    const double base = correlation_eval(col, labels);
    const double a = 0.1 + std::abs(u(gen)) * 10.0;
    const double b = u(gen) * 5.0;
    std::vector<double> moved(n);
    std::vector<double> flipped(n);
    for (std::size_t i = 0; i < n; ++i) {
      moved[i] = a * col[i] + b;
      flipped[i] = -col[i];
    }
    REQUIRE(correlation_eval(moved, labels) == doctest::Approx(base).epsilon(1e-9));
    REQUIRE(correlation_eval(flipped, labels) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("OneR accuracy") {
  std::vector<double> col;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 12; ++i) {
    col.push_back(i);
    labels.push_back(i < 6 ? 0 : 1);
  }
  CHECK(one_r_eval(col, labels, 6) == 1.0);

  const std::vector<double> constant(12, 1.0);
  std::vector<std::size_t> skewed(12, 0);
  for (int i = 0; i < 5; ++i) skewed[i] = 1;
  CHECK(one_r_eval(constant, skewed, 6) == doctest::Approx(7.0 / 12.0));

  std::vector<double> alt_col;
  std::vector<std::size_t> alt;
  for (int i = 0; i < 120; ++i) {
    alt_col.push_back(i);
    alt.push_back(static_cast<std::size_t>(i % 2));
  }
  const double noise = one_r_eval(alt_col, alt, 6);
  CHECK(noise >= 0.5);
  CHECK(noise <= 0.55);
}

TEST_CASE("ReliefF weights") {
  SUBCASE("class indicator on two tight clusters") {
    const std::vector<std::vector<double>> rows{{0.0, 0.3, 7.0}, {0.0, 0.8, 7.0}, {1.0, 0.2, 7.0}, {1.0, 0.7, 7.0}};
    const Dataset ds(LabelScheme::binary, {"ind", "noise", "flat"}, rows, {0, 0, 1, 1});
    const auto w = relieff_eval(ds);
    REQUIRE(w.size() == 3);
    CHECK(w[0].attribute == "ind");
    CHECK(w[0].score > 0.9);
    CHECK(w[2].score == 0.0);
  }
  SUBCASE("noise stays small and constants stay exactly zero") {
    auto ds = signal_plus_noise(60, 3, 77);
    std::vector<std::vector<double>> rows = ds.rows();
    for (auto& r : rows) r.push_back(0.25);
    auto attrs = ds.attributes();
    attrs.push_back("flat");
    const Dataset wide(LabelScheme::binary, attrs, rows, ds.labels());
    ReliefOptions opt;
    opt.sample = 30;
    opt.seed = 5;
    const auto w = relieff_eval(wide, opt);
    CHECK(w[0].score > 0.5);
    for (std::size_t a = 1; a <= 3; ++a) CHECK(std::abs(w[a].score) < 0.2);
    CHECK(w[4].score == 0.0);
    CHECK(std::abs(w[1].score - 0.044894041133) < 1e-9);
  }
  SUBCASE("duplicating every instance keeps the ranking order") {
    // Relevance levels are well apart here; near-tied noise columns can swap.
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < 40; ++i) {
      const double c = static_cast<double>(i % 2);
      rows.push_back({0.4 * u(gen), c + 0.3 * u(gen), 0.5, 0.4 * c + 0.6 * u(gen)});
      labels.push_back(i % 2);
    }
    const Dataset ds(LabelScheme::binary, {"noise", "sig", "flat", "part"}, rows, labels);
    const auto n = rows.size();
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(rows[i]);
      labels.push_back(labels[i]);
    }
    const Dataset twice(LabelScheme::binary, ds.attributes(), rows, labels);
    const auto a = ranker_select(relieff_eval(ds));
    const auto b = ranker_select(relieff_eval(twice));
    CHECK(a.retained.front() == "sig");
    CHECK(a.retained == b.retained);
  }
  SUBCASE("a class with a single member truncates k") {
    const std::vector<std::vector<double>> rows{{0.0}, {0.1}, {0.2}, {1.0}};
    const Dataset ds(LabelScheme::family, {"x"}, rows, {0, 0, 0, 1});
    const auto w = relieff_eval(ds);
    CHECK(std::isfinite(w[0].score));
    CHECK(w[0].score > 0.0);
  }
}

TEST_CASE("PCA component retention") {
  SUBCASE("perfectly correlated columns") {
    const std::vector<std::vector<double>> rows{{1, 2}, {2, 4}, {3, 6}, {4, 8}};
    const Dataset ds(LabelScheme::binary, {"a", "b"}, rows, {0, 0, 1, 1});
    const auto p = pca_eval(ds);
    CHECK(p.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(p.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.retained == 1);
    CHECK(p.transformed.size() == 4);
    CHECK(p.selection.retained == std::vector<std::string>{"a", "b"});
    CHECK_FALSE(p.selection.scores.has_value());
  }
  SUBCASE("uncorrelated columns need ceil(width * cover) components") {
    // Columns 1..4 of an 8x8 Hadamard matrix: zero mean, mutually orthogonal.
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> r;
      for (int j = 1; j <= 4; ++j) r.push_back(__builtin_popcount(i & j) % 2 == 0 ? 1.0 : 0.0);
      rows.push_back(r);
    }
    const Dataset ds(LabelScheme::binary, {"a", "b", "c", "d"}, rows, {0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(pca_eval(ds, PcaMatrix::correlation, 0.95).retained == 4);
    CHECK(pca_eval(ds, PcaMatrix::correlation, 0.5).retained == 2);
    CHECK(pca_eval(ds, PcaMatrix::correlation, 0.6).retained == 3);
  }
  SUBCASE("covariance keeps fewer components when scales differ") {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 50; ++i) {
      rows.push_back({1000.0 * u(gen), u(gen), u(gen), u(gen), u(gen)});
      labels.push_back(static_cast<std::size_t>(i % 2));
    }
    const Dataset ds(LabelScheme::binary, {"a", "b", "c", "d", "e"}, rows, labels);
    const auto cov = pca_eval(ds, PcaMatrix::covariance);
    const auto cor = pca_eval(ds, PcaMatrix::correlation);
    CHECK(cov.retained == 1);
    CHECK(cor.retained > cov.retained);
  }
  SUBCASE("errors") {
    const Dataset one(LabelScheme::binary, {"a"}, {{1.0}, {2.0}}, {0, 1});
    CHECK(code_of([&] { pca_eval(one); }) == Errc::degenerate_matrix);
  }
}

TEST_CASE("CFS merit") {
  CHECK(cfs_merit_from_means(1, 0.6, 0.0) == doctest::Approx(0.6));
  CHECK(std::abs(cfs_merit_from_means(2, 0.8, 1.0) - 0.8) <= 1e-9);
  CHECK(std::abs(cfs_merit_from_means(2, 0.8, 0.0) - 1.131370849898476) <= 1e-9);
  CHECK(cfs_merit_from_means(0, 0.8, 0.0) == 0.0);
  const std::vector<double> rcf{0.8, 0.8};
  CHECK(cfs_merit_from_correlations(rcf, {{1.0, 0.0}, {0.0, 1.0}}) == doctest::Approx(1.131370849898476));

  auto base = signal_plus_noise(40, 2, 3);
  auto rows = base.rows();
  for (auto& r : rows) r.push_back(r[0]);
  auto attrs = base.attributes();
  attrs.push_back("sig_copy");
  const Dataset ds(LabelScheme::binary, attrs, rows, base.labels());
  CfsEvaluator e(ds);
  const std::vector<std::size_t> one{0};
  const std::vector<std::size_t> dup{0, 3};
  CHECK(e.merit(one) == doctest::Approx(e.class_correlation(0)));
  CHECK(e.attribute_correlation(0, 3) == doctest::Approx(1.0));
  CHECK(e.merit(dup) <= e.merit(one) + 1e-12);
  const std::vector<std::size_t> none;
  CHECK(cfs_merit(none, ds) == 0.0);
}

TEST_CASE("subset searches") {
  const auto ds = signal_plus_noise(60, 6, 21);
  CfsEvaluator cfs(ds);
  const MeritFn merit = [&](std::span<const std::size_t> s) { return cfs.merit(s); };

  const auto bf = search_best_first(ds.attributes(), merit);
  CHECK(bf.retained == std::vector<std::string>{"sig"});
  const auto gs = search_greedy_stepwise(ds.attributes(), merit);
  CHECK(gs.retained == bf.retained);

  const MeritFn flat = [](std::span<const std::size_t>) { return 0.5; };
  CHECK(search_best_first(ds.attributes(), flat).retained.empty());
  CHECK(search_greedy_stepwise(ds.attributes(), flat).retained.empty());

  const auto ranked = search_greedy_stepwise(ds.attributes(), merit, 3, kNoThreshold, true);
  CHECK(ranked.retained.size() == 3);
  REQUIRE(ranked.scores.has_value());
  CHECK(ranked.scores->size() == ds.width());

  // A threshold on the recorded order behaves like the ranker on that order.
  const double cut = (*ranked.scores)[2].score;
  const auto thr = search_greedy_stepwise(ds.attributes(), merit, std::nullopt, cut, true);
  std::vector<std::string> expect;
  for (const auto& s : *ranked.scores) {
    if (s.score > cut) expect.push_back(s.attribute);
  }
  CHECK(thr.retained == expect);
}

TEST_CASE("best-first terminates on parity data") {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 40; ++i) {
    const int a = i % 2;
    const int b = (i / 2) % 2;
    rows.push_back({double(a), double(b), double((i * 7) % 5)});
    labels.push_back(static_cast<std::size_t>(a ^ b));
  }
  const Dataset ds(LabelScheme::binary, {"a", "b", "c"}, rows, labels);
  CfsEvaluator cfs(ds);
  const auto r = search_best_first(ds.attributes(), [&](std::span<const std::size_t> s) { return cfs.merit(s); },
                                   5, Direction::backward);
  CHECK(r.retained.size() <= 3);
  CHECK(std::stoul(r.parameters.at("expansions")) <= 8);
}

TEST_CASE("ranker selection") {
  const std::vector<AttributeScore> s{{"a", 0.5}, {"b", -0.1}, {"c", 0.0}};
  CHECK(ranker_select(s, 0.0).retained == std::vector<std::string>{"a"});
  CHECK(ranker_select(s, kNoThreshold, 2).retained == std::vector<std::string>{"a", "c"});
  const std::vector<AttributeScore> eq{{"z", 1.0}, {"m", 1.0}, {"a", 1.0}};
  CHECK(ranker_select(eq, 0.0).retained == std::vector<std::string>{"a", "m", "z"});
  const std::vector<AttributeScore> bad{{"a", std::nan("")}};
  CHECK(code_of([&] { ranker_select(bad); }) == Errc::invalid_argument);
}

TEST_CASE("ranker selection is idempotent") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AttributeScore> s;
    for (int i = 0; i < 25; ++i) s.push_back({"a" + std::to_string(i), std::round(u(gen) * 4.0) / 4.0});
    const double thr = std::round(u(gen) * 4.0) / 4.0;
    const std::optional<std::size_t> top = gen() % 2 ? std::optional<std::size_t>(gen() % 10) : std::nullopt;
    const auto once = ranker_select(s, thr, top);
    std::vector<AttributeScore> kept;
    for (const auto& name : once.retained) {
      for (const auto& x : *once.scores) {
        if (x.attribute == name) {
          kept.push_back(x);
          break;
        }
      }
    }
    REQUIRE(ranker_select(kept, thr, top).retained == once.retained);
  }
}

TEST_CASE("reduce_dataset projects columns in dataset order") {
  const Dataset ds(LabelScheme::binary, {"a", "b", "c"}, {{1, 2, 3}, {4, 5, 6}}, {0, 1});
  SelectionResult sel;
  sel.retained = {"b"};
  const auto one = reduce_dataset(ds, sel);
  CHECK(one.attributes() == std::vector<std::string>{"b"});
  CHECK(one.rows()[1] == std::vector<double>{5});
  CHECK(one.labels() == ds.labels());
  sel.retained = {"c", "a", "b"};
  const auto all = reduce_dataset(ds, sel);
  CHECK(all.attributes() == ds.attributes());
  CHECK(all.rows() == ds.rows());
  sel.retained = {"q"};
  CHECK(code_of([&] { reduce_dataset(ds, sel); }) == Errc::unknown_attribute);
}

TEST_CASE("run_selection pairs evaluators with searches") {
  const auto ds = signal_plus_noise(40, 4, 8);
  SelectionConfig cfg;
  for (auto ev : {Evaluator::info_gain, Evaluator::gain_ratio, Evaluator::symm_uncert, Evaluator::correlation,
                  Evaluator::one_r, Evaluator::relieff}) {
    cfg.evaluator = ev;
    cfg.search = Search::ranker;
    cfg.num_to_select = 1;
    const auto r = run_selection(ds, cfg);
    CHECK(r.evaluator == ev);
    CHECK(r.retained == std::vector<std::string>{"sig"});
  }
  cfg.evaluator = Evaluator::cfs_subset;
  CHECK(code_of([&] { run_selection(ds, cfg); }) == Errc::invalid_argument);
  cfg.search = Search::best_first;
  CHECK(run_selection(ds, cfg).retained == std::vector<std::string>{"sig"});
  cfg.evaluator = Evaluator::info_gain;
  CHECK(code_of([&] { run_selection(ds, cfg); }) == Errc::invalid_argument);
}

TEST_CASE("selection files round-trip") {
  SelectionResult s;
  s.evaluator = Evaluator::relieff;
  s.search = Search::ranker;
  s.retained = {"mov", "push"};
  s.scores = std::vector<AttributeScore>{{"mov", 0.123456789}, {"push", 0.0625}, {"ret", -0.5}};
  s.threshold = 0.0;
  s.num_to_select = 2;
  s.parameters["k"] = "10";
  const auto text = selection_to_json(s);
  const auto back = selection_from_json(text);
  CHECK(back.retained == s.retained);
  CHECK(back.evaluator == s.evaluator);
  CHECK((*back.scores)[0].score == 0.12345679);
  CHECK(back.num_to_select == 2u);
  CHECK(selection_to_json(back) == text);
  CHECK(code_of([] { selection_from_json("[]"); }) == Errc::schema_mismatch);
}

TEST_CASE("threshold tuning") {
  SUBCASE("two informative columns among twenty") {
    std::mt19937_64 gen(44);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::string> attrs;
    for (int j = 0; j < 20; ++j) attrs.push_back("a" + std::to_string(100 + j));
    auto make = [&](std::size_t n) {
      std::vector<std::vector<double>> rows;
      std::vector<std::size_t> labels;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % 2;
        std::vector<double> r;
        for (int j = 0; j < 20; ++j) r.push_back(u(gen));
        r[3] = 0.6 * static_cast<double>(c) + 0.4 * r[3];
        r[11] = 0.6 * static_cast<double>(c) + 0.4 * r[11];
        rows.push_back(r);
        labels.push_back(c);
      }
      return Dataset(LabelScheme::binary, attrs, rows, labels);
    };
    const auto train = make(80);
    const auto test = make(40);
    const ClassifierFn precision = [](const Dataset& tr, const Dataset& te) {
      KernelSpec k;
      k.complexity = 10.0;
      return holdout_evaluate(train_multiclass(tr, k, {}), te).weighted.precision;
    };
    const auto scores = score_attributes(train, Evaluator::correlation);
    const auto t = tune_threshold(train, test, scores, precision);
    CHECK(t.baseline_metric == 1.0);
    CHECK(t.selection.retained.size() <= 5);
    CHECK(t.selection.retained.size() >= 1);
    CHECK(t.sweep.front().attributes == 20);
    for (const auto& name : t.selection.retained) CHECK((name == "a103" || name == "a111"));
  }
  SUBCASE("no reduced set keeps the baseline") {
    const Dataset ds(LabelScheme::binary, {"a", "b", "c"}, {{1, 2, 3}, {4, 5, 6}}, {0, 1});
    const std::vector<AttributeScore> scores{{"a", 0.1}, {"b", 0.2}, {"c", 0.3}};
    const ClassifierFn width = [](const Dataset& tr, const Dataset&) { return static_cast<double>(tr.width()); };
    const auto t = tune_threshold(ds, ds, scores, width);
    CHECK(t.selection.retained.size() == 3);
    CHECK(t.best_threshold == kNoThreshold);
    CHECK(t.sweep.size() == 3);
  }
  SUBCASE("equal scores give the baseline step only") {
    const Dataset ds(LabelScheme::binary, {"a", "b"}, {{1, 2}, {4, 5}}, {0, 1});
    const std::vector<AttributeScore> scores{{"a", 0.4}, {"b", 0.4}};
    const ClassifierFn one = [](const Dataset&, const Dataset&) { return 1.0; };
    const auto t = tune_threshold(ds, ds, scores, one);
    CHECK(t.sweep.size() == 1);
    CHECK(t.selection.retained.size() == 2);
  }
}

TEST_CASE("rank aggregation weights") {
  std::vector<std::vector<std::string>> lists(7);
  lists[0] = {"FDIVP", "AND"};
  lists[1] = {"and"};
  const auto r = aggregate_rank(lists);
  CHECK(r.weight_of("fdivp") == 21);
  CHECK(r.weight_of("AND") == 41);
  CHECK(r.weight_of("nop") == 0);
  CHECK(r.entries.front().attribute == "and");

  lists[2].assign(22, "x");
  CHECK(code_of([&] { aggregate_rank(lists); }) == Errc::list_too_long);
  lists.pop_back();
  CHECK(code_of([&] { aggregate_rank(lists); }) == Errc::invalid_argument);
}

TEST_CASE("rank aggregation is invariant to list order and totals stay bounded") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> lists(7);
    for (auto& l : lists) {
      std::vector<int> pool(40);
      for (int i = 0; i < 40; ++i) pool[i] = i;
      std::shuffle(pool.begin(), pool.end(), gen);
      const auto len = gen() % 22;
      for (std::size_t i = 0; i < len; ++i) l.push_back("op" + std::to_string(pool[i]));
    }
    const auto a = aggregate_rank(lists);
    std::shuffle(lists.begin(), lists.end(), gen);
    const auto b = aggregate_rank(lists);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      REQUIRE(a.entries[i].attribute == b.entries[i].attribute);
      REQUIRE(a.entries[i].total == b.entries[i].total);
      REQUIRE(a.entries[i].total <= 7u * 21u);
      if (i > 0) {
        const auto& p = a.entries[i - 1];
        const auto& q = a.entries[i];
        REQUIRE((p.total > q.total || (p.total == q.total && p.attribute < q.attribute)));
      }
    }
    REQUIRE(format_aggregate(a) == format_aggregate(b));
  }
}
