#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "opd/dataset.hpp"
#include "opd/error.hpp"
#include "opd/svm.hpp"
#include "support/qp_oracle.hpp"

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

KernelSpec linear(double c) {
  KernelSpec k;
  k.complexity = c;
  return k;
}

std::vector<KernelSpec> oracle_kernels(double c) {
  KernelSpec poly;
  poly.exponent = 2.0;
  KernelSpec np;
  np.family = KernelFamily::normalized_poly;
  np.exponent = 2.0;
  KernelSpec rbf;
  rbf.family = KernelFamily::rbf;
  rbf.gamma = 1.0;
  KernelSpec puk;
  puk.family = KernelFamily::puk;
  std::vector<KernelSpec> out{poly, np, rbf, puk};
  for (auto& k : out) k.complexity = c;
  return out;
}

struct Toy {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

Toy random_toy(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Toy t;
  const int n = 2 + static_cast<int>(gen() % 5);
  const int d = 1 + static_cast<int>(gen() % 3);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (auto& v : row) v = u(gen);
    t.x.push_back(row);
    t.y.push_back(gen() % 2 == 0 ? 1 : -1);
  }
  t.y[0] = 1;
  t.y[1] = -1;
  return t;
}

Dataset gaussian_balls(std::size_t classes, std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.03);
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> r(classes, 0.1);
      r[c] = 0.9;
      for (auto& v : r) v += noise(gen);
      rows.push_back(r);
      labels.push_back(c);
    }
  }
  std::vector<std::string> attrs;
  for (std::size_t c = 0; c < classes; ++c) attrs.push_back("a" + std::to_string(c));
  return Dataset(classes == 2 ? LabelScheme::binary : LabelScheme::family, attrs, rows, labels);
}

}  // namespace

TEST_CASE("two points on a line give the analytic solution") {
  const std::vector<std::vector<double>> x{{0.0}, {1.0}};
  const std::vector<int> y{-1, 1};
  const auto m = smo_train_binary(x, y, linear(100.0), {});
  REQUIRE(m.alphas.size() == 2);
  CHECK(m.alphas[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(m.alphas[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(m.b == doctest::Approx(-1.0).epsilon(1e-9));
  const std::vector<double> probe{0.9};
  CHECK(m.decision(probe) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(m.converged);
}

TEST_CASE("xor with rbf separates the training set and reaches the exact optimum") {
  const std::vector<std::vector<double>> x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> y{-1, -1, 1, 1};
  KernelSpec k;
  k.family = KernelFamily::rbf;
  k.gamma = 1.0;
  k.complexity = 100.0;
  TrainerConfig cfg;
  cfg.tolerance = 1e-10;
  const auto m = smo_train_binary(x, y, k, cfg);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] * m.decision(x[i]) > 0.0);
  const auto exact = test::solve_dual_exact(x, y, k);
  REQUIRE(exact.has_value());
  CHECK(dual_objective(m) == doctest::Approx(exact->objective).epsilon(1e-9));
}

TEST_CASE("smo_train_binary input errors") {
  const std::vector<std::vector<double>> x{{0.0}, {1.0}};
  const std::vector<int> same{1, 1};
  const std::vector<int> bad{1, 2};
  const std::vector<int> short_y{1};
  CHECK(code_of([&] { smo_train_binary(x, same, linear(1), {}); }) == Errc::single_class);
  CHECK(code_of([&] { smo_train_binary(x, bad, linear(1), {}); }) == Errc::invalid_argument);
  CHECK(code_of([&] { smo_train_binary(x, short_y, linear(1), {}); }) == Errc::length_mismatch);
  const std::vector<std::vector<double>> ragged{{0.0}, {1.0, 2.0}};
  const std::vector<int> y{-1, 1};
  CHECK(code_of([&] { smo_train_binary(ragged, y, linear(1), {}); }) == Errc::dimension_mismatch);
  TrainerConfig cfg;
  cfg.tolerance = 0.0;
  CHECK(code_of([&] { smo_train_binary(x, y, linear(1), cfg); }) == Errc::invalid_argument);
}

TEST_CASE("SMO matches the exact dual optimum on small random problems") {
  std::mt19937_64 gen(1234);
  TrainerConfig cfg;
  cfg.tolerance = 1e-10;
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto t = random_toy(gen);
    for (double c : {1.0, 100.0}) {
      for (const auto& k : oracle_kernels(c)) {
        const auto m = smo_train_binary(t.x, t.y, k, cfg);
        const auto exact = test::solve_dual_exact(t.x, t.y, k);
        REQUIRE(exact.has_value());
        const double w = dual_objective(m);
        REQUIRE(std::abs(w - exact->objective) <= 1e-6 * std::abs(exact->objective));
        ++compared;
      }
    }
  }
  CHECK(compared == 480);
}

TEST_CASE("trained machines satisfy the KKT conditions at the configured tolerance") {
  std::mt19937_64 gen(99);
  for (double tol : {1e-3, 1e-6}) {
    TrainerConfig cfg;
    cfg.tolerance = tol;
    for (int trial = 0; trial < 40; ++trial) {
      Toy t;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int i = 0; i < 30; ++i) {
        t.x.push_back({u(gen), u(gen), u(gen)});
        t.y.push_back(t.x.back()[0] + 0.3 * t.x.back()[1] + 0.2 * (u(gen) - 0.5) > 0.65 ? 1 : -1);
      }
      t.y[0] = 1;
      t.y[1] = -1;
      for (double c : {1.0, 100.0}) {
        for (const auto& k : oracle_kernels(c)) {
          const auto m = smo_train_binary(t.x, t.y, k, cfg);
          REQUIRE(m.converged);
          const auto r = test::check_kkt(m, t.x, t.y, c);
          REQUIRE(r.bounds_ok);
          REQUIRE(r.equality <= 1e-8);
          REQUIRE(r.worst <= tol + 1e-9);
          for (double a : m.alphas) REQUIRE((a > 0.0 && a <= c));
        }
      }
    }
  }
}

TEST_CASE("iteration cap returns the current solution flagged as unconverged") {
  std::mt19937_64 gen(3);
  const auto t = [&] {
    Toy out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
      out.x.push_back({u(gen), u(gen)});
      out.y.push_back(u(gen) > 0.5 ? 1 : -1);
    }
    out.y[0] = 1;
    out.y[1] = -1;
    return out;
  }();
  TrainerConfig cfg;
  cfg.max_iterations = 2;
  const auto m = smo_train_binary(t.x, t.y, linear(10.0), cfg);
  CHECK_FALSE(m.converged);
  CHECK(m.iterations == 2);
}

TEST_CASE("training is deterministic") {
  const auto ds = gaussian_balls(6, 8, 17);
  KernelSpec k;
  k.family = KernelFamily::puk;
  const auto a = model_to_json(train_multiclass(ds, k, {}));
  const auto b = model_to_json(train_multiclass(ds, k, {}));
  CHECK(a == b);
}

TEST_CASE("multiclass assembly") {
  SUBCASE("two classes give one machine that agrees with the binary trainer") {
    const auto ds = gaussian_balls(2, 10, 1);
    const auto mc = train_multiclass(ds, linear(1), {});
    REQUIRE(mc.machines.size() == 1);
    std::vector<int> y;
    for (auto l : ds.labels()) y.push_back(l == 1 ? 1 : -1);
    const auto bin = smo_train_binary(ds.rows(), y, linear(1), {});
    for (const auto& r : ds.rows()) {
      const auto p = predict_scaled(mc, r);
      CHECK(p.margins[0] == bin.decision(r));
      CHECK(p.label == (bin.decision(r) >= 0.0 ? 1u : 0u));
    }
  }
  SUBCASE("six classes give fifteen machines in pair order") {
    const auto mc = train_multiclass(gaussian_balls(6, 5, 2), linear(1), {});
    REQUIRE(mc.machines.size() == 15);
    CHECK(mc.machines[0].negative_class == 0);
    CHECK(mc.machines[0].positive_class == 1);
    CHECK(mc.machines[14].negative_class == 4);
    CHECK(mc.machines[14].positive_class == 5);
  }
  SUBCASE("three separated balls are voted correctly") {
    const auto ds = gaussian_balls(3, 30, 3);
    const auto mc = train_multiclass(ds, linear(1), {});
    CHECK(mc.machines.size() == 3);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(predict_scaled(mc, ds.rows()[i]).label == ds.labels()[i]);
  }
  SUBCASE("one class present") {
    auto ds = gaussian_balls(2, 5, 4);
    ds = ds.with_rows({0, 1, 2});
    CHECK(code_of([&] { train_multiclass(ds, linear(1), {}); }) == Errc::single_class);
  }
}

TEST_CASE("prediction margins and the boundary rule") {
  MulticlassSvmModel m;
  m.scheme = LabelScheme::binary;
  m.attributes = {"x"};
  m.classes = {0, 1};
  BinarySvmModel b;
  b.support_vectors = {{0.0}, {1.0}};
  b.alphas = {2.0, 2.0};
  b.labels = {-1, 1};
  b.b = -1.0;
  b.negative_class = 0;
  b.positive_class = 1;
  m.machines.push_back(b);

  const auto p = predict(m, std::vector<double>{0.9});
  CHECK(p.label == 1);
  CHECK(p.margins[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(p.votes[1] == 1);

  const auto tie = predict(m, std::vector<double>{0.5});
  CHECK(tie.margins[0] == 0.0);
  CHECK(tie.label == 1);

  CHECK(predict(m, std::vector<double>{0.1}).label == 0);
  CHECK(code_of([&] { predict(m, std::vector<double>{0.1, 0.2}); }) == Errc::dimension_mismatch);
}

TEST_CASE("predict applies the stored scaling") {
  auto raw = gaussian_balls(2, 10, 5);
  const auto scaled = minmax_scale(raw);
  auto train = scaled.data;
  train.set_scaling(scaled.params);
  const auto mc = train_multiclass(train, linear(1), {});
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto a = predict(mc, raw.rows()[i]);
    const auto b = predict_scaled(mc, train.rows()[i]);
    CHECK(a.margins == b.margins);
  }
}

TEST_CASE("logistic calibration") {
  SUBCASE("separated margins give a negative slope") {
    std::vector<double> f;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
      f.push_back(2.0 + i);
      y.push_back(1);
      f.push_back(-2.0 - i);
      y.push_back(-1);
    }
    const auto s = fit_sigmoid(f, y);
    CHECK(s.a < 0.0);
    // P(+1 | f) rises with f, so the negative-class probability falls.
    double prev = 0.0;
    for (double v = -5.0; v <= 5.0; v += 0.25) {
      const double p = s.probability(v);
      CHECK(p > prev);
      CHECK(1.0 - p < 1.0 - prev);
      prev = p;
    }
    CHECK(s.probability(10.0) > 0.9);
    CHECK(s.probability(-10.0) < 0.1);
  }
  SUBCASE("constant margins fall back to the prior") {
    const std::vector<double> f(5, 0.3);
    const std::vector<int> y{1, 1, -1, -1, -1};
    const auto s = fit_sigmoid(f, y);
    CHECK(s.a == 0.0);
    CHECK(s.b == doctest::Approx(std::log(4.0 / 3.0)));
  }
  SUBCASE("one class only") {
    const std::vector<double> f{1.0, 2.0};
    const std::vector<int> y{1, 1};
    CHECK(code_of([&] { fit_sigmoid(f, y); }) == Errc::degenerate_targets);
  }
  SUBCASE("calibrated models report probabilities without changing votes") {
    const auto ds = gaussian_balls(3, 10, 6);
    TrainerConfig cal;
    cal.calibrate = true;
    const auto a = train_multiclass(ds, linear(1), {});
    const auto b = train_multiclass(ds, linear(1), cal);
    for (const auto& r : ds.rows()) {
      const auto pa = predict_scaled(a, r);
      const auto pb = predict_scaled(b, r);
      CHECK(pa.label == pb.label);
      CHECK(pa.probabilities.empty());
      REQUIRE(pb.probabilities.size() == 6);
      double sum = 0.0;
      for (double p : pb.probabilities) sum += p;
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("model file round-trip keeps predictions bit-identical") {
  auto raw = gaussian_balls(6, 6, 8);
  const auto scaled = minmax_scale(raw);
  auto train = scaled.data;
  train.set_scaling(scaled.params);
  KernelSpec k;
  k.family = KernelFamily::puk;
  TrainerConfig cfg;
  cfg.calibrate = true;
  const auto model = train_multiclass(train, k, cfg);
  const auto text = model_to_json(model);
  const auto back = model_from_json(text);
  CHECK(model_to_json(back) == text);
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = u(gen);
    const auto a = predict(model, x);
    const auto b = predict(back, x);
    REQUIRE(a.label == b.label);
    REQUIRE(a.margins == b.margins);
    REQUIRE(a.probabilities == b.probabilities);
  }
  CHECK(code_of([] { model_from_json("{}"); }) == Errc::schema_mismatch);
  CHECK(code_of([] { model_from_json("not json"); }) == Errc::schema_mismatch);
}
