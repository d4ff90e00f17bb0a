#include "opd/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <future>

#include <nlohmann/json.hpp>

#include "opd/decimal.hpp"
#include "opd/error.hpp"

namespace opd {
namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::string> class_names(LabelScheme scheme) {
  const auto names = scheme_classes(scheme);
  return {names.begin(), names.end()};
}

std::string percent(double rate) { return format_fixed(100.0 * rate, 1) + "%"; }

}  // namespace

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t t = 0;
  for (const auto& row : cells) {
    for (auto v : row) t += v;
  }
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::uint64_t t = 0;
  for (auto v : cells.at(c)) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t c) const {
  std::uint64_t t = 0;
  for (const auto& row : cells) t += row.at(c);
  return t;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) t += cells[c][c];
  return t;
}

ConfusionMatrix empty_confusion(std::vector<std::string> classes) {
  ConfusionMatrix cm;
  cm.cells.assign(classes.size(), std::vector<std::uint64_t>(classes.size(), 0));
  cm.classes = std::move(classes);
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                 std::vector<std::string> classes) {
  if (actual.size() != predicted.size()) {
    fail(Errc::length_mismatch, "actual has " + std::to_string(actual.size()) + " labels, predicted has " +
                                    std::to_string(predicted.size()));
  }
  auto cm = empty_confusion(std::move(classes));
  const auto k = cm.classes.size();
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] >= k || predicted[i] >= k) fail(Errc::unknown_label, "label index outside the class list");
    ++cm.cells[actual[i]][predicted[i]];
  }
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> actual, std::span<const std::string> predicted,
                                 std::vector<std::string> classes) {
  if (actual.size() != predicted.size()) {
    fail(Errc::length_mismatch, "actual has " + std::to_string(actual.size()) + " labels, predicted has " +
                                    std::to_string(predicted.size()));
  }
  auto index = [&](const std::string& name) {
    auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) fail(Errc::unknown_label, "label '" + name + "' is not in the class list");
    return static_cast<std::size_t>(it - classes.begin());
  };
  std::vector<std::size_t> a;
  std::vector<std::size_t> p;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    a.push_back(index(actual[i]));
    p.push_back(index(predicted[i]));
  }
  return confusion_matrix(a, p, std::move(classes));
}

EvalReport class_metrics(const ConfusionMatrix& cm) {
  EvalReport r;
  r.matrix = cm;
  const auto total = cm.total();
  r.weighted.name = "Weighted Avg.";
  r.weighted.support = total;
  for (std::size_t c = 0; c < cm.classes.size(); ++c) {
    ClassMetrics m;
    m.name = cm.classes[c];
    m.tp = cm.cells[c][c];
    m.support = cm.row_sum(c);
    m.fn = m.support - m.tp;
    m.fp = cm.column_sum(c) - m.tp;
    m.tn = total - m.tp - m.fp - m.fn;
    m.tpr = ratio(m.tp, m.tp + m.fn);
    m.fpr = ratio(m.fp, m.fp + m.tn);
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.recall = m.tpr;
    m.f_measure = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    const double w = static_cast<double>(m.support);
    r.weighted.tp += m.tp;
    r.weighted.fp += m.fp;
    r.weighted.fn += m.fn;
    r.weighted.tn += m.tn;
    r.weighted.tpr += w * m.tpr;
    r.weighted.fpr += w * m.fpr;
    r.weighted.precision += w * m.precision;
    r.weighted.recall += w * m.recall;
    r.weighted.f_measure += w * m.f_measure;
    r.per_class.push_back(std::move(m));
  }
  if (total > 0) {
    const double t = static_cast<double>(total);
    r.weighted.tpr /= t;
    r.weighted.fpr /= t;
    r.weighted.precision /= t;
    r.weighted.recall /= t;
    r.weighted.f_measure /= t;
  }
  r.accuracy = ratio(cm.trace(), total);
  return r;
}

std::vector<std::size_t> stratified_folds(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(Errc::invalid_argument, "cross-validation needs k >= 2");
  if (k > ds.size()) {
    fail(Errc::k_too_large, "k = " + std::to_string(k) + " exceeds " + std::to_string(ds.size()) + " instances");
  }
  const auto order = shuffle_order(ds.size(), seed);
  std::vector<std::size_t> fold(ds.size(), 0);
  std::size_t next = 0;
  const auto nclasses = scheme_classes(ds.scheme()).size();
  for (std::size_t c = 0; c < nclasses; ++c) {
    for (auto i : order) {
      if (ds.labels()[i] != c) continue;
      fold[i] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

EvalReport cross_validate(const Dataset& ds, std::size_t k, std::uint64_t seed, const TrainerFn& trainer) {
  const auto fold = stratified_folds(ds, k, seed);
  auto run_fold = [&](std::size_t f) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < ds.size(); ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
    std::vector<std::pair<std::size_t, std::size_t>> out;  // (instance, predicted)
    if (test_idx.empty()) return out;
    const auto train = ds.with_rows(train_idx);
    const auto model = trainer(train);
    for (auto i : test_idx) out.emplace_back(i, predict_scaled(model, ds.rows()[i]).label);
    return out;
  };
  std::vector<std::future<std::vector<std::pair<std::size_t, std::size_t>>>> jobs;
  for (std::size_t f = 0; f < k; ++f) jobs.push_back(std::async(std::launch::async, run_fold, f));
  auto cm = empty_confusion(class_names(ds.scheme()));
  for (auto& j : jobs) {
    for (const auto& [i, predicted] : j.get()) ++cm.cells[ds.labels()[i]][predicted];
  }
  auto report = class_metrics(cm);
  report.attributes = ds.width();
  report.config["protocol"] = "cross_validation";
  report.config["folds"] = std::to_string(k);
  report.config["seed"] = std::to_string(seed);
  return report;
}

EvalReport holdout_evaluate(const MulticlassSvmModel& model, const Dataset& test) {
  if (test.empty()) fail(Errc::empty_test_set, "test set is empty");
  if (test.width() != model.attributes.size()) {
    fail(Errc::dimension_mismatch, "test set has " + std::to_string(test.width()) + " attributes, model expects " +
                                       std::to_string(model.attributes.size()));
  }
  if (test.attributes() != model.attributes) fail(Errc::schema_mismatch, "test attributes differ from the model's");
  if (test.scheme() != model.scheme) fail(Errc::schema_mismatch, "test label scheme differs from the model's");
  const bool scale = model.scaling.has_value() && !test.scaling().has_value();
  auto cm = empty_confusion(class_names(test.scheme()));
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = scale ? predict(model, test.rows()[i]) : predict_scaled(model, test.rows()[i]);
    ++cm.cells[test.labels()[i]][p.label];
  }
  auto report = class_metrics(cm);
  report.attributes = test.width();
  report.config["protocol"] = "holdout";
  report.config["kernel"] = std::string(kernel_name(model.kernel.family));
  report.config["C"] = format_shortest(model.kernel.complexity);
  switch (model.kernel.family) {
    case KernelFamily::poly:
    case KernelFamily::normalized_poly:
      report.config["exponent"] = format_shortest(model.kernel.exponent);
      report.config["use_lower_order"] = model.kernel.use_lower_order ? "true" : "false";
      break;
    case KernelFamily::rbf: report.config["gamma"] = format_shortest(model.kernel.gamma); break;
    case KernelFamily::puk:
      report.config["sigma"] = format_shortest(model.kernel.sigma);
      report.config["omega"] = format_shortest(model.kernel.omega);
      break;
  }
  report.config["support_vectors"] = std::to_string(model.support_vector_count());
  return report;
}

Grid default_grid(KernelFamily family) {
  Grid g;
  g.family = family;
  g.complexity = {0.1, 1.0, 10.0, 100.0};
  switch (family) {
    case KernelFamily::poly:
    case KernelFamily::normalized_poly: g.exponent = {1.0, 2.0, 3.0}; break;
    case KernelFamily::rbf: g.gamma = {0.01, 0.1, 1.0, 10.0}; break;
    case KernelFamily::puk:
      g.sigma = {1.0};
      g.omega = {1.0};
      break;
  }
  return g;
}

std::vector<KernelSpec> expand_grid(const Grid& grid) {
  std::vector<KernelSpec> out;
  auto or_default = [](const std::vector<double>& v, double d) { return v.empty() ? std::vector<double>{d} : v; };
  const KernelSpec defaults;
  for (double c : or_default(grid.complexity, defaults.complexity)) {
    KernelSpec s;
    s.family = grid.family;
    s.complexity = c;
    s.use_lower_order = grid.use_lower_order;
    switch (grid.family) {
      case KernelFamily::poly:
      case KernelFamily::normalized_poly:
        for (double e : or_default(grid.exponent, defaults.exponent)) {
          s.exponent = e;
          out.push_back(s);
        }
        break;
      case KernelFamily::rbf:
        for (double g : or_default(grid.gamma, defaults.gamma)) {
          s.gamma = g;
          out.push_back(s);
        }
        break;
      case KernelFamily::puk:
        for (double sg : or_default(grid.sigma, defaults.sigma)) {
          for (double om : or_default(grid.omega, defaults.omega)) {
            s.sigma = sg;
            s.omega = om;
            out.push_back(s);
          }
        }
        break;
    }
  }
  return out;
}

std::vector<GridCell> grid_search(const Dataset& train, const Dataset& test, std::span<const Grid> grids,
                                  const TrainerConfig& config) {
  std::vector<GridCell> cells;
  for (const auto& g : grids) {
    for (const auto& spec : expand_grid(g)) {
      GridCell cell;
      cell.spec = spec;
      try {
        const auto model = train_multiclass(train, spec, config);
        cell.support_vectors = model.support_vector_count();
        cell.report = holdout_evaluate(model, test);
      } catch (const Error& e) {
        cell.error = std::string(errc_name(e.code())) + ": " + e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  if (cells.empty()) fail(Errc::invalid_argument, "empty parameter grid");
  std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    if (a.report.has_value() != b.report.has_value()) return a.report.has_value();
    if (!a.report) return false;
    if (a.report->weighted.precision != b.report->weighted.precision) {
      return a.report->weighted.precision > b.report->weighted.precision;
    }
    return a.support_vectors < b.support_vectors;
  });
  return cells;
}

std::string format_report_text(const EvalReport& report) {
  std::string out;
  char buf[160];
  for (const auto& [k, v] : report.config) out += k + ": " + v + "\n";
  std::snprintf(buf, sizeof buf, "instances: %llu  attributes: %zu  accuracy: %s\n\n",
                static_cast<unsigned long long>(report.matrix.total()), report.attributes,
                percent(report.accuracy).c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "%-14s %8s %8s %10s %8s %10s %8s\n", "Class", "TPR", "FPR", "Precision", "Recall",
                "F-Measure", "Support");
  out += buf;
  auto row = [&](const ClassMetrics& m) {
    std::snprintf(buf, sizeof buf, "%-14s %8s %8s %10s %8s %10s %8llu\n", m.name.c_str(), percent(m.tpr).c_str(),
                  percent(m.fpr).c_str(), percent(m.precision).c_str(), percent(m.recall).c_str(),
                  percent(m.f_measure).c_str(), static_cast<unsigned long long>(m.support));
    out += buf;
  };
  for (const auto& m : report.per_class) row(m);
  row(report.weighted);
  out += "\nconfusion matrix (rows actual, columns predicted)\n";
  for (std::size_t c = 0; c < report.matrix.classes.size(); ++c) {
    for (auto v : report.matrix.cells[c]) {
      std::snprintf(buf, sizeof buf, "%6llu", static_cast<unsigned long long>(v));
      out += buf;
    }
    out += "  " + report.matrix.classes[c] + "\n";
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  using Json = nlohmann::ordered_json;
  auto metrics = [](const ClassMetrics& m) {
    return Json{{"class", m.name},
                {"support", m.support},
                {"tp", m.tp},
                {"fp", m.fp},
                {"fn", m.fn},
                {"tn", m.tn},
                {"tpr", round8(m.tpr)},
                {"fpr", round8(m.fpr)},
                {"precision", round8(m.precision)},
                {"recall", round8(m.recall)},
                {"f_measure", round8(m.f_measure)}};
  };
  Json j;
  j["format"] = "opd-eval-report";
  j["schema_version"] = 1;
  Json config = Json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  j["config"] = config;
  j["instances"] = report.matrix.total();
  j["attributes"] = report.attributes;
  j["accuracy"] = round8(report.accuracy);
  j["weighted_precision"] = round8(report.weighted.precision);
  Json classes = Json::array();
  for (const auto& m : report.per_class) classes.push_back(metrics(m));
  j["classes"] = classes;
  j["weighted"] = metrics(report.weighted);
  j["confusion_matrix"] = Json{{"classes", report.matrix.classes}, {"cells", report.matrix.cells}};
  return j.dump(1) + "\n";
}

}  // namespace opd
