#include "opd/svm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include <nlohmann/json.hpp>

#include "opd/error.hpp"
#include "opd/random.hpp"

namespace opd {
namespace {

constexpr std::size_t kFullGramLimit = 25'000'000;  // cells

class Gram {
 public:
  Gram(std::span<const std::vector<double>> rows, const KernelSpec& spec) : rows_(rows), spec_(spec) {
    const auto n = rows.size();
    if (n * n <= kFullGramLimit) {
      full_.resize(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double v = kernel_eval(spec, rows[i], rows[j]);
          full_[i * n + j] = v;
          full_[j * n + i] = v;
        }
      }
    }
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (!full_.empty()) return full_[i * rows_.size() + j];
    return kernel_eval(spec_, rows_[i], rows_[j]);
  }

 private:
  std::span<const std::vector<double>> rows_;
  KernelSpec spec_;
  std::vector<double> full_;
};

// Platt's SMO with the two-threshold optimality test of Keerthi et al.
// F_i = sum_j alpha_j y_j K_ij - y_i is kept for every example, so the
// thresholds b_up / b_low are exact at every step.
class Smo {
 public:
  Smo(std::span<const std::vector<double>> rows, std::span<const int> y, const KernelSpec& spec,
      const TrainerConfig& config)
      : rows_(rows),
        y_(y.begin(), y.end()),
        spec_(spec),
        config_(config),
        c_(spec.complexity),
        gram_(rows, spec),
        rng_(config.seed),
        alpha_(rows.size(), 0.0),
        f_(rows.size(), 0.0) {
    for (std::size_t i = 0; i < f_.size(); ++i) f_[i] = -static_cast<double>(y_[i]);
    refresh_bounds();
  }

  BinarySvmModel run() {
    const auto n = rows_.size();
    const double tol = config_.tolerance;
    std::uint64_t changed = 0;
    bool examine_all = true;
    while ((changed > 0 || examine_all) && !capped()) {
      changed = 0;
      if (examine_all) {
        for (std::size_t i = 0; i < n && !capped(); ++i) changed += examine(i) ? 1 : 0;
      } else {
        for (std::size_t i = 0; i < n && !capped(); ++i) {
          if (!interior(i)) continue;
          changed += examine(i) ? 1 : 0;
          if (b_up_ > b_low_ - 2.0 * tol) {
            changed = 0;
            break;
          }
        }
      }
      if (examine_all) {
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
    return finish();
  }

 private:
  bool capped() const noexcept { return iterations_ >= config_.max_iterations; }
  bool interior(std::size_t i) const noexcept { return alpha_[i] > 0.0 && alpha_[i] < c_; }
  // Examples whose F value bounds the threshold from above / below.
  bool in_up(std::size_t i) const noexcept {
    return interior(i) || (y_[i] > 0 && alpha_[i] == 0.0) || (y_[i] < 0 && alpha_[i] == c_);
  }
  bool in_low(std::size_t i) const noexcept {
    return interior(i) || (y_[i] > 0 && alpha_[i] == c_) || (y_[i] < 0 && alpha_[i] == 0.0);
  }

  void refresh_bounds() {
    b_up_ = std::numeric_limits<double>::infinity();
    b_low_ = -std::numeric_limits<double>::infinity();
    i_up_ = i_low_ = npos;
    for (std::size_t i = 0; i < f_.size(); ++i) {
      if (in_up(i) && f_[i] < b_up_) {
        b_up_ = f_[i];
        i_up_ = i;
      }
      if (in_low(i) && f_[i] > b_low_) {
        b_low_ = f_[i];
        i_low_ = i;
      }
    }
  }

  bool examine(std::size_t i2) {
    const double tol2 = 2.0 * config_.tolerance;
    const double f2 = f_[i2];
    const bool low_violation = in_up(i2) && b_low_ - f2 > tol2;
    const bool up_violation = in_low(i2) && f2 - b_up_ > tol2;
    if (!low_violation && !up_violation) return false;
    std::size_t i1 = low_violation ? i_low_ : i_up_;
    if (low_violation && up_violation) i1 = (b_low_ - f2 > f2 - b_up_) ? i_low_ : i_up_;
    if (take_step(i1, i2)) return true;

    // Fallback when the best partner makes no progress: interior examples
    // first, then everything, each from a seeded starting point.
    const auto n = rows_.size();
    const auto start = static_cast<std::size_t>(rng_.uniform_index(n));
    for (std::size_t k = 0; k < n; ++k) {
      const auto j = (start + k) % n;
      if (interior(j) && take_step(j, i2)) return true;
    }
    const auto start2 = static_cast<std::size_t>(rng_.uniform_index(n));
    for (std::size_t k = 0; k < n; ++k) {
      const auto j = (start2 + k) % n;
      if (take_step(j, i2)) return true;
    }
    return false;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2 || i1 == npos) return false;
    const double a1_old = alpha_[i1];
    const double a2_old = alpha_[i2];
    const int y1 = y_[i1];
    const int y2 = y_[i2];
    const double f1 = f_[i1];
    const double f2 = f_[i2];
    const int s = y1 * y2;
    double lo = 0.0;
    double hi = 0.0;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(c_, c_ + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - c_);
      hi = std::min(c_, a1_old + a2_old);
    }
    if (lo >= hi) return false;
    const double k11 = gram_(i1, i1);
    const double k12 = gram_(i1, i2);
    const double k22 = gram_(i2, i2);
    const double eta = 2.0 * k12 - k11 - k22;
    double a2 = 0.0;
    if (eta < 0.0) {
      a2 = std::clamp(a2_old - y2 * (f1 - f2) / eta, lo, hi);
    } else {
      // Objective gain along the constraint line, as a function of the step.
      auto gain = [&](double t) { return t * y2 * (f1 - f2) + 0.5 * eta * t * t; };
      const double w_lo = gain(lo - a2_old);
      const double w_hi = gain(hi - a2_old);
      const double guard = config_.epsilon * (1.0 + std::abs(w_lo) + std::abs(w_hi));
      if (w_lo > w_hi + guard) {
        a2 = lo;
      } else if (w_hi > w_lo + guard) {
        a2 = hi;
      } else {
        return false;
      }
    }
    const double eps = config_.epsilon;
    if (std::abs(a2 - a2_old) < eps * (a2 + a2_old + eps)) return false;

    double a1 = a1_old + s * (a2_old - a2);
    const double snap = eps * std::max(1.0, c_);
    if (a1 < snap) a1 = 0.0;
    if (a1 > c_ - snap) a1 = c_;
    if (a2 < snap) a2 = 0.0;
    if (a2 > c_ - snap) a2 = c_;

    const double d1 = y1 * (a1 - a1_old);
    const double d2 = y2 * (a2 - a2_old);
    for (std::size_t i = 0; i < f_.size(); ++i) f_[i] += d1 * gram_(i, i1) + d2 * gram_(i, i2);
    alpha_[i1] = a1;
    alpha_[i2] = a2;
    refresh_bounds();
    ++iterations_;
    return true;
  }

  BinarySvmModel finish() {
    const double tol = config_.tolerance;
    double threshold = 0.0;
    std::size_t interior_count = 0;
    for (std::size_t i = 0; i < f_.size(); ++i) {
      if (interior(i)) {
        threshold += f_[i];
        ++interior_count;
      }
    }
    if (interior_count > 0) {
      threshold /= static_cast<double>(interior_count);
    } else if (std::isfinite(b_up_) && std::isfinite(b_low_)) {
      threshold = 0.5 * (b_up_ + b_low_);
    } else {
      threshold = std::isfinite(b_up_) ? b_up_ : b_low_;
    }
    // Keep the threshold inside the interval on which every example meets
    // its KKT condition to within `tol`.
    const double lo = b_low_ - tol;
    const double hi = b_up_ + tol;
    if (lo <= hi) threshold = std::clamp(threshold, lo, hi);

    BinarySvmModel m;
    m.kernel = spec_;
    m.b = -threshold;
    m.iterations = iterations_;
    m.converged = !capped() && b_low_ <= b_up_ + 2.0 * tol;
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      if (alpha_[i] > config_.epsilon) {
        m.support_vectors.push_back(rows_[i]);
        m.alphas.push_back(alpha_[i]);
        m.labels.push_back(y_[i]);
      }
    }
    return m;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::span<const std::vector<double>> rows_;
  std::vector<int> y_;
  KernelSpec spec_;
  TrainerConfig config_;
  double c_;
  Gram gram_;
  Rng rng_;
  std::vector<double> alpha_;
  std::vector<double> f_;
  double b_up_ = 0.0;
  double b_low_ = 0.0;
  std::size_t i_up_ = npos;
  std::size_t i_low_ = npos;
  std::uint64_t iterations_ = 0;
};

double sigmoid_loss(std::span<const double> f, std::span<const double> t, double a, double b) {
  double v = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double z = f[i] * a + b;
    if (z >= 0.0) {
      v += t[i] * z + std::log1p(std::exp(-z));
    } else {
      v += (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
  }
  return v;
}

}  // namespace

void TrainerConfig::validate() const {
  if (!(tolerance > 0.0)) fail(Errc::invalid_argument, "tolerance must be positive");
  if (!(epsilon > 0.0)) fail(Errc::invalid_argument, "epsilon must be positive");
  if (max_iterations == 0) fail(Errc::invalid_argument, "max_iterations must be positive");
}

double Sigmoid::probability(double f) const {
  const double z = a * f + b;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double BinarySvmModel::decision(std::span<const double> x) const {
  double f = b;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    f += alphas[i] * labels[i] * kernel_eval(kernel, support_vectors[i], x);
  }
  return f;
}

BinarySvmModel smo_train_binary(std::span<const std::vector<double>> rows, std::span<const int> y,
                                const KernelSpec& spec, const TrainerConfig& config) {
  spec.validate();
  config.validate();
  if (rows.size() != y.size()) fail(Errc::length_mismatch, "rows and targets differ in length");
  bool pos = false;
  bool neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      fail(Errc::invalid_argument, "targets must be +1 or -1");
    }
  }
  if (!pos || !neg) fail(Errc::single_class, "training data contains a single class");
  for (const auto& r : rows) {
    if (r.size() != rows[0].size()) fail(Errc::dimension_mismatch, "rows differ in width");
  }
  return Smo(rows, y, spec, config).run();
}

double dual_objective(const BinarySvmModel& model) {
  double w = 0.0;
  const auto n = model.alphas.size();
  for (std::size_t i = 0; i < n; ++i) {
    w += model.alphas[i];
    for (std::size_t j = 0; j < n; ++j) {
      w -= 0.5 * model.alphas[i] * model.alphas[j] * model.labels[i] * model.labels[j] *
           kernel_eval(model.kernel, model.support_vectors[i], model.support_vectors[j]);
    }
  }
  return w;
}

Sigmoid fit_sigmoid(std::span<const double> f, std::span<const int> y) {
  if (f.size() != y.size()) fail(Errc::length_mismatch, "decision values and targets differ in length");
  double prior1 = 0.0;
  double prior0 = 0.0;
  for (int v : y) (v > 0 ? prior1 : prior0) += 1.0;
  if (prior1 == 0.0 || prior0 == 0.0) fail(Errc::degenerate_targets, "sigmoid fit needs both classes");
  const Sigmoid prior{0.0, std::log((prior0 + 1.0) / (prior1 + 1.0))};
  if (std::all_of(f.begin(), f.end(), [&](double v) { return v == f[0]; })) return prior;

  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = y[i] > 0 ? hi_target : lo_target;

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kRidge = 1e-12;
  double a = prior.a;
  double b = prior.b;
  double fval = sigmoid_loss(f, t, a, b);
  for (int it = 0; it < kMaxIter; ++it) {
    double h11 = kRidge;
    double h22 = kRidge;
    double h21 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * a + b;
      double p = 0.0;
      double q = 0.0;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = sigmoid_loss(f, t, na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  return {a, b};
}

std::size_t MulticlassSvmModel::support_vector_count() const noexcept {
  std::size_t n = 0;
  for (const auto& m : machines) n += m.support_vectors.size();
  return n;
}

MulticlassSvmModel train_multiclass(const Dataset& ds, const KernelSpec& spec, const TrainerConfig& config) {
  spec.validate();
  config.validate();
  MulticlassSvmModel model;
  model.scheme = ds.scheme();
  model.attributes = ds.attributes();
  model.scaling = ds.scaling();
  model.kernel = spec;
  model.config = config;
  const auto counts = ds.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) model.classes.push_back(c);
  }
  if (model.classes.size() < 2) fail(Errc::single_class, "training data contains a single class");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < model.classes.size(); ++i) {
    for (std::size_t j = i + 1; j < model.classes.size(); ++j) pairs.emplace_back(model.classes[i], model.classes[j]);
  }
  auto train_pair = [&](std::size_t neg, std::size_t pos) {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto l = ds.labels()[i];
      if (l != neg && l != pos) continue;
      rows.push_back(ds.rows()[i]);
      y.push_back(l == pos ? 1 : -1);
    }
    auto m = smo_train_binary(rows, y, spec, config);
    m.negative_class = neg;
    m.positive_class = pos;
    if (config.calibrate) {
      std::vector<double> f;
      f.reserve(rows.size());
      for (const auto& r : rows) f.push_back(m.decision(r));
      m.sigmoid = fit_sigmoid(f, y);
    }
    return m;
  };
  std::vector<std::future<BinarySvmModel>> jobs;
  jobs.reserve(pairs.size());
  for (const auto& [neg, pos] : pairs) jobs.push_back(std::async(std::launch::async, train_pair, neg, pos));
  for (auto& j : jobs) model.machines.push_back(j.get());
  return model;
}

Prediction predict_scaled(const MulticlassSvmModel& model, std::span<const double> x) {
  if (x.size() != model.attributes.size()) {
    fail(Errc::dimension_mismatch, "instance has " + std::to_string(x.size()) + " values, model expects " +
                                       std::to_string(model.attributes.size()));
  }
  const auto nclasses = scheme_classes(model.scheme).size();
  Prediction p;
  p.votes.assign(nclasses, 0);
  std::vector<double> winning_margin(nclasses, 0.0);
  bool calibrated = !model.machines.empty();
  for (const auto& m : model.machines) {
    const double f = m.decision(x);
    p.margins.push_back(f);
    const auto winner = f >= 0.0 ? m.positive_class : m.negative_class;
    ++p.votes[winner];
    winning_margin[winner] += std::abs(f);
    calibrated = calibrated && m.sigmoid.has_value();
  }
  std::size_t best = model.classes.front();
  for (auto c : model.classes) {
    if (p.votes[c] > p.votes[best] || (p.votes[c] == p.votes[best] && winning_margin[c] > winning_margin[best])) {
      best = c;
    }
  }
  p.label = best;
  if (calibrated) {
    p.probabilities.assign(nclasses, 0.0);
    for (std::size_t k = 0; k < model.machines.size(); ++k) {
      const auto& m = model.machines[k];
      const double pp = m.sigmoid->probability(p.margins[k]);
      p.probabilities[m.positive_class] += pp;
      p.probabilities[m.negative_class] += 1.0 - pp;
    }
    double sum = 0.0;
    for (double v : p.probabilities) sum += v;
    for (double& v : p.probabilities) v /= sum;
  }
  return p;
}

Prediction predict(const MulticlassSvmModel& model, std::span<const double> x) {
  if (x.size() != model.attributes.size()) {
    fail(Errc::dimension_mismatch, "instance has " + std::to_string(x.size()) + " values, model expects " +
                                       std::to_string(model.attributes.size()));
  }
  if (!model.scaling) return predict_scaled(model, x);
  const auto scaled = scale_vector(x, *model.scaling);
  return predict_scaled(model, scaled);
}

namespace {

using Json = nlohmann::ordered_json;

constexpr int kModelSchemaVersion = 1;

Json kernel_json(const KernelSpec& k) {
  return Json{{"family", kernel_name(k.family)},
              {"exponent", k.exponent},
              {"use_lower_order", k.use_lower_order},
              {"gamma", k.gamma},
              {"sigma", k.sigma},
              {"omega", k.omega},
              {"C", k.complexity}};
}

KernelSpec kernel_from(const Json& j) {
  KernelSpec k;
  auto fam = parse_kernel(j.at("family").get<std::string>());
  if (!fam) fail(Errc::schema_mismatch, "unknown kernel family");
  k.family = *fam;
  k.exponent = j.at("exponent").get<double>();
  k.use_lower_order = j.at("use_lower_order").get<bool>();
  k.gamma = j.at("gamma").get<double>();
  k.sigma = j.at("sigma").get<double>();
  k.omega = j.at("omega").get<double>();
  k.complexity = j.at("C").get<double>();
  return k;
}

std::size_t class_from(LabelScheme scheme, const Json& j) {
  auto idx = class_index(scheme, j.get<std::string>());
  if (!idx) fail(Errc::schema_mismatch, "unknown class '" + j.get<std::string>() + "' in model");
  return *idx;
}

}  // namespace

std::string model_to_json(const MulticlassSvmModel& model) {
  const auto names = scheme_classes(model.scheme);
  Json j;
  j["format"] = "opd-svm-model";
  j["schema_version"] = kModelSchemaVersion;
  j["scheme"] = scheme_name(model.scheme);
  j["attributes"] = model.attributes;
  Json classes = Json::array();
  for (auto c : model.classes) classes.push_back(names[c]);
  j["classes"] = classes;
  if (model.scaling) {
    j["scaling"] = Json{{"min", model.scaling->min}, {"max", model.scaling->max}};
  } else {
    j["scaling"] = nullptr;
  }
  j["kernel"] = kernel_json(model.kernel);
  j["trainer"] = Json{{"tolerance", model.config.tolerance},
                      {"epsilon", model.config.epsilon},
                      {"max_iterations", model.config.max_iterations},
                      {"calibrate", model.config.calibrate},
                      {"seed", model.config.seed}};
  Json machines = Json::array();
  for (const auto& m : model.machines) {
    Json mj;
    mj["negative_class"] = names[m.negative_class];
    mj["positive_class"] = names[m.positive_class];
    mj["b"] = m.b;
    mj["converged"] = m.converged;
    mj["iterations"] = m.iterations;
    if (m.sigmoid) {
      mj["sigmoid"] = Json{{"A", m.sigmoid->a}, {"B", m.sigmoid->b}};
    } else {
      mj["sigmoid"] = nullptr;
    }
    Json svs = Json::array();
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
      svs.push_back(Json{{"alpha", m.alphas[i]}, {"y", m.labels[i]}, {"x", m.support_vectors[i]}});
    }
    mj["support_vectors"] = std::move(svs);
    machines.push_back(std::move(mj));
  }
  j["machines"] = std::move(machines);
  return j.dump(1) + "\n";
}

MulticlassSvmModel model_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(Errc::schema_mismatch, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "opd-svm-model") fail(Errc::schema_mismatch, "not a model file");
    if (j.at("schema_version").get<int>() != kModelSchemaVersion) {
      fail(Errc::schema_mismatch, "unsupported model schema version");
    }
    MulticlassSvmModel m;
    auto scheme = parse_scheme(j.at("scheme").get<std::string>());
    if (!scheme) fail(Errc::schema_mismatch, "unknown label scheme in model");
    m.scheme = *scheme;
    m.attributes = j.at("attributes").get<std::vector<std::string>>();
    for (const auto& c : j.at("classes")) m.classes.push_back(class_from(m.scheme, c));
    if (!j.at("scaling").is_null()) {
      ScalingParams p;
      p.min = j["scaling"].at("min").get<std::vector<double>>();
      p.max = j["scaling"].at("max").get<std::vector<double>>();
      if (p.min.size() != m.attributes.size() || p.max.size() != m.attributes.size()) {
        fail(Errc::schema_mismatch, "scaling width differs from attribute count");
      }
      m.scaling = std::move(p);
    }
    m.kernel = kernel_from(j.at("kernel"));
    const auto& t = j.at("trainer");
    m.config.tolerance = t.at("tolerance").get<double>();
    m.config.epsilon = t.at("epsilon").get<double>();
    m.config.max_iterations = t.at("max_iterations").get<std::uint64_t>();
    m.config.calibrate = t.at("calibrate").get<bool>();
    m.config.seed = t.at("seed").get<std::uint64_t>();
    for (const auto& mj : j.at("machines")) {
      BinarySvmModel b;
      b.kernel = m.kernel;
      b.negative_class = class_from(m.scheme, mj.at("negative_class"));
      b.positive_class = class_from(m.scheme, mj.at("positive_class"));
      b.b = mj.at("b").get<double>();
      b.converged = mj.at("converged").get<bool>();
      b.iterations = mj.at("iterations").get<std::uint64_t>();
      if (!mj.at("sigmoid").is_null()) b.sigmoid = Sigmoid{mj["sigmoid"].at("A"), mj["sigmoid"].at("B")};
      for (const auto& sv : mj.at("support_vectors")) {
        b.alphas.push_back(sv.at("alpha").get<double>());
        b.labels.push_back(sv.at("y").get<int>());
        b.support_vectors.push_back(sv.at("x").get<std::vector<double>>());
        if (b.support_vectors.back().size() != m.attributes.size()) {
          fail(Errc::schema_mismatch, "support vector width differs from attribute count");
        }
      }
      m.machines.push_back(std::move(b));
    }
    const auto k = m.classes.size();
    if (m.machines.size() != k * (k - 1) / 2) fail(Errc::schema_mismatch, "machine count does not match classes");
    return m;
  } catch (const Json::exception& e) {
    fail(Errc::schema_mismatch, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace opd
