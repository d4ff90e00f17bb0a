#include "opd/featsel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "opd/decimal.hpp"
#include "opd/error.hpp"
#include "opd/random.hpp"

namespace opd {
namespace {

constexpr std::pair<Evaluator, std::string_view> kEvaluatorNames[] = {
    {Evaluator::cfs_subset, "cfs_subset"}, {Evaluator::correlation, "correlation"},
    {Evaluator::gain_ratio, "gain_ratio"}, {Evaluator::info_gain, "info_gain"},
    {Evaluator::one_r, "one_r"},           {Evaluator::pca, "pca"},
    {Evaluator::relieff, "relieff"},       {Evaluator::symm_uncert, "symm_uncert"},
};

constexpr std::pair<Search, std::string_view> kSearchNames[] = {
    {Search::best_first, "best_first"}, {Search::greedy_stepwise, "greedy_stepwise"}, {Search::ranker, "ranker"}};

std::string normalize_name(std::string_view name) {
  std::string s(name);
  for (char& c : s) {
    c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

std::size_t label_bound(std::span<const std::size_t> labels) {
  std::size_t m = 0;
  for (auto l : labels) m = std::max(m, l + 1);
  return m;
}

double plogp_sum(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

// H(a), H(b) and H(a, b) of two discrete sequences.
struct JointEntropy {
  double ha = 0.0;
  double hb = 0.0;
  double hab = 0.0;
};

JointEntropy joint_entropy(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) fail(Errc::length_mismatch, "sequences differ in length");
  JointEntropy out;
  if (a.empty()) return out;
  const auto na = label_bound(a);
  const auto nb = label_bound(b);
  std::vector<double> ca(na, 0.0);
  std::vector<double> cb(nb, 0.0);
  std::vector<double> cab(na * nb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    cab[a[i] * nb + b[i]] += 1.0;
  }
  const auto n = static_cast<double>(a.size());
  out.ha = plogp_sum(ca, n);
  out.hb = plogp_sum(cb, n);
  out.hab = plogp_sum(cab, n);
  return out;
}

std::vector<std::string> sorted_names(std::span<const std::string> attributes, std::span<const std::size_t> subset) {
  std::vector<std::string> out;
  out.reserve(subset.size());
  for (auto i : subset) out.push_back(attributes[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view evaluator_name(Evaluator e) noexcept {
  for (const auto& [v, n] : kEvaluatorNames) {
    if (v == e) return n;
  }
  return "info_gain";
}

std::optional<Evaluator> parse_evaluator(std::string_view name) noexcept {
  const auto n = normalize_name(name);
  for (const auto& [v, s] : kEvaluatorNames) {
    if (s == n) return v;
  }
  if (n == "cfs") return Evaluator::cfs_subset;
  return std::nullopt;
}

std::string_view search_name(Search s) noexcept {
  for (const auto& [v, n] : kSearchNames) {
    if (v == s) return n;
  }
  return "ranker";
}

std::optional<Search> parse_search(std::string_view name) noexcept {
  const auto n = normalize_name(name);
  for (const auto& [v, s] : kSearchNames) {
    if (s == n) return v;
  }
  return std::nullopt;
}

DiscretizedAttribute discretize_equal_frequency(std::span<const double> values, std::size_t bins) {
  if (bins < 2) fail(Errc::invalid_argument, "discretization needs at least 2 bins");
  DiscretizedAttribute out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  for (std::size_t k = 1; k < bins; ++k) {
    const auto pos = static_cast<std::size_t>(std::llround(static_cast<double>(k * n) / static_cast<double>(bins)));
    if (pos == 0 || pos >= n) continue;
    if (sorted[pos - 1] == sorted[pos]) continue;
    const double cut = sorted[pos - 1] + (sorted[pos] - sorted[pos - 1]) / 2.0;
    if (out.cuts.empty() || cut > out.cuts.back()) out.cuts.push_back(cut);
  }
  out.bins.reserve(values.size());
  for (double v : values) {
    out.bins.push_back(static_cast<std::size_t>(std::lower_bound(out.cuts.begin(), out.cuts.end(), v) -
                                                out.cuts.begin()));
  }
  return out;
}

double entropy(std::span<const std::size_t> labels) {
  if (labels.empty()) return 0.0;
  std::vector<double> c(label_bound(labels), 0.0);
  for (auto l : labels) c[l] += 1.0;
  return plogp_sum(c, static_cast<double>(labels.size()));
}

double info_gain(const DiscretizedAttribute& attr, std::span<const std::size_t> labels) {
  const auto h = joint_entropy(attr.bins, labels);
  return std::max(0.0, h.ha + h.hb - h.hab);
}

double gain_ratio(const DiscretizedAttribute& attr, std::span<const std::size_t> labels) {
  const auto h = joint_entropy(attr.bins, labels);
  if (h.ha == 0.0) return 0.0;
  return std::max(0.0, h.ha + h.hb - h.hab) / h.ha;
}

double symm_uncert(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  const auto h = joint_entropy(a, b);
  const double denom = h.ha + h.hb;
  if (denom == 0.0) return 0.0;
  return 2.0 * std::max(0.0, h.ha + h.hb - h.hab) / denom;
}

double symm_uncert(const DiscretizedAttribute& attr, std::span<const std::size_t> labels) {
  return symm_uncert(attr.bins, labels);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::length_mismatch, "columns differ in length");
  const auto n = x.size();
  if (n == 0) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double correlation_eval(std::span<const double> column, std::span<const std::size_t> labels) {
  if (column.size() != labels.size()) fail(Errc::length_mismatch, "column and labels differ in length");
  if (column.empty()) return 0.0;
  std::vector<std::size_t> counts(label_bound(labels), 0);
  for (auto l : labels) ++counts[l];
  double total = 0.0;
  std::vector<double> indicator(labels.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t i = 0; i < labels.size(); ++i) indicator[i] = labels[i] == c ? 1.0 : 0.0;
    total += static_cast<double>(counts[c]) * std::abs(pearson(column, indicator));
  }
  return total / static_cast<double>(labels.size());
}

double one_r_eval(std::span<const double> column, std::span<const std::size_t> labels, std::size_t min_bucket) {
  if (column.size() != labels.size()) fail(Errc::length_mismatch, "column and labels differ in length");
  const auto n = column.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return column[a] < column[b]; });
  const auto nclasses = label_bound(labels);
  auto majority = [](const std::vector<std::size_t>& counts) {
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  };

  std::vector<std::vector<std::size_t>> buckets;
  std::size_t it = 0;
  while (it < n) {
    std::vector<std::size_t> counts(nclasses, 0);
    do {
      ++counts[labels[order[it++]]];
    } while (counts[majority(counts)] < min_bucket && it < n);
    while (it < n && labels[order[it]] == majority(counts)) ++counts[labels[order[it++]]];
    while (it < n && column[order[it]] == column[order[it - 1]]) ++counts[labels[order[it++]]];
    buckets.push_back(std::move(counts));
  }
  // Adjacent buckets predicting the same class form one rule interval.
  std::vector<std::vector<std::size_t>> merged;
  for (auto& b : buckets) {
    if (!merged.empty() && majority(merged.back()) == majority(b)) {
      for (std::size_t c = 0; c < nclasses; ++c) merged.back()[c] += b[c];
    } else {
      merged.push_back(std::move(b));
    }
  }
  std::size_t correct = 0;
  for (const auto& b : merged) correct += b[majority(b)];
  return static_cast<double>(correct) / static_cast<double>(n);
}

std::vector<AttributeScore> relieff_eval(const Dataset& ds, const ReliefOptions& options) {
  const auto n = ds.size();
  const auto w = ds.width();
  if (n == 0) fail(Errc::invalid_argument, "ReliefF on an empty dataset");
  if (options.k == 0) fail(Errc::invalid_argument, "ReliefF needs k >= 1");
  const auto& rows = ds.rows();
  const auto& labels = ds.labels();
  std::vector<double> range(w, 0.0);
  for (std::size_t a = 0; a < w; ++a) {
    double lo = rows[0][a];
    double hi = lo;
    for (const auto& r : rows) {
      lo = std::min(lo, r[a]);
      hi = std::max(hi, r[a]);
    }
    range[a] = hi - lo;
  }
  auto diff = [&](std::size_t a, std::size_t i, std::size_t j) {
    return range[a] > 0.0 ? std::abs(rows[i][a] - rows[j][a]) / range[a] : 0.0;
  };
  auto distance2 = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t a = 0; a < w; ++a) {
      const double d = diff(a, i, j);
      s += d * d;
    }
    return s;
  };

  const auto counts = ds.class_counts();
  std::vector<std::size_t> sampled;
  if (options.sample == 0 || options.sample >= n) {
    sampled.resize(n);
    std::iota(sampled.begin(), sampled.end(), 0);
  } else {
    Rng rng(options.seed);
    for (std::size_t s = 0; s < options.sample; ++s) sampled.push_back(static_cast<std::size_t>(rng.uniform_index(n)));
  }
  const auto m = static_cast<double>(sampled.size());

  std::vector<double> weight(w, 0.0);
  std::vector<std::pair<double, std::size_t>> by_distance;
  for (auto r : sampled) {
    by_distance.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != r) by_distance.emplace_back(distance2(r, j), j);
    }
    std::sort(by_distance.begin(), by_distance.end());
    const auto own = labels[r];
    const double p_own = static_cast<double>(counts[own]) / static_cast<double>(n);
    std::vector<std::size_t> taken(counts.size(), 0);
    std::vector<std::size_t> limit(counts.size(), 0);
    for (std::size_t c = 0; c < counts.size(); ++c) {
      const auto available = c == own ? counts[c] - 1 : counts[c];
      limit[c] = std::min(options.k, available);
    }
    for (const auto& [_, j] : by_distance) {
      const auto c = labels[j];
      if (taken[c] >= limit[c]) continue;
      ++taken[c];
      if (c == own) {
        const double scale = m * static_cast<double>(limit[c]);
        for (std::size_t a = 0; a < w; ++a) weight[a] -= diff(a, r, j) / scale;
      } else {
        const double prior = static_cast<double>(counts[c]) / static_cast<double>(n);
        const double scale = prior / (1.0 - p_own) / (m * static_cast<double>(limit[c]));
        for (std::size_t a = 0; a < w; ++a) weight[a] += diff(a, r, j) * scale;
      }
    }
  }
  std::vector<AttributeScore> out;
  out.reserve(w);
  for (std::size_t a = 0; a < w; ++a) out.push_back({ds.attributes()[a], weight[a]});
  return out;
}

PcaResult pca_eval(const Dataset& ds, PcaMatrix matrix, double variance_cover) {
  const auto w = ds.width();
  const auto n = ds.size();
  if (w < 2) fail(Errc::degenerate_matrix, "PCA needs at least 2 attributes");
  if (n < 2) fail(Errc::degenerate_matrix, "PCA needs at least 2 instances");
  if (!(variance_cover > 0.0 && variance_cover <= 1.0)) fail(Errc::invalid_argument, "variance cover must be in (0, 1]");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < w; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ds.rows()[i][j];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  if (matrix == PcaMatrix::correlation) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n - 1));
      if (sd > 0.0) {
        x.col(j) /= sd;
      } else {
        x.col(j).setZero();
      }
    }
  }
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) fail(Errc::degenerate_matrix, "eigendecomposition failed");

  PcaResult out;
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  double total = 0.0;
  for (Eigen::Index k = values.size(); k-- > 0;) {
    out.eigenvalues.push_back(std::max(0.0, values(k)));
    total += out.eigenvalues.back();
  }
  if (total <= 0.0) fail(Errc::degenerate_matrix, "all attributes are constant");
  double covered = 0.0;
  const double target = variance_cover * total - 1e-12 * total;
  while (out.retained < out.eigenvalues.size() && covered < target) covered += out.eigenvalues[out.retained++];

  Eigen::MatrixXd basis(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(out.retained));
  for (std::size_t k = 0; k < out.retained; ++k) {
    Eigen::VectorXd v = vectors.col(values.size() - 1 - static_cast<Eigen::Index>(k));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.col(static_cast<Eigen::Index>(k)) = v;
    out.components.emplace_back(v.data(), v.data() + v.size());
  }
  const Eigen::MatrixXd projected = x * basis;
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    out.transformed.emplace_back(projected.cols());
    for (Eigen::Index k = 0; k < projected.cols(); ++k) out.transformed.back()[static_cast<std::size_t>(k)] = projected(i, k);
  }
  out.selection.evaluator = Evaluator::pca;
  out.selection.search = Search::ranker;
  out.selection.retained = ds.attributes();
  out.selection.parameters["matrix"] = matrix == PcaMatrix::correlation ? "correlation" : "covariance";
  out.selection.parameters["variance_cover"] = format_shortest(variance_cover);
  out.selection.parameters["components"] = std::to_string(out.retained);
  return out;
}

double cfs_merit_from_means(std::size_t k, double mean_rcf, double mean_rff) {
  if (k == 0) return 0.0;
  const double kd = static_cast<double>(k);
  return kd * mean_rcf / std::sqrt(kd + kd * (kd - 1.0) * mean_rff);
}

double cfs_merit_from_correlations(std::span<const double> rcf, const std::vector<std::vector<double>>& rff) {
  const auto k = rcf.size();
  if (k == 0) return 0.0;
  const double mean_rcf = std::accumulate(rcf.begin(), rcf.end(), 0.0) / static_cast<double>(k);
  double sum_ff = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) sum_ff += rff.at(i).at(j);
  }
  const double pairs = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0;
  return cfs_merit_from_means(k, mean_rcf, k > 1 ? sum_ff / pairs : 0.0);
}

CfsEvaluator::CfsEvaluator(const Dataset& ds, std::size_t bins) {
  disc_.reserve(ds.width());
  rcf_.reserve(ds.width());
  for (std::size_t a = 0; a < ds.width(); ++a) {
    const auto col = ds.column(a);
    disc_.push_back(discretize_equal_frequency(col, bins));
    rcf_.push_back(symm_uncert(disc_.back(), ds.labels()));
  }
}

double CfsEvaluator::attribute_correlation(std::size_t a, std::size_t b) {
  if (a == b) return 1.0;
  const auto key = std::minmax(a, b);
  auto it = rff_.find(key);
  if (it != rff_.end()) return it->second;
  const double v = symm_uncert(disc_.at(key.first).bins, disc_.at(key.second).bins);
  rff_.emplace(key, v);
  return v;
}

double CfsEvaluator::merit(std::span<const std::size_t> subset) {
  const auto k = subset.size();
  if (k == 0) return 0.0;
  double sum_cf = 0.0;
  double sum_ff = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum_cf += rcf_.at(subset[i]);
    for (std::size_t j = i + 1; j < k; ++j) sum_ff += attribute_correlation(subset[i], subset[j]);
  }
  const double pairs = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0;
  return cfs_merit_from_means(k, sum_cf / static_cast<double>(k), k > 1 ? sum_ff / pairs : 0.0);
}

double cfs_merit(std::span<const std::size_t> subset, const Dataset& ds) {
  CfsEvaluator e(ds);
  return e.merit(subset);
}

SelectionResult search_best_first(std::span<const std::string> attributes, const MeritFn& merit,
                                  std::size_t backtrack_limit, Direction direction) {
  struct Node {
    std::vector<std::size_t> subset;  // ascending indices
    std::vector<std::string> key;     // ascending names
    double merit = 0.0;
  };
  auto better = [](const Node& a, const Node& b) {
    if (a.merit != b.merit) return a.merit > b.merit;
    return a.key < b.key;
  };
  const auto w = attributes.size();
  auto make = [&](std::vector<std::size_t> subset) {
    Node node;
    node.key = sorted_names(attributes, subset);
    node.merit = merit(subset);
    node.subset = std::move(subset);
    return node;
  };

  std::vector<std::size_t> start;
  if (direction == Direction::backward) {
    start.resize(w);
    std::iota(start.begin(), start.end(), 0);
  }
  std::set<std::vector<std::size_t>> visited{start};
  std::vector<Node> open{make(start)};
  Node best = open.front();
  std::size_t stale = 0;
  std::size_t expansions = 0;
  while (!open.empty() && stale < backtrack_limit) {
    auto pick = std::min_element(open.begin(), open.end(), better);
    Node node = std::move(*pick);
    open.erase(pick);
    ++expansions;
    std::optional<Node> best_child;
    for (std::size_t a = 0; a < w; ++a) {
      const bool member = std::binary_search(node.subset.begin(), node.subset.end(), a);
      if ((direction == Direction::forward) == member) continue;
      auto subset = node.subset;
      if (member) {
        subset.erase(std::lower_bound(subset.begin(), subset.end(), a));
      } else {
        subset.insert(std::upper_bound(subset.begin(), subset.end(), a), a);
      }
      if (!visited.insert(subset).second) continue;
      Node child = make(std::move(subset));
      if (!best_child || better(child, *best_child)) best_child = child;
      open.push_back(std::move(child));
    }
    if (best_child && best_child->merit > best.merit) {
      best = *best_child;
      stale = 0;
    } else {
      ++stale;
    }
  }

  SelectionResult out;
  out.search = Search::best_first;
  for (auto i : best.subset) out.retained.push_back(attributes[i]);
  out.parameters["direction"] = direction == Direction::forward ? "forward" : "backward";
  out.parameters["backtrack_limit"] = std::to_string(backtrack_limit);
  out.parameters["merit"] = format_fixed8(best.merit);
  out.parameters["expansions"] = std::to_string(expansions);
  return out;
}

SelectionResult search_greedy_stepwise(std::span<const std::string> attributes, const MeritFn& merit,
                                       std::optional<std::size_t> num_to_select, double threshold,
                                       bool generate_ranking) {
  const auto w = attributes.size();
  std::vector<std::size_t> current;
  double current_merit = merit(current);
  std::vector<AttributeScore> recorded;
  std::vector<bool> used(w, false);
  while (current.size() < w) {
    std::optional<std::size_t> best;
    double best_merit = 0.0;
    for (std::size_t a = 0; a < w; ++a) {
      if (used[a]) continue;
      auto subset = current;
      subset.insert(std::upper_bound(subset.begin(), subset.end(), a), a);
      const double m = merit(subset);
      if (!best || m > best_merit || (m == best_merit && attributes[a] < attributes[*best])) {
        best = a;
        best_merit = m;
      }
    }
    if (!generate_ranking && !(best_merit > current_merit)) break;
    used[*best] = true;
    current.insert(std::upper_bound(current.begin(), current.end(), *best), *best);
    current_merit = best_merit;
    recorded.push_back({attributes[*best], best_merit});
    if (!generate_ranking && num_to_select && recorded.size() >= *num_to_select) break;
  }

  SelectionResult out;
  out.search = Search::greedy_stepwise;
  out.threshold = threshold;
  out.num_to_select = num_to_select;
  out.parameters["generate_ranking"] = generate_ranking ? "true" : "false";
  if (generate_ranking) {
    for (const auto& r : recorded) {
      if (!(r.score > threshold)) continue;
      if (num_to_select && out.retained.size() >= *num_to_select) break;
      out.retained.push_back(r.attribute);
    }
    out.scores = std::move(recorded);
  } else {
    for (const auto& r : recorded) out.retained.push_back(r.attribute);
    out.parameters["merit"] = format_fixed8(current_merit);
  }
  return out;
}

SelectionResult ranker_select(std::vector<AttributeScore> scores, double threshold,
                              std::optional<std::size_t> num_to_select) {
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) fail(Errc::invalid_argument, "non-finite score for '" + s.attribute + "'");
  }
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.attribute < b.attribute;
  });
  SelectionResult out;
  out.search = Search::ranker;
  out.threshold = threshold;
  out.num_to_select = num_to_select;
  for (const auto& s : scores) {
    if (!(s.score > threshold)) continue;
    if (num_to_select && out.retained.size() >= *num_to_select) break;
    out.retained.push_back(s.attribute);
  }
  out.scores = std::move(scores);
  return out;
}

Dataset reduce_dataset(const Dataset& ds, const SelectionResult& selection) {
  std::set<std::string_view> keep;
  for (const auto& a : selection.retained) {
    if (!ds.attribute_index(a)) fail(Errc::unknown_attribute, "attribute '" + a + "' is not in the dataset");
    keep.insert(a);
  }
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < ds.width(); ++j) {
    if (keep.count(ds.attributes()[j])) cols.push_back(j);
  }
  return ds.with_columns(cols);
}

std::vector<AttributeScore> score_attributes(const Dataset& ds, Evaluator evaluator, const ReliefOptions& relief,
                                             std::size_t bins, std::size_t min_bucket) {
  if (evaluator == Evaluator::relieff) return relieff_eval(ds, relief);
  std::vector<AttributeScore> out;
  out.reserve(ds.width());
  for (std::size_t a = 0; a < ds.width(); ++a) {
    const auto col = ds.column(a);
    double score = 0.0;
    switch (evaluator) {
      case Evaluator::info_gain: score = info_gain(discretize_equal_frequency(col, bins), ds.labels()); break;
      case Evaluator::gain_ratio: score = gain_ratio(discretize_equal_frequency(col, bins), ds.labels()); break;
      case Evaluator::symm_uncert: score = symm_uncert(discretize_equal_frequency(col, bins), ds.labels()); break;
      case Evaluator::correlation: score = correlation_eval(col, ds.labels()); break;
      case Evaluator::one_r: score = one_r_eval(col, ds.labels(), min_bucket); break;
      default:
        fail(Errc::invalid_argument,
             std::string(evaluator_name(evaluator)) + " does not score single attributes");
    }
    out.push_back({ds.attributes()[a], score});
  }
  return out;
}

SelectionResult run_selection(const Dataset& ds, const SelectionConfig& config) {
  SelectionResult out;
  if (config.evaluator == Evaluator::pca) {
    out = pca_eval(ds, config.pca_matrix, config.variance_cover).selection;
  } else if (config.evaluator == Evaluator::cfs_subset) {
    CfsEvaluator cfs(ds, config.bins);
    MeritFn merit = [&cfs](std::span<const std::size_t> s) { return cfs.merit(s); };
    if (config.search == Search::best_first) {
      out = search_best_first(ds.attributes(), merit, config.backtrack_limit);
    } else if (config.search == Search::greedy_stepwise) {
      out = search_greedy_stepwise(ds.attributes(), merit, config.num_to_select, config.threshold,
                                   config.generate_ranking);
    } else {
      fail(Errc::invalid_argument, "cfs_subset needs best_first or greedy_stepwise search");
    }
    out.parameters["bins"] = std::to_string(config.bins);
  } else {
    if (config.search != Search::ranker) {
      fail(Errc::invalid_argument, std::string(evaluator_name(config.evaluator)) + " needs ranker search");
    }
    out = ranker_select(score_attributes(ds, config.evaluator, config.relief, config.bins, config.min_bucket),
                        config.threshold, config.num_to_select);
    switch (config.evaluator) {
      case Evaluator::info_gain:
      case Evaluator::gain_ratio:
      case Evaluator::symm_uncert: out.parameters["bins"] = std::to_string(config.bins); break;
      case Evaluator::one_r: out.parameters["min_bucket"] = std::to_string(config.min_bucket); break;
      case Evaluator::relieff:
        out.parameters["k"] = std::to_string(config.relief.k);
        out.parameters["sample"] = std::to_string(config.relief.sample);
        out.parameters["seed"] = std::to_string(config.relief.seed);
        break;
      default: break;
    }
  }
  out.evaluator = config.evaluator;
  return out;
}

ThresholdTuning tune_threshold(const Dataset& train, const Dataset& test, std::span<const AttributeScore> scores,
                               const ClassifierFn& classifier, Evaluator evaluator) {
  std::vector<AttributeScore> all(scores.begin(), scores.end());
  ThresholdTuning out;
  auto evaluate = [&](const SelectionResult& sel) {
    return classifier(reduce_dataset(train, sel), reduce_dataset(test, sel));
  };
  SelectionResult baseline = ranker_select(all, kNoThreshold);
  baseline.evaluator = evaluator;
  out.baseline_metric = evaluate(baseline);
  out.sweep.push_back({kNoThreshold, baseline.retained.size(), out.baseline_metric});
  out.selection = baseline;
  out.best_threshold = kNoThreshold;

  std::vector<double> thresholds;
  for (const auto& s : all) thresholds.push_back(s.score);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  for (double t : thresholds) {
    SelectionResult sel = ranker_select(all, t);
    sel.evaluator = evaluator;
    if (sel.retained.empty()) break;
    const double metric = evaluate(sel);
    out.sweep.push_back({t, sel.retained.size(), metric});
    if (metric >= out.baseline_metric - 1e-12 && sel.retained.size() < out.selection.retained.size()) {
      out.selection = std::move(sel);
      out.best_threshold = t;
    }
  }
  out.selection.parameters["baseline_metric"] = format_fixed8(out.baseline_metric);
  return out;
}

std::uint64_t AggregateRanking::weight_of(std::string_view attribute) const {
  std::string key(attribute);
  for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& e : entries) {
    if (e.attribute == key) return e.total;
  }
  return 0;
}

AggregateRanking aggregate_rank(const std::vector<std::vector<std::string>>& lists) {
  if (lists.size() != kAggregateLists) {
    fail(Errc::invalid_argument, "rank aggregation takes exactly " + std::to_string(kAggregateLists) + " lists, got " +
                                     std::to_string(lists.size()));
  }
  AggregateRanking out;
  std::map<std::string, std::uint64_t> totals;
  for (const auto& list : lists) {
    if (list.size() > kAggregateDepth) {
      fail(Errc::list_too_long, "ranked list has " + std::to_string(list.size()) + " entries, limit " +
                                    std::to_string(kAggregateDepth));
    }
    std::vector<std::string> lowered;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < list.size(); ++r) {
      std::string name = list[r];
      for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      lowered.push_back(name);
      if (!seen.insert(name).second) continue;
      totals[name] += kAggregateDepth + 1 - (r + 1);
    }
    out.sources.push_back(std::move(lowered));
  }
  for (const auto& [name, total] : totals) out.entries.push_back({name, total});
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const auto& a, const auto& b) { return a.total > b.total; });
  return out;
}

std::string format_aggregate(const AggregateRanking& ranking) {
  std::string out = "rank  opcode        total\n";
  char buf[96];
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const auto& e = ranking.entries[i];
    std::snprintf(buf, sizeof buf, "%4zu  %-12s  %5llu\n", i + 1, e.attribute.c_str(),
                  static_cast<unsigned long long>(e.total));
    out += buf;
  }
  return out;
}

namespace {
using Json = nlohmann::ordered_json;
constexpr int kSelectionSchemaVersion = 1;
}  // namespace

std::string selection_to_json(const SelectionResult& s) {
  Json j;
  j["format"] = "opd-selection";
  j["schema_version"] = kSelectionSchemaVersion;
  j["evaluator"] = evaluator_name(s.evaluator);
  j["search"] = search_name(s.search);
  j["threshold"] = s.threshold == kNoThreshold ? Json(nullptr) : Json(s.threshold);
  j["num_to_select"] = s.num_to_select ? Json(*s.num_to_select) : Json(nullptr);
  Json params = Json::object();
  for (const auto& [k, v] : s.parameters) params[k] = v;
  j["parameters"] = params;
  j["retained"] = s.retained;
  if (s.scores) {
    Json scores = Json::array();
    for (const auto& a : *s.scores) scores.push_back(Json{{"attribute", a.attribute}, {"score", round8(a.score)}});
    j["scores"] = scores;
  } else {
    j["scores"] = nullptr;
  }
  return j.dump(1) + "\n";
}

SelectionResult selection_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(Errc::schema_mismatch, std::string("selection file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "opd-selection") fail(Errc::schema_mismatch, "not a selection file");
    if (j.at("schema_version").get<int>() != kSelectionSchemaVersion) {
      fail(Errc::schema_mismatch, "unsupported selection schema version");
    }
    SelectionResult s;
    auto ev = parse_evaluator(j.at("evaluator").get<std::string>());
    auto se = parse_search(j.at("search").get<std::string>());
    if (!ev || !se) fail(Errc::schema_mismatch, "unknown evaluator or search in selection file");
    s.evaluator = *ev;
    s.search = *se;
    s.threshold = j.at("threshold").is_null() ? kNoThreshold : j["threshold"].get<double>();
    if (!j.at("num_to_select").is_null()) s.num_to_select = j["num_to_select"].get<std::size_t>();
    for (const auto& [k, v] : j.at("parameters").items()) s.parameters[k] = v.get<std::string>();
    s.retained = j.at("retained").get<std::vector<std::string>>();
    if (!j.at("scores").is_null()) {
      std::vector<AttributeScore> scores;
      for (const auto& a : j["scores"]) scores.push_back({a.at("attribute").get<std::string>(), a.at("score").get<double>()});
      s.scores = std::move(scores);
    }
    return s;
  } catch (const Json::exception& e) {
    fail(Errc::schema_mismatch, std::string("malformed selection file: ") + e.what());
  }
}

}  // namespace opd
