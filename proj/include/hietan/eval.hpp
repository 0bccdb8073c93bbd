#pragma once

// Cross-validated comparison of the three structure learners, GMean,
// tied average ranks, Friedman test with Holm step-down, and the
// per-feature usage counts of the instance-specific learner.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "hietan/bayes.hpp"
#include "hietan/chowliu_tan.hpp"
#include "hietan/dataset.hpp"
#include "hietan/errors.hpp"
#include "hietan/hie_mst.hpp"
#include "hietan/hie_mst_lite.hpp"
#include "hietan/infostats.hpp"

namespace hietan {

/// Class 1 is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(Label truth, Label predicted) {
    if (truth) {
      ++(predicted ? tp : fn);
    } else {
      ++(predicted ? fp : tn);
    }
  }
  std::size_t total() const noexcept { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// sqrt(sensitivity * specificity).
inline double gmean(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw UndefinedClassSide("no positive instances: sensitivity undefined");
  if (c.tn + c.fp == 0) throw UndefinedClassSide("no negative instances: specificity undefined");
  const double sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return std::sqrt(sensitivity * specificity);
}

// ---------------------------------------------------------------------------
// Ranks

struct RankTable {
  std::vector<std::vector<double>> gmeans;  // [dataset][method]
  std::vector<std::vector<double>> ranks;   // [dataset][method], 1 = best
  std::vector<double> average_rank;         // [method]
  std::vector<std::size_t> wins;            // datasets where the method attains the best GMean

  std::size_t n_datasets() const noexcept { return ranks.size(); }
  std::size_t n_methods() const noexcept { return average_rank.size(); }
};

/// Ranks methods per dataset by descending GMean; tied methods share the
/// mean of the ranks they span.
inline RankTable average_ranks(const std::vector<std::vector<double>>& gmeans) {
  if (gmeans.empty() || gmeans.front().empty()) throw IncompleteTable("rank table needs at least one dataset and method");
  const std::size_t k = gmeans.front().size();
  RankTable out;
  out.gmeans = gmeans;
  out.average_rank.assign(k, 0.0);
  out.wins.assign(k, 0);
  for (const auto& row : gmeans) {
    if (row.size() != k) throw IncompleteTable("every dataset must report every method");
    for (double g : row)
      if (std::isnan(g)) throw IncompleteTable("missing GMean in rank table");

    std::vector<std::size_t> order(k);
    for (std::size_t m = 0; m < k; ++m) order[m] = m;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    std::vector<double> rank(k);
    for (std::size_t start = 0; start < k;) {
      std::size_t end = start + 1;
      while (end < k && row[order[end]] == row[order[start]]) ++end;
      const double shared = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
      for (std::size_t p = start; p < end; ++p) rank[order[p]] = shared;
      start = end;
    }
    const double best = row[order.front()];
    for (std::size_t m = 0; m < k; ++m) {
      out.average_rank[m] += rank[m];
      if (row[m] == best) ++out.wins[m];
    }
    out.ranks.push_back(std::move(rank));
  }
  for (double& r : out.average_rank) r /= static_cast<double>(gmeans.size());
  return out;
}

// ---------------------------------------------------------------------------
// Friedman test and Holm post-hoc against the best-ranked method

enum class Sidedness { TwoSided, OneSided };

struct HolmRow {
  std::size_t method = 0;
  double z = 0.0;
  double p_value = 1.0;
  double adjusted_alpha = 0.0;
  bool significant = false;
};

struct FriedmanHolm {
  std::size_t control = 0;
  double chi_square = 0.0;
  std::size_t degrees_of_freedom = 0;
  double friedman_p = 1.0;
  double standard_error = 0.0;
  std::vector<HolmRow> comparisons;  // sorted by ascending p-value

  const HolmRow* row_for(std::size_t method) const {
    for (const auto& r : comparisons)
      if (r.method == method) return &r;
    return nullptr;
  }
};

inline double standard_normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// The control is the method with the lowest average rank. Each other
/// method is compared with z = (R_j - R_control) / sqrt(k(k+1) / 6N).
/// Holm: the i-th smallest of m p-values is tested at alpha / (m - i + 1),
/// stopping at the first retained hypothesis.
inline FriedmanHolm friedman_holm(const RankTable& table, double alpha, Sidedness sides = Sidedness::TwoSided) {
  const std::size_t k = table.n_methods();
  const std::size_t n = table.n_datasets();
  if (k < 2 || n < 2) throw IncompleteTable("Friedman test needs at least 2 methods and 2 datasets");
  bool all_equal = true;
  for (const auto& row : table.ranks)
    for (double r : row) all_equal = all_equal && r == row.front();
  if (all_equal) throw DegenerateRanks("every method is tied on every dataset");

  FriedmanHolm out;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  out.control = static_cast<std::size_t>(
      std::min_element(table.average_rank.begin(), table.average_rank.end()) - table.average_rank.begin());

  double sum_sq = 0.0;
  for (double r : table.average_rank) sum_sq += r * r;
  out.chi_square = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  out.degrees_of_freedom = k - 1;
  out.friedman_p = out.chi_square > 0.0
                       ? boost::math::gamma_q(static_cast<double>(out.degrees_of_freedom) / 2.0, out.chi_square / 2.0)
                       : 1.0;

  out.standard_error = std::sqrt(kd * (kd + 1.0) / (6.0 * nd));
  for (std::size_t m = 0; m < k; ++m) {
    if (m == out.control) continue;
    HolmRow row;
    row.method = m;
    row.z = (table.average_rank[m] - table.average_rank[out.control]) / out.standard_error;
    row.p_value = sides == Sidedness::OneSided ? standard_normal_upper_tail(row.z)
                                               : std::min(1.0, 2.0 * standard_normal_upper_tail(std::fabs(row.z)));
    out.comparisons.push_back(row);
  }
  std::stable_sort(out.comparisons.begin(), out.comparisons.end(),
                   [](const HolmRow& a, const HolmRow& b) { return a.p_value < b.p_value; });
  const std::size_t m = out.comparisons.size();
  bool still_rejecting = true;
  for (std::size_t i = 0; i < m; ++i) {
    auto& row = out.comparisons[i];
    row.adjusted_alpha = alpha / static_cast<double>(m - i);
    still_rejecting = still_rejecting && row.p_value <= row.adjusted_alpha;
    row.significant = still_rejecting;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation

enum class Method { Tan, HieTan, HieTanLite };

inline constexpr Method kAllMethods[] = {Method::Tan, Method::HieTan, Method::HieTanLite};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Tan: return "tan";
    case Method::HieTan: return "hie-tan";
    case Method::HieTanLite: return "hie-tan-lite";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : kAllMethods)
    if (method_name(m) == s) return m;
  return std::nullopt;
}

/// Per-feature usage of the instance-specific trees.
struct FeatureUsageReport {
  std::size_t n_test_instances = 0;
  std::vector<std::size_t> freq_of_selection;  // instances whose tree keeps the feature active
  std::vector<std::size_t> freq_in_edges;      // tree edges containing the feature, summed over instances

  explicit FeatureUsageReport(std::size_t n_features = 0)
      : freq_of_selection(n_features, 0), freq_in_edges(n_features, 0) {}

  void add(const LiteTree& t) {
    ++n_test_instances;
    for (auto f = t.active.find_first(); f != FeatureSet::npos; f = t.active.find_next(f)) ++freq_of_selection[f];
    for (const auto& [p, c] : t.tree.edges()) {
      ++freq_in_edges[p];
      ++freq_in_edges[c];
    }
  }

  FeatureUsageReport& operator+=(const FeatureUsageReport& o) {
    n_test_instances += o.n_test_instances;
    for (std::size_t f = 0; f < freq_of_selection.size(); ++f) {
      freq_of_selection[f] += o.freq_of_selection[f];
      freq_in_edges[f] += o.freq_in_edges[f];
    }
    return *this;
  }

  /// Features with a nonzero count, highest first, ties by index.
  static std::vector<std::pair<FeatureIndex, std::size_t>> ranked(const std::vector<std::size_t>& counts,
                                                                  std::size_t top = 0) {
    std::vector<std::pair<FeatureIndex, std::size_t>> out;
    for (FeatureIndex f = 0; f < counts.size(); ++f)
      if (counts[f] > 0) out.emplace_back(f, counts[f]);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (top > 0 && out.size() > top) out.resize(top);
    return out;
  }

  friend bool operator==(const FeatureUsageReport&, const FeatureUsageReport&) = default;
};

struct CvConfig {
  std::size_t folds = 10;
  Seed seed = 1;
  double smoothing = 1.0;
  std::size_t jobs = 1;
};

struct FoldResult {
  ConfusionCounts counts;
  std::optional<double> gmean;  // empty when the fold lacks a class
};

struct MethodResult {
  Method method{};
  std::vector<FoldResult> folds;
  std::vector<std::optional<Label>> predictions;  // per dataset instance

  /// Mean of the defined per-fold GMeans; NaN when none is defined.
  double mean_gmean() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : folds) {
      if (f.gmean) {
        sum += *f.gmean;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : std::nan("");
  }

  ConfusionCounts pooled() const {
    ConfusionCounts c;
    for (const auto& f : folds) c += f.counts;
    return c;
  }
};

struct CvResult {
  CvConfig config;
  FoldAssignment assignment;
  std::vector<MethodResult> methods;
  std::optional<FeatureUsageReport> usage;  // present when hie-tan-lite ran

  const MethodResult* find(Method m) const {
    for (const auto& r : methods)
      if (r.method == m) return &r;
    return nullptr;
  }
};

/// Seed used by the per-fold learners (TAN root, residual orientations).
inline Seed fold_seed(Seed base, std::size_t fold) { return derive_seed(base, {fold}); }

/// Seed for the instance-specific tree of one test instance.
inline Seed instance_seed(Seed base, std::size_t fold, std::size_t instance) {
  return derive_seed(base, {fold, instance});
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct FoldOutput {
  std::vector<ConfusionCounts> counts;                              // per method
  std::vector<std::vector<std::pair<std::size_t, Label>>> predicted;  // per method
  FeatureUsageReport usage;
};

inline FoldOutput run_fold(const Dataset& ds, const FeatureDag& dag, const std::vector<Method>& methods,
                           const FoldAssignment& folds, std::size_t fold, const CvConfig& cfg) {
  const auto train_idx = folds.train_indices(fold);
  const auto test_idx = folds.test_indices(fold);
  const std::size_t n = ds.n_features();
  const SufficientStats stats(ds.select(train_idx));
  const auto edges = rank_edges(stats, dag, cfg.smoothing);
  FeatureSet all(n);
  all.set();

  FoldOutput out;
  out.counts.resize(methods.size());
  out.predicted.resize(methods.size());
  out.usage = FeatureUsageReport(n);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    auto classify = [&](const FittedClassifier& clf, std::size_t i) {
      const Label y = predict(clf, ds.row(i)).label;
      out.counts[m].add(ds.labels[i], y);
      out.predicted[m].emplace_back(i, y);
    };
    switch (methods[m]) {
      case Method::Tan: {
        const auto clf = fit(stats, learn_tan_structure(edges, n, fold_seed(cfg.seed, fold)), all, cfg.smoothing);
        for (std::size_t i : test_idx) classify(clf, i);
        break;
      }
      case Method::HieTan: {
        const auto clf = fit(stats, hie_mst(edges, dag, n, fold_seed(cfg.seed, fold)), all, cfg.smoothing);
        for (std::size_t i : test_idx) classify(clf, i);
        break;
      }
      case Method::HieTanLite: {
        for (std::size_t i : test_idx) {
          const LiteTree t = hie_mst_lite(edges, dag, ds.row(i), n, instance_seed(cfg.seed, fold, i));
          out.usage.add(t);
          classify(fit(stats, t.tree, t.active, cfg.smoothing), i);
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Stratified k-fold evaluation. Edge ranking is computed once per training
/// split; TAN and the hierarchy-constrained tree learn one structure per
/// fold, the instance-specific learner one per test instance. Results do
/// not depend on `jobs`.
inline CvResult run_cv_experiment(const Dataset& ds, const FeatureDag& dag, const std::vector<Method>& methods,
                                  const CvConfig& cfg) {
  require_same_width(ds, dag);
  if (methods.empty()) throw Error("no methods requested");
  CvResult result;
  result.config = cfg;
  result.assignment = stratified_folds(ds, cfg.folds, cfg.seed);

  std::vector<detail::FoldOutput> per_fold(cfg.folds);
  detail::parallel_for(cfg.folds, cfg.jobs, [&](std::size_t fold) {
    per_fold[fold] = detail::run_fold(ds, dag, methods, result.assignment, fold, cfg);
  });

  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodResult mr;
    mr.method = methods[m];
    mr.predictions.assign(ds.n_instances(), std::nullopt);
    for (auto& fo : per_fold) {
      FoldResult fr;
      fr.counts = fo.counts[m];
      if (fr.counts.tp + fr.counts.fn > 0 && fr.counts.tn + fr.counts.fp > 0) fr.gmean = gmean(fr.counts);
      mr.folds.push_back(fr);
      for (const auto& [i, y] : fo.predicted[m]) mr.predictions[i] = y;
    }
    result.methods.push_back(std::move(mr));
  }
  if (std::find(methods.begin(), methods.end(), Method::HieTanLite) != methods.end()) {
    FeatureUsageReport usage(ds.n_features());
    for (const auto& fo : per_fold) usage += fo.usage;
    result.usage = std::move(usage);
  }
  return result;
}

/// Instance-specific trees for a separate test set, trained on `train`.
inline FeatureUsageReport feature_usage(const Dataset& train, const Dataset& test, const FeatureDag& dag, Seed seed,
                                        double smoothing) {
  require_same_width(train, dag);
  require_same_width(test, dag);
  FeatureUsageReport usage(train.n_features());
  if (test.n_instances() == 0) return usage;
  const auto edges = rank_edges(SufficientStats(train), dag, smoothing);
  for (std::size_t i = 0; i < test.n_instances(); ++i)
    usage.add(hie_mst_lite(edges, dag, test.row(i), train.n_features(), instance_seed(seed, 0, i)));
  return usage;
}

}  // namespace hietan
