#pragma once

// Parameter estimation and prediction for tree-augmented naive Bayes.
// The class is a parent of every feature; a feature with a tree parent is
// additionally conditioned on that parent's value.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hietan/dataset.hpp"
#include "hietan/dependency_tree.hpp"
#include "hietan/errors.hpp"
#include "hietan/infostats.hpp"

namespace hietan {

/// Conditional probability table of one feature.
/// Root:     prob[y * 2 + x]                  = P(x | y)
/// Parented: prob[(y * 2 + parent_x) * 2 + x] = P(x | y, parent_x)
struct Cpt {
  std::optional<FeatureIndex> parent;
  std::vector<double> prob;

  double p(Label y, Value x, Value parent_x = 0) const {
    return parent ? prob[(static_cast<std::size_t>(y) * 2 + parent_x) * 2 + x]
                  : prob[static_cast<std::size_t>(y) * 2 + x];
  }

  friend bool operator==(const Cpt&, const Cpt&) = default;
};

struct FittedClassifier {
  DependencyTree tree;
  std::array<double, kNumClasses> class_prior{};
  std::vector<std::optional<Cpt>> cpts;  // engaged exactly for active features
  double smoothing = 1.0;
  std::vector<std::string> feature_names;

  std::size_t n_features() const noexcept { return cpts.size(); }

  FeatureSet active_features() const {
    FeatureSet s(cpts.size());
    for (FeatureIndex f = 0; f < cpts.size(); ++f)
      if (cpts[f]) s.set(f);
    return s;
  }

  friend bool operator==(const FittedClassifier&, const FittedClassifier&) = default;
};

struct Prediction {
  Label label = 0;
  std::array<double, kNumClasses> log_posterior{};
};

namespace detail {
inline double smoothed_ratio(std::uint64_t count, std::uint64_t total, double smoothing, double cells) {
  const double denom = static_cast<double>(total) + cells * smoothing;
  if (denom <= 0.0) throw DegenerateDistribution("probability estimate with an empty conditioning set");
  return (static_cast<double>(count) + smoothing) / denom;
}
}  // namespace detail

/// Additively smoothed maximum-likelihood parameters from training counts.
inline FittedClassifier fit(const SufficientStats& stats, const DependencyTree& tree, const FeatureSet& active,
                            double smoothing) {
  if (smoothing < 0.0) throw DegenerateDistribution("smoothing must be non-negative");
  const std::size_t n = stats.n_features();
  if (tree.n_features() != n || active.size() != n) throw DimensionMismatch("tree, active set and data disagree");
  if (stats.n_instances() == 0) throw EmptyTrainingSet("cannot fit a classifier without training instances");

  FittedClassifier clf;
  clf.tree = tree;
  clf.smoothing = smoothing;
  for (Label y = 0; y < kNumClasses; ++y) {
    clf.class_prior[y] = detail::smoothed_ratio(stats.class_count(y), stats.n_instances(), smoothing, kNumClasses);
  }

  clf.cpts.resize(n);
  for (FeatureIndex f = 0; f < n; ++f) {
    const auto& parent = tree.parent_of[f];
    if (!active.test(f)) {
      if (parent) throw Error("tree edge touches inactive feature " + std::to_string(f));
      continue;
    }
    Cpt cpt;
    cpt.parent = parent;
    if (!parent) {
      cpt.prob.resize(4);
      for (Label y = 0; y < kNumClasses; ++y)
        for (Value x = 0; x < 2; ++x)
          cpt.prob[y * 2 + x] = detail::smoothed_ratio(stats.count(f, x, y), stats.class_count(y), smoothing, 2);
    } else {
      if (!active.test(*parent)) throw Error("tree parent of feature " + std::to_string(f) + " is inactive");
      const JointCounts joint = stats.joint(f, *parent);
      cpt.prob.resize(8);
      for (Label y = 0; y < kNumClasses; ++y) {
        for (Value px = 0; px < 2; ++px) {
          const std::uint64_t given = joint.at(0, px, y) + joint.at(1, px, y);
          for (Value x = 0; x < 2; ++x)
            cpt.prob[(y * 2 + px) * 2 + x] = detail::smoothed_ratio(joint.at(x, px, y), given, smoothing, 2);
        }
      }
    }
    clf.cpts[f] = std::move(cpt);
  }
  return clf;
}

inline FittedClassifier fit(const Dataset& ds, const DependencyTree& tree, const FeatureSet& active,
                            double smoothing) {
  FittedClassifier clf = fit(SufficientStats(ds), tree, active, smoothing);
  clf.feature_names = ds.feature_names;
  return clf;
}

/// All features active.
inline FittedClassifier fit(const Dataset& ds, const DependencyTree& tree, double smoothing) {
  FeatureSet all(ds.n_features());
  all.set();
  return fit(ds, tree, all, smoothing);
}

/// log P(y) + sum over active features of log CPT; ties go to class 0.
inline Prediction predict(const FittedClassifier& clf, std::span<const Value> instance) {
  if (instance.size() != clf.n_features()) {
    throw DimensionMismatch("instance has " + std::to_string(instance.size()) + " features, classifier has " +
                            std::to_string(clf.n_features()));
  }
  Prediction out;
  for (Label y = 0; y < kNumClasses; ++y) {
    double lp = std::log(clf.class_prior[y]);
    for (FeatureIndex f = 0; f < clf.cpts.size(); ++f) {
      const auto& cpt = clf.cpts[f];
      if (!cpt) continue;
      lp += std::log(cpt->p(y, instance[f], cpt->parent ? instance[*cpt->parent] : Value{0}));
    }
    out.log_posterior[y] = lp;
  }
  out.label = out.log_posterior[1] > out.log_posterior[0] ? 1 : 0;
  return out;
}

}  // namespace hietan
