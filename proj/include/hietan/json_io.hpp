#pragma once

// JSON documents: fitted models and cross-validation results.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hietan/bayes.hpp"
#include "hietan/eval.hpp"
#include "hietan/version.hpp"

namespace hietan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Model: {tree, prior, cpts, smoothing, feature_names}

inline json tree_to_json(const DependencyTree& tree) {
  json parents = json::array();
  for (const auto& p : tree.parent_of) parents.push_back(p ? json(*p) : json(nullptr));
  return parents;
}

inline DependencyTree tree_from_json(const json& j) {
  DependencyTree tree(j.size());
  for (std::size_t f = 0; f < j.size(); ++f)
    if (!j[f].is_null()) tree.parent_of[f] = j[f].get<FeatureIndex>();
  return tree;
}

inline json model_to_json(const FittedClassifier& clf) {
  json cpts = json::array();
  for (const auto& cpt : clf.cpts) {
    if (!cpt) {
      cpts.push_back(nullptr);
      continue;
    }
    cpts.push_back({{"parent", cpt->parent ? json(*cpt->parent) : json(nullptr)}, {"prob", cpt->prob}});
  }
  return {{"format", "hietan-model"},
          {"version", kVersion},
          {"tree", tree_to_json(clf.tree)},
          {"prior", clf.class_prior},
          {"cpts", std::move(cpts)},
          {"smoothing", clf.smoothing},
          {"feature_names", clf.feature_names}};
}

inline FittedClassifier model_from_json(const json& j) {
  try {
    FittedClassifier clf;
    clf.tree = tree_from_json(j.at("tree"));
    clf.class_prior = j.at("prior").get<std::array<double, kNumClasses>>();
    clf.smoothing = j.at("smoothing").get<double>();
    clf.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& c : j.at("cpts")) {
      if (c.is_null()) {
        clf.cpts.emplace_back();
        continue;
      }
      Cpt cpt;
      if (!c.at("parent").is_null()) cpt.parent = c.at("parent").get<FeatureIndex>();
      cpt.prob = c.at("prob").get<std::vector<double>>();
      if (cpt.prob.size() != (cpt.parent ? 8u : 4u)) throw Error("model CPT has the wrong number of cells");
      clf.cpts.push_back(std::move(cpt));
    }
    if (clf.cpts.size() != clf.tree.n_features()) throw Error("model tree and CPT list disagree on feature count");
    return clf;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Results

inline json counts_to_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

inline json optional_number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

inline json usage_to_json(const FeatureUsageReport& u, const std::vector<std::string>& names, std::size_t top = 0) {
  auto ranked = [&](const std::vector<std::size_t>& counts) {
    json rows = json::array();
    for (const auto& [f, n] : FeatureUsageReport::ranked(counts, top))
      rows.push_back({{"feature", names.at(f)}, {"count", n}});
    return rows;
  };
  return {{"test_instances", u.n_test_instances},
          {"freq_of_selection", ranked(u.freq_of_selection)},
          {"freq_in_edges", ranked(u.freq_in_edges)}};
}

inline json cv_to_json(const CvResult& r, const std::vector<std::string>& feature_names) {
  json methods = json::object();
  for (const auto& m : r.methods) {
    json folds = json::array();
    for (const auto& f : m.folds) {
      json fj = counts_to_json(f.counts);
      fj["gmean"] = f.gmean ? json(*f.gmean) : json(nullptr);
      folds.push_back(std::move(fj));
    }
    methods[std::string(method_name(m.method))] = {
        {"folds", std::move(folds)}, {"mean_gmean", optional_number(m.mean_gmean())}, {"pooled", counts_to_json(m.pooled())}};
  }
  json out = {{"methods", std::move(methods)}};
  out["usage"] = r.usage ? usage_to_json(*r.usage, feature_names) : json(nullptr);
  return out;
}

inline json rank_table_to_json(const RankTable& t, const std::vector<std::string>& method_names,
                               const std::vector<std::string>& dataset_names) {
  json rows = json::array();
  for (std::size_t d = 0; d < t.n_datasets(); ++d)
    rows.push_back({{"dataset", dataset_names.at(d)}, {"gmean", t.gmeans[d]}, {"rank", t.ranks[d]}});
  json summary = json::array();
  for (std::size_t m = 0; m < t.n_methods(); ++m)
    summary.push_back({{"method", method_names.at(m)}, {"average_rank", t.average_rank[m]}, {"wins", t.wins[m]}});
  return {{"per_dataset", std::move(rows)}, {"methods", std::move(summary)}};
}

inline json holm_to_json(const FriedmanHolm& h, const std::vector<std::string>& method_names, double alpha,
                         Sidedness sides) {
  json rows = json::array();
  for (const auto& c : h.comparisons) {
    rows.push_back({{"method", method_names.at(c.method)},
                    {"z", c.z},
                    {"p_value", c.p_value},
                    {"adjusted_alpha", c.adjusted_alpha},
                    {"significant", c.significant}});
  }
  return {{"control", method_names.at(h.control)},
          {"alpha", alpha},
          {"sides", sides == Sidedness::OneSided ? "one-sided" : "two-sided"},
          {"friedman_chi_square", h.chi_square},
          {"friedman_df", h.degrees_of_freedom},
          {"friedman_p", h.friedman_p},
          {"comparisons", std::move(rows)}};
}

}  // namespace hietan
