#pragma once

// Canonical six-feature example and small random generators shared by tests.

#include <string>
#include <vector>

#include "hietan/hietan.hpp"

namespace fx {

using namespace hietan;

enum : FeatureIndex { A, B, C, D, E, F };
inline const std::vector<std::string> kLetters{"A", "B", "C", "D", "E", "F"};

// F->B, F->C, E->C, E->A, C->D, A->D
inline FeatureDag canonical_dag() { return FeatureDag::build(6, {{F, B}, {F, C}, {E, C}, {E, A}, {C, D}, {A, D}}); }

inline std::string data_path(const std::string& name) { return std::string(HIETAN_DATA_DIR) + "/" + name; }

// Candidate list in the walkthrough order, scores 15 down to 1.
inline std::vector<ScoredEdge> walkthrough_edges(const FeatureDag& dag) {
  const std::vector<std::pair<FeatureIndex, FeatureIndex>> order{
      {F, C}, {E, A}, {C, A}, {C, D}, {B, D}, {F, B}, {B, E}, {A, D},
      {C, E}, {A, F}, {D, E}, {A, B}, {E, F}, {B, C}, {D, F}};
  std::vector<ScoredEdge> out;
  double score = static_cast<double>(order.size());
  for (auto [x, y] : order) {
    const FeatureIndex i = std::min(x, y), j = std::max(x, y);
    out.push_back({i, j, score--, predefined_direction(dag, i, j), EdgeStatus::Available});
  }
  return out;
}

inline Dataset random_dataset(std::size_t n_features, std::size_t n_instances, Seed seed, double p_one = 0.5) {
  Rng rng(seed);
  Dataset ds;
  for (std::size_t f = 0; f < n_features; ++f) ds.feature_names.push_back("x" + std::to_string(f));
  std::vector<Value> row(n_features);
  for (std::size_t i = 0; i < n_instances; ++i) {
    for (auto& v : row) v = bernoulli(rng, p_one);
    ds.add_instance(row, bernoulli(rng, 0.5));
  }
  return ds;
}

/// Random edge list with distinct scores, sorted descending.
inline std::vector<ScoredEdge> random_scored_edges(const FeatureDag& dag, Seed seed) {
  Rng rng(seed);
  const std::size_t n = dag.n_features();
  std::vector<ScoredEdge> out;
  for (FeatureIndex i = 0; i < n; ++i)
    for (FeatureIndex j = i + 1; j < n; ++j)
      out.push_back({i, j, uniform_real(rng), predefined_direction(dag, i, j), EdgeStatus::Available});
  std::stable_sort(out.begin(), out.end(), [](const ScoredEdge& a, const ScoredEdge& b) { return a.score > b.score; });
  return out;
}

}  // namespace fx
