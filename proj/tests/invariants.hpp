#pragma once

// Structural checks shared by the unit suites and the acceptance run.
// Each returns a list of human-readable violations; empty means clean.

#include <string>
#include <vector>

#include "hietan/hietan.hpp"

namespace inv {

using namespace hietan;

inline std::vector<std::string> tree_violations(const DependencyTree& tree, const FeatureDag& dag) {
  std::vector<std::string> out;
  const std::size_t n = tree.n_features();
  if (n != dag.n_features()) out.push_back("tree and hierarchy sizes differ");
  if (!tree.is_acyclic()) out.push_back("parent relation has a cycle");
  if (n > 0 && tree.edge_count() > n - 1) out.push_back("more than n-1 edges");
  // single parent holds by representation; check the skeleton is a forest
  DisjointSets ds(n);
  for (auto [p, c] : tree.edges()) {
    if (p >= n || c >= n || p == c) {
      out.push_back("edge endpoint out of range");
      continue;
    }
    if (!ds.unite(p, c)) out.push_back("skeleton cycle through " + std::to_string(p) + "-" + std::to_string(c));
    if (dag.is_ancestor(c, p))
      out.push_back("edge " + std::to_string(p) + "->" + std::to_string(c) + " opposes the hierarchy");
  }
  return out;
}

inline std::vector<std::string> lite_violations(const LiteTree& lite, const FeatureDag& dag,
                                                const std::vector<Value>& instance) {
  auto out = tree_violations(lite.tree, dag);
  for (auto [p, c] : lite.tree.edges()) {
    if (dag.hierarchically_related(p, c) && instance[p] == instance[c])
      out.push_back("redundant pair " + std::to_string(p) + "-" + std::to_string(c) + " in tree");
    if (!lite.active.test(p) || !lite.active.test(c)) out.push_back("tree edge touches an inactive feature");
  }
  for (FeatureIndex f : lite.removed) {
    if (lite.active.test(f)) out.push_back("removed feature still active");
    if (lite.tree.features_in_edges().test(f)) out.push_back("removed feature appears in the tree");
  }
  if ((lite.active.count() + lite.removed.size()) != instance.size()) out.push_back("active and removed do not partition");
  return out;
}

}  // namespace inv
