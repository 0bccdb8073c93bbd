#pragma once

// Conventional TAN structure: maximum spanning tree over CMI scores
// (Kruskal on the pre-sorted edge list), a random root, and edges
// oriented away from the root. The feature hierarchy is ignored.

#include <cstddef>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "hietan/dependency_tree.hpp"
#include "hietan/errors.hpp"
#include "hietan/infostats.hpp"
#include "hietan/rng.hpp"

namespace hietan {

using UndirectedEdge = std::pair<FeatureIndex, FeatureIndex>;

/// Greedy acyclic selection over `edges` in the order given.
inline std::vector<UndirectedEdge> kruskal_skeleton(const std::vector<ScoredEdge>& edges, std::size_t n_features) {
  DisjointSets components(n_features);
  std::vector<UndirectedEdge> out;
  for (const auto& e : edges) {
    if (n_features > 0 && out.size() == n_features - 1) break;
    if (e.i >= n_features || e.j >= n_features) throw IndexOutOfRange("edge endpoint outside feature set");
    if (components.unite(e.i, e.j)) out.emplace_back(e.i, e.j);
  }
  return out;
}

/// Orients a forest away from `root`; components not containing the root
/// are rooted at their lowest-index feature.
inline DependencyTree orient_from_root(const std::vector<UndirectedEdge>& skeleton, std::size_t n_features,
                                       FeatureIndex root) {
  if (root >= n_features) throw IndexOutOfRange("root outside feature set");
  std::vector<std::vector<FeatureIndex>> adjacent(n_features);
  for (const auto& [a, b] : skeleton) {
    adjacent[a].push_back(b);
    adjacent[b].push_back(a);
  }
  DependencyTree tree(n_features);
  std::vector<bool> seen(n_features, false);
  auto walk = [&](FeatureIndex start) {
    std::queue<FeatureIndex> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      FeatureIndex v = frontier.front();
      frontier.pop();
      for (FeatureIndex w : adjacent[v]) {
        if (seen[w]) continue;
        seen[w] = true;
        tree.parent_of[w] = v;
        frontier.push(w);
      }
    }
  };
  walk(root);
  for (FeatureIndex v = 0; v < n_features; ++v)
    if (!seen[v]) walk(v);
  return tree;
}

inline FeatureIndex choose_root(std::size_t n_features, Seed seed) {
  Rng rng(seed);
  return static_cast<FeatureIndex>(uniform_index(rng, n_features));
}

inline DependencyTree learn_tan_structure(const std::vector<ScoredEdge>& edges, std::size_t n_features, Seed seed) {
  if (n_features == 0) throw EmptyFeatureSet("TAN structure needs at least one feature");
  return orient_from_root(kruskal_skeleton(edges, n_features), n_features, choose_root(n_features, seed));
}

/// Sum of the scores of the tree's edges. Throws UnknownEdge if a tree
/// edge has no score.
inline double tree_total_score(const DependencyTree& tree, const std::vector<ScoredEdge>& edges) {
  std::map<UndirectedEdge, double> score;
  for (const auto& e : edges) score.emplace(std::minmax(e.i, e.j), e.score);
  double total = 0.0;
  for (const auto& [p, c] : tree.edges()) {
    auto it = score.find(std::minmax(p, c));
    if (it == score.end()) {
      throw UnknownEdge("tree edge " + std::to_string(p) + " -> " + std::to_string(c) + " has no score");
    }
    total += it->second;
  }
  return total;
}

}  // namespace hietan
