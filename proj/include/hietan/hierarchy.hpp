#pragma once

// Pre-defined feature hierarchy (generalisation -> specialisation DAG).
//
// Features are dense 0-based indices. An edge (p, c) means p is the more
// generic feature. Ancestor and descendant closures are precomputed as
// bitsets so membership tests are O(1).

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "hietan/errors.hpp"
#include "hietan/rng.hpp"

namespace hietan {

using FeatureIndex = std::size_t;
using FeatureSet = boost::dynamic_bitset<>;
using DagEdge = std::pair<FeatureIndex, FeatureIndex>;  // (parent, child)

class FeatureDag {
 public:
  FeatureDag() = default;

  /// Builds the closure sets. Duplicate edges are collapsed.
  /// Throws IndexOutOfRange or CyclicHierarchy.
  static FeatureDag build(std::size_t n_features, std::vector<DagEdge> edge_list) {
    for (const auto& [p, c] : edge_list) {
      if (p >= n_features || c >= n_features) {
        throw IndexOutOfRange("hierarchy edge (" + std::to_string(p) + ", " + std::to_string(c) +
                              ") outside " + std::to_string(n_features) + " features");
      }
      if (p == c) throw CyclicHierarchy("self-loop on feature " + std::to_string(p));
    }
    std::sort(edge_list.begin(), edge_list.end());
    edge_list.erase(std::unique(edge_list.begin(), edge_list.end()), edge_list.end());

    FeatureDag dag;
    dag.n_ = n_features;
    dag.edges_ = std::move(edge_list);
    dag.parents_.assign(n_features, {});
    dag.children_.assign(n_features, {});
    for (const auto& [p, c] : dag.edges_) {
      dag.parents_[c].push_back(p);
      dag.children_[p].push_back(c);
    }

    // Kahn ordering; leftovers mean a cycle.
    std::vector<std::size_t> indegree(n_features);
    for (FeatureIndex v = 0; v < n_features; ++v) indegree[v] = dag.parents_[v].size();
    std::queue<FeatureIndex> ready;
    for (FeatureIndex v = 0; v < n_features; ++v)
      if (indegree[v] == 0) ready.push(v);
    std::vector<FeatureIndex> order;
    order.reserve(n_features);
    while (!ready.empty()) {
      FeatureIndex v = ready.front();
      ready.pop();
      order.push_back(v);
      for (FeatureIndex c : dag.children_[v])
        if (--indegree[c] == 0) ready.push(c);
    }
    if (order.size() != n_features) {
      throw CyclicHierarchy("feature hierarchy contains a directed cycle");
    }

    dag.ancestors_.assign(n_features, FeatureSet(n_features));
    dag.descendants_.assign(n_features, FeatureSet(n_features));
    for (FeatureIndex v : order) {
      for (FeatureIndex p : dag.parents_[v]) {
        dag.ancestors_[v] |= dag.ancestors_[p];
        dag.ancestors_[v].set(p);
      }
    }
    for (FeatureIndex v = 0; v < n_features; ++v) {
      for (auto a = dag.ancestors_[v].find_first(); a != FeatureSet::npos;
           a = dag.ancestors_[v].find_next(a)) {
        dag.descendants_[a].set(v);
      }
    }
    return dag;
  }

  /// Hierarchy with no edges.
  static FeatureDag flat(std::size_t n_features) { return build(n_features, {}); }

  std::size_t n_features() const noexcept { return n_; }
  const std::vector<DagEdge>& edges() const noexcept { return edges_; }

  const std::vector<FeatureIndex>& parents(FeatureIndex v) const { return parents_.at(check(v)); }
  const std::vector<FeatureIndex>& children(FeatureIndex v) const { return children_.at(check(v)); }
  const FeatureSet& ancestors(FeatureIndex v) const { return ancestors_[check(v)]; }
  const FeatureSet& descendants(FeatureIndex v) const { return descendants_[check(v)]; }

  /// True iff a is a (transitive) ancestor of b.
  bool is_ancestor(FeatureIndex a, FeatureIndex b) const {
    check(a);
    return ancestors_[check(b)].test(a);
  }

  bool hierarchically_related(FeatureIndex a, FeatureIndex b) const {
    return is_ancestor(a, b) || is_ancestor(b, a);
  }

  /// Ancestors and descendants together.
  FeatureSet relatives(FeatureIndex v) const { return ancestors(v) | descendants(v); }

  /// Features with no children in the hierarchy.
  std::vector<FeatureIndex> sinks() const {
    std::vector<FeatureIndex> out;
    for (FeatureIndex v = 0; v < n_; ++v)
      if (children_[v].empty()) out.push_back(v);
    return out;
  }

 private:
  FeatureIndex check(FeatureIndex v) const {
    if (v >= n_) {
      throw IndexOutOfRange("feature " + std::to_string(v) + " outside " + std::to_string(n_) +
                            " features");
    }
    return v;
  }

  std::size_t n_ = 0;
  std::vector<DagEdge> edges_;
  std::vector<std::vector<FeatureIndex>> parents_;
  std::vector<std::vector<FeatureIndex>> children_;
  std::vector<FeatureSet> ancestors_;
  std::vector<FeatureSet> descendants_;
};

// ---------------------------------------------------------------------------
// Hierarchy file: one `<parent>\t<child>` edge per line, `#` comments.

using NamedEdge = std::pair<std::string, std::string>;

inline std::vector<NamedEdge> parse_dag_edges(std::istream& in) {
  std::vector<NamedEdge> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("expected <parent><TAB><child>", line_no);
    }
    std::string parent = line.substr(0, tab);
    std::string child = line.substr(tab + 1);
    if (parent.empty() || child.empty()) throw ParseError("empty feature identifier", line_no);
    out.emplace_back(std::move(parent), std::move(child));
  }
  return out;
}

inline std::vector<NamedEdge> read_dag_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open hierarchy file '" + path + "'");
  return parse_dag_edges(in);
}

/// Resolves named edges against the dataset's feature names. Identifiers
/// missing from the dataset are dropped with a warning; ancestry that ran
/// through them is kept by bridging to the nearest present descendants.
inline FeatureDag resolve_dag(const std::vector<std::string>& feature_names,
                              const std::vector<NamedEdge>& named,
                              std::vector<std::string>* warnings = nullptr) {
  std::unordered_map<std::string, FeatureIndex> index;
  for (FeatureIndex i = 0; i < feature_names.size(); ++i) index.emplace(feature_names[i], i);
  std::unordered_map<std::string, std::vector<std::string>> children;
  std::vector<std::string> missing;
  for (const auto& [p, c] : named) {
    children[p].push_back(c);
    for (const auto* id : {&p, &c})
      if (!index.count(*id) && std::find(missing.begin(), missing.end(), *id) == missing.end()) missing.push_back(*id);
  }
  if (warnings) {
    for (const auto& id : missing) warnings->push_back("hierarchy feature '" + id + "' not in dataset; dropped");
  }

  std::vector<DagEdge> edges;
  for (const auto& [name, from] : index) {
    auto it = children.find(name);
    if (it == children.end()) continue;
    std::vector<std::string> stack(it->second.begin(), it->second.end());
    std::unordered_set<std::string> seen;
    while (!stack.empty()) {
      std::string c = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(c).second) continue;
      if (auto hit = index.find(c); hit != index.end()) {
        edges.emplace_back(from, hit->second);
        continue;
      }
      if (auto more = children.find(c); more != children.end())
        stack.insert(stack.end(), more->second.begin(), more->second.end());
    }
  }
  std::sort(edges.begin(), edges.end());
  return FeatureDag::build(feature_names.size(), std::move(edges));
}

inline void write_dag(std::ostream& out, const FeatureDag& dag,
                      const std::vector<std::string>& feature_names) {
  for (const auto& [p, c] : dag.edges()) out << feature_names.at(p) << '\t' << feature_names.at(c) << '\n';
}

/// Random layered DAG for synthetic experiments. Feature 0..n_roots-1 are
/// roots; every later feature gets one parent, or two with probability
/// `second_parent`, drawn from earlier features.
inline FeatureDag random_dag(std::size_t n_features, Seed seed, std::size_t n_roots = 3,
                             double second_parent = 0.3) {
  Rng rng(seed);
  n_roots = std::clamp<std::size_t>(n_roots, std::min<std::size_t>(1, n_features), n_features);
  std::vector<DagEdge> edges;
  for (FeatureIndex v = n_roots; v < n_features; ++v) {
    FeatureIndex p = static_cast<FeatureIndex>(uniform_index(rng, v));
    edges.emplace_back(p, v);
    if (v >= 2 && bernoulli(rng, second_parent)) {
      FeatureIndex q = static_cast<FeatureIndex>(uniform_index(rng, v));
      if (q != p) edges.emplace_back(q, v);
    }
  }
  return FeatureDag::build(n_features, std::move(edges));
}

}  // namespace hietan
