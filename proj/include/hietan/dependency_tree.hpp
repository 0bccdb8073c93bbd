#pragma once

#include <cstddef>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "hietan/hierarchy.hpp"

namespace hietan {

/// Learned single-parent structure over features. The class variable is an
/// implicit parent of every feature and is not stored.
struct DependencyTree {
  std::vector<std::optional<FeatureIndex>> parent_of;

  DependencyTree() = default;
  explicit DependencyTree(std::size_t n_features) : parent_of(n_features) {}

  std::size_t n_features() const noexcept { return parent_of.size(); }

  std::vector<FeatureIndex> roots() const {
    std::vector<FeatureIndex> out;
    for (FeatureIndex f = 0; f < parent_of.size(); ++f)
      if (!parent_of[f]) out.push_back(f);
    return out;
  }

  /// (parent, child) pairs ordered by child.
  std::vector<DagEdge> edges() const {
    std::vector<DagEdge> out;
    for (FeatureIndex f = 0; f < parent_of.size(); ++f)
      if (parent_of[f]) out.emplace_back(*parent_of[f], f);
    return out;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& p : parent_of) n += p.has_value();
    return n;
  }

  /// Features touched by at least one edge.
  FeatureSet features_in_edges() const {
    FeatureSet s(parent_of.size());
    for (FeatureIndex f = 0; f < parent_of.size(); ++f) {
      if (parent_of[f]) {
        s.set(f);
        s.set(*parent_of[f]);
      }
    }
    return s;
  }

  /// Walks parent links; any walk longer than n means a cycle.
  bool is_acyclic() const {
    const std::size_t n = parent_of.size();
    for (FeatureIndex f = 0; f < n; ++f) {
      std::optional<FeatureIndex> cur = parent_of[f];
      for (std::size_t steps = 0; cur; ++steps) {
        if (steps > n || *cur >= n) return false;
        cur = parent_of[*cur];
      }
    }
    return true;
  }

  friend bool operator==(const DependencyTree&, const DependencyTree&) = default;
};

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool connected(std::size_t a, std::size_t b) { return find(a) == find(b); }

  /// Returns false if already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace hietan
