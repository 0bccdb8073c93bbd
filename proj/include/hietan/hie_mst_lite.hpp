#pragma once

// Instance-specific variant of the constrained tree. For one test instance,
// two hierarchically related features with equal values are redundant:
// such pairs are never joined, and whenever an edge enters the tree every
// relative sharing an endpoint's value is removed together with all of its
// candidate edges.

#include <cstddef>
#include <span>
#include <vector>

#include "hietan/dataset.hpp"
#include "hietan/hie_mst.hpp"
#include "hietan/infostats.hpp"

namespace hietan {

inline bool is_redundant_pair(const FeatureDag& dag, std::span<const Value> values, FeatureIndex a, FeatureIndex b) {
  if (a >= values.size() || b >= values.size()) throw IndexOutOfRange("feature outside instance");
  return dag.hierarchically_related(a, b) && values[a] == values[b];
}

/// Per-instance learning state: feature values, candidate-edge status and
/// the features still active.
struct InstanceContext {
  std::vector<Value> values;
  PairIndex pairs;
  std::vector<EdgeStatus> edge_status;
  FeatureSet active;

  InstanceContext() = default;
  explicit InstanceContext(std::span<const Value> instance)
      : values(instance.begin(), instance.end()),
        pairs{instance.size()},
        edge_status(pairs.size(), EdgeStatus::Available),
        active(instance.size()) {
    active.set();
  }

  EdgeStatus status(FeatureIndex i, FeatureIndex j) const { return edge_status[pairs(i, j)]; }

  /// Deactivates `f` and every candidate edge touching it.
  void remove(FeatureIndex f) {
    active.reset(f);
    for (FeatureIndex g = 0; g < values.size(); ++g)
      if (g != f) edge_status[pairs(f, g)] = EdgeStatus::Unavailable;
  }

  friend bool operator==(const InstanceContext&, const InstanceContext&) = default;
};

/// Removes every active ancestor or descendant of either endpoint that has
/// the same value as that endpoint. Endpoints stay active. Returns the
/// removed features in removal order.
inline std::vector<FeatureIndex> remove_redundant_relatives(InstanceContext& ctx, const FeatureDag& dag,
                                                            FeatureIndex a, FeatureIndex b,
                                                            TraceLog* trace = nullptr, std::size_t step = 0) {
  std::vector<FeatureIndex> removed;
  for (FeatureIndex v : {a, b}) {
    const FeatureSet relatives = dag.relatives(v);
    for (auto u = relatives.find_first(); u != FeatureSet::npos; u = relatives.find_next(u)) {
      if (u == a || u == b || !ctx.active.test(u) || ctx.values[u] != ctx.values[v]) continue;
      ctx.remove(u);
      removed.push_back(u);
      detail::record(trace, step, TraceDecision::RelativeRemoved, u, v);
    }
  }
  return removed;
}

inline InstanceContext remove_redundancy(InstanceContext ctx, const FeatureDag& dag, FeatureIndex a, FeatureIndex b) {
  remove_redundant_relatives(ctx, dag, a, b);
  return ctx;
}

struct LiteTree {
  DependencyTree tree;
  FeatureSet active;
  std::vector<FeatureIndex> removed;  // in removal order
};

namespace detail {

struct RedundancyGate {
  const FeatureDag& dag;
  InstanceContext& ctx;
  std::vector<FeatureIndex> removed;

  bool admit(const ScoredEdge& e, std::size_t step, TraceLog* trace) {
    if (e.status == EdgeStatus::Unavailable || ctx.status(e.i, e.j) == EdgeStatus::Unavailable) {
      record(trace, step, TraceDecision::RejectedUnavailable, e.i, e.j, e.score);
      return false;
    }
    if (is_redundant_pair(dag, ctx.values, e.i, e.j)) {
      record(trace, step, TraceDecision::RejectedRedundant, e.i, e.j, e.score);
      return false;
    }
    return true;
  }

  void after_insert(FeatureIndex a, FeatureIndex b, std::size_t step, TraceLog* trace) {
    auto r = remove_redundant_relatives(ctx, dag, a, b, trace, step);
    removed.insert(removed.end(), r.begin(), r.end());
  }
};

}  // namespace detail

/// Tree for one instance. `edges` must be sorted by descending score; the
/// same list is shared read-only by every instance.
inline LiteTree hie_mst_lite(const std::vector<ScoredEdge>& edges, const FeatureDag& dag,
                             std::span<const Value> instance, std::size_t n_features, Seed seed,
                             TraceLog* trace = nullptr) {
  if (instance.size() != n_features) throw DimensionMismatch("instance width differs from feature count");
  for (Value v : instance)
    if (v > 1) throw Error("instance values must be binary");
  InstanceContext ctx(instance);
  detail::RedundancyGate gate{dag, ctx, {}};
  EdgeSets sets = detail::run_constrained_mst(edges, dag, n_features, seed, gate, trace);
  return {sets.to_tree(), ctx.active, std::move(gate.removed)};
}

}  // namespace hietan
