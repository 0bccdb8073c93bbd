#pragma once

// Hierarchy-constrained maximum spanning tree.
//
// Candidate edges are consumed in descending score order. Pairs related in
// the feature hierarchy may only be added with the hierarchy's direction.
// Unrelated pairs are oriented by the single-parent constraint when one
// endpoint already has a parent, rejected when both do, and otherwise kept
// undirected. After every new directed edge, undirected edges touching a
// parented feature are oriented away from it until nothing changes. Edges
// still undirected at the end get random directions.

#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hietan/chowliu_tan.hpp"
#include "hietan/dependency_tree.hpp"
#include "hietan/errors.hpp"
#include "hietan/infostats.hpp"
#include "hietan/rng.hpp"

namespace hietan {

// ---------------------------------------------------------------------------
// Trace of structure-learning decisions, one event per decision.

enum class TraceDecision {
  AcceptedDirected,
  AcceptedUndirected,
  RejectedCycle,
  RejectedSingleParent,
  OrientedByPropagation,
  OrientedRandomly,
  DroppedUnorientable,
  RejectedUnavailable,
  RejectedRedundant,
  RelativeRemoved,
};

inline const char* to_string(TraceDecision d) {
  switch (d) {
    case TraceDecision::AcceptedDirected: return "accepted_directed";
    case TraceDecision::AcceptedUndirected: return "accepted_undirected";
    case TraceDecision::RejectedCycle: return "rejected_cycle";
    case TraceDecision::RejectedSingleParent: return "rejected_single_parent";
    case TraceDecision::OrientedByPropagation: return "oriented_by_propagation";
    case TraceDecision::OrientedRandomly: return "oriented_randomly";
    case TraceDecision::DroppedUnorientable: return "dropped_unorientable";
    case TraceDecision::RejectedUnavailable: return "rejected_unavailable";
    case TraceDecision::RejectedRedundant: return "rejected_redundant";
    case TraceDecision::RelativeRemoved: return "relative_removed";
  }
  return "unknown";
}

/// `step` is the 1-based position of the candidate edge being processed;
/// the random-orientation pass uses candidates.size() + 1. For oriented
/// decisions `a` is the parent and `b` the child; for relative_removed `a`
/// is the removed feature and `b` the tree endpoint it duplicated.
struct TraceEvent {
  std::size_t step = 0;
  TraceDecision decision{};
  FeatureIndex a = 0;
  FeatureIndex b = 0;
  std::optional<double> score;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using TraceLog = std::vector<TraceEvent>;

inline std::string to_json_line(const TraceEvent& e, const std::vector<std::string>* names = nullptr) {
  auto id = [&](FeatureIndex f) {
    if (names && f < names->size()) {
      std::string quoted = "\"";
      for (char c : (*names)[f]) {
        if (c == '"' || c == '\\') quoted += '\\';
        quoted += c;
      }
      return quoted + "\"";
    }
    return std::to_string(f);
  };
  std::string line = "{\"step\":" + std::to_string(e.step) + ",\"decision\":\"" + to_string(e.decision) +
                     "\",\"a\":" + id(e.a) + ",\"b\":" + id(e.b);
  if (e.score) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *e.score);
    line += ",\"score\":";
    line += buf;
  }
  return line + "}";
}

namespace detail {
inline void record(TraceLog* log, std::size_t step, TraceDecision d, FeatureIndex a, FeatureIndex b,
                   std::optional<double> score = std::nullopt) {
  if (log) log->push_back({step, d, a, b, score});
}
}  // namespace detail

// ---------------------------------------------------------------------------

/// Directed and undirected edges accepted so far. Connectivity of the
/// combined skeleton is tracked with union-find; orienting an edge never
/// changes it.
class EdgeSets {
 public:
  EdgeSets() = default;
  explicit EdgeSets(std::size_t n_features) : parent_(n_features), components_(n_features) {}

  std::size_t n_features() const noexcept { return parent_.size(); }
  const std::vector<DagEdge>& directed() const noexcept { return directed_; }
  const std::vector<UndirectedEdge>& undirected() const noexcept { return undirected_; }
  const std::optional<FeatureIndex>& parent(FeatureIndex v) const { return parent_.at(v); }
  bool has_parent(FeatureIndex v) const { return parent_.at(v).has_value(); }

  bool connected(FeatureIndex a, FeatureIndex b) const { return components_.connected(a, b); }

  /// Adds parent -> child. The caller checks cycles and single-parent.
  void add_directed(FeatureIndex parent, FeatureIndex child) {
    components_.unite(parent, child);
    parent_.at(child) = parent;
    directed_.emplace_back(parent, child);
  }

  void add_undirected(FeatureIndex a, FeatureIndex b) {
    components_.unite(a, b);
    undirected_.emplace_back(a, b);
  }

  /// Moves undirected_[pos] into the directed set as parent -> child.
  void orient(std::size_t pos, FeatureIndex parent, FeatureIndex child) {
    undirected_.erase(undirected_.begin() + static_cast<std::ptrdiff_t>(pos));
    parent_.at(child) = parent;
    directed_.emplace_back(parent, child);
  }

  void drop_undirected(std::size_t pos) {
    undirected_.erase(undirected_.begin() + static_cast<std::ptrdiff_t>(pos));
  }

  DependencyTree to_tree() const {
    DependencyTree t(n_features());
    t.parent_of = parent_;
    return t;
  }

 private:
  std::vector<std::optional<FeatureIndex>> parent_;
  std::vector<DagEdge> directed_;
  std::vector<UndirectedEdge> undirected_;
  mutable DisjointSets components_;
};

inline bool would_create_cycle(const EdgeSets& sets, FeatureIndex a, FeatureIndex b) {
  return sets.connected(a, b);
}

inline bool violates_single_parent(const EdgeSets& sets, FeatureIndex child) { return sets.has_parent(child); }

/// Orients every undirected edge with exactly one parented endpoint away
/// from that endpoint, repeating until no edge changes. Returns the number
/// of edges oriented.
inline std::size_t propagate_in_place(EdgeSets& sets, TraceLog* trace = nullptr, std::size_t step = 0) {
  std::size_t oriented = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t pos = 0; pos < sets.undirected().size();) {
      const auto [a, b] = sets.undirected()[pos];
      const bool pa = sets.has_parent(a);
      const bool pb = sets.has_parent(b);
      if (pa != pb) {
        const FeatureIndex parent = pa ? a : b;
        const FeatureIndex child = pa ? b : a;
        sets.orient(pos, parent, child);
        detail::record(trace, step, TraceDecision::OrientedByPropagation, parent, child);
        ++oriented;
        changed = true;
      } else {
        ++pos;
      }
    }
  }
  return oriented;
}

inline EdgeSets propagate_dependencies(EdgeSets sets) {
  propagate_in_place(sets);
  return sets;
}

// ---------------------------------------------------------------------------

namespace detail {

/// Gate that admits every edge and removes nothing.
struct NoGate {
  bool admit(const ScoredEdge&, std::size_t, TraceLog*) { return true; }
  void after_insert(FeatureIndex, FeatureIndex, std::size_t, TraceLog*) {}
};

/// Shared greedy loop. `gate.admit` runs after the cycle check and may
/// veto an edge; `gate.after_insert` runs after every accepted edge.
template <typename Gate>
EdgeSets run_constrained_mst(const std::vector<ScoredEdge>& edges, const FeatureDag& dag, std::size_t n_features,
                             Seed seed, Gate& gate, TraceLog* trace) {
  if (dag.n_features() != n_features) throw DimensionMismatch("hierarchy and feature count disagree");
  EdgeSets sets(n_features);
  std::size_t step = 0;

  for (const ScoredEdge& e : edges) {
    ++step;
    if (e.i >= n_features || e.j >= n_features || e.i == e.j) {
      throw IndexOutOfRange("candidate edge endpoint outside feature set");
    }
    if (would_create_cycle(sets, e.i, e.j)) {
      record(trace, step, TraceDecision::RejectedCycle, e.i, e.j, e.score);
      continue;
    }
    if (!gate.admit(e, step, trace)) continue;

    const Direction dir = predefined_direction(dag, e.i, e.j);
    if (dir != Direction::None) {
      const FeatureIndex parent = dir == Direction::IToJ ? e.i : e.j;
      const FeatureIndex child = dir == Direction::IToJ ? e.j : e.i;
      if (violates_single_parent(sets, child)) {
        record(trace, step, TraceDecision::RejectedSingleParent, parent, child, e.score);
        continue;
      }
      sets.add_directed(parent, child);
      record(trace, step, TraceDecision::AcceptedDirected, parent, child, e.score);
      propagate_in_place(sets, trace, step);
      gate.after_insert(parent, child, step, trace);
      continue;
    }

    const bool pi = sets.has_parent(e.i);
    const bool pj = sets.has_parent(e.j);
    if (pi && pj) {
      record(trace, step, TraceDecision::RejectedSingleParent, e.i, e.j, e.score);
    } else if (pi || pj) {
      const FeatureIndex parent = pi ? e.i : e.j;
      const FeatureIndex child = pi ? e.j : e.i;
      sets.add_directed(parent, child);
      record(trace, step, TraceDecision::AcceptedDirected, parent, child, e.score);
      propagate_in_place(sets, trace, step);
      gate.after_insert(parent, child, step, trace);
    } else {
      sets.add_undirected(e.i, e.j);
      record(trace, step, TraceDecision::AcceptedUndirected, e.i, e.j, e.score);
      gate.after_insert(e.i, e.j, step, trace);
    }
  }

  // Residual undirected edges, in insertion order. Propagating after each
  // choice keeps both orientations of the next residual edge legal.
  ++step;
  Rng rng(seed);
  while (!sets.undirected().empty()) {
    const auto [a, b] = sets.undirected().front();
    const bool a_to_b = !sets.has_parent(b);
    const bool b_to_a = !sets.has_parent(a);
    if (!a_to_b && !b_to_a) {
      sets.drop_undirected(0);
      record(trace, step, TraceDecision::DroppedUnorientable, a, b);
      continue;
    }
    bool pick_ab = a_to_b;
    if (a_to_b && b_to_a) pick_ab = uniform_index(rng, 2) == 0;
    const FeatureIndex parent = pick_ab ? a : b;
    const FeatureIndex child = pick_ab ? b : a;
    sets.orient(0, parent, child);
    record(trace, step, TraceDecision::OrientedRandomly, parent, child);
    propagate_in_place(sets, trace, step);
  }
  return sets;
}

}  // namespace detail

/// Hierarchy-constrained tree. `edges` must be sorted by descending score.
inline DependencyTree hie_mst(const std::vector<ScoredEdge>& edges, const FeatureDag& dag, std::size_t n_features,
                              Seed seed, TraceLog* trace = nullptr) {
  detail::NoGate gate;
  return detail::run_constrained_mst(edges, dag, n_features, seed, gate, trace).to_tree();
}

}  // namespace hietan
