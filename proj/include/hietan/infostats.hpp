#pragma once

// Conditional mutual information between feature pairs given the class,
// and the descending candidate-edge ranking every structure learner reads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hietan/dataset.hpp"
#include "hietan/errors.hpp"
#include "hietan/hierarchy.hpp"

namespace hietan {

/// Contingency table over (x_i, x_j, y).
struct JointCounts {
  std::array<std::uint64_t, 8> cells{};
  std::uint64_t n = 0;

  static constexpr std::size_t index(int xi, int xj, int y) noexcept {
    return static_cast<std::size_t>((xi * 2 + xj) * 2 + y);
  }
  std::uint64_t at(int xi, int xj, int y) const noexcept { return cells[index(xi, xj, y)]; }
  std::uint64_t& at(int xi, int xj, int y) noexcept { return cells[index(xi, xj, y)]; }

  /// Same table with the roles of the two features swapped.
  JointCounts transposed() const noexcept {
    JointCounts t;
    t.n = n;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int y = 0; y < 2; ++y) t.at(b, a, y) = at(a, b, y);
    return t;
  }

  friend bool operator==(const JointCounts&, const JointCounts&) = default;
};

inline JointCounts joint_counts(const Dataset& ds, FeatureIndex i, FeatureIndex j) {
  if (i >= ds.n_features() || j >= ds.n_features()) throw IndexOutOfRange("feature pair outside dataset");
  if (i == j) throw IndexOutOfRange("joint counts need two distinct features");
  JointCounts c;
  c.n = ds.n_instances();
  for (std::size_t r = 0; r < ds.n_instances(); ++r) ++c.at(ds.value(r, i), ds.value(r, j), ds.labels[r]);
  return c;
}

/// CMI(X_i; X_j | Y) in nats. The 8-cell joint is smoothed additively and
/// every marginal is derived from the smoothed joint. Zero-probability
/// cells contribute nothing. The four cells of each class are combined as
/// (t00 + t11) + (t01 + t10) so swapping the features gives a bit-identical
/// result.
inline double cmi(const JointCounts& counts, double smoothing) {
  if (smoothing < 0.0) throw DegenerateDistribution("smoothing must be non-negative");
  const double total = static_cast<double>(counts.n) + 8.0 * smoothing;
  if (counts.n == 0 && smoothing == 0.0) {
    throw DegenerateDistribution("conditional mutual information of an empty table without smoothing");
  }
  double p[2][2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int y = 0; y < 2; ++y) p[a][b][y] = (static_cast<double>(counts.at(a, b, y)) + smoothing) / total;

  double result = 0.0;
  for (int y = 0; y < 2; ++y) {
    const double py = (p[0][0][y] + p[1][1][y]) + (p[0][1][y] + p[1][0][y]);
    const double pi[2] = {p[0][0][y] + p[0][1][y], p[1][0][y] + p[1][1][y]};
    const double pj[2] = {p[0][0][y] + p[1][0][y], p[0][1][y] + p[1][1][y]};
    double t[2][2];
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double joint = p[a][b][y];
        t[a][b] = joint > 0.0 ? joint * std::log((joint * py) / (pi[a] * pj[b])) : 0.0;
      }
    }
    result += (t[0][0] + t[1][1]) + (t[0][1] + t[1][0]);
  }
  return result;
}

// ---------------------------------------------------------------------------

/// Dense index of the unordered pair {i, j} over n features.
struct PairIndex {
  std::size_t n = 0;

  std::size_t size() const noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }
  std::size_t operator()(FeatureIndex i, FeatureIndex j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }

  friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// Class counts, per-feature counts and pairwise co-occurrence counts of a
/// training set. Enough to rebuild every JointCounts table and every CPT.
class SufficientStats {
 public:
  SufficientStats() = default;

  explicit SufficientStats(const Dataset& ds)
      : n_features_(ds.n_features()),
        n_instances_(ds.n_instances()),
        pairs_{ds.n_features()},
        ones_(ds.n_features() * kNumClasses, 0),
        both_ones_(pairs_.size() * kNumClasses, 0) {
    std::vector<FeatureIndex> on;
    on.reserve(n_features_);
    for (std::size_t r = 0; r < n_instances_; ++r) {
      const Label y = ds.labels[r];
      ++class_count_[y];
      on.clear();
      auto row = ds.row(r);
      for (FeatureIndex f = 0; f < n_features_; ++f)
        if (row[f]) on.push_back(f);
      for (std::size_t a = 0; a < on.size(); ++a) {
        ++ones_[on[a] * kNumClasses + y];
        for (std::size_t b = a + 1; b < on.size(); ++b) ++both_ones_[pairs_(on[a], on[b]) * kNumClasses + y];
      }
    }
  }

  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_instances() const noexcept { return n_instances_; }
  std::uint64_t class_count(Label y) const noexcept { return class_count_[y]; }

  /// #(x_f = v, y)
  std::uint64_t count(FeatureIndex f, Value v, Label y) const {
    const std::uint64_t ones = ones_.at(f * kNumClasses + y);
    return v ? ones : class_count_[y] - ones;
  }

  JointCounts joint(FeatureIndex i, FeatureIndex j) const {
    if (i >= n_features_ || j >= n_features_) throw IndexOutOfRange("feature pair outside statistics");
    if (i == j) throw IndexOutOfRange("joint counts need two distinct features");
    JointCounts c;
    c.n = n_instances_;
    for (Label y = 0; y < kNumClasses; ++y) {
      const std::uint64_t n11 = both_ones_[pairs_(i, j) * kNumClasses + y];
      const std::uint64_t ni = ones_[i * kNumClasses + y];
      const std::uint64_t nj = ones_[j * kNumClasses + y];
      c.at(1, 1, y) = n11;
      c.at(1, 0, y) = ni - n11;
      c.at(0, 1, y) = nj - n11;
      c.at(0, 0, y) = class_count_[y] - ni - nj + n11;
    }
    return c;
  }

 private:
  std::size_t n_features_ = 0;
  std::size_t n_instances_ = 0;
  PairIndex pairs_;
  std::array<std::uint64_t, kNumClasses> class_count_{};
  std::vector<std::uint64_t> ones_;
  std::vector<std::uint64_t> both_ones_;
};

// ---------------------------------------------------------------------------

enum class Direction : std::uint8_t { None, IToJ, JToI };
enum class EdgeStatus : std::uint8_t { Available, Unavailable };

/// Candidate edge between features i < j.
struct ScoredEdge {
  FeatureIndex i = 0;
  FeatureIndex j = 0;
  double score = 0.0;
  Direction predefined_direction = Direction::None;
  EdgeStatus status = EdgeStatus::Available;

  bool directed() const noexcept { return predefined_direction != Direction::None; }
  FeatureIndex dag_parent() const noexcept { return predefined_direction == Direction::IToJ ? i : j; }
  FeatureIndex dag_child() const noexcept { return predefined_direction == Direction::IToJ ? j : i; }

  friend bool operator==(const ScoredEdge&, const ScoredEdge&) = default;
};

inline Direction predefined_direction(const FeatureDag& dag, FeatureIndex i, FeatureIndex j) {
  if (dag.is_ancestor(i, j)) return Direction::IToJ;
  if (dag.is_ancestor(j, i)) return Direction::JToI;
  return Direction::None;
}

/// Every unordered pair, sorted by score descending, ties by (i, j).
inline std::vector<ScoredEdge> rank_edges(const SufficientStats& stats, const FeatureDag& dag, double smoothing) {
  const std::size_t n = stats.n_features();
  if (n < 2) throw EmptyFeatureSet("ranking edges needs at least 2 features");
  if (dag.n_features() != n) throw DimensionMismatch("hierarchy and data disagree on feature count");
  std::vector<ScoredEdge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (FeatureIndex i = 0; i < n; ++i) {
    for (FeatureIndex j = i + 1; j < n; ++j) {
      edges.push_back({i, j, cmi(stats.joint(i, j), smoothing), predefined_direction(dag, i, j),
                       EdgeStatus::Available});
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return edges;
}

inline std::vector<ScoredEdge> rank_edges(const Dataset& ds, const FeatureDag& dag, double smoothing) {
  return rank_edges(SufficientStats(ds), dag, smoothing);
}

}  // namespace hietan
