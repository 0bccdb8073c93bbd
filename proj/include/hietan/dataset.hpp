#pragma once

// Binary-feature / binary-class instance data, the CSV format, the
// hierarchy propagation rule and stratified fold assignment.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hietan/errors.hpp"
#include "hietan/hierarchy.hpp"
#include "hietan/rng.hpp"

namespace hietan {

using Value = std::uint8_t;
using Label = std::uint8_t;
inline constexpr std::size_t kNumClasses = 2;

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names{"0", "1"};
  std::vector<Value> values;  // instance-major, n_instances * n_features
  std::vector<Label> labels;

  std::size_t n_features() const noexcept { return feature_names.size(); }
  std::size_t n_instances() const noexcept { return labels.size(); }

  std::span<const Value> row(std::size_t i) const {
    return {values.data() + i * n_features(), n_features()};
  }
  std::span<Value> row(std::size_t i) { return {values.data() + i * n_features(), n_features()}; }
  Value value(std::size_t i, FeatureIndex f) const { return values[i * n_features() + f]; }

  void add_instance(std::span<const Value> features, Label label) {
    if (features.size() != n_features()) throw DimensionMismatch("instance width differs from feature count");
    values.insert(values.end(), features.begin(), features.end());
    labels.push_back(label);
  }

  /// Subset of instances, in the order given.
  Dataset select(std::span<const std::size_t> instances) const {
    Dataset out;
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.values.reserve(instances.size() * n_features());
    out.labels.reserve(instances.size());
    for (std::size_t i : instances) out.add_instance(row(i), labels.at(i));
    return out;
  }

  std::array<std::size_t, kNumClasses> class_counts() const {
    std::array<std::size_t, kNumClasses> c{};
    for (Label y : labels) ++c[y];
    return c;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// CSV: header `f1,...,fn,class`, then rows of 0/1 tokens. LF or CRLF.

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline Dataset parse_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Dataset ds;

  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split_commas(line);
    if (cols.back() != "class") throw MissingClassColumn("last header column must be 'class'", line_no);
    cols.pop_back();
    std::unordered_set<std::string> seen;
    for (auto& name : cols) {
      if (name.empty()) throw ParseError("empty feature name in header", line_no);
      if (!seen.insert(name).second) throw ParseError("duplicate feature name '" + name + "'", line_no);
    }
    ds.feature_names = std::move(cols);
    have_header = true;
  }
  if (!have_header) throw ParseError("missing header row", line_no + 1);

  const std::size_t width = ds.n_features() + 1;
  std::vector<Value> row(ds.n_features());
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split_commas(line);
    if (cols.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, got " + std::to_string(cols.size()),
                       line_no);
    }
    for (std::size_t c = 0; c < width; ++c) {
      const std::string& tok = cols[c];
      if (tok != "0" && tok != "1") {
        throw NonBinaryValue("non-binary value '" + tok + "' in column " + std::to_string(c + 1), line_no);
      }
      if (c < ds.n_features()) row[c] = tok == "1";
    }
    ds.add_instance(row, cols.back() == "1");
  }
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

inline void write_dataset(std::ostream& out, const Dataset& ds) {
  for (const auto& name : ds.feature_names) out << name << ',';
  out << "class\n";
  for (std::size_t i = 0; i < ds.n_instances(); ++i) {
    for (Value v : ds.row(i)) out << static_cast<char>('0' + v) << ',';
    out << static_cast<char>('0' + ds.labels[i]) << '\n';
  }
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset '" + path + "'");
  write_dataset(out, ds);
}

// ---------------------------------------------------------------------------
// Propagation rule: a 1-valued feature forces all its ancestors to 1.

struct PropagationViolation {
  std::size_t instance;
  FeatureIndex feature;
  FeatureIndex ancestor;
  friend bool operator==(const PropagationViolation&, const PropagationViolation&) = default;
};

inline void require_same_width(const Dataset& ds, const FeatureDag& dag) {
  if (ds.n_features() != dag.n_features()) {
    throw DimensionMismatch("dataset has " + std::to_string(ds.n_features()) + " features, hierarchy has " +
                            std::to_string(dag.n_features()));
  }
}

inline std::vector<PropagationViolation> validate_propagation(const Dataset& ds, const FeatureDag& dag) {
  require_same_width(ds, dag);
  std::vector<PropagationViolation> out;
  for (std::size_t i = 0; i < ds.n_instances(); ++i) {
    auto row = ds.row(i);
    for (FeatureIndex f = 0; f < ds.n_features(); ++f) {
      if (!row[f]) continue;
      const auto& anc = dag.ancestors(f);
      for (auto a = anc.find_first(); a != FeatureSet::npos; a = anc.find_next(a))
        if (!row[a]) out.push_back({i, f, a});
    }
  }
  return out;
}

inline void repair_row(std::span<Value> row, const FeatureDag& dag) {
  // Ancestor sets are closed, so one pass suffices.
  for (FeatureIndex f = 0; f < row.size(); ++f) {
    if (!row[f]) continue;
    const auto& anc = dag.ancestors(f);
    for (auto a = anc.find_first(); a != FeatureSet::npos; a = anc.find_next(a)) row[a] = 1;
  }
}

inline Dataset repair_propagation(Dataset ds, const FeatureDag& dag) {
  require_same_width(ds, dag);
  for (std::size_t i = 0; i < ds.n_instances(); ++i) repair_row(ds.row(i), dag);
  return ds;
}

// ---------------------------------------------------------------------------
// Stratified k-fold assignment: per-class seeded shuffle, then round-robin.
// The round-robin cursor carries over between classes so fold sizes stay
// balanced overall as well as per class.

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != fold) out.push_back(i);
    return out;
  }
  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

inline FoldAssignment stratified_folds(const Dataset& ds, std::size_t k, Seed seed) {
  if (k < 2) throw TooFewInstances("need at least 2 folds, got " + std::to_string(k));
  if (ds.n_instances() < k) {
    throw TooFewInstances(std::to_string(ds.n_instances()) + " instances cannot fill " + std::to_string(k) +
                          " folds");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < ds.n_instances(); ++i) by_class[ds.labels[i]].push_back(i);
  for (std::size_t y = 0; y < kNumClasses; ++y) {
    if (by_class[y].empty()) throw TooFewInstances("class " + ds.class_names[y] + " has no instances");
  }

  Rng rng(seed);
  FoldAssignment out;
  out.k = k;
  out.fold_of.assign(ds.n_instances(), 0);
  std::size_t cursor = 0;
  for (auto& members : by_class) {
    shuffle(std::span<std::size_t>(members), rng);
    for (std::size_t idx : members) {
      out.fold_of[idx] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic hierarchy-consistent data with a planted two-feature class rule.

enum class RuleKind { And, Or, Xor, AndNot };

// Anywhere: any two distinct features. TopLevel: two distinct features with
// no parents, so the class follows membership in broad categories.
enum class RulePlacement { Anywhere, TopLevel };

/// label = rule(x[a], x[b]) before noise.
struct PlantedRule {
  FeatureIndex a = 0;
  FeatureIndex b = 0;
  RuleKind kind = RuleKind::Xor;

  Label apply(std::span<const Value> row) const {
    const bool xa = row[a], xb = row[b];
    switch (kind) {
      case RuleKind::And: return xa && xb;
      case RuleKind::Or: return xa || xb;
      case RuleKind::Xor: return xa != xb;
      case RuleKind::AndNot: return xa && !xb;
    }
    return 0;
  }
};

struct SyntheticData {
  Dataset data;
  PlantedRule rule;
};

inline SyntheticData generate_synthetic_with_rule(const FeatureDag& dag, std::size_t n_instances,
                                                  double leaf_density, double class_noise, Seed seed,
                                                  RuleKind kind = RuleKind::Xor,
                                                  RulePlacement placement = RulePlacement::Anywhere) {
  if (!(leaf_density >= 0.0 && leaf_density <= 1.0) || !(class_noise >= 0.0 && class_noise <= 1.0)) {
    throw Error("synthetic data probabilities must lie in [0, 1]");
  }
  const std::size_t n = dag.n_features();
  if (n < 2) throw EmptyFeatureSet("synthetic data needs at least 2 features");
  Rng rng(seed);

  SyntheticData out;
  out.rule.kind = kind;
  std::vector<FeatureIndex> pool;
  for (FeatureIndex f = 0; f < n; ++f)
    if (placement == RulePlacement::Anywhere || dag.parents(f).empty()) pool.push_back(f);
  if (pool.size() < 2) throw EmptyFeatureSet("rule placement needs at least 2 candidate features");
  out.rule.a = pool[uniform_index(rng, pool.size())];
  do {
    out.rule.b = pool[uniform_index(rng, pool.size())];
  } while (out.rule.b == out.rule.a);

  Dataset& ds = out.data;
  ds.feature_names.reserve(n);
  for (FeatureIndex f = 0; f < n; ++f) {
    std::ostringstream name;
    name << 'f';
    name.width(3);
    name.fill('0');
    name << f;
    ds.feature_names.push_back(name.str());
  }
  const auto sinks = dag.sinks();
  std::vector<Value> row(n);
  for (std::size_t i = 0; i < n_instances; ++i) {
    std::fill(row.begin(), row.end(), Value{0});
    for (FeatureIndex s : sinks) row[s] = bernoulli(rng, leaf_density);
    repair_row(row, dag);
    Label y = out.rule.apply(row);
    if (bernoulli(rng, class_noise)) y = !y;
    ds.add_instance(row, y);
  }
  return out;
}

inline Dataset generate_synthetic(const FeatureDag& dag, std::size_t n_instances, double leaf_density,
                                  double class_noise, Seed seed) {
  return generate_synthetic_with_rule(dag, n_instances, leaf_density, class_noise, seed).data;
}

}  // namespace hietan
