#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace hietan;
using namespace fx;

namespace {

std::set<FeatureIndex> as_set(const FeatureSet& s) {
  std::set<FeatureIndex> out;
  for (auto f = s.find_first(); f != FeatureSet::npos; f = s.find_next(f)) out.insert(f);
  return out;
}

}  // namespace

TEST(Hierarchy, CanonicalAncestorsOfD) {
  const auto dag = canonical_dag();
  EXPECT_EQ(as_set(dag.ancestors(D)), (std::set<FeatureIndex>{A, C, E, F}));
  EXPECT_TRUE(dag.descendants(D).none());
  EXPECT_EQ(as_set(dag.descendants(F)), (std::set<FeatureIndex>{B, C, D}));
}

TEST(Hierarchy, FlatDagHasEmptyClosure) {
  const auto dag = FeatureDag::flat(5);
  for (FeatureIndex v = 0; v < 5; ++v) {
    EXPECT_TRUE(dag.ancestors(v).none());
    EXPECT_TRUE(dag.descendants(v).none());
  }
}

TEST(Hierarchy, IsAncestorExamples) {
  const auto dag = canonical_dag();
  EXPECT_TRUE(dag.is_ancestor(E, A));
  EXPECT_FALSE(dag.is_ancestor(A, E));
  EXPECT_FALSE(dag.is_ancestor(B, D));
  for (FeatureIndex v = 0; v < 6; ++v) EXPECT_FALSE(dag.is_ancestor(v, v));
}

TEST(Hierarchy, RelatednessExamples) {
  const auto dag = canonical_dag();
  EXPECT_FALSE(dag.hierarchically_related(C, A));
  EXPECT_TRUE(dag.hierarchically_related(F, C));
  EXPECT_TRUE(dag.hierarchically_related(C, F));
  EXPECT_TRUE(dag.hierarchically_related(F, D));
  for (FeatureIndex v = 0; v < 6; ++v) EXPECT_FALSE(dag.hierarchically_related(v, v));
}

TEST(Hierarchy, BadIndicesThrow) {
  const auto dag = canonical_dag();
  EXPECT_THROW((void)dag.is_ancestor(0, 6), IndexOutOfRange);
  EXPECT_THROW((void)dag.hierarchically_related(9, 0), IndexOutOfRange);
  EXPECT_THROW((void)dag.ancestors(6), IndexOutOfRange);
  EXPECT_THROW(FeatureDag::build(3, {{0, 3}}), IndexOutOfRange);
}

TEST(Hierarchy, CycleRejected) {
  EXPECT_THROW(FeatureDag::build(3, {{0, 1}, {1, 2}, {2, 0}}), CyclicHierarchy);
  EXPECT_THROW(FeatureDag::build(2, {{1, 1}}), CyclicHierarchy);
}

TEST(Hierarchy, DuplicateEdgesCollapse) {
  const auto dag = FeatureDag::build(3, {{0, 1}, {0, 1}, {1, 2}});
  EXPECT_EQ(dag.edges().size(), 2u);
  EXPECT_TRUE(dag.is_ancestor(0, 2));
}

TEST(Hierarchy, SinksOfCanonical) {
  EXPECT_EQ(canonical_dag().sinks(), (std::vector<FeatureIndex>{B, D}));
}

// Property tests over random DAGs.

TEST(HierarchyProperty, ClosureMatchesBfsOracle) {
  for (Seed s = 0; s < 60; ++s) {
    const std::size_t n = 2 + s % 49;
    const auto dag = random_dag(n, s, 1 + s % 4, 0.4);
    for (FeatureIndex v = 0; v < n; ++v)
      ASSERT_EQ(as_set(dag.ancestors(v)), oracle::bfs_ancestors(n, dag.edges(), v)) << "seed " << s << " v " << v;
  }
}

TEST(HierarchyProperty, TwelveNodeClosureMatchesBfs) {
  const auto dag = random_dag(12, 77, 2, 0.5);
  for (FeatureIndex v = 0; v < 12; ++v) EXPECT_EQ(as_set(dag.ancestors(v)), oracle::bfs_ancestors(12, dag.edges(), v));
}

TEST(HierarchyProperty, AncestorsAndDescendantsAreTransposes) {
  for (Seed s = 0; s < 40; ++s) {
    const auto dag = random_dag(30, s);
    for (FeatureIndex a = 0; a < 30; ++a)
      for (FeatureIndex b = 0; b < 30; ++b) ASSERT_EQ(dag.ancestors(b).test(a), dag.descendants(a).test(b));
  }
}

TEST(HierarchyProperty, AncestorsTransitivelyClosed) {
  for (Seed s = 0; s < 40; ++s) {
    const auto dag = random_dag(25, s, 2, 0.5);
    for (FeatureIndex i = 0; i < 25; ++i) {
      const auto& anc = dag.ancestors(i);
      for (auto j = anc.find_first(); j != FeatureSet::npos; j = anc.find_next(j))
        ASSERT_TRUE(dag.ancestors(j).is_subset_of(anc));
    }
  }
}

TEST(HierarchyProperty, TransposedEdgesSwapClosures) {
  for (Seed s = 0; s < 40; ++s) {
    const auto dag = random_dag(20, s, 3, 0.3);
    std::vector<DagEdge> reversed;
    for (auto [p, c] : dag.edges()) reversed.emplace_back(c, p);
    const auto flipped = FeatureDag::build(20, reversed);
    for (FeatureIndex v = 0; v < 20; ++v) {
      ASSERT_EQ(flipped.ancestors(v), dag.descendants(v));
      ASSERT_EQ(flipped.descendants(v), dag.ancestors(v));
    }
  }
}

TEST(HierarchyProperty, InjectedBackEdgeAlwaysRejected) {
  for (Seed s = 0; s < 100; ++s) {
    const auto dag = random_dag(15, s, 2, 0.3);
    Rng rng(s);
    // pick an ancestor pair and add the reversed edge
    std::vector<DagEdge> related;
    for (FeatureIndex v = 0; v < 15; ++v) {
      const auto& anc = dag.ancestors(v);
      for (auto a = anc.find_first(); a != FeatureSet::npos; a = anc.find_next(a)) related.emplace_back(a, v);
    }
    ASSERT_FALSE(related.empty());
    const auto [a, v] = related[uniform_index(rng, related.size())];
    auto edges = dag.edges();
    edges.emplace_back(v, a);
    EXPECT_THROW(FeatureDag::build(15, edges), CyclicHierarchy) << "seed " << s;
  }
}

// DAG file format.

TEST(DagFile, ParsesTabsAndComments) {
  std::istringstream in("# comment\nF\tB\r\n\nF\tC\n# another\nE\tC\n");
  const auto edges = parse_dag_edges(in);
  ASSERT_EQ(edges.size(), 3u);
  EXPECT_EQ(edges[0], (NamedEdge{"F", "B"}));
  EXPECT_EQ(edges[2], (NamedEdge{"E", "C"}));
}

TEST(DagFile, MalformedLineReportsLineNumber) {
  std::istringstream in("F\tB\nF C\n");
  try {
    parse_dag_edges(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(DagFile, CanonicalFileResolves) {
  const auto dag = resolve_dag(kLetters, read_dag_file(data_path("canonical_dag.tsv")));
  EXPECT_EQ(dag.ancestors(D), canonical_dag().ancestors(D));
  EXPECT_EQ(dag.edges().size(), 6u);
}

TEST(DagFile, UnknownIdsDroppedWithWarning) {
  std::vector<std::string> warnings;
  const auto dag = resolve_dag({"a", "b"}, {{"a", "b"}, {"GO:1", "b"}, {"a", "GO:2"}}, &warnings);
  EXPECT_EQ(dag.edges().size(), 1u);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(DagFile, WriteThenParseRoundTrips) {
  const auto dag = random_dag(10, 3);
  std::vector<std::string> names;
  for (int i = 0; i < 10; ++i) names.push_back("t" + std::to_string(i));
  std::stringstream io;
  write_dag(io, dag, names);
  const auto again = resolve_dag(names, parse_dag_edges(io));
  for (FeatureIndex v = 0; v < 10; ++v) EXPECT_EQ(again.ancestors(v), dag.ancestors(v));
}

TEST(DagFile, AncestryThroughDroppedIdIsKept) {
  std::vector<std::string> warnings;
  const auto dag = resolve_dag({"a", "b", "c"}, {{"a", "GO:9"}, {"GO:9", "b"}, {"GO:9", "GO:8"}, {"GO:8", "c"}}, &warnings);
  EXPECT_TRUE(dag.is_ancestor(0, 1));
  EXPECT_TRUE(dag.is_ancestor(0, 2));
  EXPECT_FALSE(dag.hierarchically_related(1, 2));
  EXPECT_EQ(warnings.size(), 2u);
}
