// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "hietan_cli.hpp"
#include "invariants.hpp"
#include "oracles.hpp"

using namespace hietan;
using namespace fx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string describe(const DependencyTree& t) {
  std::string s;
  for (auto [p, c] : t.edges()) s += kLetters[p] + "->" + kLetters[c] + " ";
  return s;
}

bool is_chain(const DependencyTree& t, const std::vector<FeatureIndex>& order) {
  std::size_t edges = 0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (t.parent_of[order[k]] != order[k - 1]) return false;
    ++edges;
  }
  return !t.parent_of[order.front()] && t.edge_count() == edges;
}

Outcome c1_walkthrough_hie_mst() {
  const auto t0 = Clock::now();
  const auto dag = canonical_dag();
  const auto edges = rank_edges(load_dataset(data_path("walkthrough_ranked.csv")), dag, 1.0);
  const auto expected = walkthrough_edges(dag);
  for (std::size_t k = 0; k < 7; ++k)
    if (edges[k].i != expected[k].i || edges[k].j != expected[k].j) return {false, fmt("ranked edge %zu out of order", k + 1)};
  const auto tree = hie_mst(edges, dag, 6, 1);
  const double secs = seconds_since(t0);
  const bool ok = is_chain(tree, {F, C, D, B, E, A}) && secs < 1.0;
  return {ok, describe(tree) + fmt("(%.3f s)", secs)};
}

Outcome c2_walkthrough_lite() {
  const auto t0 = Clock::now();
  const auto dag = canonical_dag();
  const auto edges = rank_edges(load_dataset(data_path("walkthrough_ranked.csv")), dag, 1.0);
  const auto inst = load_dataset(data_path("lite_instance.csv"));
  const auto lite = hie_mst_lite(edges, dag, inst.row(0), 6, 1);
  const double secs = seconds_since(t0);
  const std::set<FeatureIndex> removed(lite.removed.begin(), lite.removed.end());
  const bool ok = is_chain(lite.tree, {F, B, E, A}) && removed == std::set<FeatureIndex>{C, D} && secs < 1.0;
  return {ok, describe(lite.tree) + fmt("removed %zu (%.3f s)", removed.size(), secs)};
}

Outcome c3_propagation_scenarios() {
  EdgeSets c(6);
  c.add_directed(F, C);
  c.add_undirected(C, A);
  const auto oc = propagate_dependencies(c);
  const bool case_c = oc.undirected().empty() && oc.parent(A) == C;

  TraceLog log;
  const auto dag = canonical_dag();
  const auto td = hie_mst({{C, F, 3.0, Direction::JToI}, {A, E, 2.0, Direction::JToI}, {A, C, 1.0}}, dag, 6, 1, &log);
  bool case_d = td.edge_count() == 2 && td.parent_of[C] == F && td.parent_of[A] == E;
  for (const auto& e : log)
    if (e.step == 3) case_d = case_d && e.decision == TraceDecision::RejectedSingleParent;

  EdgeSets e(6);
  e.add_directed(F, C);
  e.add_directed(E, A);
  e.add_undirected(F, E);
  const auto oe = propagate_dependencies(e);
  const bool case_e = oe.undirected().size() == 1 && !oe.has_parent(F) && !oe.has_parent(E);
  return {case_c && case_d && case_e, fmt("c=%d d=%d e=%d", case_c, case_d, case_e)};
}

Outcome c4_cmi_oracle() {
  double worst = 0.0;
  for (Seed s = 0; s < 200; ++s) {
    const auto ds = random_dataset(8, 50, 40000 + s, 0.2 + 0.05 * (s % 12));
    for (FeatureIndex i = 0; i < 8; ++i)
      for (FeatureIndex j = i + 1; j < 8; ++j)
        for (double sm : {1.0, 0.0})
          worst = std::max(worst, std::fabs(cmi(joint_counts(ds, i, j), sm) - oracle::direct_cmi(ds, i, j, sm)));
  }
  return {worst <= 1e-10, fmt("max |diff| %.2e over 200 datasets", worst)};
}

Outcome c5_mst_optimality() {
  int good = 0;
  for (Seed s = 0; s < 100; ++s) {
    const std::size_t n = 2 + s % 6;
    const auto edges = random_scored_edges(FeatureDag::flat(n), 70000 + s);
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (const auto& e : edges) w[e.i][e.j] = w[e.j][e.i] = e.score;
    const auto tree = learn_tan_structure(edges, n, s);
    good += std::fabs(tree_total_score(tree, edges) - oracle::brute_force_max_spanning_tree(n, w)) < 1e-12;
  }
  return {good == 100, fmt("%d/100", good)};
}

Outcome c6_structural_invariants() {
  std::size_t violations = 0, trees = 0;
  std::string first;
  for (Seed s = 0; s < 1000; ++s) {
    const std::size_t n = 2 + s % 30;
    const auto dag = random_dag(n, derive_seed(s, {0}), 1 + s % 4, 0.1 * (s % 5));
    const auto ds = generate_synthetic(dag, 20 + s % 40, 0.1 + 0.05 * (s % 7), 0.1, derive_seed(s, {1}));
    const auto edges = rank_edges(ds, dag, 1.0);
    auto v = inv::tree_violations(hie_mst(edges, dag, n, s), dag);
    ++trees;
    for (std::size_t i = 0; i < std::min<std::size_t>(ds.n_instances(), 5); ++i) {
      const auto row = ds.row(i);
      const std::vector<Value> x(row.begin(), row.end());
      auto lv = inv::lite_violations(hie_mst_lite(edges, dag, x, n, instance_seed(s, 0, i)), dag, x);
      v.insert(v.end(), lv.begin(), lv.end());
      ++trees;
    }
    if (!v.empty() && first.empty()) first = fmt("seed %llu: ", (unsigned long long)s) + v.front();
    violations += v.size();
  }
  return {violations == 0, fmt("%zu violations in %zu trees", violations, trees) + (first.empty() ? "" : "; " + first)};
}

Outcome c7_reduction_equivalence() {
  int same = 0;
  for (Seed s = 0; s < 100; ++s) {
    const std::size_t n = 2 + s % 20;
    const auto dag = FeatureDag::flat(n);
    const auto ds = random_dataset(n, 30, 90000 + s);
    const auto edges = rank_edges(ds, dag, 1.0);
    const auto lite = hie_mst_lite(edges, dag, ds.row(s % 30), n, s);
    same += lite.tree == hie_mst(edges, dag, n, s) && lite.removed.empty();
  }
  return {same == 100, fmt("%d/100", same)};
}

Outcome c8_naive_bayes() {
  const auto train = random_dataset(10, 80, 123, 0.35);
  const auto test = random_dataset(10, 100, 456, 0.35);
  const auto clf = fit(train, DependencyTree(10), 1.0);
  int agree = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto row = test.row(i);
    const std::vector<Value> x(row.begin(), row.end());
    const auto got = predict(clf, x);
    const auto want = oracle::naive_bayes(train, x, 1.0);
    agree += got.label == want.label;
    for (int y = 0; y < 2; ++y) worst = std::max(worst, std::fabs(got.log_posterior[y] - want.log_post[y]));
  }
  return {agree == 100 && worst <= 1e-9, fmt("argmax %d/100, max |diff| %.2e", agree, worst)};
}

Outcome c9_holm_thresholds() {
  std::vector<std::vector<double>> g;
  Rng rng(5);
  for (int d = 0; d < 28; ++d) {
    std::vector<double> row(6);
    for (std::size_t m = 0; m < 6; ++m) row[m] = static_cast<double>(uniform_index(rng, 100)) / 100.0 - 0.02 * m;
    g.push_back(row);
  }
  const auto h = friedman_holm(average_ranks(g), 0.05);
  const char* expected[] = {"5.00E-02", "2.50E-02", "1.67E-02", "1.25E-02", "1.00E-02"};
  std::string got;
  bool ok = h.comparisons.size() == 5;
  for (std::size_t i = 0; ok && i < 5; ++i) {
    const std::string s = fmt("%.2E", h.comparisons[4 - i].adjusted_alpha);
    ok = s == expected[i];
    got += s + " ";
  }
  return {ok, got};
}

Outcome c10_end_to_end() {
  // Rule on two top-level features, sparse annotations, tree-shaped
  // hierarchy. Datasets whose minority class is under 10% are redrawn.
  constexpr Seed kBase = 7;
  constexpr std::size_t kFeatures = 60, kInstances = 500, kRoots = 3;
  const auto t0 = Clock::now();
  int ordered = 0, redraws = 0;
  double sum[3] = {0, 0, 0};
  for (std::uint64_t k = 0; k < 20; ++k) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      const Seed s = derive_seed(kBase, {k, attempt});
      const auto dag = random_dag(kFeatures, derive_seed(s, {0}), kRoots, 0.0);
      const auto syn = generate_synthetic_with_rule(dag, kInstances, 0.03, 0.05, derive_seed(s, {1}), RuleKind::Xor,
                                                    RulePlacement::TopLevel);
      const auto cc = syn.data.class_counts();
      if (cc[0] < kInstances / 10 || cc[1] < kInstances / 10) {
        ++redraws;
        continue;
      }
      const auto r = run_cv_experiment(syn.data, dag, {Method::Tan, Method::HieTan, Method::HieTanLite}, {10, s, 1.0, 1});
      const double tan = r.methods[0].mean_gmean(), hie = r.methods[1].mean_gmean(), lite = r.methods[2].mean_gmean();
      sum[0] += tan;
      sum[1] += hie;
      sum[2] += lite;
      ordered += lite >= hie && hie >= tan;
      break;
    }
  }
  const double secs = seconds_since(t0);
  return {ordered >= 14 && secs < 300.0,
          fmt("%d/20 ordered (need 14); mean GMean tan %.3f hie-tan %.3f hie-tan-lite %.3f; %d redraws; %.1f s", ordered,
              sum[0] / 20, sum[1] / 20, sum[2] / 20, redraws, secs)};
}

Outcome c11_determinism() {
  const fs::path dir = fs::temp_directory_path() / "hietan_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "hietan");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  const std::string data = (dir / "s.csv").string(), dag = (dir / "s.tsv").string();
  if (run({"synth", "--features", "40", "--instances", "300", "--seed", "11", "--out-data", data, "--out-dag", dag}) != 0)
    return {false, "synth failed"};
  std::string text[2];
  for (int k = 0; k < 2; ++k) {
    const std::string out = (dir / ("r" + std::to_string(k) + ".json")).string();
    if (run({"cv", "--data", data, "--dag", dag, "--seed", "3", "--output", out}) != 0) return {false, "cv failed"};
    std::ifstream in(out, std::ios::binary);
    text[k] = {std::istreambuf_iterator<char>(in), {}};
    text[k] = std::regex_replace(text[k], std::regex(R"("timestamp": "[^"]*")"), R"("timestamp": "")");
  }
  fs::remove_all(dir);
  return {text[0] == text[1] && !text[0].empty(), fmt("%zu bytes each", text[0].size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"golden walkthrough, hierarchy-constrained tree", c1_walkthrough_hie_mst},
      {"golden walkthrough, instance-specific tree", c2_walkthrough_lite},
      {"dependency propagation scenarios", c3_propagation_scenarios},
      {"CMI against direct summation", c4_cmi_oracle},
      {"spanning tree optimality", c5_mst_optimality},
      {"structural invariants", c6_structural_invariants},
      {"flat-hierarchy reduction", c7_reduction_equivalence},
      {"naive Bayes equivalence", c8_naive_bayes},
      {"Holm thresholds", c9_holm_thresholds},
      {"end-to-end ordering on synthetic data", c10_end_to_end},
      {"cv determinism", c11_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu  %-46s %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
