#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.
//
// Exit codes: 0 success, 1 operational or usage error, 2 validation findings.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hietan/hietan.hpp"

namespace hietan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFindings = 2;

struct RunConfig {
  std::vector<std::string> dataset_paths;
  std::vector<std::string> dag_paths;
  std::string method = "all";
  std::size_t folds = 10;
  Seed seed = 1;
  double smoothing = 1.0;
  double alpha = 0.05;
  bool one_sided = false;
  bool repair = false;
  std::string trace_path;
  std::string output_path;
  std::size_t jobs = 1;
  std::size_t top = 0;
  std::string test_path;
  std::string model_path;
  std::string train_path;
};

struct SynthConfig {
  std::size_t features = 40;
  std::size_t instances = 300;
  double leaf_density = 0.15;
  double class_noise = 0.05;
  Seed seed = 1;
  std::string rule = "xor";
  std::string rule_on = "anywhere";
  std::size_t roots = 3;
  double second_parent = 0.3;
  std::string out_data;
  std::string out_dag;
};

namespace detail {

struct Bound {
  Dataset data;
  FeatureDag dag;
};

inline Bound load_bound(const std::string& data_path, const std::string& dag_path, std::ostream& err) {
  Bound b;
  b.data = load_dataset(data_path);
  std::vector<std::string> warnings;
  b.dag = resolve_dag(b.data.feature_names, read_dag_file(dag_path), &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return b;
}

/// Repairs on request; otherwise reports violations and returns false.
inline bool ensure_consistent(Bound& b, bool repair, const std::string& path, std::ostream& err) {
  if (repair) {
    b.data = repair_propagation(std::move(b.data), b.dag);
    return true;
  }
  const auto violations = validate_propagation(b.data, b.dag);
  if (violations.empty()) return true;
  err << path << ": " << violations.size()
      << " propagation violation(s); run `validate` for details or pass --repair\n";
  return false;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json config_echo(const RunConfig& c, const std::string& command) {
  return {{"command", command},
          {"datasets", c.dataset_paths},
          {"dags", c.dag_paths},
          {"method", c.method},
          {"folds", c.folds},
          {"seed", c.seed},
          {"smoothing", c.smoothing},
          {"alpha", c.alpha},
          {"sides", c.one_sided ? "one-sided" : "two-sided"},
          {"repair", c.repair},
          {"fold_gmean", "per-fold confusion counts, averaged over folds"}};
}

inline std::vector<Method> methods_from(const std::string& name) {
  if (name == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  auto m = parse_method(name);
  if (!m) throw Error("unknown method '" + name + "' (expected tan, hie-tan, hie-tan-lite or all)");
  return {*m};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

inline std::string format_g(double v, int precision = 4) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto b = detail::load_bound(c.dataset_paths.at(0), c.dag_paths.at(0), err);
  const auto violations = validate_propagation(b.data, b.dag);
  if (c.repair) {
    const std::string path = c.output_path.empty() ? c.dataset_paths[0] + ".repaired.csv" : c.output_path;
    save_dataset(path, repair_propagation(std::move(b.data), b.dag));
    out << "repaired " << violations.size() << " violation(s); wrote " << path << '\n';
    return kExitOk;
  }
  if (violations.empty()) {
    out << "ok: " << b.data.n_instances() << " instances consistent with the hierarchy\n";
    return kExitOk;
  }
  for (const auto& v : violations) {
    out << "violation instance=" << v.instance + 1 << " feature=" << b.data.feature_names[v.feature]
        << " ancestor=" << b.data.feature_names[v.ancestor] << '\n';
  }
  return kExitFindings;
}

inline int cmd_cv(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto methods = detail::methods_from(c.method);
  if (c.dag_paths.size() != 1 && c.dag_paths.size() != c.dataset_paths.size()) {
    throw Error("pass one --dag for all datasets or one per dataset");
  }
  CvConfig cfg{c.folds, c.seed, c.smoothing, c.jobs};

  std::vector<std::string> method_names;
  for (Method m : methods) method_names.emplace_back(method_name(m));
  json datasets = json::array();
  std::vector<std::vector<double>> gmeans;
  bool complete = true;

  std::size_t width = 8;
  for (const auto& p : c.dataset_paths) width = std::max(width, p.size() + 2);
  out << std::left << std::setw(static_cast<int>(width)) << "dataset";
  for (const auto& m : method_names) out << std::setw(14) << m;
  out << '\n';
  for (std::size_t d = 0; d < c.dataset_paths.size(); ++d) {
    const std::string& path = c.dataset_paths[d];
    auto b = detail::load_bound(path, c.dag_paths.size() == 1 ? c.dag_paths[0] : c.dag_paths[d], err);
    if (!detail::ensure_consistent(b, c.repair, path, err)) return kExitFindings;
    const CvResult r = run_cv_experiment(b.data, b.dag, methods, cfg);

    std::vector<double> row;
    out << std::setw(static_cast<int>(width)) << path;
    for (const auto& mr : r.methods) {
      row.push_back(mr.mean_gmean());
      complete = complete && !std::isnan(row.back());
      out << std::setw(14) << detail::format_g(row.back());
    }
    out << '\n';
    gmeans.push_back(std::move(row));
    datasets.push_back({{"path", path},
                        {"n_instances", b.data.n_instances()},
                        {"n_features", b.data.n_features()},
                        {"hierarchy_edges", b.dag.edges().size()},
                        {"result", cv_to_json(r, b.data.feature_names)}});
  }

  json doc = {{"tool", "hietan"},
              {"library_version", kVersion},
              {"timestamp", detail::utc_timestamp()},
              {"config", detail::config_echo(c, "cv")},
              {"datasets", std::move(datasets)},
              {"rank_table", nullptr},
              {"holm", nullptr}};
  if (complete && methods.size() >= 2) {
    const RankTable table = average_ranks(gmeans);
    doc["rank_table"] = rank_table_to_json(table, method_names, c.dataset_paths);
    if (c.dataset_paths.size() >= 2) {
      try {
        const Sidedness sides = c.one_sided ? Sidedness::OneSided : Sidedness::TwoSided;
        doc["holm"] = holm_to_json(friedman_holm(table, c.alpha, sides), method_names, c.alpha, sides);
      } catch (const DegenerateRanks& e) {
        err << "note: " << e.what() << "; no post-hoc table\n";
      }
    }
    out << "average rank:";
    for (std::size_t m = 0; m < method_names.size(); ++m)
      out << ' ' << method_names[m] << '=' << detail::format_g(table.average_rank[m], 2);
    out << '\n';
  }
  if (!c.output_path.empty()) {
    detail::write_text(c.output_path, doc.dump(2) + "\n");
    out << "wrote " << c.output_path << '\n';
  }
  return kExitOk;
}

inline int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto method = parse_method(c.method);
  if (!method || *method == Method::HieTanLite) {
    throw WrongMethod("train supports tan and hie-tan; hie-tan-lite learns per instance (use predict --train)");
  }
  auto b = detail::load_bound(c.dataset_paths.at(0), c.dag_paths.at(0), err);
  if (!detail::ensure_consistent(b, c.repair, c.dataset_paths[0], err)) return kExitFindings;
  const SufficientStats stats(b.data);
  const auto edges = rank_edges(stats, b.dag, c.smoothing);
  TraceLog trace;
  TraceLog* trace_ptr = c.trace_path.empty() ? nullptr : &trace;
  const DependencyTree tree = *method == Method::Tan ? learn_tan_structure(edges, b.data.n_features(), c.seed)
                                                     : hie_mst(edges, b.dag, b.data.n_features(), c.seed, trace_ptr);
  FittedClassifier clf = fit(b.data, tree, c.smoothing);
  if (!c.trace_path.empty()) {
    std::string lines;
    for (const auto& e : trace) lines += to_json_line(e, &b.data.feature_names) + "\n";
    detail::write_text(c.trace_path, lines);
  }
  json doc = model_to_json(clf);
  doc["method"] = c.method;
  doc["seed"] = c.seed;
  const std::string path = c.output_path.empty() ? "model.json" : c.output_path;
  detail::write_text(path, doc.dump(2) + "\n");
  out << "trained " << c.method << " on " << b.data.n_instances() << " instances, " << tree.edge_count()
      << " tree edges; wrote " << path << '\n';
  return kExitOk;
}

inline int cmd_predict(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Dataset test = load_dataset(c.dataset_paths.at(0));
  std::vector<Prediction> predictions;
  TraceLog trace;
  if (!c.model_path.empty()) {
    std::ifstream in(c.model_path);
    if (!in) throw Error("cannot open model '" + c.model_path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(std::string("cannot parse model: ") + e.what());
    }
    const FittedClassifier clf = model_from_json(doc);
    if (!clf.feature_names.empty() && clf.feature_names != test.feature_names) {
      throw DimensionMismatch("test features differ from the model's features");
    }
    for (std::size_t i = 0; i < test.n_instances(); ++i) predictions.push_back(predict(clf, test.row(i)));
  } else {
    if (c.method != "hie-tan-lite" || c.train_path.empty() || c.dag_paths.empty()) {
      throw Error("predict needs --model, or --method hie-tan-lite with --train and --dag");
    }
    auto b = detail::load_bound(c.train_path, c.dag_paths[0], err);
    if (!detail::ensure_consistent(b, c.repair, c.train_path, err)) return kExitFindings;
    if (b.data.feature_names != test.feature_names) throw DimensionMismatch("test features differ from training features");
    const SufficientStats stats(b.data);
    const auto edges = rank_edges(stats, b.dag, c.smoothing);
    for (std::size_t i = 0; i < test.n_instances(); ++i) {
      const LiteTree t = hie_mst_lite(edges, b.dag, test.row(i), test.n_features(), instance_seed(c.seed, 0, i),
                                      c.trace_path.empty() ? nullptr : &trace);
      predictions.push_back(predict(fit(stats, t.tree, t.active, c.smoothing), test.row(i)));
    }
    if (!c.trace_path.empty()) {
      std::string lines;
      for (const auto& e : trace) lines += to_json_line(e, &test.feature_names) + "\n";
      detail::write_text(c.trace_path, lines);
    }
  }

  std::ostringstream table;
  table << "instance,predicted,log_posterior_0,log_posterior_1,actual\n";
  ConfusionCounts counts;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", predictions[i].log_posterior[0], predictions[i].log_posterior[1]);
    table << i + 1 << ',' << int(predictions[i].label) << ',' << buf << ',' << int(test.labels[i]) << '\n';
    counts.add(test.labels[i], predictions[i].label);
  }
  if (c.output_path.empty()) {
    out << table.str();
  } else {
    detail::write_text(c.output_path, table.str());
    out << "wrote " << predictions.size() << " predictions to " << c.output_path << '\n';
    if (counts.tp + counts.fn > 0 && counts.tn + counts.fp > 0) out << "gmean " << detail::format_g(gmean(counts)) << '\n';
  }
  return kExitOk;
}

inline int cmd_features(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.method != "hie-tan-lite") throw WrongMethod("feature usage is only defined for hie-tan-lite");
  auto b = detail::load_bound(c.dataset_paths.at(0), c.dag_paths.at(0), err);
  if (!detail::ensure_consistent(b, c.repair, c.dataset_paths[0], err)) return kExitFindings;

  FeatureUsageReport usage;
  if (!c.test_path.empty()) {
    const Dataset test = load_dataset(c.test_path);
    if (test.feature_names != b.data.feature_names) throw DimensionMismatch("test features differ from training features");
    usage = feature_usage(b.data, test, b.dag, c.seed, c.smoothing);
  } else {
    usage = *run_cv_experiment(b.data, b.dag, {Method::HieTanLite}, {c.folds, c.seed, c.smoothing, c.jobs}).usage;
  }

  auto print = [&](const char* title, const std::vector<std::size_t>& counts) {
    out << title << '\n';
    std::size_t rank = 0;
    for (const auto& [f, n] : FeatureUsageReport::ranked(counts, c.top))
      out << "  " << std::setw(4) << ++rank << "  " << std::left << std::setw(24) << b.data.feature_names[f]
          << std::right << n << '\n';
  };
  out << "test instances: " << usage.n_test_instances << '\n';
  print("Freq. of Selection", usage.freq_of_selection);
  print("Freq. in Edges", usage.freq_in_edges);

  if (!c.output_path.empty()) {
    json doc = {{"tool", "hietan"},
                {"library_version", kVersion},
                {"timestamp", detail::utc_timestamp()},
                {"config", detail::config_echo(c, "features")},
                {"usage", usage_to_json(usage, b.data.feature_names, c.top)}};
    detail::write_text(c.output_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

inline int cmd_synth(const SynthConfig& s, std::ostream& out) {
  RuleKind kind;
  if (s.rule == "xor") kind = RuleKind::Xor;
  else if (s.rule == "and") kind = RuleKind::And;
  else if (s.rule == "or") kind = RuleKind::Or;
  else if (s.rule == "and-not") kind = RuleKind::AndNot;
  else throw Error("unknown rule '" + s.rule + "'");
  RulePlacement placement;
  if (s.rule_on == "anywhere") placement = RulePlacement::Anywhere;
  else if (s.rule_on == "top") placement = RulePlacement::TopLevel;
  else throw Error("unknown rule placement '" + s.rule_on + "'");

  const FeatureDag dag = random_dag(s.features, derive_seed(s.seed, {0}), s.roots, s.second_parent);
  const SyntheticData syn = generate_synthetic_with_rule(dag, s.instances, s.leaf_density, s.class_noise,
                                                         derive_seed(s.seed, {1}), kind, placement);
  save_dataset(s.out_data, syn.data);
  std::ofstream dag_out(s.out_dag, std::ios::binary);
  if (!dag_out) throw Error("cannot write '" + s.out_dag + "'");
  dag_out << "# synthetic hierarchy, seed " << s.seed << '\n';
  write_dag(dag_out, dag, syn.data.feature_names);
  const auto counts = syn.data.class_counts();
  out << "wrote " << s.out_data << " (" << syn.data.n_instances() << " instances, " << counts[0] << '/' << counts[1]
      << " class split) and " << s.out_dag << " (" << dag.edges().size() << " edges); planted rule " << s.rule
      << '(' << syn.data.feature_names[syn.rule.a] << ", " << syn.data.feature_names[syn.rule.b] << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchy-constrained tree-augmented naive Bayes toolkit", "hietan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  RunConfig c;
  SynthConfig s;

  auto add_common = [&](CLI::App* sub, bool many_datasets) {
    if (many_datasets) {
      sub->add_option("--data", c.dataset_paths, "dataset CSV (repeatable)")->required()->check(CLI::ExistingFile);
      sub->add_option("--dag", c.dag_paths, "hierarchy TSV (once, or once per dataset)")
          ->required()
          ->check(CLI::ExistingFile);
    } else {
      sub->add_option("--data", c.dataset_paths, "dataset CSV")->required()->expected(1)->check(CLI::ExistingFile);
      sub->add_option("--dag", c.dag_paths, "hierarchy TSV")->required()->expected(1)->check(CLI::ExistingFile);
    }
    sub->add_flag("--repair", c.repair, "propagate 1-values to ancestors before use");
  };
  auto add_learning = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--smoothing", c.smoothing, "additive smoothing")->capture_default_str()->check(CLI::NonNegativeNumber);
  };

  auto* validate = app.add_subcommand("validate", "check the propagation rule against the hierarchy");
  add_common(validate, false);
  validate->add_option("--output", c.output_path, "repaired CSV path (with --repair)");

  auto* cv = app.add_subcommand("cv", "stratified cross-validation of one or all methods");
  add_common(cv, true);
  add_learning(cv);
  cv->add_option("--method", c.method, "tan, hie-tan, hie-tan-lite or all")->capture_default_str();
  cv->add_option("--folds", c.folds, "number of folds")->capture_default_str()->check(CLI::Range(2, 1000000));
  cv->add_option("--jobs", c.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cv->add_option("--alpha", c.alpha, "significance level for Holm")->capture_default_str();
  cv->add_flag("--one-sided", c.one_sided, "one-sided p-values against the control");
  cv->add_option("--output", c.output_path, "results JSON path");

  auto* train = app.add_subcommand("train", "fit a tan or hie-tan model on a whole dataset");
  add_common(train, false);
  add_learning(train);
  train->add_option("--method", c.method, "tan or hie-tan")->required();
  train->add_option("--output", c.output_path, "model JSON path")->capture_default_str();
  train->add_option("--trace", c.trace_path, "JSON-lines trace of structure decisions (hie-tan)");

  auto* predict_cmd = app.add_subcommand("predict", "classify a dataset");
  predict_cmd->add_option("--data", c.dataset_paths, "instances to classify")->required()->expected(1)->check(CLI::ExistingFile);
  predict_cmd->add_option("--model", c.model_path, "model JSON from train")->check(CLI::ExistingFile);
  predict_cmd->add_option("--method", c.method, "hie-tan-lite when no model is given");
  predict_cmd->add_option("--train", c.train_path, "training CSV (hie-tan-lite)")->check(CLI::ExistingFile);
  predict_cmd->add_option("--dag", c.dag_paths, "hierarchy TSV (hie-tan-lite)")->expected(1)->check(CLI::ExistingFile);
  predict_cmd->add_flag("--repair", c.repair, "repair training data before use");
  add_learning(predict_cmd);
  predict_cmd->add_option("--trace", c.trace_path, "JSON-lines trace (hie-tan-lite)");
  predict_cmd->add_option("--output", c.output_path, "predictions CSV path");

  auto* features = app.add_subcommand("features", "feature usage of the instance-specific trees");
  add_common(features, false);
  add_learning(features);
  features->add_option("--method", c.method, "must be hie-tan-lite");
  features->add_option("--test", c.test_path, "separate test CSV; otherwise cross-validate")->check(CLI::ExistingFile);
  features->add_option("--top", c.top, "rows per criterion (0 = all)");
  features->add_option("--folds", c.folds, "folds when cross-validating")->capture_default_str()->check(CLI::Range(2, 1000000));
  features->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  features->add_option("--output", c.output_path, "report JSON path");

  auto* synth = app.add_subcommand("synth", "write a synthetic hierarchy and consistent dataset");
  synth->add_option("--features", s.features, "feature count")->capture_default_str()->check(CLI::Range(2, 100000));
  synth->add_option("--instances", s.instances, "instance count")->capture_default_str();
  synth->add_option("--leaf-density", s.leaf_density, "probability a sink feature is annotated")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--class-noise", s.class_noise, "label flip probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", s.seed, "random seed")->capture_default_str();
  synth->add_option("--rule", s.rule, "planted rule: xor, and, or, and-not")->capture_default_str();
  synth->add_option("--rule-on", s.rule_on, "rule features: anywhere, or top (features without parents)")
      ->capture_default_str();
  synth->add_option("--roots", s.roots, "features without parents in the hierarchy")->capture_default_str();
  synth->add_option("--second-parent", s.second_parent, "probability a node gets a second parent")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--out-data", s.out_data, "dataset CSV path")->required();
  synth->add_option("--out-dag", s.out_dag, "hierarchy TSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitError;
  }

  if (features->parsed() && c.method == "all") c.method = "hie-tan-lite";
  if (predict_cmd->parsed() && c.method == "all") c.method.clear();
  try {
    if (validate->parsed()) return cmd_validate(c, out, err);
    if (cv->parsed()) return cmd_cv(c, out, err);
    if (train->parsed()) return cmd_train(c, out, err);
    if (predict_cmd->parsed()) return cmd_predict(c, out, err);
    if (features->parsed()) return cmd_features(c, out, err);
    if (synth->parsed()) return cmd_synth(s, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace hietan::cli
