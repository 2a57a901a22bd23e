/*
 * Copyright 2026 The vulntriage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vulntriage/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "vulntriage/csv.hpp"
#include "vulntriage/error.hpp"
#include "vulntriage/random.hpp"
#include "vulntriage/svg.hpp"

namespace vulntriage::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using pipeline::RunConfig;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

csv::Table read_artifact(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error("missing prerequisite artifact " + path.string() +
                " (run the producing command first)");
  }
  std::istringstream in(read_text(path));
  return csv::read_table(in);
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::ostringstream s;
  csv::write_row(s, fields);
  return s.str();
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(fmt::format("expected a number, got '{}'", s));
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string support_line(std::size_t n) { return fmt::format("Support: {} samples\n", n); }

void write_table(const fs::path& dir, const std::string& stem,
                 const eval::BenchmarkTable& t, const std::string& footer) {
  write_text(dir / (stem + ".txt"), t.to_text() + footer);
  write_text(dir / (stem + ".csv"), t.to_csv());
  write_text(dir / (stem + ".md"), t.to_markdown() + "\n" + footer);
}

bool any_ok(const eval::BenchmarkTable& t) {
  return std::any_of(t.rows().begin(), t.rows().end(),
                     [](const auto& r) { return r.result.has_value(); });
}

std::string grid_csv(const Eigen::MatrixXd& m, const std::string& row_prefix) {
  std::string out = "row";
  for (Eigen::Index j = 0; j < m.cols(); ++j) out += fmt::format(",{}", j);
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += fmt::format("{}_{}", row_prefix, i);
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += "," + num(m(i, j));
    out += "\n";
  }
  return out;
}

std::string terms_csv(const select::FeatureScores& scores, std::size_t n) {
  std::string out = "term,score\n";
  for (const auto& [term, score] : select::top_scored_terms(scores, n)) {
    out += csv_line({term, num(score)});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config resolution

RunConfig resolve(const Options& o) {
  json tree = json::object();
  if (o.config) {
    const auto text = read_text(*o.config);
    try {
      tree = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("{}: {}", *o.config, e.what()));
    }
    if (!tree.is_object()) throw ConfigError(*o.config + ": top level must be an object");
  }
  for (const auto& a : o.overrides) pipeline::apply_override(tree, a);
  if (o.data) tree["data"] = *o.data;
  if (o.seed) tree["seed"] = *o.seed;
  if (o.split) tree["split"] = *o.split;
  if (const char* env = std::getenv(kOutEnv); env && *env) tree["out"] = env;
  if (o.out) tree["out"] = *o.out;
  return RunConfig::from_tree(tree);
}

// ---------------------------------------------------------------------------
// ingest

int cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  if (cfg.data.empty()) throw ConfigError("no dataset path (use --data)");
  const auto raw = corpus::read_csv_file(
      cfg.data, corpus::ColumnSchema::with_overrides(cfg.schema));
  const auto cleaned = corpus::clean(raw);
  const auto missing = static_cast<std::size_t>(
      std::count_if(raw.begin(), raw.end(), [](const auto& r) { return !r.cvss; }));
  const auto labels = corpus::label(cleaned, cfg.severity_threshold);
  const auto high = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));

  std::string summary;
  summary += fmt::format("raw rows: {}\n", raw.size());
  summary += fmt::format("dropped (missing CVSS): {}\n", missing);
  summary += fmt::format("dropped (duplicate id): {}\n", raw.size() - missing - cleaned.size());
  summary += fmt::format("cleaned rows: {}\n", cleaned.size());
  summary += fmt::format(
      "high severity (CVSS >= {:.1f}): {} ({:.2f}%)\n", cfg.severity_threshold, high,
      cleaned.empty() ? 0.0 : 100.0 * static_cast<double>(high) / static_cast<double>(cleaned.size()));
  try {
    const auto split = corpus::stratified_indices(labels, cfg.split,
                                                  derive_seed(cfg.seed, "split"));
    summary += fmt::format("split: {} train / {} test\n", split.train.size(), split.test.size());
  } catch (const Error& e) {
    summary += fmt::format("split: unavailable ({})\n", e.what());
  }

  const fs::path out = cfg.out;
  std::ostringstream csv_out, jsonl_out;
  corpus::write_csv(csv_out, cleaned);
  corpus::write_jsonl(jsonl_out, cleaned);
  write_text(out / "cleaned.jsonl", jsonl_out.str());
  write_text(out / "ingest_summary.txt", summary);
  write_text(out / "cleaned.csv", csv_out.str());
  log << summary;
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark-features

int cmd_benchmark_features(const RunConfig& cfg, std::ostream& log) {
  const auto p = pipeline::prepare(cfg);
  const auto b = pipeline::benchmark_features(p, cfg);
  const fs::path out = cfg.out;

  std::string settings;
  for (const auto& s : b.settings) settings += s + "\n";
  const std::string footer = support_line(p.y_test.size());
  for (const auto& s : b.scored) {
    write_text(out / "reports" / (s.name + ".txt"), eval::classification_report(s.report));
  }
  write_text(out / "features_settings.txt", settings);
  write_table(out, "features_sweep", b.sweep, footer);

  if (b.chi2) write_text(out / "chi2_top_terms.csv", terms_csv(*b.chi2, 20));
  if (b.mutual_info) write_text(out / "mi_top_terms.csv", terms_csv(*b.mutual_info, 20));
  if (!b.explained_variance.empty()) {
    std::string ev = "components,cumulative_ratio\n";
    for (std::size_t i = 0; i < b.explained_variance.size(); ++i) {
      ev += fmt::format("{},{}\n", i + 1, num(b.explained_variance[i]));
    }
    write_text(out / "explained_variance.csv", ev);
  }
  if (!b.svd_terms.empty()) {
    std::string st = "component,rank,term\n";
    for (std::size_t c = 0; c < b.svd_terms.size(); ++c) {
      for (std::size_t r = 0; r < b.svd_terms[c].size(); ++r) {
        st += csv_line({std::to_string(c), std::to_string(r + 1), b.svd_terms[c][r]});
      }
    }
    write_text(out / "svd_top_terms.csv", st);
  }
  std::string kw = "phrase,count\n";
  for (const auto& [phrase, count] : b.keywords) kw += csv_line({phrase, std::to_string(count)});
  write_text(out / "keyword_frequencies.csv", kw);
  if (b.pca_scatter.rows() == static_cast<Eigen::Index>(p.y_test.size()) &&
      b.pca_scatter.cols() == 2) {
    std::string sc = "pc1,pc2,label\n";
    for (Eigen::Index i = 0; i < b.pca_scatter.rows(); ++i) {
      sc += fmt::format("{},{},{}\n", num(b.pca_scatter(i, 0)), num(b.pca_scatter(i, 1)),
                        p.y_test[static_cast<std::size_t>(i)]);
    }
    write_text(out / "pca_scatter.csv", sc);
  }
  if (!b.coefficients.empty()) {
    std::string co = "direction,feature,weight\n";
    for (const auto& [c, sign] : b.coefficients) {
      co += csv_line({sign > 0 ? "high" : "low", c.name, num(c.weight)});
    }
    write_text(out / "top_coefficients.csv", co);
  }
  if (b.baseline_model) {
    const json bundle = {{"format", "vulntriage-bundle"},
                         {"version", 1},
                         {"featurizer", b.featurizer.to_json()},
                         {"model", b.baseline_model->to_json()}};
    write_text(out / "models" / "bundle.json", bundle.dump(1) + "\n");
  }

  write_table(out, "features_table", b.table, footer);
  log << b.table.to_text() << footer << "\n" << settings;
  return any_ok(b.table) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// benchmark-models

int cmd_benchmark_models(const RunConfig& cfg, std::ostream& log) {
  const auto p = pipeline::prepare(cfg);
  const auto b = pipeline::benchmark_models(p, cfg);
  const fs::path out = cfg.out;

  for (const auto& s : b.scored) {
    write_text(out / "reports" / (s.name + ".txt"), eval::classification_report(s.report));
    write_text(out / "confusion" / (s.name + ".csv"), eval::confusion_csv(s.report.matrix));
    write_text(out / "roc" / (s.name + ".csv"),
               eval::roc_csv(eval::roc_auc(p.y_test, s.probs)));
  }
  for (const auto& [name, model] : b.models) {
    write_text(out / "models" / (name + ".json"), model.dump() + "\n");
  }
  if (b.ffnn && b.ffnn_test && b.ffnn_test->rows > 0) {
    const auto a = b.ffnn->net.activations("dense_0", *b.ffnn_test, b.test_tabular, 0);
    write_text(out / "activations_ffnn_dense_0.csv", grid_csv(a.transpose(), "sample"));
  }
  if (b.cnn && b.cnn_test && b.cnn_test->rows > 0) {
    const auto a = b.cnn->net.activations("conv", *b.cnn_test, b.test_tabular, 0);
    write_text(out / "activations_cnn_conv.csv",
               grid_csv(a.topRows(std::min<Eigen::Index>(8, a.rows())), "filter"));
  }

  const std::string footer = support_line(p.y_test.size());
  write_table(out, "models_table", b.table, footer);
  log << b.table.to_text() << footer;
  return any_ok(b.table) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// ensembles

int cmd_ensembles(const RunConfig& cfg, std::ostream& log) {
  const auto p = pipeline::prepare(cfg);
  const auto outcomes = pipeline::run_ensembles(p, cfg);
  const fs::path out = cfg.out;
  const auto& e = cfg.ensemble;

  std::string text;
  std::string summary = "strategy,accuracy,f1_macro,roc_auc,status\n";
  bool ok = false;
  for (const auto& o : outcomes) {
    const std::string name{ensemble::strategy_name(o.strategy)};
    text += fmt::format("== {}\n", name);
    switch (o.strategy) {
      case ensemble::Strategy::kFeatureSplit:
        text += "members: logistic regression on all blocks; logistic regression on vendor + "
                "indicator blocks\n";
        break;
      case ensemble::Strategy::kBootstrap:
        text += fmt::format("members: {} logistic regressions, {:.0f}% sampling {}\n",
                            e.bootstrap_members, 100.0 * e.sample_fraction,
                            e.with_replacement ? "with replacement" : "without replacement");
        break;
      case ensemble::Strategy::kHeterogeneous:
        text += "members: logistic regression, random forest, knn\n";
        break;
      case ensemble::Strategy::kInstance: {
        std::string cs;
        for (double c : e.instance_C) cs += (cs.empty() ? "" : ", ") + fmt::format("{:.1f}", c);
        text += fmt::format("members: logistic regression with C = {}\n", cs);
        break;
      }
      case ensemble::Strategy::kStacking:
        text += fmt::format("bases: logistic regression, random forest, knn; meta: logistic "
                            "regression on {}\n",
                            e.out_of_fold ? fmt::format("{}-fold out-of-fold probabilities",
                                                        e.folds)
                                          : "in-sample probabilities");
        break;
    }
    if (!o.result) {
      text += o.error + "\n\n";
      summary += csv_line({name, "", "", "", o.error});
      continue;
    }
    ok = true;
    text += fmt::format("accuracy: {:.4f}\n", o.report->accuracy);
    text += eval::classification_report(*o.report) + "\n";
    summary += fmt::format("{},{},{},{},ok\n", name, num(o.report->accuracy),
                           num(o.report->f1_macro), o.report->auc ? num(*o.report->auc) : "");
    write_text(out / "ensembles" / (name + ".csv"), ensemble::result_csv(*o.result));
  }
  text += support_line(p.y_test.size());
  text += fmt::format("majority-class rate: {:.4f}\n", pipeline::majority_rate(p.y_test));
  write_text(out / "ensembles_summary.csv", summary);
  write_text(out / "ensembles.txt", text);
  log << text;
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const RunConfig& cfg, const fs::path& bundle_path, const fs::path& input,
                const fs::path& output, std::ostream& log) {
  json bundle;
  try {
    bundle = json::parse(read_text(bundle_path));
  } catch (const json::parse_error& e) {
    throw SchemaError(fmt::format("{}: {}", bundle_path.string(), e.what()));
  }
  if (bundle.value("format", "") != "vulntriage-bundle") {
    throw SchemaError(bundle_path.string() + " is not a model bundle");
  }
  const auto fz = pipeline::Featurizer::from_json(bundle.at("featurizer"));
  const auto model = classical::classifier_from_json(bundle.at("model"));

  const auto text = read_text(input);
  std::istringstream table_in(text), record_in(text);
  const auto table = csv::read_table(table_in);
  const auto records =
      corpus::parse_csv(record_in, corpus::ColumnSchema::with_overrides(cfg.schema),
                        corpus::ParseMode::kScoring);
  if (records.size() != table.rows.size()) {
    throw SchemaError("record count differs from CSV row count");
  }
  const auto x = fz.baseline(records);
  if (x.cols() != model->input_dim()) {
    throw ShapeError(fmt::format("bundle expects {} features, input yields {}",
                                 model->input_dim(), x.cols()));
  }
  const auto probs = model->predict_proba(x);

  auto header = table.header;
  header.push_back("probability");
  header.push_back("label");
  std::string result = csv_line(header);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    auto row = table.rows[i];
    row.push_back(fmt::format("{:.6f}", probs[i]));
    row.push_back(probs[i] >= 0.5 ? "1" : "0");
    result += csv_line(row);
  }
  const fs::path target = output.empty() ? fs::path(cfg.out) / "predictions.csv" : output;
  write_text(target, result);
  log << fmt::format("scored {} records -> {}\n", records.size(), target.string());
  return 0;
}

// ---------------------------------------------------------------------------
// plot

int cmd_plot(const RunConfig& cfg, const std::string& which, std::ostream& log) {
  const fs::path out = cfg.out;
  std::string svg_text, backing;

  const auto bars = [&](const std::string& file, const std::string& title, std::size_t limit) {
    const auto t = read_artifact(out / file);
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& r : t.rows) {
      if (labels.size() == limit) break;
      labels.push_back(r.at(0));
      values.push_back(to_double(r.at(1)));
    }
    svg_text = svg::bar_chart(title, labels, values);
    backing = read_text(out / file);
  };

  if (which == "keywords") {
    bars("keyword_frequencies.csv", "Most frequent vulnerability keywords", 10);
  } else if (which == "chi2_terms") {
    bars("chi2_top_terms.csv", "Top terms by chi-square score", 20);
  } else if (which == "mi_terms") {
    bars("mi_top_terms.csv", "Top terms by mutual information", 20);
  } else if (which == "variance") {
    const auto t = read_artifact(out / "explained_variance.csv");
    svg::Series s{"cumulative explained variance", {}};
    for (const auto& r : t.rows) s.points.emplace_back(to_double(r.at(0)), to_double(r.at(1)));
    svg_text = svg::line_chart("Cumulative explained variance (SVD)", {s}, "components",
                               "cumulative ratio");
    backing = read_text(out / "explained_variance.csv");
  } else if (which == "pca_scatter") {
    const auto t = read_artifact(out / "pca_scatter.csv");
    std::vector<svg::ScatterPoint> pts;
    for (const auto& r : t.rows) {
      pts.push_back({to_double(r.at(0)), to_double(r.at(1)), std::stoi(r.at(2))});
    }
    svg_text = svg::scatter("Test rows on the first two principal components", pts,
                            {"label 0 (CVSS < 7)", "label 1 (CVSS >= 7)"});
    backing = read_text(out / "pca_scatter.csv");
  } else if (which == "roc") {
    const fs::path dir = out / "roc";
    if (!fs::is_directory(dir)) {
      throw Error("missing prerequisite artifact " + dir.string() +
                  " (run benchmark-models first)");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("no ROC files in " + dir.string());
    std::vector<svg::Series> series;
    backing = "model,fpr,tpr\n";
    for (const auto& f : files) {
      const auto t = read_artifact(f);
      svg::Series s{f.stem().string(), {}};
      for (const auto& r : t.rows) {
        s.points.emplace_back(to_double(r.at(0)), to_double(r.at(1)));
        backing += csv_line({s.name, r.at(0), r.at(1)});
      }
      series.push_back(std::move(s));
    }
    svg_text = svg::line_chart("ROC curves", series, "false positive rate",
                               "true positive rate");
  } else if (which == "activations") {
    const auto file = out / "activations_cnn_conv.csv";
    const auto t = read_artifact(file);
    std::vector<std::string> labels;
    std::vector<std::vector<double>> grid;
    for (const auto& r : t.rows) {
      labels.push_back(r.at(0));
      std::vector<double> row;
      for (std::size_t j = 1; j < r.size(); ++j) row.push_back(to_double(r[j]));
      grid.push_back(std::move(row));
    }
    svg_text = svg::heatmap("CNN feature maps, first test sample", labels, grid);
    backing = read_text(file);
  } else {
    throw ConfigError(fmt::format("unknown plot '{}'", which));
  }

  write_text(out / "plots" / (which + ".csv"), backing);
  write_text(out / "plots" / (which + ".svg"), svg_text);
  log << fmt::format("wrote {}\n", (out / "plots" / (which + ".svg")).string());
  return 0;
}

// ---------------------------------------------------------------------------
// argv

int run(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Severity triage for vulnerability disclosures", "vulntriage"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vulntriage 1.0.0");

  Options opts;
  std::string which, bundle, input, output;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON config file");
    sub->add_option("--data", opts.data, "Disclosure CSV");
    sub->add_option("--out", opts.out, fmt::format("Output directory (env {})", kOutEnv));
    sub->add_option("--seed", opts.seed, "Top-level seed");
    sub->add_option("--split", opts.split, "Test fraction")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--set", opts.overrides, "Config override key.path=value (repeatable)");
  };
  auto* ingest = app.add_subcommand("ingest", "Clean and label a disclosure CSV");
  auto* features = app.add_subcommand("benchmark-features",
                                      "Compare feature selection and reduction pipelines");
  auto* models = app.add_subcommand("benchmark-models", "Compare classical and neural models");
  auto* ensembles = app.add_subcommand("ensembles", "Run the five ensemble strategies");
  auto* predict = app.add_subcommand("predict", "Score a CSV with a saved model bundle");
  auto* plot = app.add_subcommand("plot", "Render an SVG from saved artifacts");
  for (auto* sub : {ingest, features, models, ensembles, predict, plot}) common(sub);
  predict->add_option("--model", bundle, "Model bundle (default <out>/models/bundle.json)");
  predict->add_option("--input", input, "CSV to score")->required();
  predict->add_option("--output", output, "Output CSV (default <out>/predictions.csv)");
  plot->add_option("which", which, "Plot name")->required()->check(CLI::IsMember(kPlots));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, log, err);
  }

  try {
    const auto cfg = resolve(opts);
    if (*ingest) return cmd_ingest(cfg, log);
    if (*features) return cmd_benchmark_features(cfg, log);
    if (*models) return cmd_benchmark_models(cfg, log);
    if (*ensembles) return cmd_ensembles(cfg, log);
    if (*predict) {
      const fs::path b = bundle.empty() ? fs::path(cfg.out) / "models" / "bundle.json"
                                        : fs::path(bundle);
      return cmd_predict(cfg, b, input, output, log);
    }
    return cmd_plot(cfg, which, log);
  } catch (const std::exception& e) {
    err << "vulntriage: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vulntriage::cli
