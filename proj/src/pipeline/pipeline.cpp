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

#include "vulntriage/pipeline.hpp"

#include <algorithm>
#include <exception>

#include <fmt/format.h>

#include "vulntriage/error.hpp"
#include "vulntriage/random.hpp"

namespace vulntriage::pipeline {

using nlohmann::json;

namespace {

// Keys whose contents are free-form or nullable in the default tree.
bool free_form(const std::string& path) {
  return path == "/schema" || path == "/tree/max_depth" || path == "/forest/max_depth" ||
         path == "/forest/feature_fraction";
}

void check_known(const json& user, const json& reference, const std::string& path) {
  if (!user.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string child = path + "/" + it.key();
    if (!reference.is_object() || !reference.contains(it.key())) {
      throw ConfigError(fmt::format("unknown config key '{}'", child));
    }
    if (!free_form(child)) check_known(it.value(), reference.at(it.key()), child);
  }
}

template <typename T>
T get(const json& tree, const char* pointer) {
  try {
    return tree.at(json::json_pointer(pointer)).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", pointer, e.what()));
  }
}

// Merge-patch deletes keys patched with null, so absent means unset too.
template <typename T>
std::optional<T> get_nullable(const json& tree, const char* pointer) {
  const json::json_pointer ptr(pointer);
  if (!tree.contains(ptr) || tree.at(ptr).is_null()) return std::nullopt;
  return get<T>(tree, pointer);
}

json net_tree(const neural::NetSpec& s) {
  json j = {{"max_len", s.max_len},
            {"embedding_dim", s.embedding_dim},
            {"tabular_hidden", s.tabular_hidden},
            {"merge_hidden", s.merge_hidden},
            {"dropout", s.dropout}};
  if (s.variant == neural::Variant::kCnn) {
    j["filters"] = s.filters;
    j["kernel_width"] = s.kernel_width;
  }
  return j;
}

neural::NetSpec net_from_tree(const json& tree, const std::string& key,
                              neural::Variant v) {
  neural::NetSpec s;
  s.variant = v;
  const auto p = "/" + key + "/";
  s.max_len = get<std::size_t>(tree, (p + "max_len").c_str());
  s.embedding_dim = get<std::size_t>(tree, (p + "embedding_dim").c_str());
  s.tabular_hidden = get<std::size_t>(tree, (p + "tabular_hidden").c_str());
  s.merge_hidden = get<std::vector<std::size_t>>(tree, (p + "merge_hidden").c_str());
  s.dropout = get<double>(tree, (p + "dropout").c_str());
  if (v == neural::Variant::kCnn) {
    s.filters = get<std::size_t>(tree, (p + "filters").c_str());
    s.kernel_width = get<std::size_t>(tree, (p + "kernel_width").c_str());
  }
  return s;
}

std::string error_text(const std::exception& e) {
  std::string s = e.what();
  std::replace(s.begin(), s.end(), '\n', ' ');
  return "error: " + s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

json RunConfig::default_tree() { return RunConfig{}.to_tree(); }

json RunConfig::to_tree() const {
  json schema_tree = json::object();
  for (const auto& [k, v] : schema) schema_tree[k] = v;
  auto optional_size = [](const std::optional<std::size_t>& v) {
    return v ? json(*v) : json(nullptr);
  };
  return {
      {"data", data},
      {"out", out},
      {"schema", schema_tree},
      {"lexicon", lexicon},
      {"seed", seed},
      {"split", split},
      {"severity_threshold", severity_threshold},
      {"tfidf",
       {{"ngram_lo", tfidf.ngram_lo},
        {"ngram_hi", tfidf.ngram_hi},
        {"max_features", tfidf.max_features}}},
      {"reduce", {{"svd_k", svd_k}, {"pca_k", pca_k}, {"pca_sweep", pca_sweep}}},
      {"select", {{"k", select_k}, {"chi2_sweep", chi2_sweep}}},
      {"logreg", {{"C", logreg.C}, {"max_iter", logreg.max_iter}, {"tol", logreg.tol}}},
      {"tree",
       {{"max_depth", optional_size(tree.max_depth)},
        {"min_samples_leaf", tree.min_samples_leaf}}},
      {"forest",
       {{"n_trees", forest.n_trees},
        {"feature_fraction",
         forest.feature_fraction ? json(*forest.feature_fraction) : json(nullptr)},
        {"bootstrap", forest.bootstrap},
        {"max_depth", optional_size(forest.max_depth)},
        {"min_samples_leaf", forest.min_samples_leaf}}},
      {"knn", {{"k", knn_k}}},
      {"ffnn", net_tree(ffnn)},
      {"cnn", net_tree(cnn)},
      {"train",
       {{"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"learning_rate", train.learning_rate},
        {"beta1", train.beta1},
        {"beta2", train.beta2},
        {"epsilon", train.epsilon}}},
      {"vocab_cap", vocab_cap},
      {"ensemble",
       {{"bootstrap_members", ensemble.bootstrap_members},
        {"sample_fraction", ensemble.sample_fraction},
        {"with_replacement", ensemble.with_replacement},
        {"instance_C", ensemble.instance_C},
        {"folds", ensemble.folds},
        {"out_of_fold", ensemble.out_of_fold}}},
  };
}

RunConfig RunConfig::from_tree(const json& user) {
  json tree = default_tree();
  check_known(user, tree, "");
  tree.merge_patch(user);

  RunConfig c;
  c.data = get<std::string>(tree, "/data");
  c.out = get<std::string>(tree, "/out");
  c.schema = get<std::map<std::string, std::string>>(tree, "/schema");
  c.lexicon = get<std::string>(tree, "/lexicon");
  if (tree.at("seed").is_number_integer() && tree.at("seed").get<long long>() < 0) {
    throw ConfigError("seed must be non-negative");
  }
  c.seed = get<std::uint64_t>(tree, "/seed");
  c.split = get<double>(tree, "/split");
  c.severity_threshold = get<double>(tree, "/severity_threshold");
  c.tfidf.ngram_lo = get<int>(tree, "/tfidf/ngram_lo");
  c.tfidf.ngram_hi = get<int>(tree, "/tfidf/ngram_hi");
  c.tfidf.max_features = get<std::size_t>(tree, "/tfidf/max_features");
  c.svd_k = get<std::size_t>(tree, "/reduce/svd_k");
  c.pca_k = get<std::size_t>(tree, "/reduce/pca_k");
  c.pca_sweep = get<std::vector<std::size_t>>(tree, "/reduce/pca_sweep");
  c.select_k = get<std::size_t>(tree, "/select/k");
  c.chi2_sweep = get<std::vector<std::size_t>>(tree, "/select/chi2_sweep");
  c.logreg.C = get<double>(tree, "/logreg/C");
  c.logreg.max_iter = get<std::size_t>(tree, "/logreg/max_iter");
  c.logreg.tol = get<double>(tree, "/logreg/tol");
  c.tree.max_depth = get_nullable<std::size_t>(tree, "/tree/max_depth");
  c.tree.min_samples_leaf = get<std::size_t>(tree, "/tree/min_samples_leaf");
  c.forest.n_trees = get<std::size_t>(tree, "/forest/n_trees");
  c.forest.feature_fraction = get_nullable<double>(tree, "/forest/feature_fraction");
  c.forest.bootstrap = get<bool>(tree, "/forest/bootstrap");
  c.forest.max_depth = get_nullable<std::size_t>(tree, "/forest/max_depth");
  c.forest.min_samples_leaf = get<std::size_t>(tree, "/forest/min_samples_leaf");
  c.knn_k = get<std::size_t>(tree, "/knn/k");
  c.ffnn = net_from_tree(tree, "ffnn", neural::Variant::kFfnn);
  c.cnn = net_from_tree(tree, "cnn", neural::Variant::kCnn);
  c.train.epochs = get<std::size_t>(tree, "/train/epochs");
  c.train.batch_size = get<std::size_t>(tree, "/train/batch_size");
  c.train.learning_rate = get<double>(tree, "/train/learning_rate");
  c.train.beta1 = get<double>(tree, "/train/beta1");
  c.train.beta2 = get<double>(tree, "/train/beta2");
  c.train.epsilon = get<double>(tree, "/train/epsilon");
  c.vocab_cap = get<std::size_t>(tree, "/vocab_cap");
  c.ensemble.bootstrap_members = get<std::size_t>(tree, "/ensemble/bootstrap_members");
  c.ensemble.sample_fraction = get<double>(tree, "/ensemble/sample_fraction");
  c.ensemble.with_replacement = get<bool>(tree, "/ensemble/with_replacement");
  c.ensemble.instance_C = get<std::vector<double>>(tree, "/ensemble/instance_C");
  c.ensemble.folds = get<std::size_t>(tree, "/ensemble/folds");
  c.ensemble.out_of_fold = get<bool>(tree, "/ensemble/out_of_fold");
  c.ensemble.seed = c.seed;
  c.ensemble.logreg = c.logreg;
  c.ensemble.forest = c.forest;
  c.ensemble.knn_k = c.knn_k;
  return c;
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  }
  std::string pointer = "/" + assignment.substr(0, eq);
  std::replace(pointer.begin(), pointer.end(), '.', '/');
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  tree[json::json_pointer(pointer)] = value;
}

// ---------------------------------------------------------------------------
// Data

Prepared prepare(std::vector<corpus::DisclosureRecord> raw, const RunConfig& cfg) {
  Prepared p;
  p.raw_rows = raw.size();
  auto cleaned = corpus::clean(raw);
  auto labels = corpus::label(cleaned, cfg.severity_threshold);
  p.data = corpus::stratified_split(std::move(cleaned), std::move(labels), cfg.split,
                                    derive_seed(cfg.seed, "split"));
  p.train = p.data.train_records();
  p.test = p.data.test_records();
  p.y_train = p.data.train_labels();
  p.y_test = p.data.test_labels();
  return p;
}

Prepared prepare(const RunConfig& cfg) {
  if (cfg.data.empty()) throw ConfigError("no dataset path configured");
  return prepare(corpus::read_csv_file(cfg.data, corpus::ColumnSchema::with_overrides(cfg.schema)),
                 cfg);
}

Featurizer Featurizer::fit(std::span<const corpus::DisclosureRecord> train,
                           const RunConfig& cfg) {
  Featurizer f;
  if (!cfg.lexicon.empty()) f.lexicon = features::KeywordLexicon::load(cfg.lexicon);
  f.tfidf = features::TfidfModel::fit(features::descriptions(train), cfg.tfidf);
  f.vendor = features::VendorEncoder::fit(train);
  return f;
}

FeatureMatrix Featurizer::structured(std::span<const corpus::DisclosureRecord> r) const {
  return assemble({vendor.encode(r), features::indicator_block(r, lexicon)});
}

FeatureMatrix Featurizer::text(std::span<const corpus::DisclosureRecord> r) const {
  return tfidf.transform(features::descriptions(r));
}

FeatureMatrix Featurizer::baseline(std::span<const corpus::DisclosureRecord> r) const {
  return assemble({structured(r), text(r)});
}

json Featurizer::to_json() const {
  return {{"lexicon", lexicon.phrases()}, {"tfidf", tfidf.to_json()},
          {"vendor", vendor.to_json()}};
}

Featurizer Featurizer::from_json(const json& j) {
  Featurizer f;
  f.lexicon = features::KeywordLexicon(j.at("lexicon").get<std::vector<std::string>>());
  f.tfidf = features::TfidfModel::from_json(j.at("tfidf"));
  f.vendor = features::VendorEncoder::from_json(j.at("vendor"));
  return f;
}

// ---------------------------------------------------------------------------
// Feature benchmark

namespace {

struct Runner {
  const Prepared& p;
  const RunConfig& cfg;

  // Fits logistic regression on the given blocks and records the outcome.
  std::shared_ptr<classical::LogRegModel> fit_lr(const FeatureMatrix& xtr,
                                                 const FeatureMatrix& xte,
                                                 Scored& scored) const {
    auto model = std::make_shared<classical::LogRegModel>(
        classical::LogRegModel::train(xtr, p.y_train, cfg.logreg));
    scored.probs = model->predict_proba(xte);
    const auto labels = ensemble::threshold_labels(scored.probs, 0.5);
    scored.report = eval::report(p.y_test, labels, scored.probs);
    return model;
  }
};

template <typename Fn>
void guarded_row(eval::BenchmarkTable& table, std::vector<Scored>* sink,
                 const std::string& name, Fn&& fn) {
  Scored s;
  s.name = name;
  try {
    fn(s);
    table.add(name, s.report);
    if (sink) sink->push_back(std::move(s));
  } catch (const std::exception& e) {
    table.add_error(name, error_text(e));
  }
}

FeatureMatrix reduced(const Eigen::MatrixXd& m, std::string_view prefix) {
  return FeatureMatrix::from_dense(m, prefix, ColumnGroup::kReduced);
}

}  // namespace

FeatureBenchmark benchmark_features(const Prepared& p, const RunConfig& cfg) {
  FeatureBenchmark b;
  const Runner run{p, cfg};
  b.featurizer = Featurizer::fit(p.train, cfg);
  const auto& fz = b.featurizer;
  const auto s_tr = fz.structured(p.train), s_te = fz.structured(p.test);
  const auto t_tr = fz.text(p.train), t_te = fz.text(p.test);
  b.keywords = features::keyword_frequencies(p.data.records, fz.lexicon, 10);

  guarded_row(b.table, &b.scored, "tfidf_baseline", [&](Scored& s) {
    const auto xtr = assemble({s_tr, t_tr});
    b.baseline_model = run.fit_lr(xtr, assemble({s_te, t_te}), s);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < xtr.cols(); ++j) names.push_back(xtr.qualified_name(j));
    auto [pos, neg] = classical::top_coefficients(*b.baseline_model, names, 10);
    for (auto& c : pos) b.coefficients.emplace_back(std::move(c), 1);
    for (auto& c : neg) b.coefficients.emplace_back(std::move(c), -1);
  });
  b.settings.push_back(fmt::format(
      "tfidf_baseline: vendor one-hot + CVE/keyword indicators + TF-IDF ({} terms, "
      "ngrams {}-{}), logistic regression C={}",
      fz.tfidf.vocabulary().size(), cfg.tfidf.ngram_lo, cfg.tfidf.ngram_hi, cfg.logreg.C));

  Eigen::MatrixXd r_tr, r_te;
  const std::string svd_name = fmt::format("tfidf_svd_k{}", cfg.svd_k);
  guarded_row(b.table, &b.scored, svd_name, [&](Scored& s) {
    b.svd = reduce::SvdModel::fit(t_tr, cfg.svd_k, derive_seed(cfg.seed, "svd"));
    r_tr = b.svd->project(t_tr);
    r_te = b.svd->project(t_te);
    b.explained_variance = reduce::explained_variance_curve(*b.svd, t_tr);
    b.svd_terms = reduce::top_terms_per_component(*b.svd, fz.tfidf.vocabulary(), 10, 10);
    run.fit_lr(assemble({s_tr, reduced(r_tr, "svd")}), assemble({s_te, reduced(r_te, "svd")}),
               s);
  });
  b.settings.push_back(fmt::format(
      "{}: TF-IDF reduced by truncated SVD (k={}) + structured blocks, logistic regression",
      svd_name, cfg.svd_k));

  const auto selected = [&](const select::FeatureScores& scores, std::size_t k,
                            Scored& s) {
    const auto cols = select::select_top_k(scores, k);
    run.fit_lr(assemble({s_tr, t_tr.select_columns(cols)}),
               assemble({s_te, t_te.select_columns(cols)}), s);
  };
  const std::string chi2_name = fmt::format("tfidf_chi2_k{}", cfg.select_k);
  guarded_row(b.table, &b.scored, chi2_name, [&](Scored& s) {
    b.chi2 = select::chi2_scores(t_tr, p.y_train);
    selected(*b.chi2, cfg.select_k, s);
  });
  b.settings.push_back(fmt::format(
      "{}: top {} TF-IDF terms by chi-square + structured blocks, logistic regression",
      chi2_name, cfg.select_k));

  const std::string mi_name = fmt::format("tfidf_mi_k{}", cfg.select_k);
  guarded_row(b.table, &b.scored, mi_name, [&](Scored& s) {
    b.mutual_info = select::mutual_info_scores(t_tr, p.y_train);
    selected(*b.mutual_info, cfg.select_k, s);
  });
  b.settings.push_back(fmt::format(
      "{}: top {} TF-IDF terms by mutual information + structured blocks, logistic "
      "regression",
      mi_name, cfg.select_k));

  // PCA and LDA act on the densified structured + SVD matrix.
  const auto dense = [&](bool train_rows) {
    if (!b.svd) throw FitError("SVD stage failed; no dense matrix to project");
    return train_rows ? assemble({s_tr, reduced(r_tr, "svd")}).dense()
                      : assemble({s_te, reduced(r_te, "svd")}).dense();
  };
  const auto pca_row = [&](std::size_t k, Scored& s) {
    const auto d_tr = dense(true);
    const auto pca = reduce::PcaModel::fit(d_tr, k);
    run.fit_lr(reduced(pca.project(d_tr), "pc"), reduced(pca.project(dense(false)), "pc"), s);
  };
  const std::string pca_name = fmt::format("svd_pca_k{}", cfg.pca_k);
  guarded_row(b.table, &b.scored, pca_name, [&](Scored& s) { pca_row(cfg.pca_k, s); });
  b.settings.push_back(fmt::format(
      "{}: PCA (k={}) of dense structured + SVD features, logistic regression", pca_name,
      cfg.pca_k));

  guarded_row(b.table, &b.scored, "svd_lda", [&](Scored& s) {
    const auto d_tr = dense(true);
    const auto lda = reduce::LdaModel::fit(d_tr, p.y_train);
    run.fit_lr(reduced(lda.project(d_tr), "ld"), reduced(lda.project(dense(false)), "ld"), s);
  });
  b.settings.push_back(
      "svd_lda: one Fisher discriminant of dense structured + SVD features, logistic "
      "regression");

  try {
    if (b.svd) {
      const auto pca2 = reduce::PcaModel::fit(dense(true), 2);
      b.pca_scatter = pca2.project(dense(false));
    }
  } catch (const Error&) {
    b.pca_scatter.resize(0, 2);
  }

  for (auto k : cfg.chi2_sweep) {
    guarded_row(b.sweep, nullptr, fmt::format("tfidf_chi2_k{}", k), [&](Scored& s) {
      if (!b.chi2) throw FitError("chi-square scores unavailable");
      selected(*b.chi2, k, s);
    });
  }
  for (auto k : cfg.pca_sweep) {
    guarded_row(b.sweep, nullptr, fmt::format("svd_pca_k{}", k),
                [&](Scored& s) { pca_row(k, s); });
  }
  return b;
}

// ---------------------------------------------------------------------------
// Model benchmark

ModelBenchmark benchmark_models(const Prepared& p, const RunConfig& cfg) {
  ModelBenchmark b;
  const auto fz = Featurizer::fit(p.train, cfg);
  const auto x_tr = fz.baseline(p.train), x_te = fz.baseline(p.test);

  const auto classical_row = [&](const std::string& name, auto&& train_fn) {
    guarded_row(b.table, &b.scored, name, [&](Scored& s) {
      const auto model = train_fn();
      s.probs = model.predict_proba(x_te);
      s.report = eval::report(p.y_test, ensemble::threshold_labels(s.probs, 0.5), s.probs);
      b.models[name] = model.to_json();
    });
  };
  classical_row("logistic_regression", [&] {
    return classical::LogRegModel::train(x_tr, p.y_train, cfg.logreg);
  });
  classical_row("random_forest", [&] {
    auto f = cfg.forest;
    f.seed = derive_seed(cfg.seed, "forest");
    return classical::ForestModel::train(x_tr, p.y_train, f);
  });
  classical_row("decision_tree", [&] {
    auto t = cfg.tree;
    t.seed = derive_seed(cfg.seed, "tree");
    return classical::TreeModel::train(x_tr, p.y_train, t);
  });
  classical_row("knn", [&] { return classical::KnnModel::train(x_tr, p.y_train, cfg.knn_k); });

  const auto tab_tr = fz.structured(p.train).dense();
  b.test_tabular = fz.structured(p.test).dense();
  const auto desc_tr = features::descriptions(p.train);
  const auto desc_te = features::descriptions(p.test);
  const auto net_row = [&](const neural::NetSpec& base, std::size_t stream,
                           std::optional<neural::TrainedNet>& slot,
                           std::optional<neural::PaddedSequences>& test_seqs) {
    const std::string name{neural::variant_name(base.variant)};
    guarded_row(b.table, &b.scored, name, [&](Scored& s) {
      const auto seqs = neural::build_sequences(desc_tr, base.max_len, cfg.vocab_cap);
      test_seqs = neural::encode(desc_te, seqs.vocabulary, base.max_len);
      auto spec = base;
      spec.vocab_size = seqs.vocab_size();
      spec.tabular_dim = static_cast<std::size_t>(tab_tr.cols());
      auto tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, name);
      slot = neural::train(neural::Net::init(spec, derive_seed(cfg.seed, "net-init", stream)),
                           seqs, tab_tr, p.y_train, tc);
      s.probs = slot->net.predict_proba(*test_seqs, b.test_tabular);
      s.report = eval::report(p.y_test, ensemble::threshold_labels(s.probs, 0.5), s.probs);
      auto j = slot->to_json();
      j["vocabulary"] = seqs.vocabulary->to_json();
      b.models[name] = std::move(j);
    });
  };
  net_row(cfg.ffnn, 0, b.ffnn, b.ffnn_test);
  net_row(cfg.cnn, 1, b.cnn, b.cnn_test);
  b.table.add_error("lstm", kLstmStatus);
  return b;
}

// ---------------------------------------------------------------------------
// Ensembles

std::vector<EnsembleOutcome> run_ensembles(const Prepared& p, const RunConfig& cfg) {
  const auto fz = Featurizer::fit(p.train, cfg);
  const auto x_tr = fz.baseline(p.train), x_te = fz.baseline(p.test);
  std::vector<EnsembleOutcome> out;
  for (auto s : ensemble::all_strategies()) {
    EnsembleOutcome o;
    o.strategy = s;
    try {
      o.result = ensemble::run(s, x_tr, p.y_train, x_te, cfg.ensemble);
      o.report = eval::report(p.y_test, o.result->labels, o.result->probs);
    } catch (const std::exception& e) {
      o.result.reset();
      o.error = error_text(e);
    }
    out.push_back(std::move(o));
  }
  return out;
}

double majority_rate(std::span<const int> y) {
  if (y.empty()) return 0.0;
  const auto ones = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  return static_cast<double>(std::max(ones, y.size() - ones)) /
         static_cast<double>(y.size());
}

}  // namespace vulntriage::pipeline
