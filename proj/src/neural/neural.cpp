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

#include "vulntriage/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "vulntriage/error.hpp"
#include "vulntriage/features.hpp"
#include "vulntriage/random.hpp"

namespace vulntriage::neural {

namespace {

using Eigen::Index;
using Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<VectorXd>;
using ConstMapVec = Eigen::Map<const VectorXd>;

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Index idx(std::size_t v) { return static_cast<Index>(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Sequences

SequenceVocabulary SequenceVocabulary::fit(std::span<const std::string> texts,
                                           std::size_t cap) {
  if (cap < 2) throw ConfigError("vocabulary cap must be at least 2");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (auto& tok : features::tokenize(text)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > cap - 1) ranked.resize(cap - 1);
  SequenceVocabulary vocab;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    vocab.tokens_.push_back(ranked[k].first);
    vocab.ids_.emplace(ranked[k].first, static_cast<int>(k + 1));
  }
  return vocab;
}

int SequenceVocabulary::id_of(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? 0 : it->second;
}

nlohmann::json SequenceVocabulary::to_json() const { return {{"tokens", tokens_}}; }

SequenceVocabulary SequenceVocabulary::from_json(const nlohmann::json& j) {
  SequenceVocabulary vocab;
  vocab.tokens_ = j.at("tokens").get<std::vector<std::string>>();
  for (std::size_t k = 0; k < vocab.tokens_.size(); ++k) {
    vocab.ids_.emplace(vocab.tokens_[k], static_cast<int>(k + 1));
  }
  return vocab;
}

PaddedSequences encode(std::span<const std::string> texts,
                       std::shared_ptr<const SequenceVocabulary> vocabulary,
                       std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max_len must be positive");
  PaddedSequences seqs;
  seqs.rows = texts.size();
  seqs.max_len = max_len;
  seqs.ids.assign(texts.size() * max_len, 0);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::size_t pos = 0;
    for (const auto& tok : features::tokenize(texts[i])) {
      if (pos == max_len) break;
      const int id = vocabulary->id_of(tok);
      if (id != 0) seqs.ids[i * max_len + pos++] = id;
    }
  }
  seqs.vocabulary = std::move(vocabulary);
  return seqs;
}

PaddedSequences build_sequences(std::span<const std::string> train_texts,
                                std::size_t max_len, std::size_t vocab_size_cap) {
  auto vocab = std::make_shared<const SequenceVocabulary>(
      SequenceVocabulary::fit(train_texts, vocab_size_cap));
  return encode(train_texts, std::move(vocab), max_len);
}

// ---------------------------------------------------------------------------
// Spec

std::string_view variant_name(Variant v) {
  return v == Variant::kFfnn ? "ffnn" : "cnn";
}

void NetSpec::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(fmt::format("{} must be >= 1", what));
  };
  positive(vocab_size, "vocab_size");
  positive(max_len, "max_len");
  positive(tabular_dim, "tabular_dim");
  positive(embedding_dim, "embedding_dim");
  positive(tabular_hidden, "tabular_hidden");
  if (merge_hidden.empty()) throw ConfigError("merge stack needs a layer");
  for (auto h : merge_hidden) positive(h, "merge width");
  if (variant == Variant::kCnn) {
    positive(filters, "filters");
    positive(kernel_width, "kernel_width");
    if (kernel_width > max_len) {
      throw ConfigError("kernel_width exceeds max_len");
    }
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
}

nlohmann::json NetSpec::to_json() const {
  return {{"variant", variant_name(variant)}, {"vocab_size", vocab_size},
          {"max_len", max_len}, {"tabular_dim", tabular_dim},
          {"embedding_dim", embedding_dim}, {"filters", filters},
          {"kernel_width", kernel_width}, {"tabular_hidden", tabular_hidden},
          {"merge_hidden", merge_hidden}, {"dropout", dropout}};
}

NetSpec NetSpec::from_json(const nlohmann::json& j) {
  NetSpec s;
  const auto v = j.at("variant").get<std::string>();
  if (v == "ffnn") s.variant = Variant::kFfnn;
  else if (v == "cnn") s.variant = Variant::kCnn;
  else throw ConfigError("unknown net variant '" + v + "'");
  s.vocab_size = j.at("vocab_size").get<std::size_t>();
  s.max_len = j.at("max_len").get<std::size_t>();
  s.tabular_dim = j.at("tabular_dim").get<std::size_t>();
  s.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  s.filters = j.at("filters").get<std::size_t>();
  s.kernel_width = j.at("kernel_width").get<std::size_t>();
  s.tabular_hidden = j.at("tabular_hidden").get<std::size_t>();
  s.merge_hidden = j.at("merge_hidden").get<std::vector<std::size_t>>();
  s.dropout = j.at("dropout").get<double>();
  return s;
}

// ---------------------------------------------------------------------------
// Net

struct Net::Cache {
  std::vector<std::int32_t> tokens;
  std::size_t non_padding = 0;
  RowMat sequence;  // cnn: max_len x embedding_dim
  RowMat conv;      // cnn: filters x positions, post-ReLU
  std::vector<Index> argmax;
  VectorXd pooled;
  VectorXd tab_in;
  VectorXd tab_pre;
  VectorXd tab_act;
  VectorXd concat;
  std::vector<VectorXd> pre;
  std::vector<VectorXd> post;
  std::vector<VectorXd> mask;
  double logit = 0.0;
  double prob = 0.5;
};

Net::Net(const NetSpec& spec) : spec_(spec) {
  spec_.validate();
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    layout_.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
    return layout_.size() - 1;
  };
  const std::size_t e = spec_.embedding_dim;
  embedding_ = add("embedding", spec_.vocab_size, e);
  std::size_t text_dim = e;
  if (spec_.variant == Variant::kCnn) {
    conv_w_ = add("conv_w", spec_.filters, spec_.kernel_width * e);
    conv_b_ = add("conv_b", spec_.filters, 1);
    text_dim = spec_.filters;
  }
  tab_w_ = add("tabular_w", spec_.tabular_hidden, spec_.tabular_dim);
  tab_b_ = add("tabular_b", spec_.tabular_hidden, 1);
  std::size_t prev = text_dim + spec_.tabular_hidden;
  for (std::size_t i = 0; i < spec_.merge_hidden.size(); ++i) {
    dense_w_.push_back(add(fmt::format("dense_{}_w", i), spec_.merge_hidden[i], prev));
    dense_b_.push_back(add(fmt::format("dense_{}_b", i), spec_.merge_hidden[i], 1));
    prev = spec_.merge_hidden[i];
  }
  out_w_ = add("output_w", 1, prev);
  out_b_ = add("output_b", 1, 1);
  params_.assign(offset, 0.0);
}

Net Net::zeros(const NetSpec& spec) { return Net(spec); }

Net Net::init(const NetSpec& spec, std::uint64_t seed) {
  Net net(spec);
  Rng rng(seed);
  auto fill_uniform = [&](const Tensor& t, double limit) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t k = 0; k < t.size(); ++k) net.params_[t.offset + k] = dist(rng);
  };
  auto glorot = [&](const Tensor& t, double fan_in, double fan_out) {
    fill_uniform(t, std::sqrt(6.0 / (fan_in + fan_out)));
  };
  fill_uniform(net.tensor(net.embedding_), 0.05);
  if (spec.variant == Variant::kCnn) {
    const double w = static_cast<double>(spec.kernel_width);
    glorot(net.tensor(net.conv_w_), w * static_cast<double>(spec.embedding_dim),
           w * static_cast<double>(spec.filters));
  }
  for (auto k : std::vector<std::size_t>{net.tab_w_, net.out_w_}) {
    const auto& t = net.tensor(k);
    glorot(t, static_cast<double>(t.cols), static_cast<double>(t.rows));
  }
  for (auto k : net.dense_w_) {
    const auto& t = net.tensor(k);
    glorot(t, static_cast<double>(t.cols), static_cast<double>(t.rows));
  }
  return net;
}

void Net::check_inputs(const PaddedSequences& seqs,
                       const Eigen::MatrixXd& tabular) const {
  if (seqs.max_len != spec_.max_len) {
    throw ShapeError(fmt::format("sequences have length {}, net expects {}",
                                 seqs.max_len, spec_.max_len));
  }
  if (static_cast<std::size_t>(tabular.rows()) != seqs.rows) {
    throw ShapeError("sequence and tabular row counts differ");
  }
  if (static_cast<std::size_t>(tabular.cols()) != spec_.tabular_dim) {
    throw ShapeError(fmt::format("tabular input has {} columns, net expects {}",
                                 tabular.cols(), spec_.tabular_dim));
  }
  for (auto id : seqs.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= spec_.vocab_size) {
      throw ShapeError(fmt::format("token id {} outside vocabulary of {}", id,
                                   spec_.vocab_size));
    }
  }
}

void Net::forward(std::span<const std::int32_t> tokens,
                  const Eigen::Ref<const VectorXd>& tab, Cache& c,
                  std::mt19937_64* dropout_rng) const {
  const auto& te = tensor(embedding_);
  ConstMapMat emb(params_.data() + te.offset, idx(te.rows), idx(te.cols));
  const Index e = idx(spec_.embedding_dim);
  c.tokens.assign(tokens.begin(), tokens.end());

  if (spec_.variant == Variant::kFfnn) {
    c.pooled = VectorXd::Zero(e);
    c.non_padding = 0;
    for (auto id : tokens) {
      if (id == 0) continue;
      c.pooled += emb.row(id).transpose();
      ++c.non_padding;
    }
    if (c.non_padding) c.pooled /= static_cast<double>(c.non_padding);
  } else {
    const Index len = idx(spec_.max_len);
    const Index width = idx(spec_.kernel_width);
    const Index positions = len - width + 1;
    const Index filters = idx(spec_.filters);
    c.sequence.resize(len, e);
    for (Index t = 0; t < len; ++t) c.sequence.row(t) = emb.row(tokens[t]);
    const auto& tw = tensor(conv_w_);
    ConstMapMat kernel(params_.data() + tw.offset, filters, width * e);
    ConstMapVec bias(params_.data() + tensor(conv_b_).offset, filters);
    c.conv.resize(filters, positions);
    for (Index t = 0; t < positions; ++t) {
      ConstMapVec window(c.sequence.data() + t * e, width * e);
      c.conv.col(t) = (kernel * window + bias).cwiseMax(0.0);
    }
    c.pooled.resize(filters);
    c.argmax.assign(static_cast<std::size_t>(filters), 0);
    for (Index f = 0; f < filters; ++f) {
      Index best = 0;
      for (Index t = 1; t < positions; ++t) {
        if (c.conv(f, t) > c.conv(f, best)) best = t;
      }
      c.argmax[static_cast<std::size_t>(f)] = best;
      c.pooled(f) = c.conv(f, best);
    }
  }

  const auto& ttw = tensor(tab_w_);
  ConstMapMat tab_w(params_.data() + ttw.offset, idx(ttw.rows), idx(ttw.cols));
  ConstMapVec tab_b(params_.data() + tensor(tab_b_).offset, idx(ttw.rows));
  c.tab_in = tab;
  c.tab_pre = tab_w * c.tab_in + tab_b;
  c.tab_act = c.tab_pre.cwiseMax(0.0);

  c.concat.resize(c.pooled.size() + c.tab_act.size());
  c.concat << c.pooled, c.tab_act;

  const std::size_t layers = dense_w_.size();
  c.pre.resize(layers);
  c.post.resize(layers);
  c.mask.assign(layers, VectorXd());
  const double keep = 1.0 - spec_.dropout;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& tw = tensor(dense_w_[l]);
    ConstMapMat w(params_.data() + tw.offset, idx(tw.rows), idx(tw.cols));
    ConstMapVec b(params_.data() + tensor(dense_b_[l]).offset, idx(tw.rows));
    const VectorXd& input = l == 0 ? c.concat : c.post[l - 1];
    c.pre[l] = w * input + b;
    c.post[l] = c.pre[l].cwiseMax(0.0);
    if (dropout_rng && spec_.dropout > 0.0) {
      c.mask[l].resize(c.post[l].size());
      for (Index k = 0; k < c.mask[l].size(); ++k) {
        c.mask[l](k) = unit(*dropout_rng) < keep ? 1.0 / keep : 0.0;
      }
      c.post[l] = c.post[l].cwiseProduct(c.mask[l]);
    }
  }
  const auto& tow = tensor(out_w_);
  ConstMapVec out_w(params_.data() + tow.offset, idx(tow.cols));
  c.logit = out_w.dot(c.post.back()) + params_[tensor(out_b_).offset];
  c.prob = stable_sigmoid(c.logit);
}

void Net::backward(const Cache& c, double dlogit, std::vector<double>& grad) const {
  const auto& tow = tensor(out_w_);
  ConstMapVec out_w(params_.data() + tow.offset, idx(tow.cols));
  MapVec g_out_w(grad.data() + tow.offset, idx(tow.cols));
  g_out_w += dlogit * c.post.back();
  grad[tensor(out_b_).offset] += dlogit;

  VectorXd da = dlogit * out_w;
  for (std::size_t l = dense_w_.size(); l-- > 0;) {
    if (c.mask[l].size()) da = da.cwiseProduct(c.mask[l]);
    VectorXd dz = da.cwiseProduct(
        (c.pre[l].array() > 0.0).cast<double>().matrix());
    const auto& tw = tensor(dense_w_[l]);
    ConstMapMat w(params_.data() + tw.offset, idx(tw.rows), idx(tw.cols));
    MapMat gw(grad.data() + tw.offset, idx(tw.rows), idx(tw.cols));
    MapVec gb(grad.data() + tensor(dense_b_[l]).offset, idx(tw.rows));
    const VectorXd& input = l == 0 ? c.concat : c.post[l - 1];
    gw.noalias() += dz * input.transpose();
    gb += dz;
    da = w.transpose() * dz;
  }

  const Index text_dim = c.pooled.size();
  const VectorXd d_pooled = da.head(text_dim);
  const VectorXd d_tab = da.tail(da.size() - text_dim);

  const auto& ttw = tensor(tab_w_);
  MapMat g_tab_w(grad.data() + ttw.offset, idx(ttw.rows), idx(ttw.cols));
  MapVec g_tab_b(grad.data() + tensor(tab_b_).offset, idx(ttw.rows));
  const VectorXd dz_tab =
      d_tab.cwiseProduct((c.tab_pre.array() > 0.0).cast<double>().matrix());
  g_tab_w.noalias() += dz_tab * c.tab_in.transpose();
  g_tab_b += dz_tab;

  const auto& te = tensor(embedding_);
  MapMat g_emb(grad.data() + te.offset, idx(te.rows), idx(te.cols));
  if (spec_.variant == Variant::kFfnn) {
    if (c.non_padding == 0) return;
    const VectorXd share = d_pooled / static_cast<double>(c.non_padding);
    for (auto id : c.tokens) {
      if (id != 0) g_emb.row(id) += share.transpose();
    }
    return;
  }
  const Index e = idx(spec_.embedding_dim);
  const Index width = idx(spec_.kernel_width);
  const auto& tw = tensor(conv_w_);
  ConstMapMat kernel(params_.data() + tw.offset, idx(tw.rows), idx(tw.cols));
  MapMat g_kernel(grad.data() + tw.offset, idx(tw.rows), idx(tw.cols));
  MapVec g_conv_b(grad.data() + tensor(conv_b_).offset, idx(tw.rows));
  for (Index f = 0; f < idx(spec_.filters); ++f) {
    const Index t = c.argmax[static_cast<std::size_t>(f)];
    if (!(c.conv(f, t) > 0.0)) continue;
    const double g = d_pooled(f);
    g_conv_b(f) += g;
    ConstMapVec window(c.sequence.data() + t * e, width * e);
    g_kernel.row(f) += g * window.transpose();
    for (Index w = 0; w < width; ++w) {
      g_emb.row(c.tokens[static_cast<std::size_t>(t + w)]) +=
          g * kernel.row(f).segment(w * e, e);
    }
  }
}

std::vector<double> Net::predict_proba(const PaddedSequences& seqs,
                                       const Eigen::MatrixXd& tabular) const {
  check_inputs(seqs, tabular);
  std::vector<double> out(seqs.rows);
  Cache cache;
  for (std::size_t i = 0; i < seqs.rows; ++i) {
    forward(seqs.row(i), tabular.row(idx(i)).transpose(), cache, nullptr);
    out[i] = cache.prob;
  }
  return out;
}

double Net::loss_and_gradient(const PaddedSequences& seqs,
                              const Eigen::MatrixXd& tabular,
                              std::span<const int> y,
                              std::span<const std::size_t> batch,
                              std::vector<double>* grad,
                              std::mt19937_64* dropout_rng) const {
  check_inputs(seqs, tabular);
  if (y.size() != seqs.rows) throw ShapeError("label count differs from rows");
  if (batch.empty()) throw ConfigError("empty batch");
  if (grad) grad->assign(params_.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Cache cache;
  for (auto i : batch) {
    if (i >= seqs.rows) throw ShapeError("batch index out of range");
    forward(seqs.row(i), tabular.row(idx(i)).transpose(), cache, dropout_rng);
    loss += softplus(cache.logit) - y[i] * cache.logit;
    if (grad) backward(cache, (cache.prob - y[i]) * scale, *grad);
  }
  return loss * scale;
}

std::vector<std::string> Net::layer_ids() const {
  std::vector<std::string> ids{"text_pool"};
  if (spec_.variant == Variant::kCnn) ids.emplace_back("conv");
  ids.emplace_back("tabular");
  ids.emplace_back("concat");
  for (std::size_t l = 0; l < dense_w_.size(); ++l) {
    ids.push_back(fmt::format("dense_{}", l));
  }
  ids.emplace_back("logit");
  return ids;
}

Eigen::MatrixXd Net::activations(std::string_view layer_id,
                                 const PaddedSequences& seqs,
                                 const Eigen::MatrixXd& tabular,
                                 std::size_t sample) const {
  const auto ids = layer_ids();
  if (std::find(ids.begin(), ids.end(), layer_id) == ids.end()) {
    throw LookupError(fmt::format("no layer '{}' in {} net", layer_id,
                                  variant_name(spec_.variant)));
  }
  check_inputs(seqs, tabular);
  if (sample >= seqs.rows) throw ShapeError("sample index out of range");
  Cache c;
  forward(seqs.row(sample), tabular.row(idx(sample)).transpose(), c, nullptr);
  if (layer_id == "text_pool") return c.pooled;
  if (layer_id == "conv") return c.conv;
  if (layer_id == "tabular") return c.tab_act;
  if (layer_id == "concat") return c.concat;
  if (layer_id == "logit") return Eigen::MatrixXd::Constant(1, 1, c.logit);
  const auto layer = std::stoul(std::string(layer_id.substr(6)));
  return c.post[layer];
}

nlohmann::json Net::to_json() const {
  auto layout = nlohmann::json::array();
  for (const auto& t : layout_) layout.push_back({t.name, t.rows, t.cols});
  return {{"spec", spec_.to_json()}, {"layout", layout}, {"parameters", params_}};
}

Net Net::from_json(const nlohmann::json& j) {
  Net net(NetSpec::from_json(j.at("spec")));
  const auto& layout = j.at("layout");
  if (layout.size() != net.layout_.size()) throw ShapeError("net layout mismatch");
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].at(1).get<std::size_t>() != net.layout_[k].rows ||
        layout[k].at(2).get<std::size_t>() != net.layout_[k].cols) {
      throw ShapeError("net tensor shape mismatch at " + net.layout_[k].name);
    }
  }
  auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != net.params_.size()) {
    throw ShapeError("net parameter count mismatch");
  }
  net.params_ = std::move(params);
  return net;
}

// ---------------------------------------------------------------------------
// Training

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs}, {"batch_size", batch_size},
          {"learning_rate", learning_rate}, {"beta1", beta1}, {"beta2", beta2},
          {"epsilon", epsilon}, {"seed", seed}};
}

nlohmann::json TrainedNet::to_json() const {
  return {{"net", net.to_json()}, {"loss_history", loss_history},
          {"train_config", config.to_json()}, {"steps", steps}};
}

TrainedNet TrainedNet::from_json(const nlohmann::json& j) {
  TrainedNet t{Net::from_json(j.at("net")), {}, {}, {}, {}, 0};
  t.loss_history = j.at("loss_history").get<std::vector<double>>();
  const auto& c = j.at("train_config");
  t.config.epochs = c.at("epochs").get<std::size_t>();
  t.config.batch_size = c.at("batch_size").get<std::size_t>();
  t.config.learning_rate = c.at("learning_rate").get<double>();
  t.config.beta1 = c.at("beta1").get<double>();
  t.config.beta2 = c.at("beta2").get<double>();
  t.config.epsilon = c.at("epsilon").get<double>();
  t.config.seed = c.at("seed").get<std::uint64_t>();
  t.steps = j.value("steps", std::size_t{0});
  return t;
}

TrainedNet train(Net net, const PaddedSequences& seqs,
                 const Eigen::MatrixXd& tabular, std::span<const int> y,
                 const TrainConfig& config) {
  if (y.size() != seqs.rows || static_cast<std::size_t>(tabular.rows()) != seqs.rows) {
    throw ShapeError("inconsistent row counts for training");
  }
  if (seqs.rows == 0) throw FitError("no training samples");
  if (config.batch_size == 0) throw ConfigError("batch size must be >= 1");

  TrainedNet out{std::move(net), {}, config, {}, {}, 0};
  auto& params = out.net.parameters();
  out.adam_m.assign(params.size(), 0.0);
  out.adam_v.assign(params.size(), 0.0);

  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  std::vector<std::size_t> order(seqs.rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      const double loss = out.net.loss_and_gradient(seqs, tabular, y, batch, &grad,
                                                    &dropout_rng);
      if (!std::isfinite(loss)) {
        throw DivergenceError(fmt::format("non-finite loss in epoch {}", epoch + 1));
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      ++out.steps;
      const double t = static_cast<double>(out.steps);
      const double lr = config.learning_rate *
                        std::sqrt(1.0 - std::pow(config.beta2, t)) /
                        (1.0 - std::pow(config.beta1, t));
      for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grad[k];
        out.adam_m[k] = config.beta1 * out.adam_m[k] + (1.0 - config.beta1) * g;
        out.adam_v[k] = config.beta2 * out.adam_v[k] + (1.0 - config.beta2) * g * g;
        params[k] -= lr * out.adam_m[k] / (std::sqrt(out.adam_v[k]) + config.epsilon);
      }
    }
    const double mean_loss = epoch_loss / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss)) throw DivergenceError("non-finite epoch loss");
    out.loss_history.push_back(mean_loss);
  }
  return out;
}

}  // namespace vulntriage::neural
