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

#ifndef VULNTRIAGE_NEURAL_HPP_
#define VULNTRIAGE_NEURAL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace vulntriage::neural {

// Token -> id by descending training frequency (ties alphabetical). Id 0 is
// padding, so at most cap - 1 tokens are kept.
class SequenceVocabulary {
 public:
  static SequenceVocabulary fit(std::span<const std::string> texts,
                                std::size_t cap = 3000);

  // 0 when the token is out of vocabulary.
  int id_of(std::string_view token) const;
  // Including the padding id.
  std::size_t size() const { return tokens_.size() + 1; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  nlohmann::json to_json() const;
  static SequenceVocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;  // tokens_[id - 1]
  std::map<std::string, int, std::less<>> ids_;
};

// n x max_len token ids, right-padded with 0.
struct PaddedSequences {
  std::size_t rows = 0;
  std::size_t max_len = 0;
  std::vector<std::int32_t> ids;
  std::shared_ptr<const SequenceVocabulary> vocabulary;

  std::span<const std::int32_t> row(std::size_t i) const {
    return std::span<const std::int32_t>(ids).subspan(i * max_len, max_len);
  }
  std::size_t vocab_size() const { return vocabulary ? vocabulary->size() : 0; }
};

// Out-of-vocabulary tokens are dropped, then the sequence is truncated to its
// first max_len ids.
PaddedSequences encode(std::span<const std::string> texts,
                       std::shared_ptr<const SequenceVocabulary> vocabulary,
                       std::size_t max_len = 64);

// Builds the vocabulary from `train_texts` and encodes them.
PaddedSequences build_sequences(std::span<const std::string> train_texts,
                                std::size_t max_len = 64,
                                std::size_t vocab_size_cap = 3000);

enum class Variant { kFfnn, kCnn };
std::string_view variant_name(Variant v);

struct NetSpec {
  Variant variant = Variant::kFfnn;
  std::size_t vocab_size = 0;
  std::size_t max_len = 64;
  std::size_t tabular_dim = 0;
  std::size_t embedding_dim = 64;
  std::size_t filters = 32;      // cnn only
  std::size_t kernel_width = 3;  // cnn only
  std::size_t tabular_hidden = 32;
  std::vector<std::size_t> merge_hidden = {64, 32};
  double dropout = 0.3;

  // Throws ConfigError on a zero width or dropout outside [0, 1).
  void validate() const;
  nlohmann::json to_json() const;
  static NetSpec from_json(const nlohmann::json& j);
};

// Named slice of the flat parameter vector, stored row-major.
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return rows * cols; }
};

// Dual-input binary classifier.
//   text:     embedding -> mean over non-padding tokens        (ffnn)
//             embedding -> conv1d + ReLU -> global max pool    (cnn)
//   tabular:  dense + ReLU
//   merged:   concat -> [dense + ReLU + dropout] x merge_hidden -> sigmoid
class Net {
 public:
  // Embeddings ~ U(-0.05, 0.05), dense/conv kernels Glorot-uniform, biases 0.
  static Net init(const NetSpec& spec, std::uint64_t seed);
  static Net zeros(const NetSpec& spec);

  const NetSpec& spec() const { return spec_; }
  const std::vector<Tensor>& layout() const { return layout_; }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // Inference mode (no dropout). Throws ShapeError on mismatched inputs.
  std::vector<double> predict_proba(const PaddedSequences& seqs,
                                    const Eigen::MatrixXd& tabular) const;

  // Mean binary cross-entropy over `batch`. When `grad` is non-null it
  // receives the gradient (same layout as parameters()). Dropout is applied
  // only when `dropout_rng` is non-null.
  double loss_and_gradient(const PaddedSequences& seqs,
                           const Eigen::MatrixXd& tabular, std::span<const int> y,
                           std::span<const std::size_t> batch,
                           std::vector<double>* grad,
                           std::mt19937_64* dropout_rng) const;

  // Layer ids: "text_pool", "conv" (cnn), "tabular", "concat", "dense_<i>",
  // "logit". Vector layers come back as a units x 1 matrix; "conv" as
  // filters x positions (post-ReLU). Hidden layers are post-ReLU, "logit" is
  // the pre-sigmoid output. Throws LookupError for unknown ids.
  Eigen::MatrixXd activations(std::string_view layer_id,
                              const PaddedSequences& seqs,
                              const Eigen::MatrixXd& tabular,
                              std::size_t sample) const;
  std::vector<std::string> layer_ids() const;

  nlohmann::json to_json() const;
  static Net from_json(const nlohmann::json& j);

 private:
  struct Cache;

  explicit Net(const NetSpec& spec);
  void forward(std::span<const std::int32_t> tokens,
               const Eigen::Ref<const Eigen::VectorXd>& tab, Cache& cache,
               std::mt19937_64* dropout_rng) const;
  void backward(const Cache& cache, double dlogit, std::vector<double>& grad) const;
  void check_inputs(const PaddedSequences& seqs,
                    const Eigen::MatrixXd& tabular) const;
  const Tensor& tensor(std::size_t index) const { return layout_[index]; }

  NetSpec spec_;
  std::vector<Tensor> layout_;
  std::vector<double> params_;
  // Indices into layout_.
  std::size_t embedding_ = 0, conv_w_ = 0, conv_b_ = 0, tab_w_ = 0, tab_b_ = 0,
              out_w_ = 0, out_b_ = 0;
  std::vector<std::size_t> dense_w_, dense_b_;
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct TrainedNet {
  Net net;
  std::vector<double> loss_history;  // mean training loss per epoch
  TrainConfig config;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  std::size_t steps = 0;

  nlohmann::json to_json() const;
  static TrainedNet from_json(const nlohmann::json& j);
};

// Mini-batch Adam on mean binary cross-entropy; epochs shuffle with a seeded
// permutation and dropout masks come from a seeded stream. Throws
// DivergenceError if the loss becomes non-finite.
TrainedNet train(Net net, const PaddedSequences& seqs,
                 const Eigen::MatrixXd& tabular, std::span<const int> y,
                 const TrainConfig& config = {});

}  // namespace vulntriage::neural

#endif  // VULNTRIAGE_NEURAL_HPP_
