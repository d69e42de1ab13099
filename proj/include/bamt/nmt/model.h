// Copyright 2026 The bamt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BAMT_NMT_MODEL_H_
#define BAMT_NMT_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bamt/random.h"

namespace bamt::nmt {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Parameters are grouped by the sub-block they belong to; gradient checks
// report per group.
enum class ParamGroup { kEmbedding, kAttention, kFeedForward, kLayerNorm };
const char *ParamGroupName(ParamGroup g);

template <typename T>
struct Parameter {
  std::string name;
  ParamGroup group;
  Matrix<T> value;
  Matrix<T> grad;
};

struct ModelDims {
  int src_vocab = 0;
  int trg_vocab = 0;
  int hidden = 256;
  int ff = 1024;
  int heads = 4;
  int enc_layers = 6;
  int dec_layers = 6;
  double dropout = 0.1;
  // The output projection is the transposed target embedding.
  bool tie_output = true;
  // One embedding matrix for source and target (needs equal vocabularies).
  bool share_embeddings = false;

  bool operator==(const ModelDims &) const = default;
};

namespace internal {

// Indices into the parameter list.
struct LinearIx { int w = -1, b = -1; };
struct NormIx { int g = -1, b = -1; };
struct AttnIx { LinearIx q, k, v, o; };
struct FfnIx { NormIx norm; LinearIx in, out; };
struct EncLayerIx { NormIx norm; AttnIx self; FfnIx ffn; };
struct DecLayerIx { NormIx norm1; AttnIx self; NormIx norm2; AttnIx cross; FfnIx ffn; };

struct Layout {
  int src_emb = -1;
  int trg_emb = -1;
  int out_proj = -1;  // only without tying
  std::vector<EncLayerIx> enc;
  std::vector<DecLayerIx> dec;
  NormIx enc_final, dec_final;
};

}  // namespace internal

// Pre-norm transformer encoder-decoder (layer norm before every sub-layer,
// final layer norm on both stacks), sinusoidal positions, unscaled
// embeddings. Sentences are processed one at a time, so nothing is padded;
// PAD ids that do occur in a source are masked out as attention keys.
// Gradients are derived by hand.
template <typename T>
class Transformer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  // Xavier-uniform weights, zero biases, unit layer-norm gains.
  Transformer(const ModelDims &dims, std::uint64_t seed);

  const ModelDims &dims() const { return dims_; }
  std::vector<Parameter<T>> &parameters() { return params_; }
  const std::vector<Parameter<T>> &parameters() const { return params_; }
  // Throws InvalidArgument for unknown names.
  Parameter<T> &parameter(const std::string &name);

  struct Memory {
    Matrix<T> states;
    std::vector<char> key_is_pad;
  };

  // Throws InvalidArgument on out-of-range ids.
  Memory Encode(const std::vector<int> &src) const;
  // Row i is the next-token log-distribution after trg_in[0..i]. trg_in
  // starts with BOS.
  Matrix<T> DecodeLogProbs(const Memory &memory,
                           const std::vector<int> &trg_in) const;
  Matrix<T> LogProbs(const std::vector<int> &src,
                     const std::vector<int> &trg_in) const {
    return DecodeLogProbs(Encode(src), trg_in);
  }

  struct LossValue {
    double sum = 0.0;      // smoothed NLL summed over target tokens
    std::int64_t tokens = 0;
  };

  // Teacher-forced loss of one pair, trg_out = y + EOS and the input is
  // BOS + y. Gradients of grad_scale * loss are added to Parameter::grad.
  // Dropout is active iff dropout_rng is non-null.
  LossValue Backprop(const std::vector<int> &src, const std::vector<int> &trg_out,
                     double label_smoothing, Rng *dropout_rng, T grad_scale);
  // Same loss without gradients or dropout.
  LossValue Loss(const std::vector<int> &src, const std::vector<int> &trg_out,
                 double label_smoothing) const;

  void ZeroGrad();
  bool AllFinite() const;
  double ParameterNorm() const;
  std::size_t NumParameters() const;

  // Conversion between precisions (used for gradient checks).
  template <typename U>
  Transformer<U> Cast() const;

 private:
  template <typename U>
  friend class Transformer;
  Transformer() = default;
  int Add(const std::string &name, ParamGroup group, int rows, int cols);
  internal::LinearIx AddLinear(const std::string &name, ParamGroup group,
                               int in, int out, bool bias);
  internal::NormIx AddNorm(const std::string &name);
  internal::AttnIx AddAttention(const std::string &name);
  internal::FfnIx AddFfn(const std::string &name);

  void CheckIds(const std::vector<int> &ids, int vocab, const char *side) const;
  LossValue Run(const std::vector<int> &src, const std::vector<int> &trg_out,
                double label_smoothing, Rng *rng, bool backward, T grad_scale);

  ModelDims dims_;
  std::vector<Parameter<T>> params_;
  internal::Layout layout_;
};

// Sinusoidal position table, rows = positions.
template <typename T>
Matrix<T> PositionalEncoding(int length, int dim);

// Row-wise log-softmax.
template <typename T>
Matrix<T> LogSoftmax(const Matrix<T> &logits);

// Label-smoothed negative log-likelihood: the gold token gets 1 - eps and
// eps is spread uniformly over the vocabulary minus PAD and the gold token.
// Rows whose gold id is PAD are ignored. If grad is non-null it receives
// d(sum)/d(logits) for the logits behind log_probs.
template <typename T>
double SmoothedNll(const Matrix<T> &log_probs, const std::vector<int> &gold,
                   double eps, Matrix<T> *grad = nullptr, int pad_id = 0);

template <typename T>
template <typename U>
Transformer<U> Transformer<T>::Cast() const {
  Transformer<U> out;
  out.dims_ = dims_;
  out.layout_ = layout_;
  for (const auto &p : params_) {
    out.params_.push_back({p.name, p.group, p.value.template cast<U>(),
                           Matrix<U>::Zero(p.value.rows(), p.value.cols())});
  }
  return out;
}

extern template class Transformer<float>;
extern template class Transformer<double>;

}  // namespace bamt::nmt

#endif  // BAMT_NMT_MODEL_H_
