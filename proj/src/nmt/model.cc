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

#include "bamt/nmt/model.h"

#include <cmath>
#include <limits>

#include "bamt/common.h"

namespace bamt::nmt {

using internal::AttnIx;
using internal::DecLayerIx;
using internal::EncLayerIx;
using internal::FfnIx;
using internal::LinearIx;
using internal::NormIx;

const char *ParamGroupName(ParamGroup g) {
  switch (g) {
    case ParamGroup::kEmbedding:
      return "embedding";
    case ParamGroup::kAttention:
      return "attention";
    case ParamGroup::kFeedForward:
      return "ffn";
    case ParamGroup::kLayerNorm:
      return "layernorm";
  }
  return "?";
}

namespace {

constexpr double kNormEps = 1e-6;

template <typename T>
using Params = std::vector<Parameter<T>>;
template <typename T>
using Column = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
Matrix<T> LinearForward(const Params<T> &p, const LinearIx &ix,
                        const Matrix<T> &x) {
  Matrix<T> y = x * p[ix.w].value;
  if (ix.b >= 0) y.rowwise() += p[ix.b].value.row(0);
  return y;
}

template <typename T>
Matrix<T> LinearBackward(Params<T> &p, const LinearIx &ix, const Matrix<T> &x,
                         const Matrix<T> &dy) {
  p[ix.w].grad.noalias() += x.transpose() * dy;
  if (ix.b >= 0) p[ix.b].grad.row(0) += dy.colwise().sum();
  return dy * p[ix.w].value.transpose();
}

template <typename T>
struct NormCache {
  Matrix<T> xhat;
  Column<T> rstd;
};

template <typename T>
Matrix<T> NormForward(const Params<T> &p, const NormIx &ix, const Matrix<T> &x,
                      NormCache<T> *c) {
  const Column<T> mean = x.rowwise().mean();
  Matrix<T> xc = x.colwise() - mean;
  const Column<T> var = xc.array().square().rowwise().mean();
  c->rstd = (var.array() + T(kNormEps)).rsqrt();
  c->xhat = xc.array().colwise() * c->rstd.array();
  Matrix<T> y = c->xhat.array().rowwise() * p[ix.g].value.row(0).array();
  y.rowwise() += p[ix.b].value.row(0);
  return y;
}

template <typename T>
Matrix<T> NormBackward(Params<T> &p, const NormIx &ix, const NormCache<T> &c,
                       const Matrix<T> &dy) {
  p[ix.g].grad.row(0) += dy.cwiseProduct(c.xhat).colwise().sum();
  p[ix.b].grad.row(0) += dy.colwise().sum();
  const Matrix<T> dxhat = dy.array().rowwise() * p[ix.g].value.row(0).array();
  const Column<T> m1 = dxhat.rowwise().mean();
  const Column<T> m2 = dxhat.cwiseProduct(c.xhat).rowwise().mean();
  Matrix<T> dx = dxhat.colwise() - m1;
  dx -= (c.xhat.array().colwise() * m2.array()).matrix();
  return dx.array().colwise() * c.rstd.array();
}

// Inverted dropout. An empty mask means "identity".
template <typename T>
Matrix<T> DropoutForward(const Matrix<T> &x, double p, Rng *rng,
                         Matrix<T> *mask) {
  if (!rng || p <= 0.0) {
    mask->resize(0, 0);
    return x;
  }
  const T keep = T(1.0 / (1.0 - p));
  mask->resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask->size(); ++i) {
    mask->data()[i] = rng->Uniform() < p ? T(0) : keep;
  }
  return x.cwiseProduct(*mask);
}

template <typename T>
Matrix<T> DropoutBackward(const Matrix<T> &dy, const Matrix<T> &mask) {
  return mask.size() ? Matrix<T>(dy.cwiseProduct(mask)) : dy;
}

template <typename T>
struct AttnCache {
  Matrix<T> xq, xkv, q, k, v, ctx;
  std::vector<Matrix<T>> probs, masks;
};

template <typename T>
Matrix<T> AttnForward(const Params<T> &p, const AttnIx &ix, int heads,
                      const Matrix<T> &xq, const Matrix<T> &xkv,
                      const std::vector<char> &key_is_pad, bool causal,
                      double dropout, Rng *rng, AttnCache<T> *c) {
  c->xq = xq;
  c->xkv = xkv;
  c->q = LinearForward(p, ix.q, xq);
  c->k = LinearForward(p, ix.k, xkv);
  c->v = LinearForward(p, ix.v, xkv);
  const Eigen::Index tq = xq.rows();
  const Eigen::Index tk = xkv.rows();
  const Eigen::Index d = c->q.cols();
  const Eigen::Index dk = d / heads;
  const T scale = T(1.0 / std::sqrt(static_cast<double>(dk)));
  const T neg_inf = -std::numeric_limits<T>::infinity();
  c->ctx = Matrix<T>::Zero(tq, d);
  c->probs.assign(heads, Matrix<T>());
  c->masks.assign(heads, Matrix<T>());
  for (int h = 0; h < heads; ++h) {
    Matrix<T> s = c->q.middleCols(h * dk, dk) *
                  c->k.middleCols(h * dk, dk).transpose() * scale;
    for (Eigen::Index i = 0; i < tq; ++i) {
      for (Eigen::Index j = 0; j < tk; ++j) {
        if ((!key_is_pad.empty() && key_is_pad[j]) || (causal && j > i)) {
          s(i, j) = neg_inf;
        }
      }
      const T mx = s.row(i).maxCoeff();
      if (mx == neg_inf) {
        s.row(i).setZero();
        continue;
      }
      s.row(i) = (s.row(i).array() - mx).exp().matrix();
      s.row(i) /= s.row(i).sum();
    }
    const Matrix<T> dropped = DropoutForward(s, dropout, rng, &c->masks[h]);
    c->ctx.middleCols(h * dk, dk).noalias() =
        dropped * c->v.middleCols(h * dk, dk);
    c->probs[h] = std::move(s);
  }
  return LinearForward(p, ix.o, c->ctx);
}

// Returns the gradient with respect to xq; the key/value input gradient is
// added to *dxkv (which may alias nothing but must be sized).
template <typename T>
Matrix<T> AttnBackward(Params<T> &p, const AttnIx &ix, int heads,
                       const AttnCache<T> &c, const Matrix<T> &dout,
                       Matrix<T> *dxkv) {
  const Matrix<T> dctx = LinearBackward(p, ix.o, c.ctx, dout);
  const Eigen::Index d = c.q.cols();
  const Eigen::Index dk = d / heads;
  const T scale = T(1.0 / std::sqrt(static_cast<double>(dk)));
  Matrix<T> dq = Matrix<T>::Zero(c.q.rows(), d);
  Matrix<T> dk_all = Matrix<T>::Zero(c.k.rows(), d);
  Matrix<T> dv = Matrix<T>::Zero(c.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Matrix<T> &prob = c.probs[h];
    const auto vh = c.v.middleCols(h * dk, dk);
    const auto dctx_h = dctx.middleCols(h * dk, dk);
    const Matrix<T> dropped =
        c.masks[h].size() ? Matrix<T>(prob.cwiseProduct(c.masks[h])) : prob;
    dv.middleCols(h * dk, dk).noalias() += dropped.transpose() * dctx_h;
    Matrix<T> dprob = dctx_h * vh.transpose();
    if (c.masks[h].size()) dprob = dprob.cwiseProduct(c.masks[h]);
    const Column<T> dot = dprob.cwiseProduct(prob).rowwise().sum();
    Matrix<T> ds = (dprob.colwise() - dot).cwiseProduct(prob) * scale;
    dq.middleCols(h * dk, dk).noalias() += ds * c.k.middleCols(h * dk, dk);
    dk_all.middleCols(h * dk, dk).noalias() +=
        ds.transpose() * c.q.middleCols(h * dk, dk);
  }
  *dxkv += LinearBackward(p, ix.k, c.xkv, dk_all);
  *dxkv += LinearBackward(p, ix.v, c.xkv, dv);
  return LinearBackward(p, ix.q, c.xq, dq);
}

template <typename T>
struct FfnCache {
  NormCache<T> norm;
  Matrix<T> xn, a, rd, m1, m2;
};

template <typename T>
Matrix<T> FfnForward(const Params<T> &p, const FfnIx &ix, const Matrix<T> &x,
                     double dropout, Rng *rng, FfnCache<T> *c) {
  c->xn = NormForward(p, ix.norm, x, &c->norm);
  c->a = LinearForward(p, ix.in, c->xn);
  const Matrix<T> r = c->a.cwiseMax(T(0));
  c->rd = DropoutForward(r, dropout, rng, &c->m1);
  const Matrix<T> o = LinearForward(p, ix.out, c->rd);
  return x + DropoutForward(o, dropout, rng, &c->m2);
}

template <typename T>
Matrix<T> FfnBackward(Params<T> &p, const FfnIx &ix, const FfnCache<T> &c,
                      const Matrix<T> &dy) {
  const Matrix<T> dout = DropoutBackward(dy, c.m2);
  Matrix<T> dr = DropoutBackward(LinearBackward(p, ix.out, c.rd, dout), c.m1);
  for (Eigen::Index i = 0; i < dr.size(); ++i) {
    if (!(c.a.data()[i] > T(0))) dr.data()[i] = T(0);
  }
  const Matrix<T> dxn = LinearBackward(p, ix.in, c.xn, dr);
  return dy + NormBackward(p, ix.norm, c.norm, dxn);
}

template <typename T>
struct EncLayerCache {
  NormCache<T> norm;
  AttnCache<T> attn;
  Matrix<T> drop;
  FfnCache<T> ffn;
};

template <typename T>
struct DecLayerCache {
  NormCache<T> norm1, norm2;
  AttnCache<T> self, cross;
  Matrix<T> drop1, drop2;
  FfnCache<T> ffn;
};

template <typename T>
Matrix<T> XavierUniform(int rows, int cols, Rng *rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = T((2.0 * rng->Uniform() - 1.0) * limit);
  }
  return m;
}

}  // namespace

template <typename T>
Matrix<T> PositionalEncoding(int length, int dim) {
  Matrix<T> pe(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      const double angle =
          pos / std::pow(10000.0, static_cast<double>(i) / dim);
      pe(pos, i) = T(std::sin(angle));
      if (i + 1 < dim) pe(pos, i + 1) = T(std::cos(angle));
    }
  }
  return pe;
}

template <typename T>
Matrix<T> LogSoftmax(const Matrix<T> &logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const T mx = logits.row(i).maxCoeff();
    const T lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

template <typename T>
double SmoothedNll(const Matrix<T> &log_probs, const std::vector<int> &gold,
                   double eps, Matrix<T> *grad, int pad_id) {
  const Eigen::Index v = log_probs.cols();
  if (static_cast<Eigen::Index>(gold.size()) != log_probs.rows()) {
    throw InvalidArgument("gold length does not match the number of rows");
  }
  if (eps > 0 && v <= 2) {
    throw InvalidArgument("label smoothing needs more than two classes");
  }
  const double off = v > 2 ? eps / static_cast<double>(v - 2) : 0.0;
  if (grad) grad->setZero(log_probs.rows(), v);
  double loss = 0.0;
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    const int g = gold[t];
    if (g == pad_id) continue;
    if (g < 0 || g >= v) throw InvalidArgument("gold id out of range");
    double row = 0.0;
    for (Eigen::Index k = 0; k < v; ++k) {
      double q = off;
      if (k == g) q = 1.0 - eps;
      if (k == pad_id) q = 0.0;
      if (q != 0.0) row -= q * static_cast<double>(log_probs(t, k));
      if (grad) {
        (*grad)(t, k) = T(std::exp(static_cast<double>(log_probs(t, k))) - q);
      }
    }
    loss += row;
  }
  return loss;
}

template <typename T>
Transformer<T>::Transformer(const ModelDims &dims, std::uint64_t seed)
    : dims_(dims) {
  if (dims.src_vocab <= 0 || dims.trg_vocab <= 0 || dims.hidden <= 0 ||
      dims.ff <= 0 || dims.heads <= 0 || dims.hidden % dims.heads != 0 ||
      dims.enc_layers <= 0 || dims.dec_layers <= 0) {
    throw InvalidArgument("invalid model dimensions");
  }
  if (dims.share_embeddings && dims.src_vocab != dims.trg_vocab) {
    throw InvalidArgument("shared embeddings need equal vocabulary sizes");
  }
  const int d = dims.hidden;
  layout_.src_emb = Add("src_embed", ParamGroup::kEmbedding, dims.src_vocab, d);
  layout_.trg_emb = dims.share_embeddings
                        ? layout_.src_emb
                        : Add("trg_embed", ParamGroup::kEmbedding,
                              dims.trg_vocab, d);
  for (int l = 0; l < dims.enc_layers; ++l) {
    const std::string n = "encoder." + std::to_string(l) + ".";
    layout_.enc.push_back({AddNorm(n + "norm"), AddAttention(n + "self"),
                           AddFfn(n + "ffn")});
  }
  layout_.enc_final = AddNorm("encoder.final_norm");
  for (int l = 0; l < dims.dec_layers; ++l) {
    const std::string n = "decoder." + std::to_string(l) + ".";
    DecLayerIx layer;
    layer.norm1 = AddNorm(n + "norm1");
    layer.self = AddAttention(n + "self");
    layer.norm2 = AddNorm(n + "norm2");
    layer.cross = AddAttention(n + "cross");
    layer.ffn = AddFfn(n + "ffn");
    layout_.dec.push_back(layer);
  }
  layout_.dec_final = AddNorm("decoder.final_norm");
  if (!dims.tie_output) {
    layout_.out_proj =
        Add("output.w", ParamGroup::kEmbedding, d, dims.trg_vocab);
  }

  Rng rng(seed);
  for (auto &p : params_) {
    const bool is_norm_gain = p.name.ends_with(".g");
    const bool is_bias = p.name.ends_with(".b");
    if (is_norm_gain) {
      p.value.setOnes();
    } else if (is_bias) {
      p.value.setZero();
    } else {
      p.value = XavierUniform<T>(static_cast<int>(p.value.rows()),
                                 static_cast<int>(p.value.cols()), &rng);
    }
  }
}

template <typename T>
int Transformer<T>::Add(const std::string &name, ParamGroup group, int rows,
                        int cols) {
  params_.push_back({name, group, Matrix<T>::Zero(rows, cols),
                     Matrix<T>::Zero(rows, cols)});
  return static_cast<int>(params_.size()) - 1;
}

template <typename T>
LinearIx Transformer<T>::AddLinear(const std::string &name, ParamGroup group,
                                   int in, int out, bool bias) {
  LinearIx ix;
  ix.w = Add(name + ".w", group, in, out);
  if (bias) ix.b = Add(name + ".b", group, 1, out);
  return ix;
}

template <typename T>
NormIx Transformer<T>::AddNorm(const std::string &name) {
  return {Add(name + ".g", ParamGroup::kLayerNorm, 1, dims_.hidden),
          Add(name + ".b", ParamGroup::kLayerNorm, 1, dims_.hidden)};
}

template <typename T>
AttnIx Transformer<T>::AddAttention(const std::string &name) {
  const int d = dims_.hidden;
  const auto g = ParamGroup::kAttention;
  return {AddLinear(name + ".q", g, d, d, true),
          AddLinear(name + ".k", g, d, d, true),
          AddLinear(name + ".v", g, d, d, true),
          AddLinear(name + ".o", g, d, d, true)};
}

template <typename T>
FfnIx Transformer<T>::AddFfn(const std::string &name) {
  const auto g = ParamGroup::kFeedForward;
  return {AddNorm(name + ".norm"),
          AddLinear(name + ".in", g, dims_.hidden, dims_.ff, true),
          AddLinear(name + ".out", g, dims_.ff, dims_.hidden, true)};
}

template <typename T>
Parameter<T> &Transformer<T>::parameter(const std::string &name) {
  for (auto &p : params_) {
    if (p.name == name) return p;
  }
  throw InvalidArgument("no parameter named " + name);
}

template <typename T>
void Transformer<T>::CheckIds(const std::vector<int> &ids, int vocab,
                              const char *side) const {
  for (int id : ids) {
    if (id < 0 || id >= vocab) {
      throw InvalidArgument(std::string(side) + " id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(vocab));
    }
  }
}

template <typename T>
typename Transformer<T>::Memory Transformer<T>::Encode(
    const std::vector<int> &src) const {
  CheckIds(src, dims_.src_vocab, "source");
  if (src.empty()) throw InvalidArgument("empty source sequence");
  const int n = static_cast<int>(src.size());
  Matrix<T> x(n, dims_.hidden);
  for (int i = 0; i < n; ++i) x.row(i) = params_[layout_.src_emb].value.row(src[i]);
  x += PositionalEncoding<T>(n, dims_.hidden);
  Memory m;
  m.key_is_pad.resize(n);
  for (int i = 0; i < n; ++i) m.key_is_pad[i] = src[i] == kPad;
  for (const auto &layer : layout_.enc) {
    NormCache<T> nc;
    AttnCache<T> ac;
    const Matrix<T> xn = NormForward(params_, layer.norm, x, &nc);
    Matrix<T> h = x + AttnForward(params_, layer.self, dims_.heads, xn, xn,
                                  m.key_is_pad, false, 0.0, nullptr, &ac);
    FfnCache<T> fc;
    x = FfnForward(params_, layer.ffn, h, 0.0, nullptr, &fc);
  }
  NormCache<T> nc;
  m.states = NormForward(params_, layout_.enc_final, x, &nc);
  return m;
}

template <typename T>
Matrix<T> Transformer<T>::DecodeLogProbs(const Memory &memory,
                                         const std::vector<int> &trg_in) const {
  CheckIds(trg_in, dims_.trg_vocab, "target");
  if (trg_in.empty()) throw InvalidArgument("empty target prefix");
  const int n = static_cast<int>(trg_in.size());
  Matrix<T> x(n, dims_.hidden);
  for (int i = 0; i < n; ++i) x.row(i) = params_[layout_.trg_emb].value.row(trg_in[i]);
  x += PositionalEncoding<T>(n, dims_.hidden);
  const std::vector<char> no_pad;
  for (const auto &layer : layout_.dec) {
    NormCache<T> n1, n2;
    AttnCache<T> a1, a2;
    FfnCache<T> fc;
    const Matrix<T> xn = NormForward(params_, layer.norm1, x, &n1);
    const Matrix<T> h1 = x + AttnForward(params_, layer.self, dims_.heads, xn,
                                         xn, no_pad, true, 0.0, nullptr, &a1);
    const Matrix<T> hn = NormForward(params_, layer.norm2, h1, &n2);
    const Matrix<T> h2 =
        h1 + AttnForward(params_, layer.cross, dims_.heads, hn, memory.states,
                         memory.key_is_pad, false, 0.0, nullptr, &a2);
    x = FfnForward(params_, layer.ffn, h2, 0.0, nullptr, &fc);
  }
  NormCache<T> nc;
  const Matrix<T> h = NormForward(params_, layout_.dec_final, x, &nc);
  const Matrix<T> logits =
      dims_.tie_output ? Matrix<T>(h * params_[layout_.trg_emb].value.transpose())
                       : Matrix<T>(h * params_[layout_.out_proj].value);
  return LogSoftmax(logits);
}

template <typename T>
typename Transformer<T>::LossValue Transformer<T>::Run(
    const std::vector<int> &src, const std::vector<int> &trg_out,
    double label_smoothing, Rng *rng, bool backward, T grad_scale) {
  CheckIds(src, dims_.src_vocab, "source");
  CheckIds(trg_out, dims_.trg_vocab, "target");
  if (src.empty() || trg_out.empty()) {
    throw InvalidArgument("empty training sequence");
  }
  const int d = dims_.hidden;
  const int heads = dims_.heads;
  const double p = dims_.dropout;
  Params<T> &P = params_;

  // Encoder.
  const int ns = static_cast<int>(src.size());
  Matrix<T> x(ns, d);
  for (int i = 0; i < ns; ++i) x.row(i) = P[layout_.src_emb].value.row(src[i]);
  x += PositionalEncoding<T>(ns, d);
  Matrix<T> src_drop;
  x = DropoutForward(x, p, rng, &src_drop);
  std::vector<char> src_pad(ns);
  for (int i = 0; i < ns; ++i) src_pad[i] = src[i] == kPad;
  std::vector<EncLayerCache<T>> enc(layout_.enc.size());
  for (std::size_t l = 0; l < enc.size(); ++l) {
    const auto &ix = layout_.enc[l];
    auto &c = enc[l];
    const Matrix<T> xn = NormForward(P, ix.norm, x, &c.norm);
    const Matrix<T> a =
        AttnForward(P, ix.self, heads, xn, xn, src_pad, false, p, rng, &c.attn);
    const Matrix<T> h = x + DropoutForward(a, p, rng, &c.drop);
    x = FfnForward(P, ix.ffn, h, p, rng, &c.ffn);
  }
  NormCache<T> enc_final;
  const Matrix<T> memory = NormForward(P, layout_.enc_final, x, &enc_final);

  // Decoder, input BOS + y.
  const int nt = static_cast<int>(trg_out.size());
  std::vector<int> trg_in(nt);
  trg_in[0] = kBos;
  for (int i = 1; i < nt; ++i) trg_in[i] = trg_out[i - 1];
  Matrix<T> y(nt, d);
  for (int i = 0; i < nt; ++i) y.row(i) = P[layout_.trg_emb].value.row(trg_in[i]);
  y += PositionalEncoding<T>(nt, d);
  Matrix<T> trg_drop;
  y = DropoutForward(y, p, rng, &trg_drop);
  const std::vector<char> no_pad;
  std::vector<DecLayerCache<T>> dec(layout_.dec.size());
  for (std::size_t l = 0; l < dec.size(); ++l) {
    const auto &ix = layout_.dec[l];
    auto &c = dec[l];
    const Matrix<T> xn = NormForward(P, ix.norm1, y, &c.norm1);
    const Matrix<T> a =
        AttnForward(P, ix.self, heads, xn, xn, no_pad, true, p, rng, &c.self);
    const Matrix<T> h1 = y + DropoutForward(a, p, rng, &c.drop1);
    const Matrix<T> hn = NormForward(P, ix.norm2, h1, &c.norm2);
    const Matrix<T> b = AttnForward(P, ix.cross, heads, hn, memory, src_pad,
                                    false, p, rng, &c.cross);
    const Matrix<T> h2 = h1 + DropoutForward(b, p, rng, &c.drop2);
    y = FfnForward(P, ix.ffn, h2, p, rng, &c.ffn);
  }
  NormCache<T> dec_final;
  const Matrix<T> h = NormForward(P, layout_.dec_final, y, &dec_final);
  const Matrix<T> &out_w = dims_.tie_output ? P[layout_.trg_emb].value
                                            : P[layout_.out_proj].value;
  const Matrix<T> logits = dims_.tie_output ? Matrix<T>(h * out_w.transpose())
                                            : Matrix<T>(h * out_w);
  Matrix<T> dlogits;
  LossValue loss;
  loss.sum = SmoothedNll(LogSoftmax(logits), trg_out, label_smoothing,
                         backward ? &dlogits : nullptr);
  for (int t : trg_out) loss.tokens += t != kPad;
  if (!backward) return loss;

  // Backward pass.
  dlogits *= grad_scale;
  Matrix<T> dh;
  if (dims_.tie_output) {
    P[layout_.trg_emb].grad.noalias() += dlogits.transpose() * h;
    dh = dlogits * out_w;
  } else {
    P[layout_.out_proj].grad.noalias() += h.transpose() * dlogits;
    dh = dlogits * out_w.transpose();
  }
  Matrix<T> dy = NormBackward(P, layout_.dec_final, dec_final, dh);
  Matrix<T> dmemory = Matrix<T>::Zero(ns, d);
  for (std::size_t l = dec.size(); l-- > 0;) {
    const auto &ix = layout_.dec[l];
    const auto &c = dec[l];
    const Matrix<T> dh2 = FfnBackward(P, ix.ffn, c.ffn, dy);
    const Matrix<T> dhn = AttnBackward(P, ix.cross, heads, c.cross,
                                       DropoutBackward(dh2, c.drop2), &dmemory);
    const Matrix<T> dh1 = dh2 + NormBackward(P, ix.norm2, c.norm2, dhn);
    Matrix<T> dxn_kv = Matrix<T>::Zero(nt, d);
    const Matrix<T> dxn = AttnBackward(P, ix.self, heads, c.self,
                                       DropoutBackward(dh1, c.drop1), &dxn_kv);
    dy = dh1 + NormBackward(P, ix.norm1, c.norm1, Matrix<T>(dxn + dxn_kv));
  }
  dy = DropoutBackward(dy, trg_drop);
  for (int i = 0; i < nt; ++i) P[layout_.trg_emb].grad.row(trg_in[i]) += dy.row(i);

  Matrix<T> dx = NormBackward(P, layout_.enc_final, enc_final, dmemory);
  for (std::size_t l = enc.size(); l-- > 0;) {
    const auto &ix = layout_.enc[l];
    const auto &c = enc[l];
    const Matrix<T> dh = FfnBackward(P, ix.ffn, c.ffn, dx);
    Matrix<T> dxn_kv = Matrix<T>::Zero(ns, d);
    const Matrix<T> dxn = AttnBackward(P, ix.self, heads, c.attn,
                                       DropoutBackward(dh, c.drop), &dxn_kv);
    dx = dh + NormBackward(P, ix.norm, c.norm, Matrix<T>(dxn + dxn_kv));
  }
  dx = DropoutBackward(dx, src_drop);
  for (int i = 0; i < ns; ++i) P[layout_.src_emb].grad.row(src[i]) += dx.row(i);
  return loss;
}

template <typename T>
typename Transformer<T>::LossValue Transformer<T>::Backprop(
    const std::vector<int> &src, const std::vector<int> &trg_out,
    double label_smoothing, Rng *dropout_rng, T grad_scale) {
  return Run(src, trg_out, label_smoothing, dropout_rng, true, grad_scale);
}

template <typename T>
typename Transformer<T>::LossValue Transformer<T>::Loss(
    const std::vector<int> &src, const std::vector<int> &trg_out,
    double label_smoothing) const {
  return const_cast<Transformer *>(this)->Run(src, trg_out, label_smoothing,
                                              nullptr, false, T(0));
}

template <typename T>
void Transformer<T>::ZeroGrad() {
  for (auto &p : params_) p.grad.setZero();
}

template <typename T>
bool Transformer<T>::AllFinite() const {
  for (const auto &p : params_) {
    if (!p.value.allFinite()) return false;
  }
  return true;
}

template <typename T>
double Transformer<T>::ParameterNorm() const {
  double sq = 0.0;
  for (const auto &p : params_) {
    sq += static_cast<double>(p.value.squaredNorm());
  }
  return std::sqrt(sq);
}

template <typename T>
std::size_t Transformer<T>::NumParameters() const {
  std::size_t n = 0;
  for (const auto &p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

template class Transformer<float>;
template class Transformer<double>;
template Matrix<float> PositionalEncoding<float>(int, int);
template Matrix<double> PositionalEncoding<double>(int, int);
template Matrix<float> LogSoftmax<float>(const Matrix<float> &);
template Matrix<double> LogSoftmax<double>(const Matrix<double> &);
template double SmoothedNll<float>(const Matrix<float> &, const std::vector<int> &,
                                   double, Matrix<float> *, int);
template double SmoothedNll<double>(const Matrix<double> &,
                                    const std::vector<int> &, double,
                                    Matrix<double> *, int);

}  // namespace bamt::nmt
