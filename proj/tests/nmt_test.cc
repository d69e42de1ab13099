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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bamt/hash.h"
#include "bamt/metrics.h"
#include "bamt/nmt/beam.h"
#include "bamt/nmt/config.h"
#include "bamt/nmt/gradcheck.h"
#include "bamt/nmt/model.h"
#include "bamt/nmt/trainer.h"
#include "json.hpp"
#include "nmt_fixture.h"
#include "test_util.h"

namespace bamt::nmt {
namespace {

using ::bamt::testing::Exhaustive;
using ::bamt::testing::Miniature;
using ::bamt::testing::ToyModel;

// ---------------------------------------------------------------------------
// Naive reference forward pass: plain loops over nested vectors, reading the
// parameters by name.

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Mat Get(Transformer<double> &m, const std::string &name) {
  const auto &v = m.parameter(name).value;
  Mat out(v.rows(), Vec(v.cols()));
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) out[i][j] = v(i, j);
  return out;
}

Mat Linear(Transformer<double> &m, const std::string &name, const Mat &x) {
  const Mat w = Get(m, name + ".w");
  const Mat b = Get(m, name + ".b");
  Mat y(x.size(), Vec(w[0].size()));
  for (std::size_t t = 0; t < x.size(); ++t)
    for (std::size_t j = 0; j < w[0].size(); ++j) {
      double s = b[0][j];
      for (std::size_t i = 0; i < w.size(); ++i) s += x[t][i] * w[i][j];
      y[t][j] = s;
    }
  return y;
}

Mat Norm(Transformer<double> &m, const std::string &name, const Mat &x) {
  const Mat g = Get(m, name + ".g");
  const Mat b = Get(m, name + ".b");
  Mat y = x;
  for (std::size_t t = 0; t < x.size(); ++t) {
    double mean = 0, var = 0;
    for (double v : x[t]) mean += v;
    mean /= x[t].size();
    for (double v : x[t]) var += (v - mean) * (v - mean);
    var /= x[t].size();
    for (std::size_t j = 0; j < x[t].size(); ++j)
      y[t][j] = (x[t][j] - mean) / std::sqrt(var + 1e-6) * g[0][j] + b[0][j];
  }
  return y;
}

Mat Add(const Mat &a, const Mat &b) {
  Mat y = a;
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t j = 0; j < a[t].size(); ++j) y[t][j] += b[t][j];
  return y;
}

Mat Attention(Transformer<double> &m, const std::string &name, const Mat &xq,
              const Mat &xkv, int heads, bool causal,
              const std::vector<int> &keys) {
  const Mat q = Linear(m, name + ".q", xq);
  const Mat k = Linear(m, name + ".k", xkv);
  const Mat v = Linear(m, name + ".v", xkv);
  const std::size_t d = q[0].size(), dk = d / heads;
  Mat ctx(xq.size(), Vec(d, 0.0));
  for (int h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < xq.size(); ++i) {
      Vec w(xkv.size(), 0.0);
      double total = 0;
      for (std::size_t j = 0; j < xkv.size(); ++j) {
        if ((causal && j > i) || (!keys.empty() && keys[j] == 0)) continue;
        double s = 0;
        for (std::size_t c = h * dk; c < (h + 1) * dk; ++c) s += q[i][c] * k[j][c];
        w[j] = std::exp(s / std::sqrt(static_cast<double>(dk)));
        total += w[j];
      }
      for (std::size_t j = 0; j < xkv.size(); ++j)
        for (std::size_t c = h * dk; c < (h + 1) * dk; ++c)
          ctx[i][c] += w[j] / total * v[j][c];
    }
  }
  return Linear(m, name + ".o", ctx);
}

Mat Ffn(Transformer<double> &m, const std::string &name, const Mat &x) {
  Mat a = Linear(m, name + ".in", Norm(m, name + ".norm", x));
  for (auto &row : a)
    for (double &v : row) v = std::max(0.0, v);
  return Add(x, Linear(m, name + ".out", a));
}

Mat Embed(Transformer<double> &m, const std::string &table,
          const std::vector<int> &ids) {
  const Mat e = Get(m, table);
  Mat x;
  for (std::size_t pos = 0; pos < ids.size(); ++pos) {
    Vec row = e[ids[pos]];
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double freq = std::pow(10000.0, -static_cast<double>(j - j % 2) / row.size());
      row[j] += j % 2 == 0 ? std::sin(pos * freq) : std::cos(pos * freq);
    }
    x.push_back(row);
  }
  return x;
}

Mat NaiveLogProbs(Transformer<double> &m, const std::vector<int> &src,
                  const std::vector<int> &trg_in) {
  const int heads = m.dims().heads;
  Mat x = Embed(m, "src_embed", src);
  for (int l = 0; l < m.dims().enc_layers; ++l) {
    const std::string n = "encoder." + std::to_string(l) + ".";
    const Mat xn = Norm(m, n + "norm", x);
    x = Ffn(m, n + "ffn", Add(x, Attention(m, n + "self", xn, xn, heads, false, src)));
  }
  const Mat memory = Norm(m, "encoder.final_norm", x);
  Mat y = Embed(m, "trg_embed", trg_in);
  for (int l = 0; l < m.dims().dec_layers; ++l) {
    const std::string n = "decoder." + std::to_string(l) + ".";
    const Mat yn = Norm(m, n + "norm1", y);
    y = Add(y, Attention(m, n + "self", yn, yn, heads, true, {}));
    const Mat hn = Norm(m, n + "norm2", y);
    y = Ffn(m, n + "ffn", Add(y, Attention(m, n + "cross", hn, memory, heads, false, src)));
  }
  const Mat h = Norm(m, "decoder.final_norm", y);
  const Mat e = Get(m, "trg_embed");
  Mat out(h.size(), Vec(e.size()));
  for (std::size_t t = 0; t < h.size(); ++t) {
    double mx = -1e300;
    for (std::size_t k = 0; k < e.size(); ++k) {
      double s = 0;
      for (std::size_t j = 0; j < h[t].size(); ++j) s += h[t][j] * e[k][j];
      out[t][k] = s;
      mx = std::max(mx, s);
    }
    double z = 0;
    for (double s : out[t]) z += std::exp(s - mx);
    for (double &s : out[t]) s = s - mx - std::log(z);
  }
  return out;
}

void ExpectMatchesNaive(const std::vector<int> &src, const std::vector<int> &trg_in) {
  Transformer<double> model(Miniature(12, 8, 2, 2), 11);
  // Non-trivial norms and biases so that every term is exercised.
  Rng rng(5);
  for (auto &p : model.parameters()) {
    if (p.name.find(".b") != std::string::npos || p.name.find(".g") != std::string::npos) {
      for (int i = 0; i < p.value.size(); ++i) p.value.data()[i] += rng.Normal(0, 0.3);
    }
  }
  const Mat naive = NaiveLogProbs(model, src, trg_in);
  const Matrix<double> fast = model.LogProbs(src, trg_in);
  ASSERT_EQ(fast.rows(), static_cast<long>(naive.size()));
  for (std::size_t t = 0; t < naive.size(); ++t) {
    for (std::size_t k = 0; k < naive[t].size(); ++k) {
      EXPECT_NEAR(fast(t, k), naive[t][k], 1e-6) << "row " << t << " col " << k;
    }
  }
}

TEST(TransformerTest, ForwardMatchesNaiveReference) {
  ExpectMatchesNaive({5, 7, 3}, {2, 9, 4});
}

TEST(TransformerTest, PaddedSourceKeysAreIgnored) {
  ExpectMatchesNaive({5, 7, 0, 3}, {2, 9});
  Transformer<double> model(Miniature(12, 8, 2, 2), 3);
  const auto a = model.LogProbs({5, 7, 0}, {2, 9});
  const auto b = model.LogProbs({5, 7, 0, 0, 0}, {2, 9});
  // Extra PAD keys change nothing but the positional pattern of the PAD
  // rows themselves, which are never attended to.
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TransformerTest, DistributionsAreNormalized) {
  Transformer<float> model(Miniature(20, 16, 2, 2), 1);
  const auto lp = model.LogProbs({4, 5, 6, 3}, {2, 7, 8, 9, 10});
  for (int t = 0; t < lp.rows(); ++t) {
    EXPECT_NEAR(lp.row(t).array().exp().sum(), 1.0, 1e-5);
    EXPECT_TRUE(lp.row(t).allFinite());
  }
}

TEST(TransformerTest, DecoderIsCausal) {
  Transformer<double> model(Miniature(12, 8, 2, 2), 4);
  const auto a = model.LogProbs({5, 6, 3}, {2, 7, 8});
  const auto b = model.LogProbs({5, 6, 3}, {2, 7, 9});
  EXPECT_LT((a.topRows(2) - b.topRows(2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((a.row(2) - b.row(2)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TransformerTest, TiedOutputFollowsTheEmbedding) {
  ModelDims dims = Miniature(12, 8, 2, 1);
  Transformer<double> tied(dims, 2);
  EXPECT_THROW(tied.parameter("output.w"), InvalidArgument);
  const auto before = tied.LogProbs({5, 3}, {2, 6});
  // Row 10 never appears as an input, so only the output side can see it.
  // A uniform shift would cancel against the normalized hidden state.
  tied.parameter("trg_embed").value(10, 0) += 0.5;
  const auto after = tied.LogProbs({5, 3}, {2, 6});
  EXPECT_GT(std::abs(after(1, 10) - before(1, 10)), 1e-6);

  dims.tie_output = false;
  Transformer<double> untied(dims, 2);
  EXPECT_NO_THROW(untied.parameter("output.w"));
  const auto u_before = untied.LogProbs({5, 3}, {2, 6});
  untied.parameter("trg_embed").value(10, 0) += 0.5;
  const auto u_after = untied.LogProbs({5, 3}, {2, 6});
  EXPECT_LT((u_after - u_before).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TransformerTest, SharedEmbeddingsAreOneTable) {
  ModelDims dims = Miniature(12, 8, 2, 1);
  dims.share_embeddings = true;
  Transformer<double> model(dims, 2);
  EXPECT_THROW(model.parameter("trg_embed"), InvalidArgument);
  dims.trg_vocab = 13;
  EXPECT_THROW(Transformer<double>(dims, 2), InvalidArgument);
}

TEST(TransformerTest, RejectsOutOfRangeIds) {
  Transformer<float> model(Miniature(12, 8, 2, 1), 2);
  EXPECT_THROW(model.LogProbs({12}, {2}), InvalidArgument);
  EXPECT_THROW(model.LogProbs({4}, {-1}), InvalidArgument);
  EXPECT_THROW(model.LogProbs({}, {2}), InvalidArgument);
}

TEST(TransformerTest, PositionalEncodingValues) {
  const auto pe = PositionalEncoding<double>(3, 4);
  EXPECT_DOUBLE_EQ(pe(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(pe(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(pe(1, 0), std::sin(1.0));
  EXPECT_DOUBLE_EQ(pe(2, 3), std::cos(2.0 / 100.0));
}

// ---------------------------------------------------------------------------
// Loss.

Matrix<double> RowLogSoftmax(std::vector<double> logits) {
  Matrix<double> m(1, logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) m(0, i) = logits[i];
  return LogSoftmax(m);
}

TEST(LossTest, NoSmoothingIsCrossEntropy) {
  const auto lp = RowLogSoftmax({0.5, 2.0, -1.0, 0.0});
  EXPECT_NEAR(SmoothedNll(lp, {1}, 0.0), 0.34234958238982216, 1e-12);
}

TEST(LossTest, SmoothedHandArithmetic) {
  // q = (0, 0.8, 0.1, 0.1); the loss is log-sum-exp minus 1.5.
  const auto lp = RowLogSoftmax({0.5, 2.0, -1.0, 0.0});
  EXPECT_NEAR(SmoothedNll(lp, {1}, 0.2), 0.8423495823898222, 1e-12);
}

TEST(LossTest, UniformPredictionCostsLogV) {
  for (int v : {3, 7, 50}) {
    Matrix<double> lp = Matrix<double>::Constant(2, v, -std::log(double(v)));
    for (double eps : {0.0, 0.1, 0.2, 0.5}) {
      EXPECT_NEAR(SmoothedNll(lp, {1, 2}, eps), 2 * std::log(double(v)), 1e-12);
    }
  }
}

TEST(LossTest, PaddingIsExcluded) {
  const auto lp = RowLogSoftmax({0.5, 2.0, -1.0, 0.0});
  Matrix<double> two(2, 4);
  two.row(0) = lp.row(0);
  two.row(1) = lp.row(0);
  EXPECT_DOUBLE_EQ(SmoothedNll(two, {1, 0}, 0.2), SmoothedNll(lp, {1}, 0.2));
}

TEST(LossTest, GradientVanishesAtTheSmoothedTarget) {
  // Prediction equal to the smoothed target distribution is the optimum.
  Matrix<double> lp(1, 5);
  lp << -std::numeric_limits<double>::infinity(), std::log(0.7), std::log(0.1),
      std::log(0.1), std::log(0.1);
  Matrix<double> grad;
  SmoothedNll(lp, {1}, 0.3, &grad);
  EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LossTest, RejectsBadInput) {
  const auto lp = RowLogSoftmax({0.5, 2.0, -1.0, 0.0});
  EXPECT_THROW(SmoothedNll(lp, {1, 2}, 0.1), InvalidArgument);
  EXPECT_THROW(SmoothedNll(lp, {9}, 0.1), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Gradients.

TEST(GradCheckTest, QuadraticIsExact) {
  // f(x) = 0.5 x'Ax + b'x has gradient Ax + b and no truncation error.
  const std::vector<std::vector<double>> a = {{2, 0.5, 0}, {0.5, 3, -1}, {0, -1, 4}};
  const std::vector<double> b = {1, -2, 0.5};
  auto f = [&](const std::vector<double> &x) {
    double s = 0;
    for (int i = 0; i < 3; ++i) {
      s += b[i] * x[i];
      for (int j = 0; j < 3; ++j) s += 0.5 * x[i] * a[i][j] * x[j];
    }
    return s;
  };
  const std::vector<double> x = {0.3, -0.7, 1.1};
  const auto numeric = NumericalGradient(f, x, 1e-3);
  for (int i = 0; i < 3; ++i) {
    double analytic = b[i];
    for (int j = 0; j < 3; ++j) analytic += a[i][j] * x[j];
    EXPECT_LT(RelativeError(analytic, numeric[i]), 1e-8);
  }
}

TEST(GradCheckTest, MiniatureTransformerPerSubBlock) {
  Transformer<double> model(Miniature(50, 16, 2, 2), 9);
  const Batch batch = {{{5, 17, 0, 42, 3}, {8, 9, 23, 3}},
                       {{11, 12, 3}, {30, 31, 32, 33, 3}}};
  GradCheckOptions options;
  options.seed = 3;
  const auto result = GradientCheck(model, batch, options);
  ASSERT_EQ(result.max_error.size(), 4u);
  EXPECT_LT(result.near_zero, result.checked / 4);
  for (const auto &[group, err] : result.max_error) {
    EXPECT_LT(err, 1e-4) << group << " worst " << result.worst;
  }
}

TEST(GradCheckTest, KeyBiasGradientIsZero) {
  Transformer<double> model(Miniature(20, 8, 2, 1), 4);
  model.ZeroGrad();
  model.Backprop({5, 6, 7, 3}, {8, 9, 3}, 0.1, nullptr, 1.0);
  EXPECT_LT(model.parameter("encoder.0.self.k.b").grad.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(model.parameter("encoder.0.self.q.b").grad.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GradCheckTest, UntiedAndSharedVariants) {
  for (int variant = 0; variant < 2; ++variant) {
    ModelDims dims = Miniature(20, 8, 2, 1);
    dims.tie_output = variant == 0 ? false : true;
    dims.share_embeddings = variant == 1;
    Transformer<double> model(dims, 4);
    const Batch batch = {{{5, 6, 7, 3}, {8, 9, 3}}};
    const auto result = GradientCheck(model, batch);
    EXPECT_LT(result.overall, 1e-4) << "variant " << variant << " " << result.worst;
  }
}

// ---------------------------------------------------------------------------
// Search.

SearchOptions ToyOptions(int width) {
  SearchOptions o;
  o.beam_width = width;
  o.max_len = 4;
  o.eos = 0;
  o.banned = {};
  return o;
}

TEST(BeamSearchTest, MatchesExhaustiveSearchOnToyModels) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ToyModel model(seed);
    const Hypothesis beam = BeamSearch(model, ToyOptions(5));
    const Hypothesis best = Exhaustive(model, 4, 0);
    EXPECT_EQ(beam.tokens, best.tokens) << "seed " << seed;
    EXPECT_NEAR(beam.log_prob, best.log_prob, 1e-12);
  }
}

TEST(BeamSearchTest, WidthOneIsGreedy) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ToyModel model(seed);
    auto options = ToyOptions(1);
    options.max_len = 6;
    EXPECT_EQ(BeamSearch(model, options).tokens, GreedySearch(model, options).tokens);
  }
}

TEST(BeamSearchTest, NeverWorseThanGreedy) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ToyModel model(seed);
    auto options = ToyOptions(5);
    options.max_len = 7;
    EXPECT_GE(BeamSearch(model, options).score() + 1e-12,
              GreedySearch(model, options).score());
  }
}

TEST(BeamSearchTest, BannedTokensNeverAppear) {
  ToyModel model(3);
  auto options = ToyOptions(3);
  options.max_len = 6;
  options.banned = {2};
  for (int t : BeamSearch(model, options).tokens) EXPECT_NE(t, 2);
}

// ---------------------------------------------------------------------------
// Configuration.

TEST(ConfigTest, DefaultsRoundTripThroughJson) {
  const TrainingConfig c;
  EXPECT_EQ(TrainingConfig::FromJson(nlohmann::json::parse(c.ToJson().dump())), c);
  EXPECT_EQ(c.epochs, 120);
  EXPECT_EQ(c.batch_tokens, 1024);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.0004);
  EXPECT_EQ(c.beam_width, 5);
  EXPECT_EQ(c.MaxDecodeLength(10), 20);
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(TrainingConfig::FromJson({{"epoch", 3}}), InvalidArgument);
  TrainingConfig c;
  c.attn_heads = 3;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TrainingConfig();
  c.label_smoothing = 1.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TrainingConfig();
  c.emb_size = 128;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(ConfigTest, OverridesKeepOtherFields) {
  const TrainingConfig c = WithOverrides(TrainingConfig(), {{"epochs", 7}});
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.hidden_size, 256);
  EXPECT_NE(c.Hash(), TrainingConfig().Hash());
}

// ---------------------------------------------------------------------------
// Training.

TrainingConfig TinyConfig() {
  TrainingConfig c;
  c.enc_layers = c.dec_layers = 1;
  c.attn_heads = 2;
  c.hidden_size = c.emb_size = 16;
  c.ff_size = 32;
  c.batch_tokens = 32;
  c.epochs = 3;
  return c;
}

data::ParallelCorpus TinyCorpus() {
  data::ParallelCorpus c;
  c.pairs = {{"a b c", "x y z"}, {"b c", "y z"}, {"c a", "z x"},
             {"a a b", "x x y"}, {"c b a", "z y x"}, {"b", "y"}};
  return c;
}

TEST(BatchTest, PacksWithinTheTokenBudget) {
  std::vector<std::vector<int>> src, trg;
  Rng rng(1);
  for (int i = 0; i < 40; ++i) {
    src.emplace_back(1 + rng.UniformInt(12), 4);
    trg.emplace_back(1 + rng.UniformInt(12), 4);
  }
  Rng shuffle(2);
  const auto batches = MakeBatches(src, trg, 20, &shuffle);
  std::multiset<std::size_t> seen;
  for (const auto &b : batches) {
    std::size_t cost = 0;
    for (std::size_t i : b) {
      cost += std::max(src[i].size(), trg[i].size());
      seen.insert(i);
    }
    EXPECT_TRUE(cost <= 20 || b.size() == 1);
  }
  ASSERT_EQ(seen.size(), 40u);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(seen.count(i), 1u);
}

TEST(BatchTest, OversizedSentenceGetsItsOwnBatch) {
  const auto batches = MakeBatches({{1, 2, 3, 4, 5}, {1}}, {{1}, {1}}, 3, nullptr);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[1], std::vector<std::size_t>{0});
}

TEST(TrainerTest, ZeroLearningRateLeavesParametersUnchanged) {
  TrainingConfig c = TinyConfig();
  c.learning_rate = 0.0;
  c.epochs = 1;
  const auto corpus = TinyCorpus();
  Checkpoint before = Train(c, {}, {}, corpus, corpus, {.epochs = 0});
  c.batch_tokens = 8;
  int batches = 0;
  TrainOptions options;
  options.on_batch = [&](int, const std::vector<std::size_t> &) { ++batches; };
  Checkpoint after = Train(c, {}, {}, corpus, corpus, options);
  ASSERT_EQ(after.trained_epochs, 1);
  EXPECT_GT(batches, 1);
  EXPECT_EQ(after.history.back().updates, batches);
  const auto &p = before.model->parameters();
  const auto &q = after.model->parameters();
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p[i].value, q[i].value) << p[i].name;
  }
}

TEST(TrainerTest, FixedSeedIsDeterministic) {
  const auto corpus = TinyCorpus();
  TrainingConfig c = TinyConfig();
  seg::Segmenter chars;
  chars.scheme = seg::Scheme::kChar;
  const Checkpoint a = Train(c, chars, chars, corpus, corpus);
  const Checkpoint b = Train(c, chars, chars, corpus, corpus);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.epoch, b.epoch);
  for (std::size_t i = 0; i < a.model->parameters().size(); ++i) {
    EXPECT_EQ(a.model->parameters()[i].value, b.model->parameters()[i].value);
  }
  c.seed = 43;
  const Checkpoint d = Train(c, chars, chars, corpus, corpus);
  EXPECT_NE(a.history, d.history);
}

TEST(TrainerTest, KeepsTheBestDevEpoch) {
  const auto corpus = TinyCorpus();
  const Checkpoint ckpt = Train(TinyConfig(), {}, {}, corpus, corpus);
  ASSERT_EQ(ckpt.history.size(), 4u);
  EXPECT_EQ(ckpt.history.front().epoch, 0);
  double best = -1;
  int best_epoch = -1;
  for (const auto &r : ckpt.history) {
    if (r.dev_bleu > best) {
      best = r.dev_bleu;
      best_epoch = r.epoch;
    }
  }
  EXPECT_EQ(ckpt.epoch, best_epoch);
  // The stored model reproduces the recorded dev score.
  const Translator translator(ckpt);
  const auto report = metrics::Score(translator.TranslateAll(corpus.Sources(), 1),
                                     corpus.Targets());
  EXPECT_DOUBLE_EQ(report.bleu, best);
}

TEST(TrainerTest, CheckpointRoundTrip) {
  testing::TempDir dir;
  const auto corpus = TinyCorpus();
  seg::Segmenter bpe;
  bpe.scheme = seg::Scheme::kBpe;
  bpe.merges = seg::MergeTable({{"a", "</w>"}, {"b", "c</w>"}});
  bpe.dropout = 0.1;
  const Checkpoint ckpt = Train(TinyConfig(), bpe, {}, corpus, corpus);
  ckpt.Save(dir.file("model.ckpt"));
  const Checkpoint loaded = Checkpoint::Load(dir.file("model.ckpt"));
  EXPECT_EQ(loaded.config, ckpt.config);
  EXPECT_EQ(loaded.dims, ckpt.dims);
  EXPECT_EQ(loaded.src_seg, ckpt.src_seg);
  EXPECT_EQ(loaded.src_vocab, ckpt.src_vocab);
  EXPECT_EQ(loaded.trg_vocab, ckpt.trg_vocab);
  EXPECT_EQ(loaded.history, ckpt.history);
  EXPECT_EQ(loaded.epoch, ckpt.epoch);
  EXPECT_EQ(loaded.adam_steps, ckpt.adam_steps);
  ASSERT_EQ(loaded.adam_m.size(), ckpt.adam_m.size());
  for (std::size_t i = 0; i < ckpt.adam_m.size(); ++i) {
    EXPECT_EQ(loaded.adam_m[i], ckpt.adam_m[i]);
    EXPECT_EQ(loaded.adam_v[i], ckpt.adam_v[i]);
    EXPECT_EQ(loaded.model->parameters()[i].value, ckpt.model->parameters()[i].value);
  }
  EXPECT_EQ(Translator(loaded).TranslateAll(corpus.Sources(), 5),
            Translator(ckpt).TranslateAll(corpus.Sources(), 5));

  testing::WriteFile(dir.file("bad.ckpt"), "BAMTCKP1garbage");
  EXPECT_THROW(Checkpoint::Load(dir.file("bad.ckpt")), IoError);
  const std::string bytes = testing::ReadFile(dir.file("model.ckpt"));
  testing::WriteFile(dir.file("short.ckpt"), bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(Checkpoint::Load(dir.file("short.ckpt")), IoError);
}

TEST(TrainerTest, ContinuationKeepsStateAndChecksSegmentation) {
  const auto corpus = TinyCorpus();
  const Checkpoint base = Train(TinyConfig(), {}, {}, corpus, corpus);
  TrainOptions options;
  options.init = &base;
  options.epochs = 2;
  const Checkpoint more = Train(TinyConfig(), {}, {}, corpus, corpus, options);
  EXPECT_EQ(more.trained_epochs, base.trained_epochs + 2);
  EXPECT_EQ(more.history.front().epoch, base.trained_epochs);
  EXPECT_EQ(more.history.front().dev_bleu,
            base.history[static_cast<std::size_t>(base.epoch)].dev_bleu);
  EXPECT_EQ(more.src_vocab, base.src_vocab);

  seg::Segmenter chars;
  chars.scheme = seg::Scheme::kChar;
  EXPECT_THROW(Train(TinyConfig(), chars, {}, corpus, corpus, options),
               InvalidArgument);
}

TEST(TrainerTest, NonFiniteLossAbortsWithDiagnostics) {
  const auto corpus = TinyCorpus();
  Checkpoint base = Train(TinyConfig(), {}, {}, corpus, {}, {.epochs = 0});
  base.model->parameter("decoder.final_norm.g").value(0, 0) =
      std::numeric_limits<float>::quiet_NaN();
  TrainOptions options;
  options.init = &base;
  try {
    Train(TinyConfig(), {}, {}, corpus, {}, options);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError &e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("epoch 1"), std::string::npos) << what;
    EXPECT_NE(what.find("batch 1"), std::string::npos) << what;
    EXPECT_NE(what.find("parameter norm"), std::string::npos) << what;
  }
}

TEST(TrainerTest, EveryPairIsVisitedEachEpoch) {
  const auto corpus = TinyCorpus();
  std::map<int, std::multiset<std::size_t>> seen;
  TrainOptions options;
  options.on_batch = [&](int epoch, const std::vector<std::size_t> &batch) {
    seen[epoch].insert(batch.begin(), batch.end());
  };
  Train(TinyConfig(), {}, {}, corpus, corpus, options);
  ASSERT_EQ(seen.size(), 3u);
  for (const auto &[epoch, ids] : seen) EXPECT_EQ(ids.size(), corpus.size());
}

TEST(TrainerTest, RejectsEmptyTrainingData) {
  EXPECT_THROW(Train(TinyConfig(), {}, {}, {}, {}), InvalidArgument);
}

}  // namespace
}  // namespace bamt::nmt
