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

#include "bamt/nmt/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include "bamt/hash.h"
#include "bamt/metrics.h"
#include "bamt/nmt/beam.h"
#include "json.hpp"

namespace bamt::nmt {
namespace {

using Json = nlohmann::ordered_json;
using Model = Transformer<float>;

constexpr char kMagic[8] = {'B', 'A', 'M', 'T', 'C', 'K', 'P', '1'};

Json DimsToJson(const ModelDims &d) {
  Json j;
  j["src_vocab"] = d.src_vocab;
  j["trg_vocab"] = d.trg_vocab;
  j["hidden"] = d.hidden;
  j["ff"] = d.ff;
  j["heads"] = d.heads;
  j["enc_layers"] = d.enc_layers;
  j["dec_layers"] = d.dec_layers;
  j["dropout"] = d.dropout;
  j["tie_output"] = d.tie_output;
  j["share_embeddings"] = d.share_embeddings;
  return j;
}

ModelDims DimsFromJson(const nlohmann::json &j) {
  ModelDims d;
  d.src_vocab = j.at("src_vocab").get<int>();
  d.trg_vocab = j.at("trg_vocab").get<int>();
  d.hidden = j.at("hidden").get<int>();
  d.ff = j.at("ff").get<int>();
  d.heads = j.at("heads").get<int>();
  d.enc_layers = j.at("enc_layers").get<int>();
  d.dec_layers = j.at("dec_layers").get<int>();
  d.dropout = j.at("dropout").get<double>();
  d.tie_output = j.at("tie_output").get<bool>();
  d.share_embeddings = j.at("share_embeddings").get<bool>();
  return d;
}

ModelDims DimsFor(const TrainingConfig &c, int src_vocab, int trg_vocab) {
  ModelDims d;
  d.src_vocab = src_vocab;
  d.trg_vocab = trg_vocab;
  d.hidden = c.hidden_size;
  d.ff = c.ff_size;
  d.heads = c.attn_heads;
  d.enc_layers = c.enc_layers;
  d.dec_layers = c.dec_layers;
  d.dropout = c.dropout;
  d.tie_output = c.tie_softmax_to_output_embedding;
  d.share_embeddings = c.share_vocab_across_languages;
  return d;
}

Json HistoryToJson(const std::vector<EpochRecord> &history) {
  Json out = Json::array();
  for (const auto &r : history) {
    out.push_back({{"epoch", r.epoch},
                   {"train_loss", r.train_loss},
                   {"updates", r.updates},
                   {"dev_bleu", r.dev_bleu},
                   {"dev_chrf", r.dev_chrf}});
  }
  return out;
}

std::vector<EpochRecord> HistoryFromJson(const nlohmann::json &j) {
  std::vector<EpochRecord> out;
  for (const auto &r : j) {
    out.push_back({r.at("epoch").get<int>(), r.at("train_loss").get<double>(),
                   r.at("updates").get<std::int64_t>(),
                   r.at("dev_bleu").get<double>(),
                   r.at("dev_chrf").get<double>()});
  }
  return out;
}

void WriteMatrix(std::ostream &os, const Matrix<float> &m) {
  os.write(reinterpret_cast<const char *>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(float)));
}

void ReadMatrix(std::istream &is, Matrix<float> &m, const std::string &path) {
  is.read(reinterpret_cast<char *>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(float)));
  if (!is) throw IoError("truncated checkpoint: " + path);
}

std::vector<int> SourceIds(const seg::Vocabulary &vocab,
                           const seg::TokenList &tokens) {
  std::vector<int> ids = vocab.Encode(tokens);
  ids.push_back(seg::Vocabulary::kEos);
  return ids;
}

class TransformerStepModel : public StepModel {
 public:
  TransformerStepModel(const Model &model, const std::vector<int> &src)
      : model_(model), memory_(model.Encode(src)) {}

  int vocab_size() const override { return model_.dims().trg_vocab; }

  std::vector<double> NextLogProbs(const std::vector<int> &prefix) override {
    std::vector<int> trg_in;
    trg_in.reserve(prefix.size() + 1);
    trg_in.push_back(Model::kBos);
    trg_in.insert(trg_in.end(), prefix.begin(), prefix.end());
    const Matrix<float> lp = model_.DecodeLogProbs(memory_, trg_in);
    const auto last = lp.row(lp.rows() - 1);
    return std::vector<double>(last.data(), last.data() + last.size());
  }

 private:
  const Model &model_;
  Model::Memory memory_;
};

std::string NormReport(const Model &model) {
  std::map<std::string, double> sq;
  for (const auto &p : model.parameters()) {
    sq[ParamGroupName(p.group)] += static_cast<double>(p.value.squaredNorm());
  }
  std::ostringstream os;
  os << "parameter norm " << model.ParameterNorm();
  for (const auto &[group, v] : sq) os << ", " << group << " " << std::sqrt(v);
  return os.str();
}

}  // namespace

std::string Checkpoint::SegmentationFingerprint() const {
  return HashHex(src_seg.Fingerprint() + "|" + trg_seg.Fingerprint());
}

void Checkpoint::Save(const std::string &path) const {
  if (!model) throw InvalidArgument("checkpoint has no model");
  Json header;
  header["config"] = config.ToJson();
  header["dims"] = DimsToJson(dims);
  header["src_lang"] = LanguageCode(src_lang);
  header["trg_lang"] = LanguageCode(trg_lang);
  header["src_seg"] = src_seg.Serialize();
  header["trg_seg"] = trg_seg.Serialize();
  header["src_vocab"] = src_vocab.tokens();
  header["trg_vocab"] = trg_vocab.tokens();
  header["epoch"] = epoch;
  header["trained_epochs"] = trained_epochs;
  header["history"] = HistoryToJson(history);
  header["data_hash"] = data_hash;
  header["config_hash"] = config.Hash();
  header["adam_steps"] = adam_steps;
  header["has_moments"] = !adam_m.empty();
  Json params = Json::array();
  for (const auto &p : model->parameters()) {
    params.push_back({{"name", p.name}, {"rows", p.value.rows()},
                      {"cols", p.value.cols()}});
  }
  header["parameters"] = params;
  const std::string text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + tmp);
    os.write(kMagic, sizeof kMagic);
    const std::uint64_t size = text.size();
    os.write(reinterpret_cast<const char *>(&size), sizeof size);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto &p : model->parameters()) WriteMatrix(os, p.value);
    for (const auto &m : adam_m) WriteMatrix(os, m);
    for (const auto &v : adam_v) WriteMatrix(os, v);
    if (!os) throw IoError("cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("cannot rename " + tmp + " to " + path);
  }
}

Checkpoint Checkpoint::Load(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError("not a bamt checkpoint: " + path);
  }
  std::uint64_t size = 0;
  is.read(reinterpret_cast<char *>(&size), sizeof size);
  if (!is || size > (1u << 30)) throw IoError("corrupt checkpoint: " + path);
  std::string text(size, '\0');
  is.read(text.data(), static_cast<std::streamsize>(size));
  if (!is) throw IoError("truncated checkpoint: " + path);

  Checkpoint c;
  try {
    const auto header = nlohmann::json::parse(text);
    c.config = TrainingConfig::FromJson(header.at("config"));
    c.dims = DimsFromJson(header.at("dims"));
    c.src_lang = LanguageFromCode(header.at("src_lang").get<std::string>());
    c.trg_lang = LanguageFromCode(header.at("trg_lang").get<std::string>());
    c.src_seg = seg::Segmenter::Parse(header.at("src_seg").get<std::string>());
    c.trg_seg = seg::Segmenter::Parse(header.at("trg_seg").get<std::string>());
    auto vocab_tokens = [](const nlohmann::json &j) {
      auto tokens = j.get<std::vector<std::string>>();
      tokens.erase(tokens.begin(),
                   tokens.begin() + std::min<std::size_t>(
                                        tokens.size(),
                                        seg::Vocabulary::kNumReserved));
      return seg::Vocabulary(tokens);
    };
    c.src_vocab = vocab_tokens(header.at("src_vocab"));
    c.trg_vocab = vocab_tokens(header.at("trg_vocab"));
    c.epoch = header.at("epoch").get<int>();
    c.trained_epochs = header.at("trained_epochs").get<int>();
    c.history = HistoryFromJson(header.at("history"));
    c.data_hash = header.at("data_hash").get<std::string>();
    c.adam_steps = header.at("adam_steps").get<std::int64_t>();

    c.model.emplace(c.dims, 0);
    auto &params = c.model->parameters();
    const auto &listed = header.at("parameters");
    if (listed.size() != params.size()) {
      throw IoError("checkpoint parameter list does not match its dims");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (listed[i].at("name").get<std::string>() != params[i].name ||
          listed[i].at("rows").get<long>() != params[i].value.rows() ||
          listed[i].at("cols").get<long>() != params[i].value.cols()) {
        throw IoError("checkpoint parameter " + params[i].name +
                      " does not match its dims");
      }
    }
    for (auto &p : params) ReadMatrix(is, p.value, path);
    if (header.at("has_moments").get<bool>()) {
      for (auto *moments : {&c.adam_m, &c.adam_v}) {
        for (const auto &p : params) {
          moments->push_back(Matrix<float>(p.value.rows(), p.value.cols()));
          ReadMatrix(is, moments->back(), path);
        }
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw IoError("corrupt checkpoint header in " + path + ": " + e.what());
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes in checkpoint: " + path);
  }
  return c;
}

std::vector<std::vector<std::size_t>> MakeBatches(
    const std::vector<std::vector<int>> &src,
    const std::vector<std::vector<int>> &trg_out, int batch_tokens, Rng *rng) {
  std::vector<std::size_t> cost(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    cost[i] = std::max(src[i].size(), trg_out[i].size());
  }
  std::vector<std::size_t> order(src.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
  std::vector<std::vector<std::size_t>> batches;
  std::size_t used = 0;
  for (std::size_t i : order) {
    if (batches.empty() ||
        used + cost[i] > static_cast<std::size_t>(batch_tokens)) {
      if (batches.empty() || !batches.back().empty()) batches.emplace_back();
      used = 0;
    }
    batches.back().push_back(i);
    used += cost[i];
  }
  if (rng != nullptr) rng->Shuffle(batches);
  return batches;
}

Translator::Translator(const Checkpoint &checkpoint) : ckpt_(checkpoint) {
  if (!ckpt_.model) throw InvalidArgument("checkpoint has no model");
}

std::vector<int> Translator::Decode(std::vector<int> src_ids,
                                    int beam_width) const {
  const std::size_t source_length = src_ids.size();
  src_ids.push_back(seg::Vocabulary::kEos);
  TransformerStepModel step(*ckpt_.model, src_ids);
  SearchOptions options;
  options.beam_width = std::max(1, beam_width);
  options.max_len = ckpt_.config.MaxDecodeLength(source_length);
  options.eos = seg::Vocabulary::kEos;
  options.banned = {seg::Vocabulary::kPad, seg::Vocabulary::kBos};
  Hypothesis best = options.beam_width == 1 ? GreedySearch(step, options)
                                            : BeamSearch(step, options);
  if (!best.tokens.empty() && best.tokens.back() == options.eos) {
    best.tokens.pop_back();
  }
  return best.tokens;
}

std::string Translator::Translate(const std::string &source,
                                  int beam_width) const {
  const std::vector<int> ids = ckpt_.src_vocab.Encode(ckpt_.src_seg.Encode(source));
  return ckpt_.trg_seg.Decode(ckpt_.trg_vocab.Decode(Decode(ids, beam_width)));
}

std::vector<std::string> Translator::TranslateAll(
    const std::vector<std::string> &sources, int beam_width) const {
  std::vector<std::string> out;
  out.reserve(sources.size());
  for (const auto &s : sources) out.push_back(Translate(s, beam_width));
  return out;
}

Checkpoint Train(const TrainingConfig &config, const seg::Segmenter &src_seg,
                 const seg::Segmenter &trg_seg,
                 const data::ParallelCorpus &train,
                 const data::ParallelCorpus &dev, const TrainOptions &options) {
  config.Validate();
  if (train.empty()) throw InvalidArgument("empty training corpus");
  train.Validate();
  const int epochs = options.epochs >= 0 ? options.epochs : config.epochs;
  const std::vector<std::string> train_src = train.Sources();
  const std::vector<std::string> train_trg = train.Targets();

  Checkpoint state;
  state.config = config;
  state.src_lang = train.src_lang;
  state.trg_lang = train.tgt_lang;
  state.src_seg = src_seg;
  state.trg_seg = trg_seg;
  state.data_hash = HashHex(train.ContentHash() + "|" + dev.ContentHash());

  Adam<float> adam(config.learning_rate, config.adam_beta1, config.adam_beta2,
                   config.adam_epsilon);
  if (options.init != nullptr) {
    const Checkpoint &init = *options.init;
    if (!init.model) throw InvalidArgument("initial checkpoint has no model");
    if (init.SegmentationFingerprint() != state.SegmentationFingerprint()) {
      throw InvalidArgument(
          "segmentation differs from the initial checkpoint (" +
          init.src_seg.Describe() + "/" + init.trg_seg.Describe() + " vs " +
          src_seg.Describe() + "/" + trg_seg.Describe() + ")");
    }
    if (init.src_lang != train.src_lang || init.trg_lang != train.tgt_lang) {
      throw InvalidArgument("language pair differs from the initial checkpoint");
    }
    const ModelDims wanted = DimsFor(config, init.dims.src_vocab,
                                     init.dims.trg_vocab);
    if (!(wanted == init.dims)) {
      throw InvalidArgument("architecture differs from the initial checkpoint");
    }
    state.dims = init.dims;
    state.src_vocab = init.src_vocab;
    state.trg_vocab = init.trg_vocab;
    state.model = init.model;
    state.trained_epochs = init.trained_epochs;
    if (!init.adam_m.empty()) {
      adam.Restore(init.adam_m, init.adam_v, init.adam_steps);
    }
  } else {
    if (config.share_vocab_across_languages) {
      if (!(src_seg == trg_seg)) {
        throw InvalidArgument("a shared vocabulary needs one segmentation");
      }
      std::vector<std::string> both = train_src;
      both.insert(both.end(), train_trg.begin(), train_trg.end());
      state.src_vocab = src_seg.BuildVocabulary(both);
      state.trg_vocab = state.src_vocab;
    } else {
      state.src_vocab = src_seg.BuildVocabulary(train_src);
      state.trg_vocab = trg_seg.BuildVocabulary(train_trg);
    }
    state.dims = DimsFor(config, static_cast<int>(state.src_vocab.size()),
                         static_cast<int>(state.trg_vocab.size()));
    state.model.emplace(state.dims, DeriveSeed(config.seed, 0));
  }
  Model &model = *state.model;

  const std::vector<std::string> dev_src = dev.Sources();
  const std::vector<std::string> dev_trg = dev.Targets();
  auto evaluate = [&](EpochRecord &record) {
    if (dev.empty()) return;
    const Translator translator(state);
    const auto report = metrics::Score(
        translator.TranslateAll(dev_src, config.dev_beam_width), dev_trg);
    record.dev_bleu = report.bleu;
    record.dev_chrf = report.chrf;
  };

  Checkpoint best;
  double best_bleu = -1.0;
  auto consider = [&](const EpochRecord &record) {
    state.history.push_back(record);
    if (options.on_epoch) options.on_epoch(record);
    if (!dev.empty() && !(record.dev_bleu > best_bleu)) return;
    best_bleu = record.dev_bleu;
    best = state;
    best.epoch = state.trained_epochs;
    best.adam_m = adam.first_moments();
    best.adam_v = adam.second_moments();
    best.adam_steps = adam.steps();
  };

  EpochRecord initial;
  initial.epoch = state.trained_epochs;
  initial.updates = adam.steps();
  evaluate(initial);
  consider(initial);

  std::vector<std::vector<int>> src_ids, trg_out;
  auto numericalize = [&](std::uint64_t seed, bool training) {
    const seg::Corpus s = src_seg.EncodeCorpus(train_src, training, DeriveSeed(seed, 1));
    const seg::Corpus t = trg_seg.EncodeCorpus(train_trg, training, DeriveSeed(seed, 2));
    src_ids.clear();
    trg_out.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      src_ids.push_back(SourceIds(state.src_vocab, s[i]));
      trg_out.push_back(SourceIds(state.trg_vocab, t[i]));
    }
  };
  const bool resample = src_seg.dropout > 0.0 || trg_seg.dropout > 0.0;
  if (!resample) numericalize(config.seed, false);

  Rng dropout_rng(DeriveSeed(config.seed, 3 + static_cast<std::uint64_t>(
                                                  state.trained_epochs)));
  for (int e = 1; e <= epochs; ++e) {
    const int epoch = state.trained_epochs + 1;
    const std::uint64_t epoch_seed =
        DeriveSeed(config.seed, 1000 + static_cast<std::uint64_t>(epoch));
    if (resample) numericalize(epoch_seed, true);
    Rng batch_rng(DeriveSeed(epoch_seed, 7));
    const auto batches =
        MakeBatches(src_ids, trg_out, config.batch_tokens, &batch_rng);
    double loss_sum = 0.0;
    std::int64_t loss_tokens = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      if (options.on_batch) options.on_batch(epoch, batches[b]);
      std::int64_t tokens = 0;
      for (std::size_t i : batches[b]) {
        tokens += static_cast<std::int64_t>(trg_out[i].size());
      }
      model.ZeroGrad();
      double batch_loss = 0.0;
      for (std::size_t i : batches[b]) {
        const auto v = model.Backprop(src_ids[i], trg_out[i],
                                      config.label_smoothing, &dropout_rng,
                                      1.0f / static_cast<float>(tokens));
        batch_loss += v.sum;
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(b + 1) + "; " +
                            NormReport(model));
      }
      if (config.clip_grad_norm > 0) {
        ClipGradNorm(model.parameters(), config.clip_grad_norm);
      }
      adam.Step(model.parameters());
      loss_sum += batch_loss;
      loss_tokens += tokens;
    }
    if (!model.AllFinite()) {
      throw TrainingError("non-finite parameters after epoch " +
                          std::to_string(epoch) + "; " + NormReport(model));
    }
    state.trained_epochs = epoch;
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(std::max<std::int64_t>(1, loss_tokens));
    record.updates = adam.steps();
    evaluate(record);
    consider(record);
  }
  best.history = state.history;
  best.trained_epochs = state.trained_epochs;
  return best;
}

}  // namespace bamt::nmt
