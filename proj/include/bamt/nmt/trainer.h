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

#ifndef BAMT_NMT_TRAINER_H_
#define BAMT_NMT_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bamt/common.h"
#include "bamt/dataset.h"
#include "bamt/nmt/config.h"
#include "bamt/nmt/model.h"
#include "bamt/nmt/optimizer.h"
#include "bamt/segmentation.h"

namespace bamt::nmt {

class TrainingError : public Error {
 public:
  using Error::Error;
};

struct EpochRecord {
  int epoch = 0;             // 0 is the untrained (or inherited) model
  double train_loss = 0.0;   // per-token mean over the epoch; 0 for epoch 0
  std::int64_t updates = 0;  // optimizer steps so far
  double dev_bleu = 0.0;
  double dev_chrf = 0.0;

  bool operator==(const EpochRecord &) const = default;
};

struct Checkpoint {
  TrainingConfig config;
  ModelDims dims;
  LanguageTag src_lang = LanguageTag::kFr;
  LanguageTag trg_lang = LanguageTag::kBam;
  seg::Segmenter src_seg, trg_seg;
  seg::Vocabulary src_vocab, trg_vocab;
  std::optional<Transformer<float>> model;
  std::vector<Matrix<float>> adam_m, adam_v;
  std::int64_t adam_steps = 0;
  int epoch = 0;           // epoch this model comes from
  int trained_epochs = 0;  // epochs run in total
  std::vector<EpochRecord> history;
  std::string data_hash;

  // Binary file: magic, JSON header, then float32 tensors (parameters,
  // then Adam moments) in host byte order.
  void Save(const std::string &path) const;
  static Checkpoint Load(const std::string &path);
  std::string SegmentationFingerprint() const;
};

struct TrainOptions {
  // Continue from this checkpoint: its parameters, optimizer state,
  // vocabularies and segmentation are reused.
  const Checkpoint *init = nullptr;
  // Overrides config.epochs when non-negative.
  int epochs = -1;
  std::function<void(const EpochRecord &)> on_epoch;
  // Called with the training-corpus indices of every batch.
  std::function<void(int epoch, const std::vector<std::size_t> &)> on_batch;
};

// Trains on `train`, scoring `dev` after every epoch (and before the first
// one), and returns the checkpoint with the best dev BLEU; the earliest
// epoch wins ties. With an empty dev set the last epoch is returned.
// Throws TrainingError on a non-finite loss or parameter.
Checkpoint Train(const TrainingConfig &config, const seg::Segmenter &src_seg,
                 const seg::Segmenter &trg_seg,
                 const data::ParallelCorpus &train,
                 const data::ParallelCorpus &dev,
                 const TrainOptions &options = {});

// Token-count batches: sentences sorted by cost (max of source and target
// length, EOS included) are packed greedily up to batch_tokens; a single
// longer sentence forms its own batch. Batch order is then shuffled.
std::vector<std::vector<std::size_t>> MakeBatches(
    const std::vector<std::vector<int>> &src,
    const std::vector<std::vector<int>> &trg_out, int batch_tokens, Rng *rng);

class Translator {
 public:
  explicit Translator(const Checkpoint &checkpoint);

  // Source text to target text.
  std::string Translate(const std::string &source, int beam_width) const;
  std::vector<std::string> TranslateAll(const std::vector<std::string> &sources,
                                        int beam_width) const;
  // Source ids (EOS appended inside) to target ids without EOS.
  std::vector<int> Decode(std::vector<int> src_ids, int beam_width) const;

 private:
  const Checkpoint &ckpt_;
};

}  // namespace bamt::nmt

#endif  // BAMT_NMT_TRAINER_H_
