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

#ifndef BAMT_NMT_CONFIG_H_
#define BAMT_NMT_CONFIG_H_

#include <cstdint>
#include <string>

#include "json.hpp"

#include "bamt/common.h"

namespace bamt::nmt {

// Hyperparameters. Defaults are the settings used for the published
// Bambara models: a 6+6 layer transformer trained with Adam at a constant
// learning rate.
struct TrainingConfig {
  int enc_layers = 6;
  int dec_layers = 6;
  int attn_heads = 4;
  int ff_size = 1024;
  int hidden_size = 256;
  int emb_size = 256;
  bool tie_softmax_to_output_embedding = true;
  // Source and target embeddings of one model; only possible with a joint
  // vocabulary.
  bool share_vocab_across_languages = false;
  double dropout = 0.1;
  double label_smoothing = 0.2;
  double learning_rate = 0.0004;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Global gradient norm limit; 0 disables clipping.
  double clip_grad_norm = 0.0;
  int epochs = 120;
  int batch_tokens = 1024;
  int beam_width = 5;
  // Beam used for the per-epoch dev evaluation; 1 is greedy.
  int dev_beam_width = 1;
  // Decoding stops after max_len_ratio * source length + max_len_offset
  // tokens.
  double max_len_ratio = 1.5;
  int max_len_offset = 5;
  std::uint64_t seed = 42;

  // Throws InvalidArgument naming the first offending field.
  void Validate() const;
  nlohmann::ordered_json ToJson() const;
  // Unknown keys are rejected; missing keys keep their defaults.
  static TrainingConfig FromJson(const nlohmann::json &j);
  static TrainingConfig Load(const std::string &path);
  // Fingerprint of the canonical JSON form.
  std::string Hash() const;

  int MaxDecodeLength(std::size_t source_length) const;

  bool operator==(const TrainingConfig &) const = default;
};

// Applies the keys of `overrides` on top of `base`.
TrainingConfig WithOverrides(const TrainingConfig &base,
                             const nlohmann::json &overrides);

}  // namespace bamt::nmt

#endif  // BAMT_NMT_CONFIG_H_
