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

#include "bamt/nmt/config.h"

#include <cmath>
#include <fstream>

#include "bamt/common.h"
#include "bamt/hash.h"

namespace bamt::nmt {
namespace {

#define BAMT_CONFIG_FIELDS(X)                                      \
  X(enc_layers) X(dec_layers) X(attn_heads) X(ff_size) X(hidden_size) \
  X(emb_size) X(tie_softmax_to_output_embedding)                      \
  X(share_vocab_across_languages) X(dropout) X(label_smoothing)       \
  X(learning_rate) X(adam_beta1) X(adam_beta2) X(adam_epsilon)        \
  X(clip_grad_norm) X(epochs) X(batch_tokens) X(beam_width)           \
  X(dev_beam_width) X(max_len_ratio) X(max_len_offset) X(seed)

void Require(bool ok, const char *field, const std::string &why) {
  if (!ok) throw InvalidArgument(std::string(field) + ": " + why);
}

}  // namespace

void TrainingConfig::Validate() const {
  Require(enc_layers > 0, "enc_layers", "must be positive");
  Require(dec_layers > 0, "dec_layers", "must be positive");
  Require(attn_heads > 0, "attn_heads", "must be positive");
  Require(ff_size > 0, "ff_size", "must be positive");
  Require(hidden_size > 0, "hidden_size", "must be positive");
  Require(emb_size > 0, "emb_size", "must be positive");
  Require(hidden_size % attn_heads == 0, "hidden_size",
          "must be divisible by attn_heads");
  Require(emb_size == hidden_size, "emb_size",
          "must equal hidden_size for the transformer");
  Require(dropout >= 0 && dropout < 1, "dropout", "must lie in [0, 1)");
  Require(label_smoothing >= 0 && label_smoothing < 1, "label_smoothing",
          "must lie in [0, 1)");
  Require(learning_rate >= 0 && std::isfinite(learning_rate), "learning_rate",
          "must be finite and non-negative");
  Require(adam_beta1 >= 0 && adam_beta1 < 1, "adam_beta1", "must lie in [0, 1)");
  Require(adam_beta2 >= 0 && adam_beta2 < 1, "adam_beta2", "must lie in [0, 1)");
  Require(adam_epsilon > 0, "adam_epsilon", "must be positive");
  Require(clip_grad_norm >= 0, "clip_grad_norm", "must be non-negative");
  Require(epochs >= 0, "epochs", "must be non-negative");
  Require(batch_tokens > 0, "batch_tokens", "must be positive");
  Require(beam_width > 0, "beam_width", "must be positive");
  Require(dev_beam_width > 0, "dev_beam_width", "must be positive");
  Require(max_len_ratio > 0, "max_len_ratio", "must be positive");
  Require(max_len_offset >= 0, "max_len_offset", "must be non-negative");
}

nlohmann::ordered_json TrainingConfig::ToJson() const {
  nlohmann::ordered_json j;
#define X(f) j[#f] = f;
  BAMT_CONFIG_FIELDS(X)
#undef X
  return j;
}

TrainingConfig TrainingConfig::FromJson(const nlohmann::json &j) {
  return WithOverrides(TrainingConfig{}, j);
}

TrainingConfig WithOverrides(const TrainingConfig &base,
                             const nlohmann::json &overrides) {
  if (!overrides.is_object()) {
    throw InvalidArgument("training config must be a JSON object");
  }
  TrainingConfig c = base;
  for (const auto &[key, value] : overrides.items()) {
    bool known = false;
#define X(f)                                                           \
  if (key == #f) {                                                     \
    try {                                                              \
      value.get_to(c.f);                                               \
    } catch (const nlohmann::json::exception &) {                      \
      throw InvalidArgument(std::string(#f) + ": wrong value type");  \
    }                                                                  \
    known = true;                                                      \
  }
    BAMT_CONFIG_FIELDS(X)
#undef X
    if (!known) throw InvalidArgument("unknown config key '" + key + "'");
  }
  c.Validate();
  return c;
}

TrainingConfig TrainingConfig::Load(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(path + ": " + e.what(), 0, 0);
  }
  return FromJson(j);
}

std::string TrainingConfig::Hash() const { return HashHex(ToJson().dump()); }

int TrainingConfig::MaxDecodeLength(std::size_t source_length) const {
  return static_cast<int>(
      std::floor(max_len_ratio * static_cast<double>(source_length))) +
         max_len_offset;
}

}  // namespace bamt::nmt
