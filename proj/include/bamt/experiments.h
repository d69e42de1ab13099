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

#ifndef BAMT_EXPERIMENTS_H_
#define BAMT_EXPERIMENTS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bamt/dataset.h"
#include "bamt/language.h"
#include "bamt/metrics.h"
#include "bamt/nmt/config.h"
#include "bamt/nmt/trainer.h"
#include "bamt/segmentation.h"
#include "json.hpp"

namespace bamt::experiments {

// "word", "char", "bpe<N>" or "bpe<N>+drop<p>".
struct SchemeSpec {
  seg::Scheme scheme = seg::Scheme::kWord;
  int merges = 0;
  double dropout = 0.0;

  static SchemeSpec Parse(std::string_view text);
  std::string Name() const;
  // Human-readable configuration column, e.g. "500 subword merges each".
  std::string Description() const;
};

// Learns whatever the scheme needs from `train` (one BPE model per call).
seg::Segmenter MakeSegmenter(const SchemeSpec &spec,
                             const std::vector<std::string> &train,
                             std::vector<std::string> *warnings = nullptr);

struct Direction {
  LanguageTag src = LanguageTag::kFr;
  LanguageTag tgt = LanguageTag::kBam;

  // "fr-bam"; exactly one side must be Bambara.
  static Direction Parse(std::string_view text);
  std::string Name() const;
  LanguageTag foreign() const { return src == LanguageTag::kBam ? tgt : src; }
};

struct PlanRow {
  std::string label;
  std::string description;  // defaults to the scheme description
  std::string segmentation;
  std::vector<std::string> directions;
  nlohmann::json overrides = nlohmann::json::object();
  // One model for all (into-Bambara) directions, trained on the
  // leakage-filtered concatenation with a joint BPE model.
  bool multilingual = false;
};

struct ExperimentPlan {
  std::string name;
  // Foreign language code -> split prefix (<prefix>.<part>.<lang> files as
  // written by the split command).
  std::map<std::string, std::string> corpora;
  nlohmann::json config = nlohmann::json::object();
  std::vector<PlanRow> rows;
  std::string output_dir;

  // Relative paths are resolved against base_dir.
  static ExperimentPlan FromJson(const nlohmann::json &j,
                                 const std::string &base_dir = "");
  static ExperimentPlan Load(const std::string &path);
  // Labels unique, schemes and directions parse, every row resolves to a
  // valid TrainingConfig, corpora exist for every direction.
  void Validate() const;
  nmt::TrainingConfig ResolveConfig(const PlanRow &row) const;
};

struct RowResult {
  std::string label;
  std::string description;
  std::string segmentation;
  std::string direction;
  bool ok = false;
  std::string error;
  metrics::ScoreReport dev;
  std::optional<metrics::ScoreReport> test;
  int best_epoch = 0;
  int trained_epochs = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string data_hash;
  std::string directory;  // relative to the output directory
};

struct GridResult {
  std::vector<RowResult> rows;
  std::size_t failures = 0;
};

struct GridOptions {
  std::function<void(const std::string &)> log;
};

// Trains every row, scores it on dev, scores the best dev row of every
// direction on test, and writes checkpoints, hypotheses, reports and the
// results tables under the output directory. A failing row is recorded and
// the grid continues.
GridResult RunGrid(const ExperimentPlan &plan, const GridOptions &options = {});

struct Report {
  metrics::ResultsTable dev;
  metrics::ResultsTable test;
  std::string text;
  std::string json;
};

// Dev table, test table for the selected systems and a provenance appendix
// (seeds, config and data hashes, selected epochs).
Report EmitReport(const std::vector<RowResult> &rows);

enum class Regime { kFineTune, kRetrain };
Regime ParseRegime(std::string_view text);  // "btf" or "btr"
std::string_view RegimeName(Regime regime);

struct BacktranslationOptions {
  int beam_width = 5;
  // Sentences with more whitespace tokens are dropped before decoding.
  std::optional<std::size_t> max_tokens;
};

struct BacktranslationResult {
  data::ParallelCorpus corpus;  // synthetic source, genuine target
  std::size_t filtered = 0;
  std::size_t skipped = 0;  // decoding failed or produced nothing
};

// `reverse_model` translates from the monolingual language into the
// language that becomes the synthetic source side.
BacktranslationResult Backtranslate(const nmt::Checkpoint &reverse_model,
                                    const std::vector<std::string> &monolingual,
                                    const BacktranslationOptions &options = {});

struct AugmentOptions {
  // BT-F epochs on top of the base model; BT-R uses config.epochs.
  int finetune_epochs = 30;
  nmt::TrainOptions hooks;  // on_epoch / on_batch only
};

struct AugmentResult {
  nmt::Checkpoint checkpoint;
  std::size_t original = 0;
  std::size_t synthetic = 0;
  double synthetic_ratio = 0.0;  // synthetic / original
};

// BT-F continues from `base` (parameters and optimizer state) on original
// plus synthetic data; BT-R trains a fresh model with base.config on the
// same data. The segmentation must equal the base model's.
AugmentResult AugmentAndTrain(const nmt::Checkpoint &base,
                              const seg::Segmenter &src_seg,
                              const seg::Segmenter &trg_seg,
                              const data::ParallelCorpus &original,
                              const data::ParallelCorpus &synthetic,
                              const data::ParallelCorpus &dev, Regime regime,
                              const AugmentOptions &options = {});

}  // namespace bamt::experiments

#endif  // BAMT_EXPERIMENTS_H_
