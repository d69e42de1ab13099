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

#ifndef BAMT_DATASET_H_
#define BAMT_DATASET_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bamt/common.h"
#include "bamt/language.h"

namespace bamt::data {

struct SentencePair {
  std::string source;
  std::string target;
  // Produced by back-translation rather than by annotators.
  bool synthetic = false;

  bool operator==(const SentencePair &) const = default;
};

struct ParallelCorpus {
  LanguageTag src_lang = LanguageTag::kFr;
  LanguageTag tgt_lang = LanguageTag::kBam;
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  std::vector<std::string> Sources() const;
  std::vector<std::string> Targets() const;
  // Swaps source and target sides.
  ParallelCorpus Reversed() const;
  // Throws InvalidArgument if a side is blank.
  void Validate() const;
  // Fingerprint of the line-aligned contents and language tags.
  std::string ContentHash() const;

  bool operator==(const ParallelCorpus &) const = default;
};

inline constexpr std::uint64_t kDefaultSplitSeed = 2146;

struct SplitSpec {
  double train = 0.75;
  double dev = 0.125;
  double test = 0.125;
  std::uint64_t seed = kDefaultSplitSeed;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
  bool operator==(const SplitSizes &) const = default;
};

// dev = round(n * dev_ratio), test = max(1, ceil(n * test_ratio) - 2) and
// train takes the rest. For the default ratios this gives 1611/268/267 at
// n = 2146 and 1620/270/268 at n = 2158. Requires n >= 8.
SplitSizes ComputeSplitSizes(std::size_t n, const SplitSpec &spec = {});

struct Split {
  ParallelCorpus train, dev, test;
  // Positions in the input corpus.
  std::vector<std::size_t> train_index, dev_index, test_index;
};

// Seeded Fisher-Yates shuffle of the indices, then a contiguous cut into
// train, dev, test.
Split SplitCorpus(const ParallelCorpus &corpus, const SplitSpec &spec = {});

// Sidecar describing a written split.
std::string SplitMetadataJson(const Split &split, const SplitSpec &spec,
                              const std::string &source_hash);

// Writes <prefix>.<part>.<lang> for part in train/dev/test plus
// <prefix>.meta.json.
void WriteSplit(const std::string &prefix, const Split &split,
                const SplitSpec &spec, const std::string &source_hash);

// Two line-aligned plain-text files.
ParallelCorpus ReadParallel(const std::string &src_path,
                            const std::string &tgt_path, LanguageTag src_lang,
                            LanguageTag tgt_lang);
void WriteParallel(const ParallelCorpus &corpus, const std::string &src_path,
                   const std::string &tgt_path);
void WriteLines(const std::string &path, const std::vector<std::string> &lines);
std::vector<std::string> ReadLines(const std::string &path);

// Key used for leakage matching: NFC with collapsed whitespace.
std::string NormalizeForMatch(const std::string &text);

struct ConcatResult {
  ParallelCorpus corpus;
  // Non-Bambara language of each output pair.
  std::vector<LanguageTag> foreign;
  std::size_t removed = 0;
  std::size_t removed_fr = 0;
  std::size_t removed_en = 0;
};

// Concatenates the fr-bam and en-bam training sets, dropping pairs whose
// Bambara side occurs in the other pair's evaluation sets. Each input keeps
// its orientation; both must have Bambara on the same side.
ConcatResult MultilingualConcat(const ParallelCorpus &fr_train,
                                const ParallelCorpus &en_train,
                                const std::vector<ParallelCorpus> &fr_eval,
                                const std::vector<ParallelCorpus> &en_eval);

struct MonolingualSet {
  std::vector<std::string> sentences;
  std::size_t blank_lines = 0;
  // Lines dropped by the max_tokens filter.
  std::size_t filtered = 0;
};

// One sentence per line. Blank lines are skipped and counted; a file with
// no sentences at all is an error.
MonolingualSet LoadMonolingual(const std::string &path,
                               std::optional<std::size_t> max_tokens = {});

}  // namespace bamt::data

#endif  // BAMT_DATASET_H_
