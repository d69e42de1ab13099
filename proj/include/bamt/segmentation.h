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

#ifndef BAMT_SEGMENTATION_H_
#define BAMT_SEGMENTATION_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bamt/common.h"

namespace bamt::seg {

using TokenList = std::vector<std::string>;
using Corpus = std::vector<TokenList>;

inline constexpr std::string_view kEndOfWord = "</w>";
inline constexpr std::string_view kJoiner = "@@";
// Stands for an inter-word space in character-level segmentation.
inline constexpr std::string_view kSpaceToken = "\xe2\x96\x81";  // U+2581

// Splits on runs of Unicode whitespace.
TokenList TokenizeWords(std::string_view text);
// One token per extended grapheme cluster; each whitespace run becomes a
// single kSpaceToken. Leading and trailing whitespace is dropped.
TokenList TokenizeChars(std::string_view text);
std::string DetokenizeChars(const TokenList &tokens);

// Ordered merge operations. Symbols are code point sequences; the last
// symbol of a word carries the end-of-word marker.
class MergeTable {
 public:
  MergeTable() = default;
  explicit MergeTable(std::vector<std::pair<std::string, std::string>> merges);

  const std::vector<std::pair<std::string, std::string>> &merges() const {
    return merges_;
  }
  std::size_t size() const { return merges_.size(); }
  bool empty() const { return merges_.empty(); }
  const std::string &end_of_word() const { return end_of_word_; }

  // Rank of the merge (a, b) or -1. Duplicated pairs keep the first rank.
  int Rank(std::string_view a, std::string_view b) const;

  // Header "#bamt-bpe version=0.2 eow=</w> merges=N", then "left right"
  // per line.
  std::string Serialize() const;
  // Accepts Serialize() output and subword-nmt "#version: 0.2" codes files.
  static MergeTable Parse(std::string_view text);
  static MergeTable Load(const std::string &path);
  void Save(const std::string &path) const;

  std::string Fingerprint() const;

  bool operator==(const MergeTable &o) const { return merges_ == o.merges_; }

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, int> rank_;
  std::string end_of_word_{kEndOfWord};
};

struct LearnBpeOptions {
  int num_merges = 500;
  // Learning stops once the best pair is rarer than this.
  int min_frequency = 2;
};

// Greedy most-frequent-pair merging over word-internal symbol sequences.
// Ties go to the lexicographically greatest pair (byte order), which is what
// subword-nmt does. Stopping early appends a message to *warnings.
MergeTable LearnBpe(const Corpus &corpus, const LearnBpeOptions &options,
                    std::vector<std::string> *warnings = nullptr);

struct DropoutStats {
  std::uint64_t decisions = 0;  // applicable merges considered
  std::uint64_t skipped = 0;
};

// Applies merges in rank order to each whitespace-separated word. With
// dropout_p > 0 each applicable merge is skipped with that probability;
// dropout_p == 0 never touches the generator. Non-final pieces of a word
// end in kJoiner.
class BpeEncoder {
 public:
  explicit BpeEncoder(const MergeTable &table) : table_(table) {}

  TokenList Encode(std::string_view text, double dropout_p = 0.0,
                   std::uint64_t seed = 0, DropoutStats *stats = nullptr);
  // Word-level segmentation without joiners.
  std::vector<std::string> EncodeWord(const std::string &word,
                                      double dropout_p, std::uint64_t seed,
                                      DropoutStats *stats = nullptr);

 private:
  template <typename Rng>
  std::vector<std::string> Segment(const std::string &word, double dropout_p,
                                   Rng *rng, DropoutStats *stats);

  const MergeTable &table_;
  std::unordered_map<std::string, std::vector<std::string>> cache_;
};

TokenList ApplyBpe(std::string_view text, const MergeTable &table,
                   double dropout_p = 0.0, std::uint64_t seed = 0,
                   DropoutStats *stats = nullptr);

// Per-sentence seeds are seed ^ sentence index.
Corpus ApplyBpeCorpus(const std::vector<std::string> &sentences,
                      const MergeTable &table, double dropout_p,
                      std::uint64_t seed, DropoutStats *stats = nullptr);

// Glues joiner-marked pieces to their successor.
std::string UnBpe(const TokenList &tokens);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumReserved = 4;
  static const std::vector<std::string> &ReservedTokens();

  Vocabulary();
  // Tokens must be unique and must not include the reserved symbols.
  explicit Vocabulary(const std::vector<std::string> &tokens);

  int Id(std::string_view token) const;  // kUnk when absent
  const std::string &Token(int id) const;
  bool Contains(std::string_view token) const;
  std::size_t size(bool include_reserved = true) const {
    return include_reserved ? tokens_.size()
                            : tokens_.size() - kNumReserved;
  }
  const std::vector<std::string> &tokens() const { return tokens_; }

  std::vector<int> Encode(const TokenList &tokens) const;
  // Stops at EOS, skips PAD and BOS.
  TokenList Decode(const std::vector<int> &ids) const;

  bool operator==(const Vocabulary &o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Tokens with count >= min_freq, ordered by descending count then bytes.
Vocabulary BuildVocab(const Corpus &corpus, int min_freq = 1);

struct CoverageReport {
  std::size_t distinct_types = 0;
  std::size_t oov_types = 0;
  double oov_rate = 0.0;
};

CoverageReport Coverage(const Vocabulary &vocab, const Corpus &eval);

enum class Scheme { kWord, kChar, kBpe };

// One side's segmentation as used for training and decoding.
struct Segmenter {
  Scheme scheme = Scheme::kWord;
  MergeTable merges;     // kBpe only
  double dropout = 0.0;  // applied to training data only

  TokenList Encode(std::string_view text) const;
  // Training-time segmentation; BPE dropout uses seed ^ sentence index.
  Corpus EncodeCorpus(const std::vector<std::string> &texts, bool training,
                      std::uint64_t seed) const;
  std::string Decode(const TokenList &tokens) const;
  // Vocabulary over the training texts. With dropout every character and
  // every merge result is included in both its word-final and joined form,
  // so that no dropout sample can produce an unknown piece.
  Vocabulary BuildVocabulary(const std::vector<std::string> &train) const;
  // "word", "char", "bpe<N>" with "+drop<p>" when dropout is set.
  std::string Describe() const;
  // Scheme, dropout and merge table; BPE-dropout does not change it.
  std::string Fingerprint() const;
  std::string Serialize() const;
  static Segmenter Parse(std::string_view text);

  bool operator==(const Segmenter &o) const {
    return scheme == o.scheme && merges == o.merges && dropout == o.dropout;
  }
};

}  // namespace bamt::seg

#endif  // BAMT_SEGMENTATION_H_
