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

#include "bamt/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "json.hpp"

#include "bamt/common.h"
#include "bamt/hash.h"
#include "bamt/random.h"
#include "bamt/unicode.h"

namespace bamt::data {
namespace {

constexpr double kSlack = 1e-9;

ParallelCorpus Subset(const ParallelCorpus &corpus,
                      const std::vector<std::size_t> &index) {
  ParallelCorpus out;
  out.src_lang = corpus.src_lang;
  out.tgt_lang = corpus.tgt_lang;
  out.pairs.reserve(index.size());
  for (std::size_t i : index) out.pairs.push_back(corpus.pairs[i]);
  return out;
}

// Which side holds Bambara: 0 source, 1 target.
int BambaraSide(const ParallelCorpus &c, const char *name) {
  if (c.src_lang == LanguageTag::kBam) return 0;
  if (c.tgt_lang == LanguageTag::kBam) return 1;
  throw InvalidArgument(std::string(name) + " has no Bambara side");
}

const std::string &BamText(const SentencePair &p, int side) {
  return side == 0 ? p.source : p.target;
}

}  // namespace

std::vector<std::string> ParallelCorpus::Sources() const {
  std::vector<std::string> out;
  out.reserve(pairs.size());
  for (const auto &p : pairs) out.push_back(p.source);
  return out;
}

std::vector<std::string> ParallelCorpus::Targets() const {
  std::vector<std::string> out;
  out.reserve(pairs.size());
  for (const auto &p : pairs) out.push_back(p.target);
  return out;
}

ParallelCorpus ParallelCorpus::Reversed() const {
  ParallelCorpus out;
  out.src_lang = tgt_lang;
  out.tgt_lang = src_lang;
  out.pairs.reserve(pairs.size());
  for (const auto &p : pairs) out.pairs.push_back({p.target, p.source, p.synthetic});
  return out;
}

void ParallelCorpus::Validate() const {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (unicode::Trim(pairs[i].source).empty() ||
        unicode::Trim(pairs[i].target).empty()) {
      throw InvalidArgument("pair " + std::to_string(i + 1) +
                            " has an empty side");
    }
  }
}

std::string ParallelCorpus::ContentHash() const {
  Fnv1a h;
  h.Update(LanguageCode(src_lang));
  h.Update("\t");
  h.Update(LanguageCode(tgt_lang));
  h.Update("\n");
  for (const auto &p : pairs) {
    h.Update(p.source);
    h.Update("\t");
    h.Update(p.target);
    h.Update(p.synthetic ? "\t1\n" : "\t0\n");
  }
  return h.HexDigest();
}

SplitSizes ComputeSplitSizes(std::size_t n, const SplitSpec &spec) {
  if (spec.train <= 0 || spec.dev <= 0 || spec.test <= 0 ||
      std::abs(spec.train + spec.dev + spec.test - 1.0) > 1e-6) {
    throw InvalidArgument("split ratios must be positive and sum to 1");
  }
  if (n < 8) {
    throw InvalidArgument("corpus of " + std::to_string(n) +
                          " pairs is too small to split (need at least 8)");
  }
  const double x = static_cast<double>(n);
  SplitSizes s;
  s.dev = static_cast<std::size_t>(std::floor(x * spec.dev + 0.5 + kSlack));
  const auto ceil_test =
      static_cast<std::ptrdiff_t>(std::ceil(x * spec.test - kSlack));
  s.test = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, ceil_test - 2));
  s.dev = std::max<std::size_t>(1, s.dev);
  if (s.dev + s.test >= n) {
    throw InvalidArgument("split ratios leave no training data");
  }
  s.train = n - s.dev - s.test;
  return s;
}

Split SplitCorpus(const ParallelCorpus &corpus, const SplitSpec &spec) {
  const SplitSizes sizes = ComputeSplitSizes(corpus.size(), spec);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  rng.Shuffle(order);

  Split split;
  const auto a = order.begin();
  split.train_index.assign(a, a + sizes.train);
  split.dev_index.assign(a + sizes.train, a + sizes.train + sizes.dev);
  split.test_index.assign(a + sizes.train + sizes.dev, order.end());
  split.train = Subset(corpus, split.train_index);
  split.dev = Subset(corpus, split.dev_index);
  split.test = Subset(corpus, split.test_index);
  return split;
}

std::string SplitMetadataJson(const Split &split, const SplitSpec &spec,
                              const std::string &source_hash) {
  nlohmann::ordered_json j;
  j["src_lang"] = LanguageCode(split.train.src_lang);
  j["tgt_lang"] = LanguageCode(split.train.tgt_lang);
  j["seed"] = spec.seed;
  j["ratios"] = {spec.train, spec.dev, spec.test};
  j["counts"] = {{"train", split.train.size()},
                 {"dev", split.dev.size()},
                 {"test", split.test.size()}};
  j["source_hash"] = source_hash;
  j["hashes"] = {{"train", split.train.ContentHash()},
                 {"dev", split.dev.ContentHash()},
                 {"test", split.test.ContentHash()}};
  return j.dump(2) + "\n";
}

void WriteSplit(const std::string &prefix, const Split &split,
                const SplitSpec &spec, const std::string &source_hash) {
  const std::string src(LanguageCode(split.train.src_lang));
  const std::string tgt(LanguageCode(split.train.tgt_lang));
  const std::pair<const char *, const ParallelCorpus *> parts[] = {
      {"train", &split.train}, {"dev", &split.dev}, {"test", &split.test}};
  for (const auto &[name, corpus] : parts) {
    const std::string base = prefix + "." + name + ".";
    WriteParallel(*corpus, base + src, base + tgt);
  }
  std::ofstream meta(prefix + ".meta.json", std::ios::binary);
  if (!meta) throw IoError("cannot write " + prefix + ".meta.json");
  meta << SplitMetadataJson(split, spec, source_hash);
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void WriteLines(const std::string &path, const std::vector<std::string> &lines) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (const auto &l : lines) os << l << '\n';
  if (!os) throw IoError("write to " + path + " failed");
}

ParallelCorpus ReadParallel(const std::string &src_path,
                            const std::string &tgt_path, LanguageTag src_lang,
                            LanguageTag tgt_lang) {
  const auto src = ReadLines(src_path);
  const auto tgt = ReadLines(tgt_path);
  if (src.size() != tgt.size()) {
    throw InvalidArgument(src_path + " has " + std::to_string(src.size()) +
                          " lines but " + tgt_path + " has " +
                          std::to_string(tgt.size()));
  }
  ParallelCorpus c;
  c.src_lang = src_lang;
  c.tgt_lang = tgt_lang;
  for (std::size_t i = 0; i < src.size(); ++i) {
    c.pairs.push_back({src[i], tgt[i], false});
  }
  return c;
}

void WriteParallel(const ParallelCorpus &corpus, const std::string &src_path,
                   const std::string &tgt_path) {
  WriteLines(src_path, corpus.Sources());
  WriteLines(tgt_path, corpus.Targets());
}

std::string NormalizeForMatch(const std::string &text) {
  return unicode::NormalizeSpaces(unicode::Nfc(text));
}

ConcatResult MultilingualConcat(const ParallelCorpus &fr_train,
                                const ParallelCorpus &en_train,
                                const std::vector<ParallelCorpus> &fr_eval,
                                const std::vector<ParallelCorpus> &en_eval) {
  const int fr_side = BambaraSide(fr_train, "French training corpus");
  const int en_side = BambaraSide(en_train, "English training corpus");
  if (fr_side != en_side) {
    throw InvalidArgument(
        "training corpora must have Bambara on the same side");
  }
  auto collect = [](const std::vector<ParallelCorpus> &evals) {
    std::unordered_set<std::string> keys;
    for (const auto &c : evals) {
      const int side = BambaraSide(c, "evaluation corpus");
      for (const auto &p : c.pairs) keys.insert(NormalizeForMatch(BamText(p, side)));
    }
    return keys;
  };
  const auto fr_keys = collect(fr_eval);
  const auto en_keys = collect(en_eval);

  ConcatResult result;
  result.corpus.src_lang = fr_side == 0 ? LanguageTag::kBam : LanguageTag::kFr;
  result.corpus.tgt_lang = fr_side == 0 ? LanguageTag::kFr : LanguageTag::kBam;
  for (const auto &p : fr_train.pairs) {
    if (en_keys.count(NormalizeForMatch(BamText(p, fr_side)))) {
      ++result.removed_fr;
      continue;
    }
    result.corpus.pairs.push_back(p);
    result.foreign.push_back(LanguageTag::kFr);
  }
  for (const auto &p : en_train.pairs) {
    if (fr_keys.count(NormalizeForMatch(BamText(p, en_side)))) {
      ++result.removed_en;
      continue;
    }
    result.corpus.pairs.push_back(p);
    result.foreign.push_back(LanguageTag::kEn);
  }
  result.removed = result.removed_fr + result.removed_en;
  return result;
}

MonolingualSet LoadMonolingual(const std::string &path,
                               std::optional<std::size_t> max_tokens) {
  MonolingualSet set;
  std::size_t nonblank = 0;
  for (const auto &line : ReadLines(path)) {
    const std::string text = NormalizeForMatch(line);
    if (text.empty()) {
      ++set.blank_lines;
      continue;
    }
    ++nonblank;
    if (max_tokens && unicode::SplitWhitespace(text).size() > *max_tokens) {
      ++set.filtered;
      continue;
    }
    set.sentences.push_back(text);
  }
  if (nonblank == 0) throw InvalidArgument(path + " contains no sentences");
  return set;
}

}  // namespace bamt::data
