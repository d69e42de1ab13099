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

#include "bamt/segmentation.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "bamt/common.h"
#include "bamt/hash.h"
#include "bamt/random.h"
#include "bamt/unicode.h"

namespace bamt::seg {
namespace {

std::string PairKey(std::string_view a, std::string_view b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a);
  key.push_back(' ');
  key.append(b);
  return key;
}

std::vector<std::string> CodePoints(const std::string &word) {
  std::vector<std::string> out;
  for (char32_t cp : unicode::Decode(word)) out.push_back(unicode::Encode(cp));
  return out;
}

}  // namespace

TokenList TokenizeWords(std::string_view text) {
  return unicode::SplitWhitespace(text);
}

TokenList TokenizeChars(std::string_view text) {
  TokenList out;
  bool pending_space = false;
  for (auto &g : unicode::Graphemes(text)) {
    const std::u32string cps = unicode::Decode(g);
    const bool space = std::all_of(cps.begin(), cps.end(), unicode::IsSpace);
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.emplace_back(kSpaceToken);
    pending_space = false;
    out.push_back(std::move(g));
  }
  return out;
}

std::string DetokenizeChars(const TokenList &tokens) {
  std::string out;
  for (const auto &t : tokens) {
    if (t == kSpaceToken) {
      out.push_back(' ');
    } else {
      out += t;
    }
  }
  return out;
}

MergeTable::MergeTable(std::vector<std::pair<std::string, std::string>> merges)
    : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    rank_.emplace(PairKey(merges_[i].first, merges_[i].second),
                  static_cast<int>(i));
  }
}

int MergeTable::Rank(std::string_view a, std::string_view b) const {
  const auto it = rank_.find(PairKey(a, b));
  return it == rank_.end() ? -1 : it->second;
}

std::string MergeTable::Serialize() const {
  std::string out = "#bamt-bpe version=0.2 eow=" + end_of_word_ +
                    " merges=" + std::to_string(merges_.size()) + "\n";
  for (const auto &[a, b] : merges_) {
    out += a;
    out.push_back(' ');
    out += b;
    out.push_back('\n');
  }
  return out;
}

MergeTable MergeTable::Parse(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> merges;
  std::size_t lineno = 0;
  std::size_t declared = std::string::npos;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (lineno == 1 && line.starts_with("#")) {
      if (line.starts_with("#version:")) {
        if (line.substr(9).find("0.2") == std::string_view::npos) {
          throw ParseError("only version 0.2 codes files are supported", 1,
                           1);
        }
      } else if (line.starts_with("#bamt-bpe")) {
        const auto pos = line.find("merges=");
        if (pos != std::string_view::npos) {
          declared = std::stoul(std::string(line.substr(pos + 7)));
        }
        if (line.find("eow=</w>") == std::string_view::npos) {
          throw ParseError("unsupported end-of-word marker", 1, 1);
        }
      } else {
        throw ParseError("unrecognized merge table header", 1, 1);
      }
      continue;
    }
    if (line.empty()) continue;
    const std::size_t space = line.find(' ');
    if (space == std::string_view::npos || space == 0 ||
        line.find(' ', space + 1) != std::string_view::npos ||
        space + 1 == line.size()) {
      throw ParseError("expected 'left right'", lineno, 1);
    }
    merges.emplace_back(std::string(line.substr(0, space)),
                        std::string(line.substr(space + 1)));
  }
  if (declared != std::string::npos && declared != merges.size()) {
    throw ParseError("header declares " + std::to_string(declared) +
                         " merges, file has " + std::to_string(merges.size()),
                     1, 1);
  }
  return MergeTable(std::move(merges));
}

MergeTable MergeTable::Load(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return Parse(buf.str());
}

void MergeTable::Save(const std::string &path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << Serialize();
}

std::string MergeTable::Fingerprint() const { return HashHex(Serialize()); }

MergeTable LearnBpe(const Corpus &corpus, const LearnBpeOptions &options,
                    std::vector<std::string> *warnings) {
  if (options.num_merges < 1) {
    throw InvalidArgument("num_merges must be at least 1");
  }
  if (corpus.empty()) throw InvalidArgument("BPE training corpus is empty");

  using Pair = std::pair<std::string, std::string>;
  struct Word {
    std::vector<std::string> symbols;
    std::int64_t freq = 0;
  };

  std::map<std::string, std::int64_t> counts;
  for (const auto &sentence : corpus) {
    for (const auto &w : sentence) {
      if (!w.empty()) ++counts[w];
    }
  }
  std::vector<Word> words;
  words.reserve(counts.size());
  for (const auto &[w, f] : counts) {
    Word word;
    word.symbols = CodePoints(w);
    word.symbols.back() += kEndOfWord;
    word.freq = f;
    words.push_back(std::move(word));
  }

  std::map<Pair, std::int64_t> stats;
  std::set<std::tuple<std::int64_t, std::string, std::string>> ranked;
  std::map<Pair, std::set<std::size_t>> where;

  auto adjust = [&](const std::string &a, const std::string &b,
                    std::int64_t delta, std::size_t word_id) {
    Pair p{a, b};
    auto &count = stats[p];
    if (count > 0) ranked.erase({count, a, b});
    count += delta;
    if (count > 0) {
      ranked.insert({count, a, b});
    } else {
      stats.erase(p);
    }
    if (delta > 0) where[p].insert(word_id);
  };

  for (std::size_t id = 0; id < words.size(); ++id) {
    const auto &s = words[id].symbols;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      adjust(s[i], s[i + 1], words[id].freq, id);
    }
  }

  std::vector<Pair> merges;
  while (merges.size() < static_cast<std::size_t>(options.num_merges)) {
    if (ranked.empty()) {
      if (warnings) {
        warnings->push_back("no mergeable pairs left after " +
                            std::to_string(merges.size()) + " merges");
      }
      break;
    }
    const auto [best_count, first, second] = *ranked.rbegin();
    if (best_count < options.min_frequency) {
      if (warnings) {
        warnings->push_back(
            "no pair has frequency >= " +
            std::to_string(options.min_frequency) + " after " +
            std::to_string(merges.size()) + " merges");
      }
      break;
    }
    const Pair best{first, second};
    merges.push_back(best);
    const std::string joined = first + second;
    const std::set<std::size_t> affected = where[best];
    where.erase(best);
    for (std::size_t id : affected) {
      auto &s = words[id].symbols;
      bool present = false;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] == first && s[i + 1] == second) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      const std::int64_t f = words[id].freq;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        adjust(s[i], s[i + 1], -f, id);
      }
      std::vector<std::string> merged;
      merged.reserve(s.size());
      for (std::size_t i = 0; i < s.size();) {
        if (i + 1 < s.size() && s[i] == first && s[i + 1] == second) {
          merged.push_back(joined);
          i += 2;
        } else {
          merged.push_back(s[i]);
          ++i;
        }
      }
      s = std::move(merged);
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        adjust(s[i], s[i + 1], f, id);
      }
    }
  }
  return MergeTable(std::move(merges));
}

template <typename R>
std::vector<std::string> BpeEncoder::Segment(const std::string &word,
                                             double dropout_p, R *rng,
                                             DropoutStats *stats) {
  std::vector<std::string> symbols = CodePoints(word);
  if (symbols.size() <= 1) return symbols;
  symbols.back() += kEndOfWord;

  struct Candidate {
    int rank;
    std::size_t pos;
  };
  std::vector<Candidate> candidates;
  while (symbols.size() > 1) {
    candidates.clear();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const int rank = table_.Rank(symbols[i], symbols[i + 1]);
      if (rank < 0) continue;
      if (dropout_p > 0.0) {
        const bool skip = rng->Uniform() < dropout_p;
        if (stats) {
          ++stats->decisions;
          if (skip) ++stats->skipped;
        }
        if (skip) continue;
      }
      candidates.push_back({rank, i});
    }
    if (candidates.empty()) break;
    const int best = std::min_element(candidates.begin(), candidates.end(),
                                      [](const auto &x, const auto &y) {
                                        return x.rank < y.rank;
                                      })
                         ->rank;
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    std::size_t i = 0;
    for (const auto &c : candidates) {
      if (c.rank != best || c.pos < i) continue;
      for (; i < c.pos; ++i) merged.push_back(std::move(symbols[i]));
      merged.push_back(symbols[c.pos] + symbols[c.pos + 1]);
      i = c.pos + 2;
    }
    for (; i < symbols.size(); ++i) merged.push_back(std::move(symbols[i]));
    symbols = std::move(merged);
  }

  if (symbols.back() == kEndOfWord) {
    symbols.pop_back();
  } else if (symbols.back().ends_with(kEndOfWord)) {
    symbols.back().resize(symbols.back().size() - kEndOfWord.size());
  }
  return symbols;
}

std::vector<std::string> BpeEncoder::EncodeWord(const std::string &word,
                                                double dropout_p,
                                                std::uint64_t seed,
                                                DropoutStats *stats) {
  if (dropout_p <= 0.0) {
    auto it = cache_.find(word);
    if (it != cache_.end()) return it->second;
    auto pieces = Segment<Rng>(word, 0.0, nullptr, nullptr);
    cache_.emplace(word, pieces);
    return pieces;
  }
  Rng rng(seed);
  return Segment(word, dropout_p, &rng, stats);
}

TokenList BpeEncoder::Encode(std::string_view text, double dropout_p,
                             std::uint64_t seed, DropoutStats *stats) {
  if (dropout_p < 0.0 || dropout_p > 1.0) {
    throw InvalidArgument("dropout probability must lie in [0, 1]");
  }
  TokenList out;
  Rng rng(seed);
  for (const auto &word : TokenizeWords(text)) {
    std::vector<std::string> pieces;
    if (dropout_p <= 0.0) {
      pieces = EncodeWord(word, 0.0, 0);
    } else {
      pieces = Segment(word, dropout_p, &rng, stats);
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i + 1 < pieces.size()) {
        out.push_back(pieces[i] + std::string(kJoiner));
      } else {
        out.push_back(std::move(pieces[i]));
      }
    }
  }
  return out;
}

TokenList ApplyBpe(std::string_view text, const MergeTable &table,
                   double dropout_p, std::uint64_t seed, DropoutStats *stats) {
  BpeEncoder encoder(table);
  return encoder.Encode(text, dropout_p, seed, stats);
}

Corpus ApplyBpeCorpus(const std::vector<std::string> &sentences,
                      const MergeTable &table, double dropout_p,
                      std::uint64_t seed, DropoutStats *stats) {
  BpeEncoder encoder(table);
  Corpus out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out.push_back(encoder.Encode(sentences[i], dropout_p,
                                 seed ^ static_cast<std::uint64_t>(i), stats));
  }
  return out;
}

std::string UnBpe(const TokenList &tokens) {
  std::string out;
  bool glue = true;
  for (const auto &t : tokens) {
    if (!glue) out.push_back(' ');
    if (t.ends_with(kJoiner)) {
      out.append(t, 0, t.size() - kJoiner.size());
      glue = true;
    } else {
      out += t;
      glue = false;
    }
  }
  return out;
}

const std::vector<std::string> &Vocabulary::ReservedTokens() {
  static const std::vector<std::string> kReserved = {"<pad>", "<unk>", "<s>",
                                                     "</s>"};
  return kReserved;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string> &tokens) {
  tokens_ = ReservedTokens();
  tokens_.insert(tokens_.end(), tokens.begin(), tokens.end());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw InvalidArgument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

int Vocabulary::Id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string &Vocabulary::Token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) +
                          " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::Contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

std::vector<int> Vocabulary::Encode(const TokenList &tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto &t : tokens) ids.push_back(Id(t));
  return ids;
}

TokenList Vocabulary::Decode(const std::vector<int> &ids) const {
  TokenList out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(Token(id));
  }
  return out;
}

Vocabulary BuildVocab(const Corpus &corpus, int min_freq) {
  std::map<std::string, std::int64_t> counts;
  for (const auto &sentence : corpus) {
    for (const auto &t : sentence) ++counts[t];
  }
  const auto &reserved = Vocabulary::ReservedTokens();
  std::vector<std::pair<std::int64_t, std::string>> ranked;
  for (const auto &[t, c] : counts) {
    if (c < min_freq) continue;
    if (std::find(reserved.begin(), reserved.end(), t) != reserved.end()) {
      continue;
    }
    ranked.emplace_back(c, t);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &x, const auto &y) { return x.first > y.first; });
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto &[c, t] : ranked) tokens.push_back(std::move(t));
  return Vocabulary(tokens);
}

CoverageReport Coverage(const Vocabulary &vocab, const Corpus &eval) {
  std::unordered_set<std::string> types;
  for (const auto &sentence : eval) {
    types.insert(sentence.begin(), sentence.end());
  }
  CoverageReport report;
  report.distinct_types = types.size();
  for (const auto &t : types) {
    if (!vocab.Contains(t)) ++report.oov_types;
  }
  report.oov_rate = report.distinct_types
                        ? static_cast<double>(report.oov_types) /
                              static_cast<double>(report.distinct_types)
                        : 0.0;
  return report;
}

}  // namespace bamt::seg

namespace bamt::seg {

TokenList Segmenter::Encode(std::string_view text) const {
  switch (scheme) {
    case Scheme::kWord:
      return TokenizeWords(text);
    case Scheme::kChar:
      return TokenizeChars(text);
    case Scheme::kBpe:
      return ApplyBpe(text, merges);
  }
  return {};
}

Corpus Segmenter::EncodeCorpus(const std::vector<std::string> &texts,
                               bool training, std::uint64_t seed) const {
  if (scheme == Scheme::kBpe) {
    return ApplyBpeCorpus(texts, merges, training ? dropout : 0.0, seed);
  }
  Corpus out;
  out.reserve(texts.size());
  for (const auto &t : texts) out.push_back(Encode(t));
  return out;
}

std::string Segmenter::Decode(const TokenList &tokens) const {
  switch (scheme) {
    case Scheme::kWord: {
      std::string out;
      for (const auto &t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
      }
      return out;
    }
    case Scheme::kChar:
      return DetokenizeChars(tokens);
    case Scheme::kBpe:
      return UnBpe(tokens);
  }
  return {};
}

Vocabulary Segmenter::BuildVocabulary(
    const std::vector<std::string> &train) const {
  Corpus corpus = EncodeCorpus(train, false, 0);
  if (scheme == Scheme::kBpe && dropout > 0.0) {
    TokenList extra;
    const std::string joiner(kJoiner);
    for (const auto &sentence : train) {
      for (const auto &word : TokenizeWords(sentence)) {
        for (char32_t c : unicode::Decode(word)) {
          const std::string ch = unicode::Encode(c);
          extra.push_back(ch);
          extra.push_back(ch + joiner);
        }
      }
    }
    for (const auto &[a, b] : merges.merges()) {
      std::string joined = a + b;
      if (joined.ends_with(kEndOfWord)) {
        joined.resize(joined.size() - kEndOfWord.size());
        extra.push_back(joined);
      } else {
        extra.push_back(joined + joiner);
      }
    }
    corpus.push_back(std::move(extra));
  }
  return BuildVocab(corpus);
}

std::string Segmenter::Describe() const {
  std::string out;
  switch (scheme) {
    case Scheme::kWord:
      out = "word";
      break;
    case Scheme::kChar:
      out = "char";
      break;
    case Scheme::kBpe:
      out = "bpe" + std::to_string(merges.size());
      break;
  }
  if (dropout > 0.0) {
    std::ostringstream os;
    os << "+drop" << dropout;
    out += os.str();
  }
  return out;
}

std::string Segmenter::Fingerprint() const { return HashHex(Serialize()); }

std::string Segmenter::Serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "scheme="
     << (scheme == Scheme::kWord ? "word" : scheme == Scheme::kChar ? "char" : "bpe")
     << " dropout=" << dropout << "\n";
  if (scheme == Scheme::kBpe) os << merges.Serialize();
  return os.str();
}

Segmenter Segmenter::Parse(std::string_view text) {
  const std::size_t nl = text.find('\n');
  const std::string head(text.substr(0, nl));
  Segmenter s;
  std::istringstream is(head);
  std::string scheme_field, dropout_field;
  is >> scheme_field >> dropout_field;
  if (scheme_field == "scheme=word") {
    s.scheme = Scheme::kWord;
  } else if (scheme_field == "scheme=char") {
    s.scheme = Scheme::kChar;
  } else if (scheme_field == "scheme=bpe") {
    s.scheme = Scheme::kBpe;
  } else {
    throw ParseError("unknown segmentation header '" + head + "'", 1, 1);
  }
  if (!dropout_field.starts_with("dropout=")) {
    throw ParseError("missing dropout in segmentation header", 1, 1);
  }
  s.dropout = std::stod(dropout_field.substr(8));
  if (s.scheme == Scheme::kBpe) {
    s.merges = MergeTable::Parse(nl == std::string_view::npos
                                     ? std::string_view()
                                     : text.substr(nl + 1));
  }
  return s;
}

}  // namespace bamt::seg
