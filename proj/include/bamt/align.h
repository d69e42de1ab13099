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

#ifndef BAMT_ALIGN_H_
#define BAMT_ALIGN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bamt/common.h"
#include "bamt/dataset.h"
#include "bamt/language.h"

namespace bamt::align {

// A request that violates a precondition (end of stream, existing output
// file, ...). The session is left unchanged.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

enum class UnitKind { kBFE, kBF, kBE };
std::string_view KindName(UnitKind kind);  // "BFE", "BF", "BE"
UnitKind ParseKind(std::string_view text);

enum class Step { kNext, kPrev };
Step ParseStep(std::string_view text);  // "next" or "prev"
std::string_view StepName(Step step);

// The three streams of a session, in this order.
inline constexpr LanguageTag kStreams[3] = {LanguageTag::kBam, LanguageTag::kFr,
                                            LanguageTag::kEn};

struct SentenceRef {
  std::string text;
  std::size_t line = 0;  // 1-based line in the stream file

  bool operator==(const SentenceRef &) const = default;
};

struct AlignedUnit {
  UnitKind kind = UnitKind::kBFE;
  std::optional<SentenceRef> bam, fr, en;

  bool operator==(const AlignedUnit &) const = default;
};

// Output format: kind, bam, fr, en separated by tabs, one unit per line,
// empty field when absent. Backslash, tab, CR and LF inside texts are
// escaped as \\, \t, \r and \n.
std::string FormatUnit(const AlignedUnit &unit);
AlignedUnit ParseUnit(std::string_view line);
std::vector<AlignedUnit> ReadUnits(const std::string &path);

struct ExportedPairs {
  data::ParallelCorpus bam_fr;  // bam -> fr
  data::ParallelCorpus bam_en;  // bam -> en
};

// BFE units feed both lists, BF and BE one each; order is preserved.
ExportedPairs ExportPairs(const std::vector<AlignedUnit> &units);

struct Stream {
  std::vector<std::string> texts;
  std::vector<std::size_t> lines;  // source line of every text

  // Non-blank lines of a UTF-8 file; trailing CR is dropped.
  static Stream FromFile(const std::string &path);
  static Stream FromTexts(std::vector<std::string> texts);
  std::size_t size() const { return texts.size(); }
};

struct SessionOptions {
  // Optional JSONL journal: one line per successful action, flushed
  // immediately, so that a session can be restored after a crash.
  std::string journal_path;
  // Called after the temporary file is complete and before it replaces
  // the output file; used to inject failures in tests.
  std::function<void(const std::string &temp_path)> before_rename;
};

class Session {
 public:
  Session(Stream bam, Stream fr, Stream en, std::string output_path,
          SessionOptions options = {});

  const Stream &stream(LanguageTag lang) const;
  std::size_t cursor(LanguageTag lang) const;
  const std::vector<AlignedUnit> &aligned() const { return aligned_; }
  std::size_t saved_units() const { return saved_; }
  bool has_saved() const { return has_saved_; }
  const std::string &output_path() const { return output_path_; }
  // Increases with every successful mutation.
  std::uint64_t version() const { return version_; }

  // Moves one cursor (or all of them when `lang` is empty) by one, clamped
  // to [0, stream length].
  void Advance(std::optional<LanguageTag> lang, Step step);
  // Appends the unit under the cursors of the involved languages and
  // advances those cursors.
  const AlignedUnit &Align(UnitKind kind);
  // Writes all units to a new output file (temp file + rename).
  void Save(bool overwrite = false);
  // Appends the units aligned since the last save to the existing file.
  void ContinueSave();

  // Re-applies a journal written by a previous session on the same streams.
  // Saves are not repeated; only the saved-unit count is restored.
  void Restore(const std::string &journal_path);

 private:
  std::size_t &CursorRef(LanguageTag lang);
  void Journal(const std::string &line);
  void WriteAtomically(const std::string &content);

  Stream streams_[3];
  std::size_t cursors_[3] = {0, 0, 0};
  std::vector<AlignedUnit> aligned_;
  std::size_t saved_ = 0;
  bool has_saved_ = false;
  std::string output_path_;
  SessionOptions options_;
  std::uint64_t version_ = 0;
};

}  // namespace bamt::align

#endif  // BAMT_ALIGN_H_
