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

#include "bamt/align.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bamt/unicode.h"
#include "json.hpp"

namespace bamt::align {
namespace {

namespace fs = std::filesystem;

std::size_t StreamIndex(LanguageTag lang) {
  switch (lang) {
    case LanguageTag::kBam:
      return 0;
    case LanguageTag::kFr:
      return 1;
    case LanguageTag::kEn:
      return 2;
    default:
      break;
  }
  throw InvalidArgument("alignment streams are bam, fr and en, not " +
                        std::string(LanguageCode(lang)));
}

bool Involves(UnitKind kind, LanguageTag lang) {
  switch (lang) {
    case LanguageTag::kBam:
      return true;
    case LanguageTag::kFr:
      return kind != UnitKind::kBE;
    case LanguageTag::kEn:
      return kind != UnitKind::kBF;
    default:
      return false;
  }
}

std::string Escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string Unescape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (++i == text.size()) throw ParseError("dangling backslash", 0, i);
    switch (text[i]) {
      case '\\':
        out += '\\';
        break;
      case 't':
        out += '\t';
        break;
      case 'n':
        out += '\n';
        break;
      case 'r':
        out += '\r';
        break;
      default:
        throw ParseError(std::string("unknown escape \\") + text[i], 0, i);
    }
  }
  return out;
}

std::string ReadWhole(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

}  // namespace

std::string_view KindName(UnitKind kind) {
  switch (kind) {
    case UnitKind::kBFE:
      return "BFE";
    case UnitKind::kBF:
      return "BF";
    case UnitKind::kBE:
      return "BE";
  }
  return "?";
}

UnitKind ParseKind(std::string_view text) {
  if (text == "BFE") return UnitKind::kBFE;
  if (text == "BF") return UnitKind::kBF;
  if (text == "BE") return UnitKind::kBE;
  throw InvalidArgument("unit kind must be BFE, BF or BE: " + std::string(text));
}

Step ParseStep(std::string_view text) {
  if (text == "next") return Step::kNext;
  if (text == "prev") return Step::kPrev;
  throw InvalidArgument("direction must be next or prev: " + std::string(text));
}

std::string_view StepName(Step step) { return step == Step::kNext ? "next" : "prev"; }

std::string FormatUnit(const AlignedUnit &unit) {
  auto field = [](const std::optional<SentenceRef> &s) {
    return s ? Escape(s->text) : std::string();
  };
  return std::string(KindName(unit.kind)) + "\t" + field(unit.bam) + "\t" +
         field(unit.fr) + "\t" + field(unit.en);
}

AlignedUnit ParseUnit(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos
                                            ? std::string_view::npos
                                            : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (fields.size() != 4) {
    throw ParseError("expected 4 tab-separated fields, got " +
                         std::to_string(fields.size()), 0, 0);
  }
  AlignedUnit unit;
  unit.kind = ParseKind(fields[0]);
  auto set = [&](std::optional<SentenceRef> &slot, std::string_view f,
                 LanguageTag lang) {
    if (Involves(unit.kind, lang)) {
      if (f.empty()) {
        throw ParseError(std::string(KindName(unit.kind)) + " unit without " +
                             std::string(LanguageCode(lang)) + " text", 0, 0);
      }
      slot = SentenceRef{Unescape(f), 0};
    } else if (!f.empty()) {
      throw ParseError(std::string(KindName(unit.kind)) + " unit with " +
                           std::string(LanguageCode(lang)) + " text", 0, 0);
    }
  };
  set(unit.bam, fields[1], LanguageTag::kBam);
  set(unit.fr, fields[2], LanguageTag::kFr);
  set(unit.en, fields[3], LanguageTag::kEn);
  return unit;
}

std::vector<AlignedUnit> ReadUnits(const std::string &path) {
  std::vector<AlignedUnit> units;
  std::size_t n = 0;
  for (const auto &line : data::ReadLines(path)) {
    ++n;
    try {
      units.push_back(ParseUnit(line));
    } catch (const ParseError &e) {
      throw ParseError(path + ": " + e.what(), n, 0);
    }
  }
  return units;
}

ExportedPairs ExportPairs(const std::vector<AlignedUnit> &units) {
  ExportedPairs out;
  out.bam_fr.src_lang = out.bam_en.src_lang = LanguageTag::kBam;
  out.bam_fr.tgt_lang = LanguageTag::kFr;
  out.bam_en.tgt_lang = LanguageTag::kEn;
  for (const auto &u : units) {
    if (u.kind != UnitKind::kBE) out.bam_fr.pairs.push_back({u.bam->text, u.fr->text, false});
    if (u.kind != UnitKind::kBF) out.bam_en.pairs.push_back({u.bam->text, u.en->text, false});
  }
  return out;
}

Stream Stream::FromFile(const std::string &path) {
  Stream s;
  std::size_t n = 0;
  for (auto &line : data::ReadLines(path)) {
    ++n;
    if (unicode::Trim(line).empty()) continue;
    s.texts.push_back(std::move(line));
    s.lines.push_back(n);
  }
  return s;
}

Stream Stream::FromTexts(std::vector<std::string> texts) {
  Stream s;
  s.texts = std::move(texts);
  for (std::size_t i = 0; i < s.texts.size(); ++i) s.lines.push_back(i + 1);
  return s;
}

Session::Session(Stream bam, Stream fr, Stream en, std::string output_path,
                 SessionOptions options)
    : output_path_(std::move(output_path)), options_(std::move(options)) {
  streams_[0] = std::move(bam);
  streams_[1] = std::move(fr);
  streams_[2] = std::move(en);
  if (output_path_.empty()) throw InvalidArgument("session without an output path");
}

const Stream &Session::stream(LanguageTag lang) const {
  return streams_[StreamIndex(lang)];
}

std::size_t Session::cursor(LanguageTag lang) const {
  return cursors_[StreamIndex(lang)];
}

std::size_t &Session::CursorRef(LanguageTag lang) {
  return cursors_[StreamIndex(lang)];
}

void Session::Journal(const std::string &line) {
  if (options_.journal_path.empty()) return;
  std::ofstream os(options_.journal_path, std::ios::binary | std::ios::app);
  os << line << '\n';
  os.flush();
  if (!os) throw IoError("cannot append to journal " + options_.journal_path);
}

void Session::Advance(std::optional<LanguageTag> lang, Step step) {
  if (lang) StreamIndex(*lang);
  for (LanguageTag l : kStreams) {
    if (lang && *lang != l) continue;
    std::size_t &c = CursorRef(l);
    if (step == Step::kNext) {
      if (c < stream(l).size()) ++c;
    } else if (c > 0) {
      --c;
    }
  }
  ++version_;
  nlohmann::json j = {{"op", "advance"},
                      {"language", lang ? std::string(LanguageCode(*lang)) : "all"},
                      {"direction", StepName(step)}};
  Journal(j.dump());
}

const AlignedUnit &Session::Align(UnitKind kind) {
  for (LanguageTag l : kStreams) {
    if (Involves(kind, l) && cursor(l) >= stream(l).size()) {
      throw PreconditionError("cannot align " + std::string(KindName(kind)) +
                              ": the " + std::string(LanguageCode(l)) +
                              " stream is at its end (cursor " +
                              std::to_string(cursor(l)) + " of " +
                              std::to_string(stream(l).size()) + ")");
    }
  }
  AlignedUnit unit;
  unit.kind = kind;
  auto take = [&](LanguageTag l) {
    const Stream &s = stream(l);
    const std::size_t c = cursor(l);
    return SentenceRef{s.texts[c], s.lines[c]};
  };
  unit.bam = take(LanguageTag::kBam);
  if (Involves(kind, LanguageTag::kFr)) unit.fr = take(LanguageTag::kFr);
  if (Involves(kind, LanguageTag::kEn)) unit.en = take(LanguageTag::kEn);
  aligned_.push_back(std::move(unit));
  for (LanguageTag l : kStreams) {
    if (Involves(kind, l)) ++CursorRef(l);
  }
  ++version_;
  Journal(nlohmann::json({{"op", "align"}, {"kind", KindName(kind)}}).dump());
  return aligned_.back();
}

void Session::WriteAtomically(const std::string &content) {
  const std::string temp = output_path_ + ".tmp";
  {
    std::ofstream os(temp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + temp);
    os << content;
    os.flush();
    if (!os) {
      std::remove(temp.c_str());
      throw IoError("cannot write " + temp);
    }
  }
  try {
    if (options_.before_rename) options_.before_rename(temp);
  } catch (...) {
    std::remove(temp.c_str());
    throw;
  }
  std::error_code ec;
  fs::rename(temp, output_path_, ec);
  if (ec) {
    std::remove(temp.c_str());
    throw IoError("cannot replace " + output_path_ + ": " + ec.message());
  }
}

void Session::Save(bool overwrite) {
  if (!overwrite && fs::exists(output_path_)) {
    throw PreconditionError("output file " + output_path_ +
                            " already exists; use continue-save or overwrite");
  }
  std::string content;
  for (const auto &u : aligned_) content += FormatUnit(u) + "\n";
  WriteAtomically(content);
  saved_ = aligned_.size();
  has_saved_ = true;
  ++version_;
  Journal(nlohmann::json({{"op", "save"}, {"units", saved_}}).dump());
}

void Session::ContinueSave() {
  if (!fs::exists(output_path_)) {
    throw PreconditionError("output file " + output_path_ +
                            " does not exist; save first");
  }
  std::string content = ReadWhole(output_path_);
  if (!content.empty() && content.back() != '\n') content += '\n';
  for (std::size_t i = saved_; i < aligned_.size(); ++i) {
    content += FormatUnit(aligned_[i]) + "\n";
  }
  WriteAtomically(content);
  saved_ = aligned_.size();
  has_saved_ = true;
  ++version_;
  Journal(nlohmann::json({{"op", "continue-save"}, {"units", saved_}}).dump());
}

void Session::Restore(const std::string &journal_path) {
  const std::string keep = options_.journal_path;
  options_.journal_path.clear();
  std::size_t n = 0;
  try {
    for (const auto &line : data::ReadLines(journal_path)) {
      ++n;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const std::string op = j.at("op").get<std::string>();
      if (op == "advance") {
        const std::string lang = j.at("language").get<std::string>();
        Advance(lang == "all" ? std::nullopt
                              : std::optional<LanguageTag>(LanguageFromCode(lang)),
                ParseStep(j.at("direction").get<std::string>()));
      } else if (op == "align") {
        Align(ParseKind(j.at("kind").get<std::string>()));
      } else if (op == "create") {
        continue;
      } else if (op == "save" || op == "continue-save") {
        saved_ = j.at("units").get<std::size_t>();
        has_saved_ = true;
        ++version_;
      } else {
        throw ParseError("unknown journal op " + op, n, 0);
      }
    }
  } catch (const nlohmann::json::exception &e) {
    options_.journal_path = keep;
    throw ParseError(journal_path + ": " + e.what(), n, 0);
  } catch (...) {
    options_.journal_path = keep;
    throw;
  }
  options_.journal_path = keep;
}

}  // namespace bamt::align
