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

#include "bamt/lift.h"

#include <expat.h>

#include <algorithm>

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <type_traits>
#include <unordered_set>

#include "bamt/common.h"
#include "bamt/unicode.h"

namespace bamt {
namespace {

enum class Target { kNone, kGloss, kExample };

struct ParserState {
  XML_Parser parser = nullptr;
  LiftDocument doc;
  std::unordered_set<std::string> seen_ids;
  std::vector<std::string> stack;

  bool in_entry = false;
  DictionaryEntry entry;

  // The gloss or example form currently being collected.
  Target target = Target::kNone;
  std::size_t target_depth = 0;
  std::optional<LanguageTag> target_lang;
  std::string target_lang_code;
  std::string text;
  std::size_t text_depth = 0;  // nesting depth inside <text>

  std::string error;
};

const char *FindAttr(const XML_Char **attrs, const char *name) {
  for (int i = 0; attrs[i]; i += 2) {
    if (std::string_view(attrs[i]) == name) return attrs[i + 1];
  }
  return nullptr;
}

void Fail(ParserState *s, std::string message) {
  if (s->error.empty()) s->error = std::move(message);
  XML_StopParser(s->parser, XML_FALSE);
}

bool ParentIs(const ParserState &s, std::string_view name, std::size_t up) {
  return s.stack.size() > up && s.stack[s.stack.size() - 1 - up] == name;
}

void XMLCALL OnStart(void *data, const XML_Char *name,
                     const XML_Char **attrs) {
  auto *s = static_cast<ParserState *>(data);
  const std::string_view tag(name);

  if (tag == "entry" && !s->in_entry) {
    const char *id = FindAttr(attrs, "id");
    if (!id || !*id) id = FindAttr(attrs, "guid");
    if (!id || !*id) {
      Fail(s, "entry at line " +
                  std::to_string(XML_GetCurrentLineNumber(s->parser)) +
                  " has no id");
      return;
    }
    s->in_entry = true;
    s->entry = DictionaryEntry{};
    s->entry.entry_id = id;
  } else if (s->in_entry && s->target == Target::kNone) {
    const bool gloss = tag == "gloss" && ParentIs(*s, "sense", 0);
    const bool example =
        tag == "form" &&
        (ParentIs(*s, "example", 0) ||
         (ParentIs(*s, "translation", 0) && ParentIs(*s, "example", 1)));
    if (gloss || example) {
      const char *lang = FindAttr(attrs, "lang");
      s->target = gloss ? Target::kGloss : Target::kExample;
      s->target_depth = s->stack.size() + 1;
      s->target_lang_code = lang ? lang : "";
      s->target_lang = ParseLanguageTag(s->target_lang_code);
      s->text.clear();
      s->text_depth = 0;
    }
  } else if (s->target != Target::kNone && (tag == "text" || s->text_depth)) {
    ++s->text_depth;
  }
  s->stack.emplace_back(tag);
}

void FinishTarget(ParserState *s) {
  std::string text = unicode::NormalizeSpaces(unicode::Nfc(s->text));
  if (!text.empty()) {
    if (!s->target_lang) {
      ++s->doc.skipped_language_items;
      s->doc.diagnostics.push_back("entry '" + s->entry.entry_id +
                                   "': skipped text with unknown language '" +
                                   s->target_lang_code + "'");
    } else if (s->target == Target::kGloss) {
      s->entry.glosses_of(*s->target_lang).push_back(std::move(text));
    } else {
      s->entry.examples_of(*s->target_lang).push_back(std::move(text));
    }
  }
  s->target = Target::kNone;
}

void XMLCALL OnEnd(void *data, const XML_Char *name) {
  auto *s = static_cast<ParserState *>(data);
  const std::string_view tag(name);
  if (s->target != Target::kNone && s->text_depth) --s->text_depth;
  if (s->target != Target::kNone && s->stack.size() == s->target_depth) {
    FinishTarget(s);
  }
  s->stack.pop_back();
  if (tag == "entry" && s->in_entry &&
      std::find(s->stack.begin(), s->stack.end(), "entry") == s->stack.end()) {
    s->in_entry = false;
    if (!s->seen_ids.insert(s->entry.entry_id).second) {
      Fail(s, "duplicate entry id '" + s->entry.entry_id + "'");
      return;
    }
    s->doc.entries.push_back(std::move(s->entry));
  }
}

void XMLCALL OnChars(void *data, const XML_Char *chars, int len) {
  auto *s = static_cast<ParserState *>(data);
  if (s->target != Target::kNone && s->text_depth) {
    s->text.append(chars, static_cast<std::size_t>(len));
  }
}

void AppendEscaped(std::string *out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&':
        *out += "&amp;";
        break;
      case '<':
        *out += "&lt;";
        break;
      case '>':
        *out += "&gt;";
        break;
      case '"':
        *out += "&quot;";
        break;
      default:
        out->push_back(c);
    }
  }
}

}  // namespace

LiftDocument ParseLift(std::string_view document) {
  ParserState state;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)>
      parser(XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error("cannot create XML parser");
  state.parser = parser.get();
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), OnStart, OnEnd);
  XML_SetCharacterDataHandler(parser.get(), OnChars);

  const auto status =
      XML_Parse(parser.get(), document.data(),
                static_cast<int>(document.size()), /*isFinal=*/XML_TRUE);
  if (!state.error.empty()) throw StructuralError(state.error);
  if (status != XML_STATUS_OK) {
    throw ParseError(
        std::string("malformed XML: ") +
            XML_ErrorString(XML_GetErrorCode(parser.get())),
        XML_GetCurrentLineNumber(parser.get()),
        XML_GetCurrentColumnNumber(parser.get()) + 1);
  }
  return std::move(state.doc);
}

LiftDocument ParseLiftFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return ParseLift(buf.str());
}

std::string SerializeLift(const std::vector<DictionaryEntry> &entries) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<lift version=\"0.13\">\n";
  for (const auto &e : entries) {
    out += "  <entry id=\"";
    AppendEscaped(&out, e.entry_id);
    out += "\">\n    <sense>\n";
    for (LanguageTag lang : kAllLanguages) {
      for (const auto &g : e.glosses_of(lang)) {
        out += "      <gloss lang=\"";
        out += LanguageCode(lang);
        out += "\"><text>";
        AppendEscaped(&out, g);
        out += "</text></gloss>\n";
      }
    }
    for (LanguageTag lang : kAllLanguages) {
      for (const auto &x : e.examples_of(lang)) {
        out += "      <example><form lang=\"";
        out += LanguageCode(lang);
        out += "\"><text>";
        AppendEscaped(&out, x);
        out += "</text></form></example>\n";
      }
    }
    out += "    </sense>\n  </entry>\n";
  }
  out += "</lift>\n";
  return out;
}

CorpusStats ComputeStats(const std::vector<DictionaryEntry> &entries) {
  CorpusStats stats;
  for (const auto &e : entries) {
    for (std::size_t l = 0; l < kAllLanguages.size(); ++l) {
      stats.gloss_count[l] += e.glosses[l].size();
      stats.example_count[l] += e.examples[l].size();
    }
  }
  return stats;
}

namespace {

std::vector<SentenceRecord> Flatten(const std::vector<DictionaryEntry> &entries,
                                    const PerLanguage DictionaryEntry::*field) {
  std::vector<SentenceRecord> out;
  for (const auto &e : entries) {
    for (LanguageTag lang : kAllLanguages) {
      const auto &items = (e.*field)[static_cast<std::size_t>(lang)];
      for (std::size_t i = 0; i < items.size(); ++i) {
        SentenceRecord r;
        r.entry_id = e.entry_id;
        r.language = lang;
        r.ordinal = static_cast<int>(i);
        r.text = items[i];
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<SentenceRecord> ExtractExamples(
    const std::vector<DictionaryEntry> &entries) {
  return Flatten(entries, &DictionaryEntry::examples);
}

std::vector<SentenceRecord> ExtractGlosses(
    const std::vector<DictionaryEntry> &entries) {
  return Flatten(entries, &DictionaryEntry::glosses);
}

}  // namespace bamt
