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

#include "bamt/experiments.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "bamt/common.h"
#include "bamt/hash.h"
#include "bamt/unicode.h"

namespace bamt::experiments {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void Log(const GridOptions &options, const std::string &message) {
  if (options.log) options.log(message);
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("cannot write " + path.string());
}

std::string FormatNumber(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string Slug(std::size_t index, const std::string &label) {
  std::string out = std::to_string(index + 1);
  if (out.size() < 2) out = "0" + out;
  out += "-";
  for (unsigned char c : label) {
    out += std::isalnum(c) ? static_cast<char>(c) : '_';
  }
  return out;
}

data::ParallelCorpus LoadPart(const ExperimentPlan &plan, LanguageTag foreign,
                              const std::string &part) {
  const std::string code(LanguageCode(foreign));
  const auto it = plan.corpora.find(code);
  if (it == plan.corpora.end()) {
    throw InvalidArgument("no corpus for language " + code);
  }
  const std::string prefix = it->second + "." + part + ".";
  return data::ReadParallel(prefix + code, prefix + "bam", foreign,
                            LanguageTag::kBam);
}

data::ParallelCorpus Oriented(const data::ParallelCorpus &foreign_bam,
                              const Direction &d) {
  return d.src == LanguageTag::kBam ? foreign_bam.Reversed() : foreign_bam;
}

std::string ReportJson(const metrics::ScoreReport &r) { return r.ToJson(); }

// One training run; produces a result per direction it serves.
struct Unit {
  std::size_t row_index;
  const PlanRow *row;
  std::vector<Direction> directions;
};

std::vector<RowResult> RunUnit(const ExperimentPlan &plan, const Unit &unit,
                               const fs::path &out_root,
                               const GridOptions &options) {
  const PlanRow &row = *unit.row;
  const nmt::TrainingConfig config = plan.ResolveConfig(row);
  const SchemeSpec spec = SchemeSpec::Parse(row.segmentation);
  const std::string description =
      row.description.empty() ? spec.Description() : row.description;

  std::vector<RowResult> results;
  for (const auto &d : unit.directions) {
    RowResult r;
    r.label = row.label;
    r.description = description;
    r.segmentation = spec.Name();
    r.direction = d.Name();
    r.seed = config.seed;
    r.config_hash = config.Hash();
    r.directory = (fs::path(Slug(unit.row_index, row.label)) /
                   (row.multilingual ? std::string("multi") : d.Name()))
                      .generic_string();
    results.push_back(r);
  }
  const fs::path dir = out_root / results.front().directory;
  fs::create_directories(dir);

  data::ParallelCorpus train, selection_dev;
  std::vector<data::ParallelCorpus> devs;
  seg::Segmenter src_seg, trg_seg;
  std::vector<std::string> warnings;
  if (row.multilingual) {
    std::map<LanguageTag, std::size_t> which;
    for (std::size_t i = 0; i < unit.directions.size(); ++i) {
      which[unit.directions[i].foreign()] = i;
    }
    const auto fr = LanguageTag::kFr, en = LanguageTag::kEn;
    const auto concat = data::MultilingualConcat(
        LoadPart(plan, fr, "train"), LoadPart(plan, en, "train"),
        {LoadPart(plan, fr, "dev"), LoadPart(plan, fr, "test")},
        {LoadPart(plan, en, "dev"), LoadPart(plan, en, "test")});
    train = concat.corpus;
    Log(options, row.label + ": multilingual corpus of " +
                     std::to_string(train.size()) + " pairs, " +
                     std::to_string(concat.removed) + " removed for overlap");
    std::vector<std::string> all = train.Sources();
    const auto targets = train.Targets();
    all.insert(all.end(), targets.begin(), targets.end());
    src_seg = MakeSegmenter(spec, all, &warnings);
    trg_seg = src_seg;
    devs.resize(unit.directions.size());
    for (const auto &[lang, i] : which) {
      devs[i] = Oriented(LoadPart(plan, lang, "dev"), unit.directions[i]);
    }
    selection_dev = devs.front();
    for (std::size_t i = 1; i < devs.size(); ++i) {
      selection_dev.pairs.insert(selection_dev.pairs.end(),
                                 devs[i].pairs.begin(), devs[i].pairs.end());
    }
  } else {
    const Direction &d = unit.directions.front();
    train = Oriented(LoadPart(plan, d.foreign(), "train"), d);
    devs.push_back(Oriented(LoadPart(plan, d.foreign(), "dev"), d));
    selection_dev = devs.front();
    src_seg = MakeSegmenter(spec, train.Sources(), &warnings);
    trg_seg = MakeSegmenter(spec, train.Targets(), &warnings);
  }
  for (const auto &w : warnings) Log(options, row.label + ": " + w);
  if (src_seg.scheme == seg::Scheme::kBpe) {
    src_seg.merges.Save((dir / "src.codes").string());
    trg_seg.merges.Save((dir / "trg.codes").string());
  }
  WriteText(dir / "config.json", config.ToJson().dump(2) + "\n");

  nmt::TrainOptions train_options;
  train_options.on_epoch = [&](const nmt::EpochRecord &e) {
    Log(options, row.label + " " + results.front().direction + " epoch " +
                     std::to_string(e.epoch) + " loss " +
                     FormatNumber(e.train_loss) + " dev BLEU " +
                     FormatNumber(e.dev_bleu));
  };
  const nmt::Checkpoint ckpt =
      nmt::Train(config, src_seg, trg_seg, train, selection_dev, train_options);
  ckpt.Save((dir / "model.ckpt").string());
  Json history = Json::array();
  for (const auto &e : ckpt.history) {
    history.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss},
                       {"dev_bleu", e.dev_bleu}, {"dev_chrf", e.dev_chrf}});
  }
  WriteText(dir / "history.json", history.dump(2) + "\n");

  const nmt::Translator translator(ckpt);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto hyps = translator.TranslateAll(devs[i].Sources(), config.beam_width);
    const std::string stem = "dev." + results[i].direction;
    data::WriteLines((dir / (stem + ".hyp")).string(), hyps);
    results[i].dev = metrics::Score(hyps, devs[i].Targets());
    WriteText(dir / (stem + ".json"), ReportJson(results[i].dev) + "\n");
    results[i].ok = true;
    results[i].best_epoch = ckpt.epoch;
    results[i].trained_epochs = ckpt.trained_epochs;
    results[i].data_hash = ckpt.data_hash;
  }
  return results;
}

}  // namespace

SchemeSpec SchemeSpec::Parse(std::string_view text) {
  static const std::regex kBpe(R"(bpe([0-9]+)(\+drop([0-9]*\.?[0-9]+))?)");
  SchemeSpec s;
  const std::string t(text);
  std::smatch m;
  if (t == "word") {
    s.scheme = seg::Scheme::kWord;
  } else if (t == "char") {
    s.scheme = seg::Scheme::kChar;
  } else if (std::regex_match(t, m, kBpe)) {
    s.scheme = seg::Scheme::kBpe;
    s.merges = std::stoi(m[1].str());
    if (m[3].matched) s.dropout = std::stod(m[3].str());
    if (s.merges < 1) throw InvalidArgument("BPE needs at least one merge: " + t);
    if (s.dropout >= 1.0) throw InvalidArgument("BPE dropout must be below 1: " + t);
  } else {
    throw InvalidArgument("unknown segmentation '" + t +
                          "' (word, char, bpe<N> or bpe<N>+drop<p>)");
  }
  return s;
}

std::string SchemeSpec::Name() const {
  switch (scheme) {
    case seg::Scheme::kWord:
      return "word";
    case seg::Scheme::kChar:
      return "char";
    case seg::Scheme::kBpe:
      break;
  }
  std::string out = "bpe" + std::to_string(merges);
  if (dropout > 0) out += "+drop" + FormatNumber(dropout);
  return out;
}

std::string SchemeSpec::Description() const {
  switch (scheme) {
    case seg::Scheme::kWord:
      return "Word";
    case seg::Scheme::kChar:
      return "Char";
    case seg::Scheme::kBpe:
      break;
  }
  std::string out = "BPE " + std::to_string(merges) + " merges each";
  if (dropout > 0) out += ", dropout=" + FormatNumber(dropout);
  return out;
}

seg::Segmenter MakeSegmenter(const SchemeSpec &spec,
                             const std::vector<std::string> &train,
                             std::vector<std::string> *warnings) {
  seg::Segmenter s;
  s.scheme = spec.scheme;
  if (spec.scheme == seg::Scheme::kBpe) {
    seg::Corpus corpus;
    corpus.reserve(train.size());
    for (const auto &t : train) corpus.push_back(seg::TokenizeWords(t));
    seg::LearnBpeOptions o;
    o.num_merges = spec.merges;
    s.merges = seg::LearnBpe(corpus, o, warnings);
    s.dropout = spec.dropout;
  }
  return s;
}

Direction Direction::Parse(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw InvalidArgument("direction must look like fr-bam: " + std::string(text));
  }
  Direction d;
  d.src = LanguageFromCode(text.substr(0, dash));
  d.tgt = LanguageFromCode(text.substr(dash + 1));
  if ((d.src == LanguageTag::kBam) == (d.tgt == LanguageTag::kBam)) {
    throw InvalidArgument("exactly one side of a direction must be bam: " +
                          std::string(text));
  }
  return d;
}

std::string Direction::Name() const {
  return std::string(LanguageCode(src)) + "-" + std::string(LanguageCode(tgt));
}

ExperimentPlan ExperimentPlan::FromJson(const nlohmann::json &j,
                                        const std::string &base_dir) {
  static const std::set<std::string> kPlanKeys = {"name", "corpora", "config",
                                                  "rows", "output_dir"};
  static const std::set<std::string> kRowKeys = {
      "label", "description", "segmentation", "directions", "direction",
      "overrides", "multilingual"};
  auto resolve = [&](const std::string &p) {
    if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
    return (fs::path(base_dir) / p).lexically_normal().string();
  };
  ExperimentPlan plan;
  try {
    if (!j.is_object()) throw InvalidArgument("plan must be a JSON object");
    for (const auto &[key, value] : j.items()) {
      if (!kPlanKeys.count(key)) throw InvalidArgument("unknown plan key '" + key + "'");
    }
    plan.name = j.value("name", "");
    plan.output_dir = resolve(j.value("output_dir", ""));
    if (j.contains("config")) plan.config = j.at("config");
    if (j.contains("corpora")) {
      for (const auto &[code, prefix] : j.at("corpora").items()) {
        plan.corpora[code] = resolve(prefix.get<std::string>());
      }
    }
    for (const auto &r : j.at("rows")) {
      for (const auto &[key, value] : r.items()) {
        if (!kRowKeys.count(key)) throw InvalidArgument("unknown row key '" + key + "'");
      }
      PlanRow row;
      row.label = r.at("label").get<std::string>();
      row.description = r.value("description", "");
      row.segmentation = r.at("segmentation").get<std::string>();
      if (r.contains("direction")) {
        row.directions.push_back(r.at("direction").get<std::string>());
      }
      if (r.contains("directions")) {
        for (const auto &d : r.at("directions")) row.directions.push_back(d.get<std::string>());
      }
      if (r.contains("overrides")) row.overrides = r.at("overrides");
      row.multilingual = r.value("multilingual", false);
      plan.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument(std::string("malformed plan: ") + e.what());
  }
  return plan;
}

ExperimentPlan ExperimentPlan::Load(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument("malformed plan " + path + ": " + e.what());
  }
  return FromJson(j, fs::path(path).parent_path().string());
}

nmt::TrainingConfig ExperimentPlan::ResolveConfig(const PlanRow &row) const {
  return nmt::WithOverrides(nmt::WithOverrides(nmt::TrainingConfig(), config),
                            row.overrides);
}

void ExperimentPlan::Validate() const {
  if (rows.empty()) throw InvalidArgument("plan has no rows");
  std::set<std::string> labels;
  for (const auto &row : rows) {
    const std::string where = "row '" + row.label + "': ";
    if (row.label.empty()) throw InvalidArgument("row without a label");
    if (!labels.insert(row.label).second) {
      throw InvalidArgument("duplicate row label '" + row.label + "'");
    }
    if (row.directions.empty()) throw InvalidArgument(where + "no directions");
    try {
      SchemeSpec::Parse(row.segmentation);
      ResolveConfig(row).Validate();
    } catch (const Error &e) {
      throw InvalidArgument(where + e.what());
    }
    std::set<std::string> seen;
    for (const auto &text : row.directions) {
      const Direction d = Direction::Parse(text);
      if (!seen.insert(d.Name()).second) {
        throw InvalidArgument(where + "direction " + d.Name() + " listed twice");
      }
      if (!corpora.count(std::string(LanguageCode(d.foreign())))) {
        throw InvalidArgument(where + "no corpus for " + d.Name());
      }
      if (row.multilingual && d.tgt != LanguageTag::kBam) {
        throw InvalidArgument(where + "multilingual rows translate into bam");
      }
    }
    if (row.multilingual &&
        seen != std::set<std::string>{"en-bam", "fr-bam"}) {
      throw InvalidArgument(where + "multilingual rows need fr-bam and en-bam");
    }
  }
}

GridResult RunGrid(const ExperimentPlan &plan, const GridOptions &options) {
  plan.Validate();
  if (plan.output_dir.empty()) throw InvalidArgument("plan has no output directory");
  const fs::path out(plan.output_dir);
  fs::create_directories(out);

  std::vector<Unit> units;
  for (std::size_t i = 0; i < plan.rows.size(); ++i) {
    const PlanRow &row = plan.rows[i];
    std::vector<Direction> dirs;
    for (const auto &d : row.directions) dirs.push_back(Direction::Parse(d));
    if (row.multilingual) {
      units.push_back({i, &row, dirs});
    } else {
      for (const auto &d : dirs) units.push_back({i, &row, {d}});
    }
  }

  GridResult grid;
  for (const auto &unit : units) {
    std::vector<RowResult> results;
    try {
      results = RunUnit(plan, unit, out, options);
    } catch (const std::exception &e) {
      const std::string message = e.what();
      Log(options, unit.row->label + " failed: " + message);
      const nmt::TrainingConfig config = [&] {
        try {
          return plan.ResolveConfig(*unit.row);
        } catch (const Error &) {
          return nmt::TrainingConfig();
        }
      }();
      for (const auto &d : unit.directions) {
        RowResult r;
        r.label = unit.row->label;
        r.description = unit.row->description;
        r.segmentation = unit.row->segmentation;
        if (r.description.empty()) {
          try {
            r.description = SchemeSpec::Parse(r.segmentation).Description();
          } catch (const Error &) {
          }
        }
        r.direction = d.Name();
        r.error = message;
        r.seed = config.seed;
        r.config_hash = config.Hash();
        results.push_back(r);
        ++grid.failures;
      }
    }
    grid.rows.insert(grid.rows.end(), results.begin(), results.end());
  }

  // Best dev system per direction (earliest row on ties) goes to test.
  std::map<std::string, std::size_t> best;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    const RowResult &r = grid.rows[i];
    if (!r.ok) continue;
    const auto it = best.find(r.direction);
    if (it == best.end()) {
      best[r.direction] = i;
      order.push_back(r.direction);
    } else if (r.dev.bleu > grid.rows[it->second].dev.bleu) {
      it->second = i;
    }
  }
  for (const auto &direction : order) {
    RowResult &r = grid.rows[best[direction]];
    try {
      const Direction d = Direction::Parse(direction);
      const data::ParallelCorpus test = Oriented(LoadPart(plan, d.foreign(), "test"), d);
      const fs::path dir = out / r.directory;
      const nmt::Checkpoint ckpt = nmt::Checkpoint::Load((dir / "model.ckpt").string());
      const auto hyps = nmt::Translator(ckpt).TranslateAll(test.Sources(),
                                                           ckpt.config.beam_width);
      data::WriteLines((dir / ("test." + direction + ".hyp")).string(), hyps);
      r.test = metrics::Score(hyps, test.Targets());
      WriteText(dir / ("test." + direction + ".json"), ReportJson(*r.test) + "\n");
      Log(options, direction + ": best dev system " + r.label + ", test BLEU " +
                       FormatNumber(r.test->bleu));
    } catch (const std::exception &e) {
      Log(options, direction + " test scoring failed: " + e.what());
      r.error = std::string("test scoring failed: ") + e.what();
      ++grid.failures;
    }
  }

  const Report report = EmitReport(grid.rows);
  WriteText(out / "results.txt", report.text);
  WriteText(out / "results.json", report.json + "\n");
  return grid;
}

Report EmitReport(const std::vector<RowResult> &rows) {
  Report report;
  std::vector<std::string> directions, labels;
  std::map<std::string, std::string> descriptions;
  for (const auto &r : rows) {
    if (std::find(directions.begin(), directions.end(), r.direction) == directions.end()) {
      directions.push_back(r.direction);
    }
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) {
      labels.push_back(r.label);
      descriptions[r.label] = r.description;
    }
  }
  report.dev.directions = directions;
  report.test.directions = directions;
  for (const auto &label : labels) {
    std::vector<const metrics::ScoreReport *> dev(directions.size(), nullptr);
    std::vector<const metrics::ScoreReport *> test(directions.size(), nullptr);
    bool any_test = false;
    for (const auto &r : rows) {
      if (r.label != label) continue;
      const std::size_t k = static_cast<std::size_t>(
          std::find(directions.begin(), directions.end(), r.direction) -
          directions.begin());
      if (r.ok) dev[k] = &r.dev;
      if (r.test) {
        test[k] = &*r.test;
        any_test = true;
      }
    }
    report.dev.AddRow(label, descriptions[label], dev);
    if (any_test) report.test.AddRow(label, descriptions[label], test);
  }

  std::ostringstream text;
  text << "Dev sets: corpus BLEU and ChrF\n\n" << report.dev.ToText()
       << "\nTest sets: best dev system per direction\n\n"
       << report.test.ToText() << "\nProvenance\n\n";
  Json provenance = Json::array();
  for (const auto &r : rows) {
    text << r.label << " " << r.direction << ": segmentation=" << r.segmentation
         << " seed=" << r.seed << " config=" << r.config_hash;
    Json p = {{"label", r.label},       {"direction", r.direction},
              {"segmentation", r.segmentation}, {"seed", r.seed},
              {"config_hash", r.config_hash}, {"ok", r.ok}};
    if (r.ok) {
      text << " data=" << r.data_hash << " epoch=" << r.best_epoch << "/"
           << r.trained_epochs;
      p["data_hash"] = r.data_hash;
      p["best_epoch"] = r.best_epoch;
      p["trained_epochs"] = r.trained_epochs;
    }
    if (!r.error.empty()) {
      text << " FAILED: " << r.error;
      p["error"] = r.error;
    }
    text << "\n";
    provenance.push_back(p);
  }
  report.text = text.str();
  Json j;
  j["dev"] = Json::parse(report.dev.ToJson());
  j["test"] = Json::parse(report.test.ToJson());
  j["provenance"] = provenance;
  report.json = j.dump(2);
  return report;
}

Regime ParseRegime(std::string_view text) {
  if (text == "btf") return Regime::kFineTune;
  if (text == "btr") return Regime::kRetrain;
  throw InvalidArgument("regime must be btf or btr: " + std::string(text));
}

std::string_view RegimeName(Regime regime) {
  return regime == Regime::kFineTune ? "btf" : "btr";
}

BacktranslationResult Backtranslate(const nmt::Checkpoint &reverse_model,
                                    const std::vector<std::string> &monolingual,
                                    const BacktranslationOptions &options) {
  BacktranslationResult result;
  result.corpus.src_lang = reverse_model.trg_lang;
  result.corpus.tgt_lang = reverse_model.src_lang;
  const nmt::Translator translator(reverse_model);
  for (const auto &sentence : monolingual) {
    if (options.max_tokens &&
        unicode::SplitWhitespace(sentence).size() > *options.max_tokens) {
      ++result.filtered;
      continue;
    }
    std::string synthetic;
    try {
      synthetic = unicode::Trim(translator.Translate(sentence, options.beam_width));
    } catch (const Error &) {
      synthetic.clear();
    }
    if (synthetic.empty()) {
      ++result.skipped;
      continue;
    }
    result.corpus.pairs.push_back({synthetic, sentence, true});
  }
  return result;
}

AugmentResult AugmentAndTrain(const nmt::Checkpoint &base,
                              const seg::Segmenter &src_seg,
                              const seg::Segmenter &trg_seg,
                              const data::ParallelCorpus &original,
                              const data::ParallelCorpus &synthetic,
                              const data::ParallelCorpus &dev, Regime regime,
                              const AugmentOptions &options) {
  if (!(src_seg == base.src_seg) || !(trg_seg == base.trg_seg)) {
    throw InvalidArgument("segmentation differs from the base model (" +
                          base.src_seg.Describe() + "/" + base.trg_seg.Describe() +
                          " vs " + src_seg.Describe() + "/" + trg_seg.Describe() + ")");
  }
  if (original.src_lang != base.src_lang || original.tgt_lang != base.trg_lang) {
    throw InvalidArgument("original corpus does not match the base model's languages");
  }
  if (!synthetic.empty() && (synthetic.src_lang != original.src_lang ||
                             synthetic.tgt_lang != original.tgt_lang)) {
    throw InvalidArgument("synthetic corpus has a different language pair");
  }
  data::ParallelCorpus combined = original;
  combined.pairs.insert(combined.pairs.end(), synthetic.pairs.begin(),
                        synthetic.pairs.end());
  nmt::TrainOptions train_options;
  train_options.on_epoch = options.hooks.on_epoch;
  train_options.on_batch = options.hooks.on_batch;
  if (regime == Regime::kFineTune) {
    train_options.init = &base;
    train_options.epochs = options.finetune_epochs;
  }
  AugmentResult result{
      nmt::Train(base.config, src_seg, trg_seg, combined, dev, train_options),
      original.size(), synthetic.size(), 0.0};
  if (!original.empty()) {
    result.synthetic_ratio = static_cast<double>(synthetic.size()) /
                             static_cast<double>(original.size());
  }
  return result;
}

}  // namespace bamt::experiments
