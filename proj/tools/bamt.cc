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

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bamt/align.h"
#include "bamt/align_server.h"
#include "bamt/cleaning.h"
#include "bamt/dataset.h"
#include "bamt/experiments.h"
#include "bamt/lift.h"
#include "bamt/metrics.h"
#include "bamt/nmt/trainer.h"
#include "bamt/records.h"
#include "bamt/segmentation.h"
#include "json.hpp"

namespace {

using namespace bamt;

std::vector<std::string> Lines(const std::string &path) {
  return path == "-" ? [] {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(std::cin, line)) out.push_back(line);
    return out;
  }()
                     : data::ReadLines(path);
}

void Emit(const std::string &path, const std::vector<std::string> &lines) {
  if (path.empty() || path == "-") {
    for (const auto &l : lines) std::cout << l << '\n';
  } else {
    data::WriteLines(path, lines);
  }
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << text;
}

std::string Join(const seg::TokenList &tokens) {
  std::string out;
  for (const auto &t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

seg::TokenList SplitSpaces(const std::string &line) {
  seg::TokenList out;
  std::istringstream is(line);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

seg::Corpus Segment(const std::vector<std::string> &lines, const std::string &codes,
                    bool chars) {
  seg::Corpus out;
  if (!codes.empty()) {
    const auto table = seg::MergeTable::Load(codes);
    return seg::ApplyBpeCorpus(lines, table, 0.0, 0);
  }
  for (const auto &l : lines) {
    out.push_back(chars ? seg::TokenizeChars(l) : seg::TokenizeWords(l));
  }
  return out;
}

std::string Fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

void LogLine(const std::string &line) { std::cerr << line << std::endl; }

struct CorpusArgs {
  std::string src, trg, dev_src, dev_trg, src_lang = "fr", trg_lang = "bam";

  void Add(CLI::App *app) {
    app->add_option("--train-src", src, "Training source file")->required();
    app->add_option("--train-trg", trg, "Training target file")->required();
    app->add_option("--dev-src", dev_src, "Dev source file")->required();
    app->add_option("--dev-trg", dev_trg, "Dev target file")->required();
    app->add_option("--src-lang", src_lang, "Source language code");
    app->add_option("--trg-lang", trg_lang, "Target language code");
  }
  data::ParallelCorpus Train() const {
    return data::ReadParallel(src, trg, LanguageFromCode(src_lang), LanguageFromCode(trg_lang));
  }
  data::ParallelCorpus Dev() const {
    return data::ReadParallel(dev_src, dev_trg, LanguageFromCode(src_lang),
                              LanguageFromCode(trg_lang));
  }
};

void PrintEpoch(const nmt::EpochRecord &e) {
  LogLine("epoch " + std::to_string(e.epoch) + " loss " + Fixed(e.train_loss, 4) +
          " updates " + std::to_string(e.updates) + " dev BLEU " + Fixed(e.dev_bleu, 2) +
          " ChrF " + Fixed(e.dev_chrf, 4));
}

align::AlignServer *g_server = nullptr;

void StopServer(int) {
  if (g_server) g_server->Stop();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"bamt: Bambara-French-English translation toolkit"};
  app.require_subcommand(1);

  // Data preparation.
  std::string lift_path, out, in, report, records_path;
  bool glosses = false;
  auto *ingest = app.add_subcommand("ingest", "Extract sentence records from a LIFT dictionary");
  ingest->add_option("--lift", lift_path, "LIFT XML file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", out, "Records file (default stdout)");
  ingest->add_flag("--glosses", glosses, "Extract glosses instead of examples");
  ingest->callback([&] {
    const auto doc = ParseLiftFile(lift_path);
    for (const auto &d : doc.diagnostics) LogLine("warning: " + d);
    const auto records = glosses ? ExtractGlosses(doc.entries) : ExtractExamples(doc.entries);
    if (out.empty()) {
      WriteRecords(std::cout, records);
    } else {
      WriteRecordsFile(out, records);
    }
    LogLine(std::to_string(doc.entries.size()) + " entries, " +
            std::to_string(records.size()) + " records");
  });

  auto *stats = app.add_subcommand("stats", "Count glosses and examples per language");
  stats->add_option("--lift", lift_path, "LIFT XML file")->required()->check(CLI::ExistingFile);
  stats->callback([&] {
    const auto doc = ParseLiftFile(lift_path);
    const auto s = ComputeStats(doc.entries);
    std::cout << "entries\t" << doc.entries.size() << "\n";
    std::cout << "language\tglosses\texamples\n";
    for (LanguageTag t : kAllLanguages) {
      std::cout << LanguageCode(t) << '\t' << s.glosses(t) << '\t' << s.examples(t) << '\n';
    }
  });

  auto *clean = app.add_subcommand("clean", "Clean sentence records");
  clean->add_option("--in", in, "Input records")->required()->check(CLI::ExistingFile);
  clean->add_option("--out", out, "Output records")->required();
  clean->add_option("--report", report, "Report file (JSON)");
  clean->callback([&] {
    auto result = cleaning::CleanCorpus(cleaning::GroupByEntry(ReadRecordsFile(in)));
    WriteRecordsFile(out, cleaning::Flatten(result.groups));
    const std::string json = result.report.ToJson();
    if (report.empty()) {
      std::cout << json << '\n';
    } else {
      WriteText(report, json + "\n");
    }
  });

  std::string prefix;
  auto *streams = app.add_subcommand("streams", "Write per-language alignment streams");
  streams->add_option("--in", records_path, "Records file")->required()->check(CLI::ExistingFile);
  streams->add_option("--prefix", prefix, "Writes PREFIX.bam, PREFIX.fr, PREFIX.en")->required();
  streams->callback([&] {
    const auto records = ReadRecordsFile(records_path);
    for (LanguageTag t : align::kStreams) {
      std::vector<std::string> lines;
      for (const auto &r : records) {
        if (r.language == t) lines.push_back(r.text);
      }
      data::WriteLines(prefix + "." + std::string(LanguageCode(t)), lines);
    }
  });

  std::string units_path;
  auto *exportp = app.add_subcommand("export-pairs", "Turn an alignment file into pair lists");
  exportp->add_option("--units", units_path, "Alignment output file")->required()->check(CLI::ExistingFile);
  exportp->add_option("--prefix", prefix, "Writes PREFIX.bam-fr.{bam,fr}, PREFIX.bam-en.{bam,en}")
      ->required();
  exportp->callback([&] {
    const auto pairs = align::ExportPairs(align::ReadUnits(units_path));
    data::WriteParallel(pairs.bam_fr, prefix + ".bam-fr.bam", prefix + ".bam-fr.fr");
    data::WriteParallel(pairs.bam_en, prefix + ".bam-en.bam", prefix + ".bam-en.en");
    std::cout << "bam-fr\t" << pairs.bam_fr.size() << "\nbam-en\t" << pairs.bam_en.size()
              << '\n';
  });

  std::string src, tgt, src_lang = "fr", tgt_lang = "bam";
  std::uint64_t split_seed = data::kDefaultSplitSeed;
  auto *split = app.add_subcommand("split", "Shuffle and split a parallel corpus");
  split->add_option("--src", src, "Source file")->required()->check(CLI::ExistingFile);
  split->add_option("--tgt", tgt, "Target file")->required()->check(CLI::ExistingFile);
  split->add_option("--src-lang", src_lang, "Source language code");
  split->add_option("--tgt-lang", tgt_lang, "Target language code");
  split->add_option("--prefix", prefix, "Output prefix")->required();
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->callback([&] {
    const auto corpus = data::ReadParallel(src, tgt, LanguageFromCode(src_lang),
                                           LanguageFromCode(tgt_lang));
    data::SplitSpec spec;
    spec.seed = split_seed;
    const auto s = data::SplitCorpus(corpus, spec);
    data::WriteSplit(prefix, s, spec, corpus.ContentHash());
    std::cout << "train\t" << s.train.size() << "\ndev\t" << s.dev.size() << "\ntest\t"
              << s.test.size() << '\n';
  });

  std::string fr_prefix, en_prefix;
  auto *concat = app.add_subcommand("concat", "Build the multilingual fr+en -> bam training set");
  concat->add_option("--fr", fr_prefix, "Split prefix of the fr-bam corpus")->required();
  concat->add_option("--en", en_prefix, "Split prefix of the en-bam corpus")->required();
  concat->add_option("--prefix", prefix, "Writes PREFIX.src, PREFIX.bam, PREFIX.lang")->required();
  concat->callback([&] {
    auto load = [](const std::string &p, LanguageTag foreign, const std::string &part) {
      const std::string base = p + "." + part + ".";
      return data::ReadParallel(base + std::string(LanguageCode(foreign)), base + "bam",
                                foreign, LanguageTag::kBam);
    };
    const auto r = data::MultilingualConcat(
        load(fr_prefix, LanguageTag::kFr, "train"), load(en_prefix, LanguageTag::kEn, "train"),
        {load(fr_prefix, LanguageTag::kFr, "dev"), load(fr_prefix, LanguageTag::kFr, "test")},
        {load(en_prefix, LanguageTag::kEn, "dev"), load(en_prefix, LanguageTag::kEn, "test")});
    data::WriteParallel(r.corpus, prefix + ".src", prefix + ".bam");
    std::vector<std::string> langs;
    for (LanguageTag t : r.foreign) langs.emplace_back(LanguageCode(t));
    data::WriteLines(prefix + ".lang", langs);
    std::cout << "pairs\t" << r.corpus.size() << "\nremoved\t" << r.removed << '\n';
  });

  // Segmentation.
  int merges = 500, min_freq = 2;
  auto *learn = app.add_subcommand("learn-bpe", "Learn a BPE merge table");
  learn->add_option("--in", in, "Training text")->required();
  learn->add_option("--merges", merges, "Number of merges");
  learn->add_option("--min-freq", min_freq, "Minimum pair frequency");
  learn->add_option("--out", out, "Codes file")->required();
  learn->callback([&] {
    seg::Corpus corpus;
    for (const auto &l : Lines(in)) corpus.push_back(seg::TokenizeWords(l));
    std::vector<std::string> warnings;
    const auto table = seg::LearnBpe(corpus, {merges, min_freq}, &warnings);
    for (const auto &w : warnings) LogLine("warning: " + w);
    table.Save(out);
  });

  std::string codes;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  auto *apply = app.add_subcommand("apply-bpe", "Segment text with a merge table");
  apply->add_option("--codes", codes, "Codes file")->required()->check(CLI::ExistingFile);
  apply->add_option("--in", in, "Input text (- for stdin)")->required();
  apply->add_option("--out", out, "Output (default stdout)");
  apply->add_option("--dropout", dropout, "Merge dropout probability")->check(CLI::Range(0.0, 1.0));
  apply->add_option("--seed", seed, "Dropout seed");
  apply->callback([&] {
    const auto table = seg::MergeTable::Load(codes);
    std::vector<std::string> lines;
    for (const auto &tokens : seg::ApplyBpeCorpus(Lines(in), table, dropout, seed)) {
      lines.push_back(Join(tokens));
    }
    Emit(out, lines);
  });

  auto *unbpe = app.add_subcommand("unbpe", "Undo BPE segmentation");
  unbpe->add_option("--in", in, "Segmented text (- for stdin)")->required();
  unbpe->add_option("--out", out, "Output (default stdout)");
  unbpe->callback([&] {
    std::vector<std::string> lines;
    for (const auto &l : Lines(in)) lines.push_back(seg::UnBpe(SplitSpaces(l)));
    Emit(out, lines);
  });

  bool chars = false;
  auto *vocab = app.add_subcommand("vocab", "List the vocabulary of a text");
  vocab->add_option("--in", in, "Training text")->required();
  vocab->add_option("--codes", codes, "Segment with this merge table first");
  vocab->add_flag("--chars", chars, "Character segmentation");
  vocab->add_option("--out", out, "Output (default stdout)");
  vocab->callback([&] {
    const auto v = seg::BuildVocab(Segment(Lines(in), codes, chars));
    std::vector<std::string> tokens(v.tokens().begin() + seg::Vocabulary::kNumReserved,
                                    v.tokens().end());
    Emit(out, tokens);
  });

  std::string eval;
  auto *coverage = app.add_subcommand("coverage", "Out-of-vocabulary types of an eval text");
  coverage->add_option("--train", in, "Training text")->required();
  coverage->add_option("--eval", eval, "Evaluation text")->required();
  coverage->add_option("--codes", codes, "Segment both with this merge table");
  coverage->add_flag("--chars", chars, "Character segmentation");
  coverage->callback([&] {
    const auto v = seg::BuildVocab(Segment(Lines(in), codes, chars));
    const auto c = seg::Coverage(v, Segment(Lines(eval), codes, chars));
    std::cout << "types\t" << c.distinct_types << "\noov\t" << c.oov_types << "\nrate\t"
              << Fixed(c.oov_rate, 4) << '\n';
  });

  // Evaluation.
  std::string hyp, ref, metric = "both";
  auto *score = app.add_subcommand("score", "Corpus BLEU and ChrF");
  score->add_option("--hyp", hyp, "Hypotheses")->required();
  score->add_option("--ref", ref, "References")->required()->check(CLI::ExistingFile);
  score->add_option("--metric", metric, "bleu, chrf or both")
      ->check(CLI::IsMember({"bleu", "chrf", "both"}));
  bool score_json = false;
  score->add_flag("--json", score_json, "Print the full report as JSON");
  score->callback([&] {
    const auto r = metrics::Score(Lines(hyp), Lines(ref));
    if (score_json) {
      std::cout << r.ToJson() << '\n';
      return;
    }
    if (metric != "chrf") std::cout << r.bleu_signature << " = " << Fixed(r.bleu, 2) << '\n';
    if (metric != "bleu") std::cout << r.chrf_signature << " = " << Fixed(r.chrf, 4) << '\n';
  });

  std::vector<std::string> systems, refs;
  std::string json_out;
  auto *table = app.add_subcommand("score-table", "Score systems into a results table");
  table->add_option("--system", systems, "LABEL:DIRECTION:HYPFILE (repeatable)")->required();
  table->add_option("--ref", refs, "DIRECTION:REFFILE (repeatable)")->required();
  table->add_option("--json", json_out, "Also write the table as JSON");
  table->callback([&] {
    auto fields = [](const std::string &s, std::size_t n) {
      std::vector<std::string> out;
      std::size_t start = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto colon = s.find(':', start);
        if (colon == std::string::npos) throw InvalidArgument("malformed argument " + s);
        out.push_back(s.substr(start, colon - start));
        start = colon + 1;
      }
      out.push_back(s.substr(start));
      return out;
    };
    std::vector<metrics::SystemOutput> outputs;
    for (const auto &s : systems) {
      const auto f = fields(s, 3);
      outputs.push_back({f[0], f[0], f[1], data::ReadLines(f[2])});
    }
    std::vector<metrics::EvalSet> sets;
    for (const auto &r : refs) {
      const auto f = fields(r, 2);
      sets.push_back({f[0], data::ReadLines(f[1])});
    }
    const auto t = metrics::ScoreTable(outputs, sets);
    std::cout << t.ToText();
    if (!json_out.empty()) WriteText(json_out, t.ToJson() + "\n");
  });

  // Models.
  std::string config_path, segmentation = "word", ckpt;
  CorpusArgs corpus;
  auto *train = app.add_subcommand("train", "Train a translation model");
  train->add_option("--config", config_path, "Training config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--segmentation", segmentation, "word, char, bpeN or bpeN+dropP");
  corpus.Add(train);
  train->add_option("--out", out, "Checkpoint file")->required();
  train->callback([&] {
    const auto config = nmt::TrainingConfig::Load(config_path);
    const auto spec = experiments::SchemeSpec::Parse(segmentation);
    const auto training = corpus.Train();
    std::vector<std::string> warnings;
    seg::Segmenter src_seg, trg_seg;
    if (config.share_vocab_across_languages) {
      auto all = training.Sources();
      const auto t = training.Targets();
      all.insert(all.end(), t.begin(), t.end());
      src_seg = trg_seg = experiments::MakeSegmenter(spec, all, &warnings);
    } else {
      src_seg = experiments::MakeSegmenter(spec, training.Sources(), &warnings);
      trg_seg = experiments::MakeSegmenter(spec, training.Targets(), &warnings);
    }
    for (const auto &w : warnings) LogLine("warning: " + w);
    nmt::TrainOptions options;
    options.on_epoch = PrintEpoch;
    const auto c = nmt::Train(config, src_seg, trg_seg, training, corpus.Dev(), options);
    c.Save(out);
    LogLine("best epoch " + std::to_string(c.epoch) + " of " + std::to_string(c.trained_epochs));
  });

  int beam = 5;
  auto *translate = app.add_subcommand("translate", "Translate text with a checkpoint");
  translate->add_option("--ckpt", ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  translate->add_option("--in", in, "Source text (- for stdin)")->required();
  translate->add_option("--out", out, "Output (default stdout)");
  translate->add_option("--beam", beam, "Beam width")->check(CLI::PositiveNumber);
  translate->callback([&] {
    const auto c = nmt::Checkpoint::Load(ckpt);
    Emit(out, nmt::Translator(c).TranslateAll(Lines(in), beam));
  });

  // Experiments.
  auto *experiment = app.add_subcommand("experiment", "Experiment grids and back-translation");
  experiment->require_subcommand(1);
  std::string plan_path;
  auto *run = experiment->add_subcommand("run", "Run an experiment plan");
  run->add_option("--plan", plan_path, "Plan file (JSON)")->required()->check(CLI::ExistingFile);
  run->callback([&] {
    const auto plan = experiments::ExperimentPlan::Load(plan_path);
    experiments::GridOptions options;
    options.log = LogLine;
    const auto result = experiments::RunGrid(plan, options);
    std::cout << experiments::EmitReport(result.rows).text;
    if (result.failures) LogLine(std::to_string(result.failures) + " unit(s) failed");
  });

  std::string mono, regime = "btf", base_path, synthetic_prefix;
  std::size_t max_tokens = 0;
  int finetune_epochs = 30;
  auto *bt = experiment->add_subcommand("backtranslate",
                                        "Augment a model with back-translated monolingual data");
  bt->add_option("--ckpt", ckpt, "Reverse-direction checkpoint")->required()->check(CLI::ExistingFile);
  bt->add_option("--mono", mono, "Monolingual target-language text")->required()->check(CLI::ExistingFile);
  bt->add_option("--regime", regime, "btf (fine-tune) or btr (retrain)")
      ->check(CLI::IsMember({"btf", "btr"}));
  bt->add_option("--base", base_path, "Forward checkpoint to augment")->required()->check(CLI::ExistingFile);
  corpus.Add(bt);
  bt->add_option("--beam", beam, "Beam width for back-translation")->check(CLI::PositiveNumber);
  bt->add_option("--max-tokens", max_tokens, "Drop monolingual lines longer than this");
  bt->add_option("--epochs", finetune_epochs, "Fine-tuning epochs (btf)");
  bt->add_option("--synthetic", synthetic_prefix, "Also write the synthetic pairs to PREFIX.src/.trg");
  bt->add_option("--out", out, "Output checkpoint")->required();
  bt->callback([&] {
    const auto reverse = nmt::Checkpoint::Load(ckpt);
    const auto base = nmt::Checkpoint::Load(base_path);
    experiments::BacktranslationOptions bo;
    bo.beam_width = beam;
    if (max_tokens > 0) bo.max_tokens = max_tokens;
    const auto synthetic =
        experiments::Backtranslate(reverse, data::LoadMonolingual(mono).sentences, bo);
    LogLine(std::to_string(synthetic.corpus.size()) + " synthetic pairs, " +
            std::to_string(synthetic.filtered) + " filtered, " +
            std::to_string(synthetic.skipped) + " skipped");
    if (!synthetic_prefix.empty()) {
      data::WriteParallel(synthetic.corpus, synthetic_prefix + ".src", synthetic_prefix + ".trg");
    }
    experiments::AugmentOptions ao;
    ao.finetune_epochs = finetune_epochs;
    ao.hooks.on_epoch = PrintEpoch;
    const auto result = experiments::AugmentAndTrain(
        base, base.src_seg, base.trg_seg, corpus.Train(), synthetic.corpus, corpus.Dev(),
        experiments::ParseRegime(regime), ao);
    result.checkpoint.Save(out);
    LogLine("synthetic/original ratio " + Fixed(result.synthetic_ratio, 3));
  });

  // Alignment service.
  std::string host = "127.0.0.1", journal_dir;
  int port = 8080;
  auto *server = app.add_subcommand("align-server", "Serve the alignment HTTP API");
  server->add_option("--host", host, "Listen address");
  server->add_option("--port", port, "Port (0 picks a free one)");
  server->add_option("--journal-dir", journal_dir, "Directory for session journals");
  server->callback([&] {
    align::ServerOptions options;
    options.journal_dir = journal_dir;
    align::AlignServer s(options);
    const int bound = s.Bind(host, port);
    if (bound <= 0) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
    g_server = &s;
    std::signal(SIGINT, StopServer);
    std::signal(SIGTERM, StopServer);
    LogLine("listening on http://" + host + ":" + std::to_string(bound));
    s.Serve();
    g_server = nullptr;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const bamt::Error &e) {
    std::cerr << "bamt: error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "bamt: error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
