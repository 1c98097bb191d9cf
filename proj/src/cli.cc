// Copyright 2026 The SWE Authors.
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

#include "swe/cli.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swe/base.h"
#include "swe/config.h"
#include "swe/distill.h"
#include "swe/embedding.h"
#include "swe/encode.h"
#include "swe/ensemble.h"
#include "swe/eval.h"
#include "swe/extract.h"
#include "swe/pca.h"
#include "swe/text.h"
#include "swe/train.h"
#include "swe/xlingual.h"

namespace swe {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { kValue, kList, kFlag };

struct Param {
  std::string key;
  Kind kind = Kind::kValue;
  std::string help;
};

enum class Role { kParam, kInput, kOutput };

Role RoleOf(std::string_view key) {
  static const std::set<std::string, std::less<>> inputs = {
      "corpus", "data", "docs",   "dump",  "gold",   "input",     "pieces", "probs",
      "sentences", "source", "spec", "table", "tags", "target", "teacher", "transform",
      "vocab"};
  static const std::set<std::string, std::less<>> outputs = {"history", "occurrence_report",
                                                              "out", "table_out"};
  if (inputs.contains(key)) return Role::kInput;
  if (outputs.contains(key)) return Role::kOutput;
  return Role::kParam;
}

class Context;

struct Command {
  std::string name;
  std::string help;
  std::vector<Param> params;
  std::function<void(Context &)> run;
};

// Keys accepted by every stage.
const std::vector<Param> &CommonParams() {
  static const std::vector<Param> params = {
      {"seed", Kind::kValue, "Random seed (default 42)"},
  };
  return params;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool ParseBool(const std::string &key, const std::string &value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw UsageError("'" + key + "' expects a boolean, got '" + value + "'");
}

std::string ProvenancePath(const std::string &artifact) { return artifact + ".prov"; }

class Context {
 public:
  Context(const Command &command, std::map<std::string, std::vector<std::string>> values,
          int threads, bool resume, std::ostream &out, std::ostream &err)
      : command_(command),
        values_(std::move(values)),
        threads_(threads),
        resume_(resume),
        out_(out),
        err_(err) {}

  const std::string &command() const { return command_.name; }
  int threads() const { return threads_; }
  std::ostream &err() { return err_; }

  bool Has(const std::string &key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
  }
  std::optional<std::string> Get(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return std::nullopt;
    return it->second.back();
  }
  std::string Require(const std::string &key) const {
    auto v = Get(key);
    if (!v) throw UsageError(command() + ": missing required parameter '" + key + "'");
    return *v;
  }
  std::vector<std::string> List(const std::string &key) const {
    auto it = values_.find(key);
    return it == values_.end() ? std::vector<std::string>{} : it->second;
  }
  double Double(const std::string &key, double fallback) const {
    auto v = Get(key);
    if (!v) return fallback;
    try {
      return ParseDouble(*v, key);
    } catch (const DataError &e) {
      throw UsageError(e.what());
    }
  }
  long long Int(const std::string &key, long long fallback, long long min_value = 0) const {
    auto v = Get(key);
    if (!v) return fallback;
    long long x;
    try {
      x = ParseInt(*v, key);
    } catch (const DataError &e) {
      throw UsageError(e.what());
    }
    if (x < min_value) {
      throw UsageError("'" + key + "' must be at least " + std::to_string(min_value));
    }
    return x;
  }
  bool Flag(const std::string &key) const {
    auto v = Get(key);
    return v ? ParseBool(key, *v) : false;
  }
  uint64_t seed() const { return static_cast<uint64_t>(Int("seed", 42)); }

  // Hash of the effective parameters. Input files enter through their
  // content hashes and output paths are left out, so moving files around
  // does not change it; --threads and --resume do not affect results.
  std::string ConfigHash() const {
    std::string canonical = "command=" + command() + "\n";
    for (const auto &[key, list] : values_) {
      if (RoleOf(key) != Role::kParam) continue;
      for (const auto &v : list) canonical += key + "=" + v + "\n";
    }
    return HexDigest(Fnv1a64(canonical));
  }

  // Provenance for an artifact: command, config hash, seed and a content
  // hash of every input file.
  std::map<std::string, std::string> Provenance() const {
    std::map<std::string, std::string> meta;
    meta["swe.command"] = command();
    meta["swe.config_hash"] = ConfigHash();
    meta["swe.seed"] = std::to_string(seed());
    for (const auto &[key, list] : values_) {
      if (RoleOf(key) != Role::kInput) continue;
      for (size_t i = 0; i < list.size(); ++i) {
        const std::string name =
            list.size() == 1 ? "swe.input." + key : "swe.input." + key + "." + std::to_string(i);
        meta[name] = HexDigest(HashFile(list[i]));
      }
    }
    return meta;
  }

  // With --resume, an existing output whose sidecar records the same
  // config and inputs means the stage is already done. A mismatch is an
  // error.
  bool AlreadyDone(const std::string &artifact) {
    if (!resume_ || !std::filesystem::exists(artifact)) return false;
    const std::string prov = ProvenancePath(artifact);
    if (!std::filesystem::exists(prov)) {
      throw DataError("cannot resume: " + artifact + " has no provenance record");
    }
    const KeyValueFile recorded = KeyValueFile::Load(prov);
    for (const auto &[key, value] : Provenance()) {
      if (recorded.Get(key) != value) {
        throw DataError("cannot resume: " + artifact + " was produced with a different " +
                        (key == "swe.config_hash" ? std::string("configuration")
                                                  : "value of " + key));
      }
    }
    Report("resumed", artifact);
    return true;
  }

  void WriteProvenance(const std::string &artifact,
                       const std::map<std::string, std::string> &meta) const {
    KeyValueFile kv;
    for (const auto &[k, v] : meta) kv.Set(k, v);
    std::ofstream out(ProvenancePath(artifact), std::ios::binary);
    out << kv.Serialize();
    if (!out) throw IoError("cannot write " + ProvenancePath(artifact));
  }

  void Report(const std::string &key, const std::string &value) { out_ << key << "=" << value << "\n"; }
  void Report(const std::string &key, double value) { Report(key, FormatDouble(value)); }
  void Report(const std::string &key, size_t value) { Report(key, std::to_string(value)); }
  void Report(const std::string &key, int value) { Report(key, std::to_string(value)); }
  void Progress(const std::string &message) { out_ << "# " << message << "\n"; }

 private:
  const Command &command_;
  std::map<std::string, std::vector<std::string>> values_;
  int threads_;
  bool resume_;
  std::ostream &out_;
  std::ostream &err_;
};

// --- Shared helpers --------------------------------------------------------

TokenizeMode ParseTokenizeMode(const Context &ctx) {
  const std::string mode = ctx.Get("tokenize").value_or("whitespace");
  if (mode == "whitespace") return TokenizeMode::kWhitespace;
  if (mode == "pretokenized") return TokenizeMode::kPretokenized;
  throw UsageError("tokenize must be 'whitespace' or 'pretokenized'");
}

TableFormat ParseTableFormat(const Context &ctx) {
  const std::string f = ctx.Get("format").value_or("binary");
  if (f == "binary") return TableFormat::kBinary;
  if (f == "text") return TableFormat::kText;
  throw UsageError("format must be 'binary' or 'text'");
}

std::unique_ptr<PieceTableTokenizer> LoadPieces(const Context &ctx) {
  if (auto p = ctx.Get("pieces")) {
    return std::make_unique<PieceTableTokenizer>(PieceTableTokenizer::FromFile(*p));
  }
  return nullptr;
}

EncodeOptions ParseEncodeOptions(const Context &ctx, const std::string &lang_key = "lang") {
  EncodeOptions o;
  o.normalize = !ctx.Flag("no_normalize");
  if (ctx.Has("sif_alpha")) {
    o.sif_alpha = ctx.Double("sif_alpha", kDefaultSifAlpha);
    if (!(*o.sif_alpha > 0)) throw UsageError("sif_alpha must be positive");
  }
  o.tokenize = ParseTokenizeMode(ctx);
  o.language = ctx.Get(lang_key).value_or("");
  return o;
}

void SaveTableWithProvenance(Context &ctx, EmbeddingTable table, const std::string &path,
                             const std::map<std::string, std::string> &meta) {
  table.set_metadata(meta);
  SaveTable(table, path, ParseTableFormat(ctx));
  ctx.WriteProvenance(path, meta);
}

void WriteVectorsText(const Matrix &rows, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::string line;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j) line += ' ';
      line += FormatDouble(rows(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("error writing " + path);
}

void WriteVectors(Context &ctx, const Matrix &rows, const std::string &path) {
  const std::string f = ctx.Get("format").value_or("text");
  if (f == "text") {
    WriteVectorsText(rows, path);
  } else if (f == "swt1") {
    SaveSentenceEmbeddings(rows, path);
  } else {
    throw UsageError("format must be 'text' or 'swt1'");
  }
}

std::vector<SentenceRecord> ReadSentenceRecords(const std::string &path, TokenizeMode mode,
                                                const std::string &language) {
  std::vector<SentenceRecord> records;
  for (std::string &line : ReadLines(path)) {
    SentenceRecord rec;
    for (auto tok : Tokenize(line, mode)) rec.tokens.emplace_back(tok);
    rec.text = std::move(line);
    rec.language = language;
    records.push_back(std::move(rec));
  }
  return records;
}

// Seeded subset of at most `m` records, kept in file order.
std::vector<SentenceRecord> SampleRecords(std::vector<SentenceRecord> records, size_t m,
                                          uint64_t seed) {
  if (records.size() <= m) return records;
  std::vector<size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  std::vector<SentenceRecord> out;
  out.reserve(m);
  for (size_t i : idx) out.push_back(std::move(records[i]));
  return out;
}

TrainConfig ParseTrainParams(const Context &ctx) {
  KeyValueFile kv;
  for (const auto &key : TrainConfigKeys()) {
    if (auto v = ctx.Get(key)) kv.Set(key, *v);
  }
  try {
    TrainConfig c = ParseTrainConfig(kv);
    c.Validate();
    return c;
  } catch (const DataError &e) {
    throw UsageError(e.what());
  }
}

void ReportHistory(Context &ctx, const TrainHistory &h) {
  ctx.Report("steps_run", h.steps_run);
  ctx.Report("best_step", h.best_step);
  ctx.Report("best_validation_loss", h.best_loss);
  ctx.Report("early_stopped", std::string(h.early_stopped ? "true" : "false"));
  if (!h.validations.empty()) {
    ctx.Report("initial_validation_loss", h.validations.front().loss);
  }
}

void WriteHistory(const Context &ctx, const TrainHistory &h) {
  auto path = ctx.Get("history");
  if (!path) return;
  std::ofstream out(*path, std::ios::binary);
  out << "kind\tstep\tloss\n";
  for (size_t i = 0; i < h.train_loss.size(); ++i) {
    out << "train\t" << (i + 1) << "\t" << FormatDouble(h.train_loss[i]) << "\n";
  }
  for (const auto &v : h.validations) {
    out << "validation\t" << v.step << "\t" << FormatDouble(v.loss) << "\n";
  }
  if (!out) throw IoError("cannot write " + *path);
}

std::vector<Param> TrainParams() {
  return {
      {"lr", Kind::kValue, "Adam learning rate (default 0.001)"},
      {"steps", Kind::kValue, "Maximum training steps (default 30000)"},
      {"batch_size", Kind::kValue, "Minibatch size K (default 128)"},
      {"tau", Kind::kValue, "Softmax temperature (default 0.05)"},
      {"patience", Kind::kValue, "Validations without improvement before stopping (default 5)"},
      {"val_every", Kind::kValue, "Validation cadence in steps (default 500)"},
      {"val_fraction", Kind::kValue, "Held-out fraction (default 0.02)"},
      {"beta1", Kind::kValue, "Adam beta1 (default 0.9)"},
      {"beta2", Kind::kValue, "Adam beta2 (default 0.999)"},
      {"eps", Kind::kValue, "Adam epsilon (default 1e-8)"},
      {"history", Kind::kValue, "Optional TSV of the loss curve"},
  };
}

std::vector<Param> Concat(std::vector<Param> a, const std::vector<Param> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<Param> kEncodeParams = {
    {"pieces", Kind::kValue, "Subword piece table for OOV truncation"},
    {"tokenize", Kind::kValue, "whitespace (default) or pretokenized"},
    {"lang", Kind::kValue, "Language tag for joint vocabularies"},
    {"sif_alpha", Kind::kValue, "Enable SIF weighting with this alpha"},
    {"no_normalize", Kind::kFlag, "Skip L2 normalization"},
};

// --- Stages ----------------------------------------------------------------

void RunVocab(Context &ctx) {
  const std::string out = ctx.Require("out");
  const auto corpora = ctx.List("corpus");
  if (corpora.empty()) throw UsageError("vocab: missing required parameter 'corpus'");
  if (ctx.AlreadyDone(out)) return;
  const std::string case_name = ctx.Get("case").value_or("insensitive");
  CaseMode mode;
  if (case_name == "insensitive") {
    mode = CaseMode::kInsensitive;
  } else if (case_name == "sensitive") {
    mode = CaseMode::kSensitive;
  } else {
    throw UsageError("case must be 'sensitive' or 'insensitive'");
  }
  const size_t cap = static_cast<size_t>(ctx.Int("cap", 150000, 1));
  const TokenizeMode tmode = ParseTokenizeMode(ctx);
  VocabBuilder builder(mode);
  for (const auto &path : corpora) {
    for (const auto &line : ReadLines(path)) {
      for (auto tok : Tokenize(line, tmode)) builder.Add(tok);
    }
  }
  const Vocabulary vocab = builder.Build(cap);
  const auto meta = ctx.Provenance();
  SaveVocab(vocab, out, meta);
  ctx.WriteProvenance(out, meta);
  ctx.Report("tokens", static_cast<size_t>(builder.total_tokens()));
  ctx.Report("distinct", builder.distinct());
  ctx.Report("vocab_size", vocab.size());
  ctx.Report("output", out);
}

void RunExtract(Context &ctx) {
  const std::string out = ctx.Require("out");
  const std::string dump_path = ctx.Require("dump");
  const std::string vocab_path = ctx.Require("vocab");
  if (ctx.AlreadyDone(out)) return;
  const int max_occ = static_cast<int>(ctx.Int("max_occurrences", 100, 1));
  const Vocabulary vocab = LoadVocab(vocab_path);
  auto reader = OpenOccurrenceDump(dump_path);
  DecontextualizeResult result = Decontextualize(*reader, vocab, max_occ);
  const std::string report = ctx.Get("occurrence_report").value_or(out + ".occurrences.tsv");
  WriteOccurrenceReport(result, report);
  SaveTableWithProvenance(ctx, std::move(result.table), out, ctx.Provenance());
  ctx.Report("vocab_size", vocab.size());
  ctx.Report("missing_words", result.missing.size());
  ctx.Report("skipped_out_of_vocab", static_cast<size_t>(result.skipped_out_of_vocab));
  ctx.Report("skipped_over_cap", static_cast<size_t>(result.skipped_over_cap));
  ctx.Report("occurrence_report", report);
  ctx.Report("output", out);
}

void RunPca(Context &ctx) {
  const std::string out = ctx.Require("out");
  const auto tables = ctx.List("table");
  if (tables.empty()) throw UsageError("pca: missing required parameter 'table'");
  const bool word_pca = ctx.Flag("word_pca");
  const auto sentence_files = ctx.List("sentences");
  const auto langs = ctx.List("lang");
  if (ctx.AlreadyDone(out)) return;

  const int keep = static_cast<int>(ctx.Int("dim", 256, 1));
  std::optional<int> skip;
  if (ctx.Flag("no_abtt")) {
    if (ctx.Has("skip")) throw UsageError("--no-abtt conflicts with --skip");
    skip = 0;
  } else if (ctx.Has("skip")) {
    skip = static_cast<int>(ctx.Int("skip", 0));
  }

  std::vector<EmbeddingTable> loaded;
  for (const auto &p : tables) loaded.push_back(LoadTable(p));

  PcaTransform transform;
  if (word_pca) {
    if (loaded.size() != 1) throw UsageError("--word-pca takes exactly one table");
    transform = FitWordPca(loaded[0], keep, skip);
  } else {
    if (sentence_files.empty()) throw UsageError("pca: missing required parameter 'sentences'");
    if (loaded.size() != 1 && loaded.size() != sentence_files.size()) {
      throw UsageError("give one table, or one table per sentence file");
    }
    if (!langs.empty() && langs.size() != sentence_files.size()) {
      throw UsageError("give one --lang per sentence file");
    }
    const size_t m = static_cast<size_t>(ctx.Int("sample", 100000, 1));
    const TokenizeMode tmode = ParseTokenizeMode(ctx);
    std::vector<std::vector<SentenceRecord>> records;
    for (size_t i = 0; i < sentence_files.size(); ++i) {
      const std::string lang = langs.empty() ? "" : langs[i];
      records.push_back(SampleRecords(ReadSentenceRecords(sentence_files[i], tmode, lang), m,
                                      ctx.seed() + i));
    }
    std::vector<SentenceSample> samples;
    for (size_t i = 0; i < records.size(); ++i) {
      samples.push_back({&loaded[loaded.size() == 1 ? 0 : i], records[i]});
    }
    SentencePcaResult fit = FitSentencePca(samples, keep, skip);
    transform = std::move(fit.transform);
    ctx.Report("sentences_used", fit.used_sentences);
    ctx.Report("sentences_empty", fit.skipped_empty);
  }
  const auto meta = ctx.Provenance();
  transform.metadata = meta;
  SavePcaTransform(transform, out);
  ctx.WriteProvenance(out, meta);
  ctx.Report("mode", std::string(word_pca ? "word" : "sentence"));
  ctx.Report("input_dim", transform.dim());
  ctx.Report("skip", transform.skip);
  ctx.Report("keep", transform.keep);
  ctx.Report("output", out);

  if (auto table_out = ctx.Get("table_out")) {
    if (std::set<std::string>(tables.begin(), tables.end()).size() != 1) {
      throw UsageError("--table-out needs a single input table");
    }
    SaveTableWithProvenance(ctx, Pretransform(loaded[0], transform), *table_out, meta);
    ctx.Report("table_output", *table_out);
  }
}

void RunDistill(Context &ctx) {
  const std::string out = ctx.Require("out");
  const std::string table_path = ctx.Require("table");
  const std::string teacher_path = ctx.Require("teacher");
  const std::string sentences_path = ctx.Require("sentences");
  if (ctx.AlreadyDone(out)) return;
  const TrainConfig config = ParseTrainParams(ctx);
  const EmbeddingTable student = LoadTable(table_path);
  const TeacherBatchSource teacher = TeacherBatchSource::Load(teacher_path, sentences_path);
  const auto pieces = LoadPieces(ctx);
  ctx.Progress("distilling " + std::to_string(teacher.sentences.size()) + " sentences, up to " +
               std::to_string(config.max_steps) + " steps");
  KdTrainResult result = TrainKd(student, teacher, config, pieces.get(), ParseEncodeOptions(ctx));
  WriteHistory(ctx, result.history);
  SaveTableWithProvenance(ctx, std::move(result.table), out, ctx.Provenance());
  ctx.Report("train_sentences", result.train_sentences);
  ctx.Report("validation_sentences", result.validation_sentences);
  ctx.Report("dropped_sentences", result.dropped_sentences);
  ReportHistory(ctx, result.history);
  ctx.Report("output", out);
}

void RunXlTrain(Context &ctx) {
  const std::string out = ctx.Require("out");
  const std::string table_path = ctx.Require("table");
  const std::string corpus_path = ctx.Require("corpus");
  if (ctx.AlreadyDone(out)) return;
  const TrainConfig config = ParseTrainParams(ctx);
  const EmbeddingTable table = LoadTable(table_path);
  const ParallelCorpus corpus = ParallelCorpus::Load(corpus_path);
  const auto pieces = LoadPieces(ctx);
  ContrastiveOptions opts;
  opts.source_language = ctx.Get("src_lang").value_or("");
  opts.target_language = ctx.Get("tgt_lang").value_or("");
  opts.encode = ParseEncodeOptions(ctx);
  ctx.Progress("contrastive training on " + std::to_string(corpus.size()) + " pairs");
  ContrastiveTrainResult result = TrainContrastive(table, corpus, config, opts, pieces.get());
  WriteHistory(ctx, result.history);
  SaveTableWithProvenance(ctx, std::move(result.table), out, ctx.Provenance());
  ctx.Report("train_pairs", result.train_pairs);
  ctx.Report("validation_pairs", result.validation_pairs);
  ctx.Report("dropped_pairs", result.dropped_pairs);
  ReportHistory(ctx, result.history);
  ctx.Report("output", out);
}

void RunEncode(Context &ctx) {
  const std::string out = ctx.Require("out");
  const std::string table_path = ctx.Require("table");
  const std::string input = ctx.Require("input");
  if (ctx.AlreadyDone(out)) return;
  const EmbeddingTable table = LoadTable(table_path);
  const auto pieces = LoadPieces(ctx);
  const Encoder encoder(table, pieces.get(), ParseEncodeOptions(ctx));
  const std::vector<std::string> texts = ReadLines(input);
  const EncodedBatch batch = encoder.EncodeBatch(texts, ctx.threads());
  WriteVectors(ctx, batch.vectors, out);
  ctx.WriteProvenance(out, ctx.Provenance());
  ctx.Report("sentences", texts.size());
  ctx.Report("empty", batch.empty_count());
  ctx.Report("dim", table.dim());
  ctx.Report("output", out);
}

void RunEnsemble(Context &ctx) {
  const std::string out = ctx.Require("out");
  const std::string spec_path = ctx.Require("spec");
  const bool precombine = ctx.Flag("precombine");
  if (precombine && ctx.Has("input")) throw UsageError("--precombine takes no --input");
  const std::string input = precombine ? "" : ctx.Require("input");
  if (ctx.AlreadyDone(out)) return;
  const EnsembleSpec spec = EnsembleSpec::Load(spec_path);
  ctx.Report("members", spec.members.size());
  ctx.Report("dim", spec.total_dim());
  if (precombine) {
    PrecombinedTable combined = PrecombineTables(spec);
    ctx.Report("vocab_size", combined.table.size());
    auto meta = combined.table.metadata();
    for (const auto &[k, v] : ctx.Provenance()) meta[k] = v;
    SaveTableWithProvenance(ctx, std::move(combined.table), out, meta);
    ctx.Report("output", out);
    return;
  }
  EncodeOptions opts = ParseEncodeOptions(ctx);
  const std::vector<std::string> texts = ReadLines(input);
  Matrix rows(static_cast<Eigen::Index>(texts.size()), spec.total_dim());
  size_t empty = 0;
  for (size_t i = 0; i < texts.size(); ++i) {
    const EnsembleEmbedding e = EnsembleEncode(texts[i], spec, opts);
    rows.row(static_cast<Eigen::Index>(i)) = e.vector.transpose();
    empty += e.empty() ? 1 : 0;
  }
  WriteVectors(ctx, rows, out);
  ctx.WriteProvenance(out, ctx.Provenance());
  ctx.Report("sentences", texts.size());
  ctx.Report("empty", empty);
  ctx.Report("output", out);
}

void RunStsEval(Context &ctx) {
  const std::string data = ctx.Require("data");
  const StsDataset dataset = StsDataset::Load(data);
  StsResult result;
  if (auto spec_path = ctx.Get("spec")) {
    if (ctx.Has("table")) throw UsageError("give either --table or --spec");
    const EnsembleSpec spec = EnsembleSpec::Load(*spec_path);
    const EncodeOptions opts = ParseEncodeOptions(ctx);
    result = StsEval(dataset, [&](std::string_view text) {
      const EnsembleEmbedding e = EnsembleEncode(text, spec, opts);
      SentenceEmbedding s;
      s.vector = e.vector;
      s.empty = e.empty();
      return s;
    });
  } else {
    const EmbeddingTable table = LoadTable(ctx.Require("table"));
    const auto pieces = LoadPieces(ctx);
    const Encoder encoder(table, pieces.get(), ParseEncodeOptions(ctx));
    result = StsEval(dataset, MakeTextEncoder(encoder));
  }
  ctx.Report("pairs", result.pairs);
  ctx.Report("empty_pairs", result.empty_pairs);
  ctx.Report("spearman_x100", result.score);
}

void RunRetrieveEval(Context &ctx) {
  const RetrievalDataset dataset = RetrievalDataset::Load(
      ctx.Require("source"), ctx.Require("target"), ctx.Require("gold"));
  const EmbeddingTable table = LoadTable(ctx.Require("table"));
  const auto pieces = LoadPieces(ctx);
  const Encoder src(table, pieces.get(), ParseEncodeOptions(ctx, "src_lang"));
  const Encoder tgt(table, pieces.get(), ParseEncodeOptions(ctx, "tgt_lang"));
  std::optional<double> threshold;
  if (ctx.Has("threshold")) threshold = ctx.Double("threshold", 0);
  const RetrievalResult r =
      RetrievalEval(dataset, MakeTextEncoder(src), MakeTextEncoder(tgt), threshold);
  ctx.Report("sources", dataset.sources.size());
  ctx.Report("targets", dataset.targets.size());
  ctx.Report("gold_pairs", dataset.gold.size());
  ctx.Report("predicted", r.predicted);
  ctx.Report("correct", r.correct);
  ctx.Report("precision", r.precision);
  ctx.Report("recall", r.recall);
  ctx.Report("f1", r.f1);
}

void RunAnalyzeNorms(Context &ctx) {
  const EmbeddingTable table = LoadTable(ctx.Require("table"));
  ctx.Report("frequency_source",
             std::string(table.vocab().has_frequencies() ? "counts" : "row_order"));
  ctx.Report("norm_frequency_spearman", NormFrequencySpearman(table));
  auto tags_path = ctx.Get("tags");
  if (!tags_path) return;
  std::set<std::string, std::less<>> tagset;
  const std::string tagset_name = ctx.Get("tagset").value_or("upos");
  if (tagset_name == "upos") {
    tagset = UniversalPosTags();
  } else if (tagset_name != "any") {
    for (const auto &line : ReadLines(tagset_name)) {
      if (!line.empty()) tagset.insert(line);
    }
  }
  const PosTagMap tags = PosTagMap::Load(*tags_path, tagset);
  const auto profile = PosNormProfile(table, tags);
  for (const auto &[tag, value] : profile) ctx.Report("pos." + tag, value);
  if (auto out = ctx.Get("out")) {
    std::ofstream f(*out, std::ios::binary);
    f << "tag\trelative_norm\n";
    for (const auto &[tag, value] : profile) f << tag << "\t" << FormatDouble(value) << "\n";
    if (!f) throw IoError("cannot write " + *out);
  }
}

std::vector<int> ParseComponentList(const std::string &text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(static_cast<int>(ParseInt(item, "component")));
    } catch (const DataError &e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("components list is empty");
  return out;
}

void RunInspectPcs(Context &ctx) {
  const EmbeddingTable table = LoadTable(ctx.Require("table"));
  const PcaTransform transform = LoadPcaTransform(ctx.Require("transform"));
  const auto components = ParseComponentList(ctx.Get("components").value_or("1"));
  const size_t k = static_cast<size_t>(ctx.Int("k", 5, 1));
  const size_t limit = static_cast<size_t>(ctx.Int("limit", 0));
  std::ofstream tsv;
  if (auto out = ctx.Get("out")) {
    tsv.open(*out, std::ios::binary);
    if (!tsv) throw IoError("cannot open " + *out + " for writing");
    tsv << "component\tside\trank\tword\tvalue\n";
  }
  for (int c : components) {
    const ComponentExtremes ex = ComponentExtremeWords(table, transform, c, k, limit);
    auto emit = [&](const std::string &side, const auto &list) {
      std::string joined;
      for (size_t i = 0; i < list.size(); ++i) {
        if (i) joined += ' ';
        joined += list[i].first + ":" + FormatDouble(list[i].second);
        if (tsv.is_open()) {
          tsv << c << "\t" << side << "\t" << (i + 1) << "\t" << list[i].first << "\t"
              << FormatDouble(list[i].second) << "\n";
        }
      }
      ctx.Report("pc" + std::to_string(c) + "." + side, joined);
    };
    emit("largest", ex.largest);
    emit("smallest", ex.smallest);
  }
}

void RunCorrelatePc(Context &ctx) {
  const EmbeddingTable table = LoadTable(ctx.Require("table"));
  const PcaTransform transform = LoadPcaTransform(ctx.Require("transform"));
  const ScoredDocs docs = ScoredDocs::Load(ctx.Require("docs"));
  const int component = static_cast<int>(ctx.Int("component", 1, 1));
  const auto pieces = LoadPieces(ctx);
  const ComponentCorrelation r = ComponentCorrelate(docs, table, transform, component, pieces.get());
  ctx.Report("component", component);
  ctx.Report("documents", r.used);
  ctx.Report("skipped_empty", r.skipped_empty);
  ctx.Report("pearson", r.pearson);
}

void RunSif(Context &ctx) {
  const std::string out = ctx.Require("out");
  const std::string table_path = ctx.Require("table");
  if (ctx.AlreadyDone(out)) return;
  const EmbeddingTable table = LoadTable(table_path);
  const double alpha = ctx.Double("alpha", kDefaultSifAlpha);
  if (!(alpha > 0)) throw UsageError("alpha must be positive");
  std::vector<double> probs;
  if (auto probs_path = ctx.Get("probs")) {
    probs.assign(table.size(), 0.0);
    size_t line_no = 0;
    for (const auto &line : ReadLines(*probs_path)) {
      ++line_no;
      if (line.empty()) continue;
      const size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw FormatError(*probs_path + ":" + std::to_string(line_no) + ": expected word<TAB>prob");
      }
      if (auto id = table.vocab().Find(std::string_view(line).substr(0, tab))) {
        probs[*id] = ParseDouble(std::string_view(line).substr(tab + 1), "probability");
      }
    }
  } else {
    probs = UnigramProbabilities(table.vocab());
  }
  EmbeddingTable weighted = SifReweight(table, probs, alpha);
  SaveTableWithProvenance(ctx, std::move(weighted), out, ctx.Provenance());
  ctx.Report("alpha", alpha);
  ctx.Report("rows", table.size());
  ctx.Report("output", out);
}

const std::vector<Command> &Commands() {
  static const std::vector<Command> commands = {
      {"vocab", "Build a frequency-ranked vocabulary from text corpora",
       {{"corpus", Kind::kList, "Corpus text file (repeatable)"},
        {"out", Kind::kValue, "Output vocabulary TSV"},
        {"cap", Kind::kValue, "Vocabulary size cap (default 150000)"},
        {"case", Kind::kValue, "insensitive (default) or sensitive"},
        {"tokenize", Kind::kValue, "whitespace (default) or pretokenized"}},
       RunVocab},
      {"extract", "Average contextual occurrence vectors into a static table",
       {{"dump", Kind::kValue, "Occurrence dump (SWD1 or JSONL)"},
        {"vocab", Kind::kValue, "Vocabulary TSV"},
        {"out", Kind::kValue, "Output table"},
        {"max_occurrences", Kind::kValue, "Occurrences averaged per word (default 100)"},
        {"occurrence_report", Kind::kValue, "Per-word occurrence report (default <out>.occurrences.tsv)"},
        {"format", Kind::kValue, "binary (default) or text"}},
       RunExtract},
      {"pca", "Fit sentence-level (or word-level) PCA with ABTT",
       {{"table", Kind::kList, "Input table (one, or one per sentence file)"},
        {"sentences", Kind::kList, "Sentence sample file (repeatable, one per language)"},
        {"lang", Kind::kList, "Language tag per sentence file"},
        {"out", Kind::kValue, "Output transform (SWP1)"},
        {"table_out", Kind::kValue, "Also write the pretransformed table here"},
        {"dim", Kind::kValue, "Kept dimensions d' (default 256)"},
        {"skip", Kind::kValue, "Leading components removed (default d/100)"},
        {"no_abtt", Kind::kFlag, "Keep the leading components (skip 0)"},
        {"word_pca", Kind::kFlag, "Fit on word rows instead of sentences"},
        {"sample", Kind::kValue, "Sentences sampled per file (default 100000)"},
        {"tokenize", Kind::kValue, "whitespace (default) or pretokenized"},
        {"format", Kind::kValue, "Table format for --table-out: binary (default) or text"}},
       RunPca},
      {"distill", "Distill teacher sentence similarities into a static table",
       Concat({{"table", Kind::kValue, "Student table (normally PCA-transformed)"},
               {"teacher", Kind::kValue, "Teacher sentence embeddings (SWT1)"},
               {"sentences", Kind::kValue, "Sentences aligned with the teacher dump"},
               {"out", Kind::kValue, "Output table"},
               {"format", Kind::kValue, "binary (default) or text"}},
              Concat(TrainParams(), kEncodeParams)),
       RunDistill},
      {"xl-train", "Contrastive cross-lingual training on translation pairs",
       Concat({{"table", Kind::kValue, "Joint language-tagged table"},
               {"corpus", Kind::kValue, "Parallel corpus TSV"},
               {"out", Kind::kValue, "Output table"},
               {"src_lang", Kind::kValue, "Source language tag"},
               {"tgt_lang", Kind::kValue, "Target language tag"},
               {"format", Kind::kValue, "binary (default) or text"}},
              Concat(TrainParams(), kEncodeParams)),
       RunXlTrain},
      {"encode", "Encode text lines into sentence embeddings",
       Concat({{"table", Kind::kValue, "Embedding table"},
               {"input", Kind::kValue, "Text file, one sentence per line"},
               {"out", Kind::kValue, "Output vectors"},
               {"format", Kind::kValue, "text (default) or swt1"}},
              kEncodeParams),
       RunEncode},
      {"ensemble", "Encode with a weighted model ensemble, or precombine its tables",
       Concat({{"spec", Kind::kValue, "Ensemble spec (member = path [weight])"},
               {"input", Kind::kValue, "Text file, one sentence per line"},
               {"out", Kind::kValue, "Output vectors or precombined table"},
               {"precombine", Kind::kFlag, "Write the precombined table instead"},
               {"format", Kind::kValue, "text/swt1 for vectors, binary/text for tables"}},
              kEncodeParams),
       RunEnsemble},
      {"sts-eval", "Spearman correlation (x100) on an STS TSV",
       Concat({{"table", Kind::kValue, "Embedding table"},
               {"spec", Kind::kValue, "Ensemble spec instead of a table"},
               {"data", Kind::kValue, "STS TSV (sent1, sent2, score)"}},
              kEncodeParams),
       RunStsEval},
      {"retrieve-eval", "Translation retrieval precision, recall and F1",
       {{"table", Kind::kValue, "Joint embedding table"},
        {"source", Kind::kValue, "Source sentences"},
        {"target", Kind::kValue, "Target sentences"},
        {"gold", Kind::kValue, "Gold pairs TSV (0-based)"},
        {"src_lang", Kind::kValue, "Source language tag"},
        {"tgt_lang", Kind::kValue, "Target language tag"},
        {"threshold", Kind::kValue, "Minimum cosine for a predicted pair"},
        {"pieces", Kind::kValue, "Subword piece table"},
        {"tokenize", Kind::kValue, "whitespace (default) or pretokenized"},
        {"sif_alpha", Kind::kValue, "Enable SIF weighting with this alpha"},
        {"no_normalize", Kind::kFlag, "Skip L2 normalization"}},
       RunRetrieveEval},
      {"analyze-norms", "Norm-frequency correlation and POS norm profile",
       {{"table", Kind::kValue, "Embedding table"},
        {"tags", Kind::kValue, "word<TAB>tag map"},
        {"tagset", Kind::kValue, "upos (default), any, or a file of allowed tags"},
        {"out", Kind::kValue, "Optional profile TSV"}},
       RunAnalyzeNorms},
      {"inspect-pcs", "Words with the largest and smallest principal component values",
       {{"table", Kind::kValue, "Table in the transform's input space"},
        {"transform", Kind::kValue, "PCA transform (SWP1)"},
        {"components", Kind::kValue, "Comma-separated 1-based components (default 1)"},
        {"k", Kind::kValue, "Words per side (default 5)"},
        {"limit", Kind::kValue, "Only consider the first N rows (default all)"},
        {"out", Kind::kValue, "Optional TSV listing"}},
       RunInspectPcs},
      {"correlate-pc", "Pearson correlation of a principal component with document scores",
       {{"table", Kind::kValue, "Table in the transform's input space"},
        {"transform", Kind::kValue, "PCA transform (SWP1)"},
        {"docs", Kind::kValue, "score<TAB>text file"},
        {"component", Kind::kValue, "1-based component (default 1)"},
        {"pieces", Kind::kValue, "Subword piece table"}},
       RunCorrelatePc},
      {"sif", "Reweight table rows by alpha / (alpha + p(w))",
       {{"table", Kind::kValue, "Embedding table"},
        {"out", Kind::kValue, "Output table"},
        {"alpha", Kind::kValue, "SIF alpha (default 0.001)"},
        {"probs", Kind::kValue, "word<TAB>probability file (default: vocabulary counts)"},
        {"format", Kind::kValue, "binary (default) or text"}},
       RunSif},
  };
  return commands;
}

std::string Dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// Merges config-file entries for `command`. Bare keys apply to every stage
// that knows them; `stage.key` entries only to that stage.
void MergeConfig(const KeyValueFile &kv, const Command &command,
                 std::map<std::string, std::vector<std::string>> *values) {
  std::set<std::string> any_stage_keys;
  std::map<std::string, std::set<std::string>> per_stage;
  for (const auto &c : Commands()) {
    for (const auto &p : Concat(c.params, CommonParams())) {
      any_stage_keys.insert(p.key);
      per_stage[c.name].insert(p.key);
    }
  }
  const std::set<std::string> &mine = per_stage[command.name];
  std::map<std::string, std::vector<std::string>> bare, scoped;
  for (const auto &[key, value] : kv.entries()) {
    const size_t dot = key.find('.');
    if (dot == std::string::npos) {
      if (!any_stage_keys.contains(key)) throw UsageError("unknown config key '" + key + "'");
      if (mine.contains(key)) bare[key].push_back(value);
      continue;
    }
    const std::string stage = key.substr(0, dot);
    const std::string sub = key.substr(dot + 1);
    auto it = per_stage.find(stage);
    if (it == per_stage.end() || !it->second.contains(sub)) {
      throw UsageError("unknown config key '" + key + "'");
    }
    if (stage == command.name) scoped[sub].push_back(value);
  }
  for (auto &[k, v] : bare) (*values)[k] = std::move(v);
  for (auto &[k, v] : scoped) (*values)[k] = std::move(v);
}

int Dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app("Static sentence embeddings: extraction, PCA, distillation and evaluation", "swe");
  app.require_subcommand(1);
  app.set_version_flag("--version", "swe 1.0.0");

  struct Bound {
    const Command *command;
    CLI::App *app;
    std::string config;
    int threads = 1;
    bool resume = false;
    std::map<std::string, std::string> scalars;
    std::map<std::string, std::vector<std::string>> lists;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option *> options;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto &command : Commands()) {
    auto b = std::make_unique<Bound>();
    b->command = &command;
    b->app = app.add_subcommand(command.name, command.help);
    b->app->add_option("--config", b->config, "key=value config file")->check(CLI::ExistingFile);
    b->app->add_option("--threads", b->threads, "Worker threads (default 1)")
        ->check(CLI::PositiveNumber);
    b->app->add_flag("--resume", b->resume,
                     "Skip the stage if its output was produced by the same configuration");
    for (const auto &p : Concat(command.params, CommonParams())) {
      const std::string flag = "--" + Dashed(p.key);
      CLI::Option *opt = nullptr;
      switch (p.kind) {
        case Kind::kValue:
          opt = b->app->add_option(flag, b->scalars[p.key], p.help);
          break;
        case Kind::kList:
          opt = b->app->add_option(flag, b->lists[p.key], p.help)->allow_extra_args(false);
          break;
        case Kind::kFlag:
          opt = b->app->add_flag(flag, b->flags[p.key], p.help);
          break;
      }
      b->options[p.key] = opt;
    }
    bound.push_back(std::move(b));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  for (auto &b : bound) {
    if (!b->app->parsed()) continue;
    std::map<std::string, std::vector<std::string>> values;
    if (!b->config.empty()) {
      KeyValueFile kv;
      try {
        kv = KeyValueFile::Load(b->config);
      } catch (const FormatError &e) {
        throw UsageError(e.what());
      }
      MergeConfig(kv, *b->command, &values);
    }
    for (const auto &[key, opt] : b->options) {
      if (opt->count() == 0) continue;
      if (b->lists.contains(key)) {
        values[key] = b->lists[key];
      } else if (b->flags.contains(key)) {
        values[key] = {"true"};
      } else {
        values[key] = {b->scalars[key]};
      }
    }
    Context ctx(*b->command, std::move(values), b->threads, b->resume, out, err);
    b->command->run(ctx);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  SetWarningSink([&err](std::string_view msg) { err << "warning: " << msg << "\n"; });
  int status;
  try {
    status = Dispatch(args, out, err);
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << "\n";
    status = kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    status = kExitDataError;
  }
  out.flush();
  SetWarningSink(nullptr);
  return status;
}

int RunCli(int argc, const char *const *argv) {
  return RunCli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace swe
