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

#include "swe/embedding.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "swe/binary_io.h"
#include "swe/config.h"
#include "swe/text.h"

namespace swe {
namespace {

constexpr std::string_view kTableMagic = "SWE1";
constexpr std::string_view kTrailerMagic = "SWX1";
constexpr std::string_view kSentenceMagic = "SWT1";
constexpr uint8_t kTableVersion = 1;

template <typename E>
void CheckFinite(const Matrix &m, const Vocabulary &vocab) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).allFinite()) {
      throw E("corrupt embedding: non-finite value in row for word '" +
                        vocab.word(static_cast<size_t>(i)) + "'");
    }
  }
}

std::ofstream OpenForWrite(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::ifstream OpenForRead(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::string FormatFloat(float v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string_view StageTagName(StageTag tag) {
  switch (tag) {
    case StageTag::kRaw:
      return "raw";
    case StageTag::kPca:
      return "pca";
    case StageTag::kTrained:
      return "trained";
  }
  return "unknown";
}

StageTag ParseStageTag(std::string_view name) {
  if (name == "raw") return StageTag::kRaw;
  if (name == "pca") return StageTag::kPca;
  if (name == "trained") return StageTag::kTrained;
  throw DataError("unknown stage tag '" + std::string(name) + "'");
}

std::string_view CaseModeName(CaseMode mode) {
  return mode == CaseMode::kInsensitive ? "insensitive" : "sensitive";
}

std::string FoldCase(std::string_view word, CaseMode mode) {
  if (mode == CaseMode::kSensitive) return std::string(word);
  return FoldCaseUtf8(word);
}

std::string TaggedKey(std::string_view language, std::string_view word) {
  std::string key;
  key.reserve(language.size() + 1 + word.size());
  key += language;
  key += ':';
  key += word;
  return key;
}

// --- Vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words,
                       std::vector<uint64_t> frequencies, CaseMode mode)
    : words_(std::move(words)), frequencies_(std::move(frequencies)), case_mode_(mode) {
  if (!frequencies_.empty() && frequencies_.size() != words_.size()) {
    throw DataError("vocabulary has " + std::to_string(words_.size()) + " words but " +
                    std::to_string(frequencies_.size()) + " frequencies");
  }
  index_.reserve(words_.size());
  for (size_t i = 0; i < words_.size(); ++i) {
    std::string key = FoldCase(words_[i], case_mode_);
    if (!index_.emplace(std::move(key), static_cast<int32_t>(i)).second) {
      throw DataError("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
}

std::optional<int32_t> Vocabulary::Find(std::string_view word) const {
  if (case_mode_ == CaseMode::kSensitive) {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  auto it = index_.find(FoldCaseUtf8(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int32_t> Vocabulary::FindTagged(std::string_view word,
                                              std::string_view language) const {
  if (!language.empty()) {
    if (auto id = Find(TaggedKey(language, word))) return id;
  }
  return Find(word);
}

// --- VocabBuilder ----------------------------------------------------------

void VocabBuilder::Add(std::string_view token) {
  ++total_;
  if (mode_ == CaseMode::kSensitive) {
    auto it = counts_.find(token);
    if (it != counts_.end()) {
      ++it->second;
      return;
    }
    counts_.emplace(std::string(token), 1);
    return;
  }
  ++counts_[FoldCaseUtf8(token)];
}

Vocabulary VocabBuilder::Build(size_t cap) const {
  if (counts_.empty()) throw DataError("empty corpus");
  std::vector<std::pair<std::string_view, uint64_t>> entries;
  entries.reserve(counts_.size());
  for (const auto &[w, c] : counts_) entries.emplace_back(w, c);
  const size_t keep = std::min(cap, entries.size());
  const auto order = [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), order);
  if (entries.size() < cap) {
    Warn("corpus has only " + std::to_string(entries.size()) +
         " distinct words, fewer than the cap of " + std::to_string(cap));
  }
  std::vector<std::string> words;
  std::vector<uint64_t> freqs;
  words.reserve(keep);
  freqs.reserve(keep);
  for (size_t i = 0; i < keep; ++i) {
    words.emplace_back(entries[i].first);
    freqs.push_back(entries[i].second);
  }
  return Vocabulary(std::move(words), std::move(freqs), mode_);
}

Vocabulary BuildVocab(std::span<const std::string> tokens, size_t cap, CaseMode mode) {
  VocabBuilder builder(mode);
  for (const auto &t : tokens) builder.Add(t);
  return builder.Build(cap);
}

Vocabulary BuildVocab(std::span<const std::string_view> tokens, size_t cap,
                      CaseMode mode) {
  VocabBuilder builder(mode);
  for (const auto t : tokens) builder.Add(t);
  return builder.Build(cap);
}

void SaveVocab(const Vocabulary &vocab, const std::string &path,
               const std::map<std::string, std::string> &metadata) {
  std::ofstream out = OpenForWrite(path);
  out << "# case_mode=" << CaseModeName(vocab.case_mode()) << "\n";
  for (const auto &[k, v] : metadata) out << "# " << k << "=" << v << "\n";
  for (size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.word(i) << '\t' << (vocab.has_frequencies() ? vocab.frequency(i) : 0)
        << '\n';
  }
  if (!out) throw IoError("error writing " + path);
}

Vocabulary LoadVocab(const std::string &path) {
  std::vector<std::string> words;
  std::vector<uint64_t> freqs;
  CaseMode mode = CaseMode::kSensitive;
  size_t line_no = 0;
  for (const std::string &line : ReadLines(path)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("case_mode=insensitive") != std::string::npos) {
        mode = CaseMode::kInsensitive;
      }
      continue;
    }
    const size_t tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected word<TAB>count");
    }
    words.push_back(line.substr(0, tab));
    const long long count = ParseInt(std::string_view(line).substr(tab + 1), "count");
    if (count < 0) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": negative count");
    }
    freqs.push_back(static_cast<uint64_t>(count));
  }
  return Vocabulary(std::move(words), std::move(freqs), mode);
}

// --- EmbeddingTable --------------------------------------------------------

EmbeddingTable::EmbeddingTable(Vocabulary vocab, Matrix matrix, StageTag stage)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)), stage_(stage) {
  if (static_cast<size_t>(matrix_.rows()) != vocab_.size()) {
    throw DataError("embedding matrix has " + std::to_string(matrix_.rows()) +
                    " rows but vocabulary has " + std::to_string(vocab_.size()) +
                    " words");
  }
  if (matrix_.cols() <= 0) throw DataError("embedding dimension must be positive");
  CheckFinite<DataError>(matrix_, vocab_);
}

void WriteTableBinary(const EmbeddingTable &table, std::ostream &out) {
  BinaryWriter w(&out);
  const Vocabulary &vocab = table.vocab();
  w.Bytes(kTableMagic);
  w.U8(kTableVersion);
  w.U32(static_cast<uint32_t>(table.size()));
  w.U32(static_cast<uint32_t>(table.dim()));
  w.U8(static_cast<uint8_t>(table.stage()));
  for (const auto &word : vocab.words()) w.String(word);
  const Matrix &m = table.matrix();
  std::vector<float> row(static_cast<size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row[static_cast<size_t>(j)] = static_cast<float>(m(i, j));
    }
    w.Bytes(std::string_view(reinterpret_cast<const char *>(row.data()),
                             row.size() * sizeof(float)));
  }
  w.Bytes(kTrailerMagic);
  w.U8(static_cast<uint8_t>(vocab.case_mode()));
  w.U8(vocab.has_frequencies() ? 1 : 0);
  if (vocab.has_frequencies()) {
    for (uint64_t f : vocab.frequencies()) w.U64(f);
  }
  w.Metadata(table.metadata());
}

EmbeddingTable ReadTableBinary(std::istream &in) {
  BinaryReader r(&in);
  if (r.Bytes(4) != kTableMagic) throw FormatError("not an SWE1 embedding table");
  const uint8_t version = r.U8();
  if (version != kTableVersion) {
    throw FormatError("unsupported SWE1 version " + std::to_string(version));
  }
  const uint32_t rows = r.U32();
  const uint32_t dim = r.U32();
  const uint8_t stage = r.U8();
  if (stage > static_cast<uint8_t>(StageTag::kTrained)) {
    throw FormatError("invalid stage tag " + std::to_string(stage));
  }
  std::vector<std::string> words;
  words.reserve(rows);
  for (uint32_t i = 0; i < rows; ++i) words.push_back(r.String());
  Matrix m(rows, dim);
  std::vector<float> row(dim);
  for (uint32_t i = 0; i < rows; ++i) {
    r.Bytes(reinterpret_cast<char *>(row.data()), row.size() * sizeof(float));
    for (uint32_t j = 0; j < dim; ++j) m(i, j) = row[j];
  }
  CaseMode mode = CaseMode::kSensitive;
  std::vector<uint64_t> freqs;
  std::map<std::string, std::string> metadata;
  if (!r.AtEnd()) {
    if (r.Bytes(4) != kTrailerMagic) throw FormatError("corrupt SWE1 trailer");
    const uint8_t case_byte = r.U8();
    if (case_byte > 1) throw FormatError("invalid case mode byte");
    mode = static_cast<CaseMode>(case_byte);
    if (r.U8() != 0) {
      freqs.resize(rows);
      for (auto &f : freqs) f = r.U64();
    }
    metadata = r.Metadata();
  }
  Vocabulary vocab(std::move(words), std::move(freqs), mode);
  CheckFinite<FormatError>(m, vocab);
  EmbeddingTable table(std::move(vocab), std::move(m), static_cast<StageTag>(stage));
  table.set_metadata(std::move(metadata));
  return table;
}

void WriteTableText(const EmbeddingTable &table, std::ostream &out) {
  out << table.size() << ' ' << table.dim() << '\n';
  const Matrix &m = table.matrix();
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line = table.vocab().word(static_cast<size_t>(i));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      line += ' ';
      line += FormatFloat(static_cast<float>(m(i, j)));
    }
    line += '\n';
    out << line;
  }
}

EmbeddingTable ReadTableText(std::istream &in, CaseMode mode) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("unexpected EOF");
  long long rows = 0, dim = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> rows >> dim) || (header >> extra) || rows < 0 || dim <= 0) {
      throw FormatError("line 1: expected header '<rows> <dim>'");
    }
  }
  std::vector<std::string> words;
  words.reserve(static_cast<size_t>(rows));
  Matrix m(rows, dim);
  long long row = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= rows) {
      throw FormatError("header declares " + std::to_string(rows) +
                        " rows but the file has more (line " + std::to_string(line_no) +
                        ")");
    }
    std::string_view rest(line);
    const size_t sp = rest.find(' ');
    words.emplace_back(rest.substr(0, sp));
    rest = sp == std::string_view::npos ? std::string_view() : rest.substr(sp + 1);
    long long col = 0;
    while (!rest.empty()) {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (rest.empty()) break;
      const size_t end = std::min(rest.find(' '), rest.size());
      if (col >= dim) {
        throw FormatError("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(dim) + " values, got more");
      }
      double v = 0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + end, v);
      if (ec != std::errc() || ptr != rest.data() + end) {
        throw FormatError("line " + std::to_string(line_no) + ": invalid number '" +
                          std::string(rest.substr(0, end)) + "'");
      }
      m(row, col++) = v;
      rest.remove_prefix(end);
    }
    if (col != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, got " + std::to_string(col));
    }
    ++row;
  }
  if (row != rows) {
    throw FormatError("header declares " + std::to_string(rows) + " rows but found " +
                      std::to_string(row));
  }
  Vocabulary vocab(std::move(words), {}, mode);
  CheckFinite<FormatError>(m, vocab);
  return EmbeddingTable(std::move(vocab), std::move(m), StageTag::kRaw);
}

void SaveTable(const EmbeddingTable &table, const std::string &path, TableFormat format) {
  std::ofstream out = OpenForWrite(path);
  if (format == TableFormat::kBinary) {
    WriteTableBinary(table, out);
  } else {
    WriteTableText(table, out);
  }
  out.flush();
  if (!out) throw IoError("error writing " + path);
}

EmbeddingTable LoadTable(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::string_view(magic, 4) == kTableMagic;
  in.clear();
  in.seekg(0);
  try {
    return binary ? ReadTableBinary(in) : ReadTableText(in);
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

void SaveSentenceEmbeddings(const Matrix &rows, const std::string &path) {
  std::ofstream out = OpenForWrite(path);
  BinaryWriter w(&out);
  w.Bytes(kSentenceMagic);
  w.U32(static_cast<uint32_t>(rows.rows()));
  w.U32(static_cast<uint32_t>(rows.cols()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) w.F32(static_cast<float>(rows(i, j)));
  }
  out.flush();
  if (!out) throw IoError("error writing " + path);
}

Matrix LoadSentenceEmbeddings(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  BinaryReader r(&in);
  try {
    if (r.Bytes(4) != kSentenceMagic) throw FormatError("not an SWT1 sentence dump");
    const uint32_t count = r.U32();
    const uint32_t dim = r.U32();
    Matrix m(count, dim);
    std::vector<float> row(dim);
    for (uint32_t i = 0; i < count; ++i) {
      r.Bytes(reinterpret_cast<char *>(row.data()), row.size() * sizeof(float));
      for (uint32_t j = 0; j < dim; ++j) m(i, j) = row[j];
      if (!m.row(i).allFinite()) {
        throw FormatError("non-finite value in sentence vector " + std::to_string(i));
      }
    }
    return m;
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace swe
