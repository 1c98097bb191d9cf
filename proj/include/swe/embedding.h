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

// Vocabularies, embedding tables and their on-disk formats.
//
// Binary table layout ("SWE1"), all integers little-endian:
//
//   "SWE1" | u8 version=1 | u32 rows | u32 dim | u8 stage_tag
//   rows x (u32 byte_length, UTF-8 word)
//   rows x dim f32, row-major
//   optional trailer:
//     "SWX1" | u8 case_mode | u8 has_frequencies
//     [rows x u64 frequency] | u32 n | n x (u32 len, key, u32 len, value)
//
// Text layout is word2vec-style: a "rows dim" header line, then one
// "word v1 ... vd" line per row.

#ifndef SWE_EMBEDDING_H_
#define SWE_EMBEDDING_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "swe/base.h"

namespace swe {

enum class CaseMode : uint8_t { kSensitive = 0, kInsensitive = 1 };
enum class StageTag : uint8_t { kRaw = 0, kPca = 1, kTrained = 2 };

std::string_view StageTagName(StageTag tag);
StageTag ParseStageTag(std::string_view name);
std::string_view CaseModeName(CaseMode mode);

// Applies the folding implied by `mode`.
std::string FoldCase(std::string_view word, CaseMode mode);

// Prefix used for language-tagged keys in a joint vocabulary ("en:house").
std::string TaggedKey(std::string_view language, std::string_view word);

struct StringHash {
  using is_transparent = void;
  size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

class Vocabulary {
 public:
  Vocabulary() = default;
  // Words must be unique under `mode`'s folding; `frequencies` is either
  // empty or one count per word.
  Vocabulary(std::vector<std::string> words, std::vector<uint64_t> frequencies,
             CaseMode mode = CaseMode::kSensitive);

  size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string &word(size_t i) const { return words_[i]; }
  const std::vector<std::string> &words() const { return words_; }
  bool has_frequencies() const { return !frequencies_.empty(); }
  uint64_t frequency(size_t i) const { return frequencies_.at(i); }
  const std::vector<uint64_t> &frequencies() const { return frequencies_; }
  CaseMode case_mode() const { return case_mode_; }

  // Looks up `word` after case folding.
  std::optional<int32_t> Find(std::string_view word) const;
  // Tries the language-tagged key first, then the bare word. An empty
  // language is a bare lookup.
  std::optional<int32_t> FindTagged(std::string_view word,
                                    std::string_view language) const;

 private:
  std::vector<std::string> words_;
  std::vector<uint64_t> frequencies_;
  CaseMode case_mode_ = CaseMode::kSensitive;
  std::unordered_map<std::string, int32_t, StringHash, std::equal_to<>> index_;
};

// Counts tokens and produces a frequency-ordered vocabulary.
class VocabBuilder {
 public:
  explicit VocabBuilder(CaseMode mode = CaseMode::kSensitive) : mode_(mode) {}

  void Add(std::string_view token);
  uint64_t total_tokens() const { return total_; }
  size_t distinct() const { return counts_.size(); }

  // Most frequent `cap` words, ties broken by byte-wise lexicographic
  // order. Warns when fewer than `cap` distinct words were seen.
  Vocabulary Build(size_t cap) const;

 private:
  CaseMode mode_;
  uint64_t total_ = 0;
  std::unordered_map<std::string, uint64_t, StringHash, std::equal_to<>> counts_;
};

Vocabulary BuildVocab(std::span<const std::string> tokens, size_t cap,
                      CaseMode mode = CaseMode::kSensitive);
Vocabulary BuildVocab(std::span<const std::string_view> tokens, size_t cap,
                      CaseMode mode = CaseMode::kSensitive);

// Vocabulary TSV: "# key=value" header lines, then "word<TAB>count".
void SaveVocab(const Vocabulary &vocab, const std::string &path,
               const std::map<std::string, std::string> &metadata = {});
Vocabulary LoadVocab(const std::string &path);

struct SentenceRecord {
  std::string text;
  std::vector<std::string> tokens;
  std::string language;
  bool empty() const { return tokens.empty(); }
};

// Vocabulary-indexed dense table. Immutable once constructed; every value
// is finite and the row count equals the vocabulary size.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(Vocabulary vocab, Matrix matrix, StageTag stage = StageTag::kRaw);

  const Vocabulary &vocab() const { return vocab_; }
  const Matrix &matrix() const { return matrix_; }
  size_t size() const { return vocab_.size(); }
  int dim() const { return static_cast<int>(matrix_.cols()); }
  StageTag stage() const { return stage_; }
  auto row(int32_t i) const { return matrix_.row(i); }

  // Free-form provenance (config hash, input hashes, seed, ...).
  const std::map<std::string, std::string> &metadata() const { return metadata_; }
  void set_metadata(std::map<std::string, std::string> metadata) {
    metadata_ = std::move(metadata);
  }

 private:
  Vocabulary vocab_;
  Matrix matrix_;
  StageTag stage_ = StageTag::kRaw;
  std::map<std::string, std::string> metadata_;
};

enum class TableFormat { kBinary, kText };

// Binary tables store f32, so a round trip returns the float-rounded
// matrix; it is the identity for tables whose values are already floats.
void SaveTable(const EmbeddingTable &table, const std::string &path,
               TableFormat format = TableFormat::kBinary);
EmbeddingTable LoadTable(const std::string &path);

void WriteTableBinary(const EmbeddingTable &table, std::ostream &out);
EmbeddingTable ReadTableBinary(std::istream &in);
void WriteTableText(const EmbeddingTable &table, std::ostream &out);
EmbeddingTable ReadTableText(std::istream &in, CaseMode mode = CaseMode::kSensitive);

// Sentence embeddings ("SWT1"): u32 count | u32 dim | count x dim f32.
// Used for teacher dumps and for encoder output.
void SaveSentenceEmbeddings(const Matrix &rows, const std::string &path);
Matrix LoadSentenceEmbeddings(const std::string &path);

// Reads one UTF-8 line per entry (trailing '\r' removed).
std::vector<std::string> ReadLines(const std::string &path);

}  // namespace swe

#endif  // SWE_EMBEDDING_H_
