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

// Bag-of-words sentence encoding over a static embedding table.

#ifndef SWE_ENCODE_H_
#define SWE_ENCODE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "swe/embedding.h"
#include "swe/text.h"

namespace swe {

using TokenIds = std::vector<int32_t>;

// Splits an out-of-vocabulary word into subword pieces. Concatenating the
// pieces (with continuation markers removed) must give back the word.
class SubwordTokenizer {
 public:
  virtual ~SubwordTokenizer() = default;
  // Never empty for a non-empty word.
  virtual std::vector<std::string> Segment(std::string_view word) const = 0;
};

// Greedy longest-match-first segmentation over a piece table. Pieces that
// may only continue a word carry a prefix ("##ise"). Where no piece
// matches, a single code point is emitted.
class PieceTableTokenizer : public SubwordTokenizer {
 public:
  explicit PieceTableTokenizer(std::vector<std::string> pieces,
                               std::string continuation_prefix = "##");
  // One piece per line; blank lines and lines starting with "#!" ignored.
  static PieceTableTokenizer FromFile(const std::string &path,
                                      std::string continuation_prefix = "##");

  std::vector<std::string> Segment(std::string_view word) const override;

 private:
  std::unordered_set<std::string> initial_;
  std::unordered_set<std::string> continuation_;
  size_t max_piece_bytes_ = 0;
};

struct EncodeOptions {
  bool normalize = true;
  // Smooth inverse frequency weight alpha / (alpha + p(w)); p(w) comes from
  // the table's vocabulary frequencies.
  std::optional<double> sif_alpha;
  TokenizeMode tokenize = TokenizeMode::kWhitespace;
  // Language tag for joint vocabularies; empty for untagged lookup.
  std::string language;
};

inline constexpr double kDefaultSifAlpha = 0.001;

// Looks up `word`; on a miss, segments it and drops trailing pieces until
// the remaining prefix is in the vocabulary. nullopt if every prefix misses.
std::optional<int32_t> ResolveWord(std::string_view word, const Vocabulary &vocab,
                                   const SubwordTokenizer *tokenizer,
                                   std::string_view language = {});

struct SentenceEmbedding {
  Eigen::VectorXd vector;
  // No token resolved; `vector` is zero.
  bool empty = true;
  int resolved = 0;
  int missed = 0;
};

struct EncodedBatch {
  Matrix vectors;
  std::vector<uint8_t> empty;
  size_t empty_count() const;
};

// Encoder bound to one table. Safe for concurrent use.
class Encoder {
 public:
  Encoder(const EmbeddingTable &table, const SubwordTokenizer *tokenizer,
          EncodeOptions options = {});

  const EmbeddingTable &table() const { return *table_; }
  const EncodeOptions &options() const { return options_; }
  int dim() const { return table_->dim(); }

  // Row ids for the resolvable tokens of `text`, in order. `missed`
  // receives the count of unresolved tokens.
  TokenIds Resolve(std::string_view text, int *missed = nullptr) const;
  SentenceEmbedding Encode(std::string_view text) const;
  // Writes the embedding of `text` into `out`; returns false if empty.
  bool EncodeInto(std::string_view text, Eigen::Ref<Eigen::VectorXd> out) const;
  // Row i encodes texts[i]. `threads` > 1 splits the batch into
  // contiguous chunks.
  EncodedBatch EncodeBatch(std::span<const std::string> texts, int threads = 1) const;

 private:
  bool EncodeResolved(TokenIds ids, Eigen::Ref<Eigen::VectorXd> out) const;

  const EmbeddingTable *table_;
  const SubwordTokenizer *tokenizer_;
  EncodeOptions options_;
  // Per-row SIF weights; empty when SIF is off.
  std::vector<double> weights_;
};

SentenceEmbedding EncodeSentence(std::string_view text, const EmbeddingTable &table,
                                 const SubwordTokenizer *tokenizer,
                                 const EncodeOptions &options = {});
EncodedBatch EncodeBatch(std::span<const std::string> texts, const EmbeddingTable &table,
                         const SubwordTokenizer *tokenizer,
                         const EncodeOptions &options = {}, int threads = 1);

// Unigram probabilities from vocabulary counts.
std::vector<double> UnigramProbabilities(const Vocabulary &vocab);

// Scales row w by alpha / (alpha + p(w)).
EmbeddingTable SifReweight(const EmbeddingTable &table, std::span<const double> probs,
                           double alpha = kDefaultSifAlpha);

}  // namespace swe

#endif  // SWE_ENCODE_H_
