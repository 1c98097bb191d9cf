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

#include "swe/encode.h"

#include <algorithm>
#include <cmath>
#include <thread>

namespace swe {

// --- PieceTableTokenizer ---------------------------------------------------

PieceTableTokenizer::PieceTableTokenizer(std::vector<std::string> pieces,
                                         std::string continuation_prefix) {
  for (auto &p : pieces) {
    if (p.empty()) continue;
    if (!continuation_prefix.empty() && p.size() > continuation_prefix.size() &&
        p.compare(0, continuation_prefix.size(), continuation_prefix) == 0) {
      std::string bare = p.substr(continuation_prefix.size());
      max_piece_bytes_ = std::max(max_piece_bytes_, bare.size());
      continuation_.insert(std::move(bare));
    } else {
      max_piece_bytes_ = std::max(max_piece_bytes_, p.size());
      initial_.insert(std::move(p));
    }
  }
}

PieceTableTokenizer PieceTableTokenizer::FromFile(const std::string &path,
                                                  std::string continuation_prefix) {
  std::vector<std::string> pieces;
  for (auto &line : ReadLines(path)) {
    if (line.empty() || line.rfind("#!", 0) == 0) continue;
    pieces.push_back(std::move(line));
  }
  return PieceTableTokenizer(std::move(pieces), std::move(continuation_prefix));
}

std::vector<std::string> PieceTableTokenizer::Segment(std::string_view word) const {
  std::vector<std::string> pieces;
  size_t pos = 0;
  while (pos < word.size()) {
    const auto &table = pos == 0 ? initial_ : continuation_;
    const size_t longest = std::min(max_piece_bytes_, word.size() - pos);
    size_t match = 0;
    for (size_t len = longest; len > 0; --len) {
      if (table.contains(std::string(word.substr(pos, len)))) {
        match = len;
        break;
      }
    }
    if (match == 0) {
      // Fall back to one code point.
      match = SplitCodePoints(word.substr(pos)).front().size();
    }
    std::string piece = pos == 0 ? std::string() : std::string("##");
    piece += word.substr(pos, match);
    pieces.push_back(std::move(piece));
    pos += match;
  }
  return pieces;
}

// --- Resolution ------------------------------------------------------------

std::optional<int32_t> ResolveWord(std::string_view word, const Vocabulary &vocab,
                                   const SubwordTokenizer *tokenizer,
                                   std::string_view language) {
  if (word.empty()) return std::nullopt;
  if (auto id = vocab.FindTagged(word, language)) return id;
  if (tokenizer == nullptr) return std::nullopt;
  const std::vector<std::string> pieces = tokenizer->Segment(word);
  // Byte length of each prefix made of the first k pieces. Continuation
  // markers are not part of the word.
  std::vector<size_t> prefix_bytes;
  prefix_bytes.reserve(pieces.size());
  size_t total = 0;
  for (size_t i = 0; i < pieces.size(); ++i) {
    std::string_view p = pieces[i];
    if (i > 0 && p.starts_with("##")) p.remove_prefix(2);
    total += p.size();
    prefix_bytes.push_back(total);
  }
  if (total != word.size()) return std::nullopt;
  for (size_t k = pieces.size() - 1; k >= 1; --k) {
    if (auto id = vocab.FindTagged(word.substr(0, prefix_bytes[k - 1]), language)) {
      return id;
    }
  }
  return std::nullopt;
}

// --- Encoder ---------------------------------------------------------------

size_t EncodedBatch::empty_count() const {
  return static_cast<size_t>(std::count(empty.begin(), empty.end(), uint8_t{1}));
}

Encoder::Encoder(const EmbeddingTable &table, const SubwordTokenizer *tokenizer,
                 EncodeOptions options)
    : table_(&table), tokenizer_(tokenizer), options_(std::move(options)) {
  if (options_.sif_alpha) {
    const double alpha = *options_.sif_alpha;
    if (!(alpha > 0)) throw DataError("sif_alpha must be positive");
    const std::vector<double> probs = UnigramProbabilities(table.vocab());
    weights_.resize(probs.size());
    for (size_t i = 0; i < probs.size(); ++i) weights_[i] = alpha / (alpha + probs[i]);
  }
}

TokenIds Encoder::Resolve(std::string_view text, int *missed) const {
  TokenIds ids;
  int misses = 0;
  for (std::string_view tok : Tokenize(text, options_.tokenize)) {
    if (auto id = ResolveWord(tok, table_->vocab(), tokenizer_, options_.language)) {
      ids.push_back(*id);
    } else {
      ++misses;
    }
  }
  if (missed != nullptr) *missed = misses;
  return ids;
}

bool Encoder::EncodeInto(std::string_view text, Eigen::Ref<Eigen::VectorXd> out) const {
  return EncodeResolved(Resolve(text), out);
}

bool Encoder::EncodeResolved(TokenIds ids, Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  const Matrix &m = table_->matrix();
  if (ids.empty()) return false;
  // Summing in row order makes the result independent of word order.
  std::sort(ids.begin(), ids.end());
  for (int32_t id : ids) {
    if (weights_.empty()) {
      out += m.row(id).transpose();
    } else {
      out += weights_[static_cast<size_t>(id)] * m.row(id).transpose();
    }
  }
  out /= static_cast<double>(ids.size());
  if (options_.normalize) {
    const double norm = out.norm();
    if (norm > 0) {
      out /= norm;
    } else {
      out.setZero();
      return false;
    }
  }
  return true;
}

SentenceEmbedding Encoder::Encode(std::string_view text) const {
  SentenceEmbedding result;
  result.vector.resize(dim());
  int missed = 0;
  TokenIds ids = Resolve(text, &missed);
  result.resolved = static_cast<int>(ids.size());
  result.missed = missed;
  result.empty = !EncodeResolved(std::move(ids), result.vector);
  return result;
}

EncodedBatch Encoder::EncodeBatch(std::span<const std::string> texts, int threads) const {
  EncodedBatch batch;
  const auto n = static_cast<Eigen::Index>(texts.size());
  batch.vectors.resize(n, dim());
  batch.empty.assign(texts.size(), 0);
  auto work = [&](size_t begin, size_t end) {
    Eigen::VectorXd v(dim());
    for (size_t i = begin; i < end; ++i) {
      const bool ok = EncodeInto(texts[i], v);
      batch.vectors.row(static_cast<Eigen::Index>(i)) = v.transpose();
      batch.empty[i] = ok ? 0 : 1;
    }
  };
  const size_t workers =
      std::clamp<size_t>(static_cast<size_t>(std::max(threads, 1)), 1,
                         std::max<size_t>(texts.size(), 1));
  if (workers == 1) {
    work(0, texts.size());
    return batch;
  }
  std::vector<std::thread> pool;
  const size_t chunk = (texts.size() + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    const size_t begin = w * chunk;
    const size_t end = std::min(texts.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (auto &t : pool) t.join();
  return batch;
}

SentenceEmbedding EncodeSentence(std::string_view text, const EmbeddingTable &table,
                                 const SubwordTokenizer *tokenizer,
                                 const EncodeOptions &options) {
  return Encoder(table, tokenizer, options).Encode(text);
}

EncodedBatch EncodeBatch(std::span<const std::string> texts, const EmbeddingTable &table,
                         const SubwordTokenizer *tokenizer, const EncodeOptions &options,
                         int threads) {
  return Encoder(table, tokenizer, options).EncodeBatch(texts, threads);
}

// --- SIF -------------------------------------------------------------------

std::vector<double> UnigramProbabilities(const Vocabulary &vocab) {
  if (!vocab.has_frequencies()) {
    throw DataError("vocabulary has no frequencies for unigram probabilities");
  }
  double total = 0;
  for (uint64_t f : vocab.frequencies()) total += static_cast<double>(f);
  std::vector<double> probs(vocab.size(), 0.0);
  if (total == 0) return probs;
  for (size_t i = 0; i < vocab.size(); ++i) {
    probs[i] = static_cast<double>(vocab.frequency(i)) / total;
  }
  return probs;
}

EmbeddingTable SifReweight(const EmbeddingTable &table, std::span<const double> probs,
                           double alpha) {
  if (!(alpha > 0)) throw DataError("sif alpha must be positive");
  if (probs.size() != table.size()) {
    throw DataError("expected " + std::to_string(table.size()) + " probabilities, got " +
                    std::to_string(probs.size()));
  }
  double total = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0) || probs[i] > 1) {
      throw DataError("invalid probability " + std::to_string(probs[i]) + " for word '" +
                      table.vocab().word(i) + "'");
    }
    total += probs[i];
  }
  if (total > 1 + 1e-6) throw DataError("probabilities sum to more than 1");
  Matrix m = table.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.row(i) *= alpha / (alpha + probs[static_cast<size_t>(i)]);
  }
  EmbeddingTable out(table.vocab(), std::move(m), table.stage());
  out.set_metadata(table.metadata());
  return out;
}

}  // namespace swe
