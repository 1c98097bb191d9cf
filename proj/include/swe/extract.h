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

// Static embeddings from per-occurrence contextual vectors.
//
// An occurrence dump is a stream of (word, vector) records produced by a
// teacher encoder, one record per sampled occurrence of the word. Binary
// layout ("SWD1"):
//
//   "SWD1" | u32 dim | u32 n_words | n_words x (u32 len, UTF-8 word)
//   records until EOF: u32 word_id | dim x f32
//
// A JSONL fallback accepts one object per line, either
//   {"word": "x", "vec": [..]}  or  {"word": "x", "pieces": [[..], [..]]}
// where pieces are averaged into one vector.

#ifndef SWE_EXTRACT_H_
#define SWE_EXTRACT_H_

#include <cstdint>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "swe/embedding.h"

namespace swe {

struct Occurrence {
  uint32_t word_id = 0;
  std::span<const double> vector;
};

class OccurrenceReader {
 public:
  virtual ~OccurrenceReader() = default;
  // Fills `out` with the next record; false at end of stream. The span is
  // valid until the next call.
  virtual bool Next(Occurrence *out) = 0;
  // Dump-local word list; may grow while reading (JSONL).
  virtual const std::vector<std::string> &words() const = 0;
  // Vector length, or 0 if not yet known.
  virtual int dim() const = 0;
};

// Opens a binary or JSONL dump, chosen by the leading magic bytes.
std::unique_ptr<OccurrenceReader> OpenOccurrenceDump(const std::string &path);

// In-memory dump, mostly for tests: row i of `vectors` belongs to
// words[word_ids[i]].
class MemoryOccurrenceReader : public OccurrenceReader {
 public:
  MemoryOccurrenceReader(std::vector<std::string> words, std::vector<uint32_t> word_ids,
                         Matrix vectors);
  bool Next(Occurrence *out) override;
  const std::vector<std::string> &words() const override { return words_; }
  int dim() const override { return static_cast<int>(vectors_.cols()); }

 private:
  std::vector<std::string> words_;
  std::vector<uint32_t> word_ids_;
  Matrix vectors_;
  std::vector<double> row_;
  size_t next_ = 0;
};

class OccurrenceDumpWriter {
 public:
  OccurrenceDumpWriter(const std::string &path, int dim, std::vector<std::string> words);
  void Write(uint32_t word_id, std::span<const double> vector);
  void Close();

 private:
  std::string path_;
  std::ofstream out_;
  int dim_;
  size_t n_words_;
};

struct DecontextualizeResult {
  EmbeddingTable table;
  // Occurrences averaged into each vocabulary row (capped at max_occurrences).
  std::vector<uint32_t> occurrences;
  // Vocabulary rows that received no occurrence; they hold zero vectors.
  std::vector<int32_t> missing;
  uint64_t skipped_out_of_vocab = 0;
  uint64_t skipped_over_cap = 0;
};

// Row w of the output is the mean of the first `max_occurrences` vectors
// recorded for w, in stream order.
DecontextualizeResult Decontextualize(OccurrenceReader &dump, const Vocabulary &vocab,
                                      int max_occurrences = 100);

// Componentwise arithmetic mean of subword piece vectors.
Eigen::VectorXd AverageSubwords(std::span<const Eigen::VectorXd> pieces);

// "word<TAB>occurrences<TAB>status" with status "ok" or "missing".
void WriteOccurrenceReport(const DecontextualizeResult &result, const std::string &path);

}  // namespace swe

#endif  // SWE_EXTRACT_H_
