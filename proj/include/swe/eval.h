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

// Evaluation metrics and embedding analyses.

#ifndef SWE_EVAL_H_
#define SWE_EVAL_H_

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "swe/embedding.h"
#include "swe/encode.h"
#include "swe/pca.h"

namespace swe {

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> AverageRanks(std::span<const double> values);

// Product-moment correlation. Throws DataError on zero variance.
double Pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks. Throws "zero rank variance" for a
// constant input.
double Spearman(std::span<const double> pred, std::span<const double> gold);

// Maps text to an embedding; `empty` marks texts with no resolvable token.
using TextEncoder = std::function<SentenceEmbedding(std::string_view)>;
TextEncoder MakeTextEncoder(const Encoder &encoder);

struct StsRecord {
  std::string sentence1;
  std::string sentence2;
  double score = 0;
};

struct StsDataset {
  std::vector<StsRecord> records;
  // "sent1<TAB>sent2<TAB>score" per line.
  static StsDataset Load(const std::string &path);
  void Validate() const;
};

struct StsResult {
  // 100 x Spearman rho.
  double score = 0;
  size_t pairs = 0;
  size_t empty_pairs = 0;
};

// Cosine of each pair against gold scores. Pairs with an empty side are
// predicted as 0.
StsResult StsEval(const StsDataset &dataset, const TextEncoder &encoder);

struct RetrievalDataset {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  std::vector<std::pair<size_t, size_t>> gold;

  // Two line files and a "src_idx<TAB>tgt_idx" gold TSV (0-based).
  static RetrievalDataset Load(const std::string &source_path, const std::string &target_path,
                               const std::string &gold_path);
  void Validate() const;
};

struct RetrievalResult {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  size_t predicted = 0;
  size_t correct = 0;
};

// Scores predicted (source, target) pairs against gold pairs, with 0/0
// taken as 0.
RetrievalResult ScorePairs(std::span<const std::pair<size_t, size_t>> predicted,
                           std::span<const std::pair<size_t, size_t>> gold);

// Each source is paired with its nearest target by cosine (lowest index on
// ties); pairs with similarity below `threshold` are discarded. Empty
// encodings have cosine 0 with everything.
RetrievalResult RetrievalEval(const RetrievalDataset &dataset, const TextEncoder &source,
                              const TextEncoder &target,
                              std::optional<double> threshold = std::nullopt);
// Same, on precomputed L2-normalized embeddings.
RetrievalResult RetrievalEvalEmbeddings(const Matrix &sources, const Matrix &targets,
                                        std::span<const std::pair<size_t, size_t>> gold,
                                        std::optional<double> threshold = std::nullopt);

// Universal POS tags, the default closed tag set.
const std::set<std::string, std::less<>> &UniversalPosTags();

struct PosTagMap {
  std::map<std::string, std::string> tags;

  // "word<TAB>tag" lines; tags outside `tagset` are rejected (an empty
  // set accepts any tag).
  static PosTagMap Load(const std::string &path,
                        const std::set<std::string, std::less<>> &tagset = UniversalPosTags());
};

// Mean row norm per tag divided by the largest tag mean. Words absent
// from the table are ignored.
std::map<std::string, double> PosNormProfile(const EmbeddingTable &table, const PosTagMap &tags);

// Spearman correlation between row norms and frequency ranks (1 = most
// frequent). Without counts, row order is the rank.
double NormFrequencySpearman(const EmbeddingTable &table);

struct ScoredDoc {
  double score = 0;
  std::string text;
};

struct ScoredDocs {
  std::vector<ScoredDoc> docs;
  // "score<TAB>text" per line.
  static ScoredDocs Load(const std::string &path);
};

struct ComponentCorrelation {
  double pearson = 0;
  size_t used = 0;
  size_t skipped_empty = 0;
};

// Encodes each document as the plain mean of its rows in `table` (the
// space `transform` was fit in), reads off component `component`
// (1-based) and correlates it with the document scores.
ComponentCorrelation ComponentCorrelate(const ScoredDocs &docs, const EmbeddingTable &table,
                                        const PcaTransform &transform, int component,
                                        const SubwordTokenizer *tokenizer = nullptr);

}  // namespace swe

#endif  // SWE_EVAL_H_
