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

// Cross-lingual refinement with a bidirectional in-batch contrastive loss
// over translation pairs. With U(i, j) = cos(source_i, target_j):
//
//   L = -(1/K) sum_i [log softmax_row(U / tau)(i, i)
//                     + log softmax_row(U^T / tau)(i, i)].

#ifndef SWE_XLINGUAL_H_
#define SWE_XLINGUAL_H_

#include <string>
#include <utility>
#include <vector>

#include "swe/embedding.h"
#include "swe/encode.h"
#include "swe/train.h"

namespace swe {

struct ParallelCorpus {
  std::vector<std::pair<std::string, std::string>> pairs;

  // UTF-8 TSV, one "source<TAB>target" pair per line.
  static ParallelCorpus Load(const std::string &path);
  size_t size() const { return pairs.size(); }
};

double ContrastiveLoss(const SimilarityMatrix &u, double tau = 0.05);
// dL/dU.
Eigen::MatrixXd ContrastiveLossGradient(const SimilarityMatrix &u, double tau = 0.05);

// Gradient of the contrastive loss w.r.t. the rows of one parameter
// matrix shared by both languages (a joint, language-tagged vocabulary).
RowGradient ContrastiveGrad(std::span<const TokenIds> source,
                            std::span<const TokenIds> target, const Matrix &params,
                            double tau = 0.05);

struct ContrastiveOptions {
  std::string source_language;
  std::string target_language;
  EncodeOptions encode;
};

struct ContrastiveTrainResult {
  EmbeddingTable table;
  TrainHistory history;
  size_t dropped_pairs = 0;
  size_t train_pairs = 0;
  size_t validation_pairs = 0;
};

// Trains a joint table on translation pairs. Sentences are resolved with
// the language tags in `options`; pairs with an empty side are dropped.
ContrastiveTrainResult TrainContrastive(const EmbeddingTable &table,
                                        const ParallelCorpus &corpus,
                                        const TrainConfig &config,
                                        const ContrastiveOptions &options = {},
                                        const SubwordTokenizer *tokenizer = nullptr);

}  // namespace swe

#endif  // SWE_XLINGUAL_H_
