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

// Teacher-student distillation of static embeddings.
//
// For a minibatch of K sentences, the teacher and the student each give a
// K x K cosine matrix. Row i of each is turned into a distribution over
// j != i by a temperature softmax, and the loss is the mean cross-entropy
//
//   L = -(1/K) sum_i sum_{j != i} p_T(i, j) log p_S(i, j).

#ifndef SWE_DISTILL_H_
#define SWE_DISTILL_H_

#include <string>
#include <vector>

#include "swe/embedding.h"
#include "swe/encode.h"
#include "swe/train.h"

namespace swe {

inline constexpr double kDefaultTau = 0.05;

// Row-wise softmax of x / tau over the off-diagonal entries; the diagonal
// of the result is zero.
Eigen::MatrixXd OffDiagonalSoftmax(const Eigen::MatrixXd &x, double tau);

double KdLoss(const SimilarityMatrix &student, const SimilarityMatrix &teacher,
              double tau = kDefaultTau);
// dL/dS; zero on the diagonal.
Eigen::MatrixXd KdLossGradient(const SimilarityMatrix &student,
                               const SimilarityMatrix &teacher, double tau = kDefaultTau);

// Exact gradient of KdLoss w.r.t. the student rows used by `batch`
// (sentence i = mean of rows batch[i]). grad.loss holds the loss.
RowGradient KdGrad(std::span<const TokenIds> batch, const Matrix &student,
                   const SimilarityMatrix &teacher, double tau = kDefaultTau);

// Sentences paired with teacher sentence embeddings.
struct TeacherBatchSource {
  std::vector<std::string> sentences;
  Matrix vectors;

  // Loads an SWT1 dump and its one-sentence-per-line text file.
  static TeacherBatchSource Load(const std::string &vectors_path,
                                 const std::string &sentences_path);
  void Validate() const;
};

struct KdTrainResult {
  EmbeddingTable table;
  TrainHistory history;
  // Sentences with no resolvable token.
  size_t dropped_sentences = 0;
  size_t train_sentences = 0;
  size_t validation_sentences = 0;
};

// Fine-tunes `student` so its in-batch similarity distributions match the
// teacher's. Returns the best-validation snapshot tagged as trained.
KdTrainResult TrainKd(const EmbeddingTable &student, const TeacherBatchSource &teacher,
                      const TrainConfig &config, const SubwordTokenizer *tokenizer = nullptr,
                      const EncodeOptions &encode_options = {});

}  // namespace swe

#endif  // SWE_DISTILL_H_
