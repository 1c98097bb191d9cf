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

// Machinery shared by the distillation and contrastive trainers: cosine
// similarity matrices and their backward pass, sparse row gradients, a
// lazy Adam optimizer and the early-stopping training loop.

#ifndef SWE_TRAIN_H_
#define SWE_TRAIN_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "swe/config.h"
#include "swe/encode.h"

namespace swe {

enum class SimilarityKind : uint8_t { kTeacher, kStudent, kCrossLingual };

// K x K cosine similarities within a minibatch.
struct SimilarityMatrix {
  Eigen::MatrixXd values;
  SimilarityKind kind = SimilarityKind::kStudent;
  Eigen::Index size() const { return values.rows(); }
};

// values(i, j) = cos(rows_i, rows_j). Throws DataError naming the first
// zero-norm row.
SimilarityMatrix CosineMatrix(const Matrix &rows,
                              SimilarityKind kind = SimilarityKind::kStudent);
// values(i, j) = cos(a_i, b_j).
SimilarityMatrix CrossCosineMatrix(const Matrix &a, const Matrix &b);

// Gradient of a loss w.r.t. the rows of `x`, given dL/dC where
// C(i, j) = cos(x_i, y_j) (holding y fixed).
Matrix CosineBackward(const Matrix &x, const Matrix &y, const Eigen::MatrixXd &cos,
                      const Eigen::MatrixXd &grad_cos);

// Mean of the table rows listed in each entry of `batch`.
Matrix MeanEmbeddings(std::span<const TokenIds> batch, const Matrix &table);

// Gradient restricted to the rows a minibatch touched. `rows` is sorted
// and unique; values.row(k) belongs to table row rows[k].
struct RowGradient {
  std::vector<int32_t> rows;
  Matrix values;
  double loss = 0;

  Matrix ToDense(Eigen::Index n_rows, Eigen::Index dim) const;
  // Gradient for table row `row`, zero if untouched.
  Eigen::VectorXd Row(int32_t row) const;
};

// Chains per-sentence gradients through the averaging step onto the
// table rows: every token occurrence in sentence i receives
// grad_sentences.row(i) / |tokens_i|.
RowGradient ScatterToRows(std::span<const TokenIds> batch, const Matrix &grad_sentences);
// Sums two row gradients (same dimension).
RowGradient AddRowGradients(const RowGradient &a, const RowGradient &b);

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with moments updated only for rows present in a gradient. Bias
// correction uses the global step count.
class SparseAdam {
 public:
  SparseAdam(Eigen::Index rows, Eigen::Index cols, AdamParams params);

  void Step(const RowGradient &grad, Matrix *params);
  int64_t step() const { return step_; }
  const Matrix &first_moment() const { return m_; }
  const Matrix &second_moment() const { return v_; }

 private:
  AdamParams params_;
  Matrix m_;
  Matrix v_;
  int64_t step_ = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_steps = 30000;
  int batch_size = 128;
  double tau = 0.05;
  uint64_t seed = 42;
  int patience = 5;
  int val_every = 500;
  // Fraction of the pool held out for validation. 0 validates on the
  // training pool itself.
  double val_fraction = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const;
  AdamParams adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

// Keys: lr, steps, batch_size, tau, seed, patience, val_every,
// val_fraction, beta1, beta2, eps. Unknown keys are rejected.
TrainConfig ParseTrainConfig(const KeyValueFile &kv, TrainConfig base = {});
const std::set<std::string, std::less<>> &TrainConfigKeys();

struct ValidationPoint {
  int step = 0;
  double loss = 0;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<ValidationPoint> validations;
  int best_step = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  int steps_run = 0;
  bool early_stopped = false;
};

// Loss and gradient for the pool items in `batch`.
using BatchObjective =
    std::function<double(std::span<const size_t> batch, const Matrix &params,
                         RowGradient *grad)>;
using ValidationObjective = std::function<double(const Matrix &params)>;

// Shuffles the pool every epoch (dropping the incomplete tail batch),
// validates at step 0, every val_every steps and at the last step, and
// stops after `patience` validations without improvement. On return
// `params` holds the best-validation snapshot.
TrainHistory RunTraining(Matrix *params, size_t pool_size, const TrainConfig &config,
                         const BatchObjective &objective,
                         const ValidationObjective &validation);

// Deterministic split of [0, n) into (train, validation) indices, both
// sorted. A positive fraction holds out at least `min_validation` items.
struct PoolSplit {
  std::vector<size_t> train;
  std::vector<size_t> validation;
};
PoolSplit SplitPool(size_t n, double val_fraction, uint64_t seed, size_t min_validation = 1);

}  // namespace swe

#endif  // SWE_TRAIN_H_
