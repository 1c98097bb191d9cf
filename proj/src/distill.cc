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

#include "swe/distill.h"

#include <cmath>

namespace swe {
namespace {

void CheckBatch(const SimilarityMatrix &s, const SimilarityMatrix &t, double tau) {
  if (!(tau > 0)) throw DataError("tau must be positive");
  if (s.values.rows() != s.values.cols() || t.values.rows() != t.values.cols()) {
    throw DataError("similarity matrices must be square");
  }
  if (s.size() != t.size()) throw DataError("student and teacher batch sizes differ");
  if (s.size() < 2) throw DataError("degenerate batch: K must be at least 2");
}

// Row-wise log-softmax of x / tau over j != i; the diagonal is left at 0.
Eigen::MatrixXd OffDiagonalLogSoftmax(const Eigen::MatrixXd &x, double tau) {
  const Eigen::Index k = x.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j != i) peak = std::max(peak, x(i, j) / tau);
    }
    double sum = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j != i) sum += std::exp(x(i, j) / tau - peak);
    }
    const double log_z = peak + std::log(sum);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j != i) out(i, j) = x(i, j) / tau - log_z;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd OffDiagonalSoftmax(const Eigen::MatrixXd &x, double tau) {
  Eigen::MatrixXd p = OffDiagonalLogSoftmax(x, tau).array().exp();
  p.diagonal().setZero();
  return p;
}

double KdLoss(const SimilarityMatrix &student, const SimilarityMatrix &teacher, double tau) {
  CheckBatch(student, teacher, tau);
  const Eigen::MatrixXd p_teacher = OffDiagonalSoftmax(teacher.values, tau);
  const Eigen::MatrixXd log_student = OffDiagonalLogSoftmax(student.values, tau);
  const double k = static_cast<double>(student.size());
  // Diagonals of both are zero, so the full sum is the off-diagonal sum.
  // Adding +0 turns a -0 result into +0.
  return -(p_teacher.array() * log_student.array()).sum() / k + 0.0;
}

Eigen::MatrixXd KdLossGradient(const SimilarityMatrix &student,
                               const SimilarityMatrix &teacher, double tau) {
  CheckBatch(student, teacher, tau);
  const double k = static_cast<double>(student.size());
  Eigen::MatrixXd g = (OffDiagonalSoftmax(student.values, tau) -
                       OffDiagonalSoftmax(teacher.values, tau)) /
                      (k * tau);
  g.diagonal().setZero();
  return g;
}

RowGradient KdGrad(std::span<const TokenIds> batch, const Matrix &student,
                   const SimilarityMatrix &teacher, double tau) {
  const Matrix sentences = MeanEmbeddings(batch, student);
  const SimilarityMatrix s = CosineMatrix(sentences, SimilarityKind::kStudent);
  const Eigen::MatrixXd g = KdLossGradient(s, teacher, tau);
  // S is symmetric in its arguments, so each sentence receives the
  // gradient through both its row and its column.
  const Eigen::MatrixXd sym = g + g.transpose();
  const Matrix grad_sentences = CosineBackward(sentences, sentences, s.values, sym);
  RowGradient out = ScatterToRows(batch, grad_sentences);
  out.loss = KdLoss(s, teacher, tau);
  return out;
}

TeacherBatchSource TeacherBatchSource::Load(const std::string &vectors_path,
                                            const std::string &sentences_path) {
  TeacherBatchSource source;
  source.vectors = LoadSentenceEmbeddings(vectors_path);
  source.sentences = ReadLines(sentences_path);
  if (!source.sentences.empty() && source.sentences.back().empty() &&
      source.sentences.size() == static_cast<size_t>(source.vectors.rows()) + 1) {
    source.sentences.pop_back();
  }
  source.Validate();
  return source;
}

void TeacherBatchSource::Validate() const {
  if (sentences.size() != static_cast<size_t>(vectors.rows())) {
    throw DataError("teacher dump has " + std::to_string(vectors.rows()) +
                    " vectors but there are " + std::to_string(sentences.size()) +
                    " sentences");
  }
  if (!vectors.allFinite()) throw DataError("teacher vectors contain non-finite values");
}

KdTrainResult TrainKd(const EmbeddingTable &student, const TeacherBatchSource &teacher,
                      const TrainConfig &config, const SubwordTokenizer *tokenizer,
                      const EncodeOptions &encode_options) {
  teacher.Validate();
  config.Validate();
  if (student.stage() != StageTag::kPca) {
    Warn("distilling a table that is not PCA-transformed (stage '" +
         std::string(StageTagName(student.stage())) +
         "'); distillation without the PCA step does not improve on the raw table");
  }
  KdTrainResult result;
  const Encoder encoder(student, tokenizer, encode_options);
  std::vector<TokenIds> sentences;
  std::vector<Eigen::Index> teacher_rows;
  for (size_t i = 0; i < teacher.sentences.size(); ++i) {
    TokenIds ids = encoder.Resolve(teacher.sentences[i]);
    if (ids.empty()) {
      ++result.dropped_sentences;
      continue;
    }
    // Zero vectors on either side have no cosine.
    if (teacher.vectors.row(static_cast<Eigen::Index>(i)).squaredNorm() == 0 ||
        MeanEmbeddings(std::span<const TokenIds>(&ids, 1), student.matrix()).squaredNorm() == 0) {
      ++result.dropped_sentences;
      continue;
    }
    sentences.push_back(std::move(ids));
    teacher_rows.push_back(static_cast<Eigen::Index>(i));
  }
  const PoolSplit split = SplitPool(sentences.size(), config.val_fraction, config.seed, 2);
  const std::vector<size_t> &train = split.train;
  const std::vector<size_t> &val =
      split.validation.empty() ? split.train : split.validation;
  result.train_sentences = train.size();
  result.validation_sentences = split.validation.size();

  auto batch_loss = [&](std::span<const size_t> items, const Matrix &params,
                        RowGradient *grad) {
    std::vector<TokenIds> batch;
    Matrix teacher_batch(static_cast<Eigen::Index>(items.size()), teacher.vectors.cols());
    batch.reserve(items.size());
    for (size_t k = 0; k < items.size(); ++k) {
      batch.push_back(sentences[items[k]]);
      teacher_batch.row(static_cast<Eigen::Index>(k)) =
          teacher.vectors.row(teacher_rows[items[k]]);
    }
    const SimilarityMatrix t = CosineMatrix(teacher_batch, SimilarityKind::kTeacher);
    if (grad == nullptr) {
      return KdLoss(CosineMatrix(MeanEmbeddings(batch, params)), t, config.tau);
    }
    *grad = KdGrad(batch, params, t, config.tau);
    return grad->loss;
  };

  auto objective = [&](std::span<const size_t> items, const Matrix &params,
                       RowGradient *grad) {
    std::vector<size_t> pool_items(items.size());
    for (size_t k = 0; k < items.size(); ++k) pool_items[k] = train[items[k]];
    return batch_loss(pool_items, params, grad);
  };

  // Validation batches are fixed consecutive chunks of the held-out set.
  const size_t val_batch = std::min<size_t>(static_cast<size_t>(config.batch_size), val.size());
  auto validation = [&](const Matrix &params) {
    double total = 0;
    int batches = 0;
    for (size_t begin = 0; begin + val_batch <= val.size(); begin += val_batch) {
      total += batch_loss(std::span<const size_t>(val.data() + begin, val_batch), params,
                          nullptr);
      ++batches;
    }
    return total / batches;
  };
  if (val_batch < 2) throw DataError("validation set needs at least two sentences");

  Matrix params = student.matrix();
  result.history = RunTraining(&params, train.size(), config, objective, validation);
  result.table = EmbeddingTable(student.vocab(), std::move(params), StageTag::kTrained);
  result.table.set_metadata(student.metadata());
  return result;
}

}  // namespace swe
