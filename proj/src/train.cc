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

#include "swe/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace swe {
namespace {

// Plain left-to-right dot product; the fixed summation order makes
// cos(a, b) and cos(b, a) bitwise equal.
double Dot(const double *a, const double *b, Eigen::Index n) {
  double s = 0;
  for (Eigen::Index k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

Eigen::VectorXd RowNorms(const Matrix &x, const char *what) {
  Eigen::VectorXd norms(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    norms(i) = std::sqrt(Dot(x.row(i).data(), x.row(i).data(), x.cols()));
    if (!(norms(i) > 0)) {
      throw DataError(std::string("zero-norm ") + what + " row " + std::to_string(i));
    }
  }
  return norms;
}

Matrix Normalized(const Matrix &x, const Eigen::VectorXd &norms) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = x.row(i) / norms(i);
  return out;
}

Eigen::MatrixXd CosineFromUnit(const Matrix &a, const Matrix &b) {
  Eigen::MatrixXd c(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      c(i, j) = Dot(a.row(i).data(), b.row(j).data(), a.cols());
    }
  }
  return c;
}

}  // namespace

// --- Cosine similarities ----------------------------------------------------

SimilarityMatrix CosineMatrix(const Matrix &rows, SimilarityKind kind) {
  const Matrix unit = Normalized(rows, RowNorms(rows, "embedding"));
  return {CosineFromUnit(unit, unit), kind};
}

SimilarityMatrix CrossCosineMatrix(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.cols()) throw DataError("cross-cosine dimension mismatch");
  const Matrix ua = Normalized(a, RowNorms(a, "source"));
  const Matrix ub = Normalized(b, RowNorms(b, "target"));
  return {CosineFromUnit(ua, ub), SimilarityKind::kCrossLingual};
}

Matrix CosineBackward(const Matrix &x, const Matrix &y, const Eigen::MatrixXd &cos,
                      const Eigen::MatrixXd &grad_cos) {
  const Eigen::VectorXd nx = RowNorms(x, "embedding");
  const Eigen::VectorXd ny = RowNorms(y, "embedding");
  const Matrix ux = Normalized(x, nx);
  const Matrix uy = Normalized(y, ny);
  // d cos(x, y) / dx = y_hat / |x| - cos * x_hat / |x|
  Matrix grad = grad_cos * uy;
  const Eigen::VectorXd radial = (grad_cos.array() * cos.array()).rowwise().sum();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    grad.row(i) = (grad.row(i) - radial(i) * ux.row(i)) / nx(i);
  }
  return grad;
}

Matrix MeanEmbeddings(std::span<const TokenIds> batch, const Matrix &table) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(batch.size()), table.cols());
  for (size_t i = 0; i < batch.size(); ++i) {
    const TokenIds &ids = batch[i];
    if (ids.empty()) {
      throw DataError("sentence " + std::to_string(i) + " has no in-vocabulary tokens");
    }
    auto row = out.row(static_cast<Eigen::Index>(i));
    for (int32_t id : ids) row += table.row(id);
    row /= static_cast<double>(ids.size());
  }
  return out;
}

// --- Row gradients ---------------------------------------------------------

Matrix RowGradient::ToDense(Eigen::Index n_rows, Eigen::Index dim) const {
  Matrix dense = Matrix::Zero(n_rows, dim);
  for (size_t k = 0; k < rows.size(); ++k) {
    dense.row(rows[k]) = values.row(static_cast<Eigen::Index>(k));
  }
  return dense;
}

Eigen::VectorXd RowGradient::Row(int32_t row) const {
  const auto it = std::lower_bound(rows.begin(), rows.end(), row);
  if (it == rows.end() || *it != row) return Eigen::VectorXd::Zero(values.cols());
  return values.row(it - rows.begin()).transpose();
}

RowGradient ScatterToRows(std::span<const TokenIds> batch, const Matrix &grad_sentences) {
  RowGradient out;
  for (const TokenIds &ids : batch) out.rows.insert(out.rows.end(), ids.begin(), ids.end());
  std::sort(out.rows.begin(), out.rows.end());
  out.rows.erase(std::unique(out.rows.begin(), out.rows.end()), out.rows.end());
  out.values = Matrix::Zero(static_cast<Eigen::Index>(out.rows.size()), grad_sentences.cols());
  for (size_t i = 0; i < batch.size(); ++i) {
    const TokenIds &ids = batch[i];
    if (ids.empty()) continue;
    const double scale = 1.0 / static_cast<double>(ids.size());
    for (int32_t id : ids) {
      const auto k = std::lower_bound(out.rows.begin(), out.rows.end(), id) - out.rows.begin();
      out.values.row(k) += scale * grad_sentences.row(static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

RowGradient AddRowGradients(const RowGradient &a, const RowGradient &b) {
  RowGradient out;
  out.loss = a.loss + b.loss;
  std::set_union(a.rows.begin(), a.rows.end(), b.rows.begin(), b.rows.end(),
                 std::back_inserter(out.rows));
  const Eigen::Index dim = std::max(a.values.cols(), b.values.cols());
  out.values = Matrix::Zero(static_cast<Eigen::Index>(out.rows.size()), dim);
  size_t ia = 0, ib = 0;
  for (size_t k = 0; k < out.rows.size(); ++k) {
    const int32_t r = out.rows[k];
    if (ia < a.rows.size() && a.rows[ia] == r) {
      out.values.row(static_cast<Eigen::Index>(k)) += a.values.row(static_cast<Eigen::Index>(ia++));
    }
    if (ib < b.rows.size() && b.rows[ib] == r) {
      out.values.row(static_cast<Eigen::Index>(k)) += b.values.row(static_cast<Eigen::Index>(ib++));
    }
  }
  return out;
}

// --- SparseAdam ------------------------------------------------------------

SparseAdam::SparseAdam(Eigen::Index rows, Eigen::Index cols, AdamParams params)
    : params_(params), m_(Matrix::Zero(rows, cols)), v_(Matrix::Zero(rows, cols)) {}

void SparseAdam::Step(const RowGradient &grad, Matrix *params) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(params_.beta1, t);
  const double correction2 = 1.0 - std::pow(params_.beta2, t);
  for (size_t k = 0; k < grad.rows.size(); ++k) {
    const int32_t r = grad.rows[k];
    const auto g = grad.values.row(static_cast<Eigen::Index>(k)).array();
    auto m = m_.row(r).array();
    auto v = v_.row(r).array();
    m = params_.beta1 * m + (1.0 - params_.beta1) * g;
    v = params_.beta2 * v + (1.0 - params_.beta2) * g.square();
    params->row(r).array() -= params_.learning_rate * (m / correction1) /
                              ((v / correction2).sqrt() + params_.epsilon);
  }
}

// --- Config ----------------------------------------------------------------

void TrainConfig::Validate() const {
  if (!(learning_rate > 0)) throw DataError("lr must be positive");
  if (max_steps < 0) throw DataError("steps must be non-negative");
  if (batch_size < 1) throw DataError("batch_size must be positive");
  if (!(tau > 0)) throw DataError("tau must be positive");
  if (patience < 1) throw DataError("patience must be at least 1");
  if (val_every < 1) throw DataError("val_every must be at least 1");
  if (!(val_fraction >= 0 && val_fraction < 1)) {
    throw DataError("val_fraction must be in [0, 1)");
  }
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw DataError("Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0)) throw DataError("eps must be positive");
}

const std::set<std::string, std::less<>> &TrainConfigKeys() {
  static const std::set<std::string, std::less<>> keys = {
      "lr", "steps", "batch_size", "tau", "seed", "patience",
      "val_every", "val_fraction", "beta1", "beta2", "eps"};
  return keys;
}

TrainConfig ParseTrainConfig(const KeyValueFile &kv, TrainConfig base) {
  kv.RequireKnownKeys(TrainConfigKeys());
  TrainConfig c = base;
  c.learning_rate = kv.GetDouble("lr", c.learning_rate);
  c.max_steps = static_cast<int>(kv.GetInt("steps", c.max_steps));
  c.batch_size = static_cast<int>(kv.GetInt("batch_size", c.batch_size));
  c.tau = kv.GetDouble("tau", c.tau);
  c.seed = static_cast<uint64_t>(kv.GetInt("seed", static_cast<long long>(c.seed)));
  c.patience = static_cast<int>(kv.GetInt("patience", c.patience));
  c.val_every = static_cast<int>(kv.GetInt("val_every", c.val_every));
  c.val_fraction = kv.GetDouble("val_fraction", c.val_fraction);
  c.beta1 = kv.GetDouble("beta1", c.beta1);
  c.beta2 = kv.GetDouble("beta2", c.beta2);
  c.epsilon = kv.GetDouble("eps", c.epsilon);
  c.Validate();
  return c;
}

// --- Training loop ---------------------------------------------------------

PoolSplit SplitPool(size_t n, double val_fraction, uint64_t seed, size_t min_validation) {
  PoolSplit split;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  size_t n_val = 0;
  if (val_fraction > 0) {
    n_val = static_cast<size_t>(std::llround(static_cast<double>(n) * val_fraction));
    n_val = std::min(n, std::max(n_val, min_validation));
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

TrainHistory RunTraining(Matrix *params, size_t pool_size, const TrainConfig &config,
                         const BatchObjective &objective,
                         const ValidationObjective &validation) {
  config.Validate();
  const auto batch = static_cast<size_t>(config.batch_size);
  if (pool_size < batch) {
    throw DataError("training pool of " + std::to_string(pool_size) +
                    " items is smaller than one batch of " + std::to_string(batch));
  }
  TrainHistory history;
  SparseAdam adam(params->rows(), params->cols(), config.adam());
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(pool_size);
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = pool_size;  // forces a shuffle before the first batch

  Matrix best = *params;
  int bad_evaluations = 0;
  auto evaluate = [&](int step) {
    if (!validation) return false;
    const double loss = validation(*params);
    history.validations.push_back({step, loss});
    if (loss < history.best_loss) {
      history.best_loss = loss;
      history.best_step = step;
      best = *params;
      bad_evaluations = 0;
      return false;
    }
    return ++bad_evaluations >= config.patience;
  };
  evaluate(0);

  RowGradient grad;
  for (int step = 1; step <= config.max_steps; ++step) {
    if (cursor + batch > pool_size) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::span<const size_t> items(order.data() + cursor, batch);
    cursor += batch;
    const double loss = objective(items, *params, &grad);
    history.train_loss.push_back(loss);
    adam.Step(grad, params);
    history.steps_run = step;
    if (step % config.val_every == 0 || step == config.max_steps) {
      if (evaluate(step)) {
        history.early_stopped = true;
        break;
      }
    }
  }
  if (validation) {
    *params = best;
  } else {
    history.best_step = history.steps_run;
  }
  return history;
}

}  // namespace swe
