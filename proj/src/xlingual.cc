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

#include "swe/xlingual.h"

#include <cmath>
#include <limits>

namespace swe {
namespace {

void CheckU(const SimilarityMatrix &u, double tau) {
  if (!(tau > 0)) throw DataError("tau must be positive");
  if (u.values.rows() != u.values.cols()) throw DataError("similarity matrix must be square");
  if (u.size() < 1) throw DataError("contrastive batch must contain at least one pair");
}

// Row-wise log-softmax of x / tau.
Eigen::MatrixXd LogSoftmaxRows(const Eigen::MatrixXd &x, double tau) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double peak = x.row(i).maxCoeff() / tau;
    double sum = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) sum += std::exp(x(i, j) / tau - peak);
    const double log_z = peak + std::log(sum);
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) / tau - log_z;
  }
  return out;
}

}  // namespace

ParallelCorpus ParallelCorpus::Load(const std::string &path) {
  ParallelCorpus corpus;
  size_t line_no = 0;
  for (const std::string &line : ReadLines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": expected source<TAB>target");
    }
    corpus.pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return corpus;
}

double ContrastiveLoss(const SimilarityMatrix &u, double tau) {
  CheckU(u, tau);
  const Eigen::MatrixXd forward = LogSoftmaxRows(u.values, tau);
  const Eigen::MatrixXd backward = LogSoftmaxRows(u.values.transpose(), tau);
  const double k = static_cast<double>(u.size());
  double total = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) total += forward(i, i) + backward(i, i);
  return -total / k + 0.0;
}

Eigen::MatrixXd ContrastiveLossGradient(const SimilarityMatrix &u, double tau) {
  CheckU(u, tau);
  const Eigen::Index k = u.size();
  const Eigen::MatrixXd p = LogSoftmaxRows(u.values, tau).array().exp();
  const Eigen::MatrixXd q = LogSoftmaxRows(u.values.transpose(), tau).array().exp();
  Eigen::MatrixXd g(k, k);
  const double scale = 1.0 / (static_cast<double>(k) * tau);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      g(i, j) = ((p(i, j) - delta) + (q(j, i) - delta)) * scale;
    }
  }
  return g;
}

RowGradient ContrastiveGrad(std::span<const TokenIds> source,
                            std::span<const TokenIds> target, const Matrix &params,
                            double tau) {
  if (source.size() != target.size()) throw DataError("source/target batch sizes differ");
  const Matrix a = MeanEmbeddings(source, params);
  const Matrix b = MeanEmbeddings(target, params);
  const SimilarityMatrix u = CrossCosineMatrix(a, b);
  const Eigen::MatrixXd g = ContrastiveLossGradient(u, tau);
  const Eigen::MatrixXd ut = u.values.transpose();
  const Eigen::MatrixXd gt = g.transpose();
  const Matrix grad_a = CosineBackward(a, b, u.values, g);
  const Matrix grad_b = CosineBackward(b, a, ut, gt);
  RowGradient out = AddRowGradients(ScatterToRows(source, grad_a), ScatterToRows(target, grad_b));
  out.loss = ContrastiveLoss(u, tau);
  return out;
}

ContrastiveTrainResult TrainContrastive(const EmbeddingTable &table,
                                        const ParallelCorpus &corpus,
                                        const TrainConfig &config,
                                        const ContrastiveOptions &options,
                                        const SubwordTokenizer *tokenizer) {
  config.Validate();
  ContrastiveTrainResult result;
  EncodeOptions src_opts = options.encode;
  src_opts.language = options.source_language;
  EncodeOptions tgt_opts = options.encode;
  tgt_opts.language = options.target_language;
  const Encoder src_encoder(table, tokenizer, src_opts);
  const Encoder tgt_encoder(table, tokenizer, tgt_opts);

  std::vector<TokenIds> src, tgt;
  for (const auto &[s, t] : corpus.pairs) {
    TokenIds a = src_encoder.Resolve(s);
    TokenIds b = tgt_encoder.Resolve(t);
    auto zero = [&](const TokenIds &ids) {
      return MeanEmbeddings(std::span<const TokenIds>(&ids, 1), table.matrix()).squaredNorm() == 0;
    };
    if (a.empty() || b.empty() || zero(a) || zero(b)) {
      ++result.dropped_pairs;
      continue;
    }
    src.push_back(std::move(a));
    tgt.push_back(std::move(b));
  }
  if (src.size() < static_cast<size_t>(config.batch_size)) {
    throw DataError("parallel corpus has " + std::to_string(src.size()) +
                    " usable pairs, fewer than one batch of " +
                    std::to_string(config.batch_size));
  }
  const PoolSplit split = SplitPool(src.size(), config.val_fraction, config.seed, 1);
  const std::vector<size_t> &train = split.train;
  const std::vector<size_t> &val = split.validation.empty() ? split.train : split.validation;
  result.train_pairs = train.size();
  result.validation_pairs = split.validation.size();

  auto loss_on = [&](std::span<const size_t> items, const Matrix &params, RowGradient *grad) {
    std::vector<TokenIds> bs, bt;
    bs.reserve(items.size());
    bt.reserve(items.size());
    for (size_t i : items) {
      bs.push_back(src[i]);
      bt.push_back(tgt[i]);
    }
    if (grad == nullptr) {
      return ContrastiveLoss(
          CrossCosineMatrix(MeanEmbeddings(bs, params), MeanEmbeddings(bt, params)),
          config.tau);
    }
    *grad = ContrastiveGrad(bs, bt, params, config.tau);
    return grad->loss;
  };
  auto objective = [&](std::span<const size_t> items, const Matrix &params,
                       RowGradient *grad) {
    std::vector<size_t> pool_items(items.size());
    for (size_t k = 0; k < items.size(); ++k) pool_items[k] = train[items[k]];
    return loss_on(pool_items, params, grad);
  };
  const size_t val_batch = std::min<size_t>(static_cast<size_t>(config.batch_size), val.size());
  auto validation = [&](const Matrix &params) {
    double total = 0;
    int batches = 0;
    for (size_t begin = 0; begin + val_batch <= val.size(); begin += val_batch) {
      total += loss_on(std::span<const size_t>(val.data() + begin, val_batch), params, nullptr);
      ++batches;
    }
    return total / batches;
  };

  Matrix params = table.matrix();
  result.history = RunTraining(&params, train.size(), config, objective, validation);
  result.table = EmbeddingTable(table.vocab(), std::move(params), StageTag::kTrained);
  result.table.set_metadata(table.metadata());
  return result;
}

}  // namespace swe
