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

#include "swe/pca.h"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "swe/binary_io.h"

namespace swe {
namespace {

constexpr std::string_view kPcaMagic = "SWP1";
constexpr uint8_t kPcaVersion = 1;

int CheckedSkip(std::optional<int> skip, int dim) {
  const int r = skip.value_or(DefaultSkip(dim));
  if (r < 0) throw DataError("skip must be non-negative");
  return r;
}

void CheckWindow(int dim, int keep, int skip) {
  if (keep < 1) throw DataError("keep must be at least 1");
  if (skip + keep > dim) {
    throw DataError("component window skip + keep = " + std::to_string(skip + keep) +
                    " exceeds dimension " + std::to_string(dim));
  }
}

}  // namespace

// --- PcaTransform ----------------------------------------------------------

void PcaTransform::Validate() const {
  const Eigen::Index d = mean.size();
  if (d == 0) throw DataError("empty PCA transform");
  if (components.rows() != d || components.cols() != d || eigenvalues.size() != d) {
    throw DataError("PCA transform shapes are inconsistent");
  }
  if (skip < 0) throw DataError("skip must be non-negative");
  CheckWindow(static_cast<int>(d), keep, skip);
}

Eigen::MatrixXd PcaTransform::KeptComponents() const {
  return components.middleCols(skip, keep);
}

// --- CovarianceAccumulator -------------------------------------------------

CovarianceAccumulator::CovarianceAccumulator(int dim)
    : dim_(dim), shift_(Eigen::VectorXd::Zero(dim)), sum_(Eigen::VectorXd::Zero(dim)),
      outer_(Eigen::MatrixXd::Zero(dim, dim)) {
  if (dim <= 0) throw DataError("dimension must be positive");
}

void CovarianceAccumulator::Add(const Eigen::Ref<const Eigen::VectorXd> &x) {
  if (x.size() != dim_) throw DataError("sample dimension mismatch");
  if (count_ == 0) shift_ = x;
  const Eigen::VectorXd y = x - shift_;
  sum_ += y;
  outer_.selfadjointView<Eigen::Lower>().rankUpdate(y);
  ++count_;
}

void CovarianceAccumulator::Merge(const CovarianceAccumulator &other) {
  if (other.dim_ != dim_) throw DataError("accumulator dimension mismatch");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  // Re-express the other accumulator's sums relative to this shift.
  const Eigen::VectorXd delta = other.shift_ - shift_;
  const double n = static_cast<double>(other.count_);
  Eigen::MatrixXd other_full = other.outer_.selfadjointView<Eigen::Lower>();
  other_full += other.sum_ * delta.transpose() + delta * other.sum_.transpose() +
                n * delta * delta.transpose();
  Eigen::MatrixXd full = outer_.selfadjointView<Eigen::Lower>();
  full += other_full;
  outer_ = full.triangularView<Eigen::Lower>();
  sum_ += other.sum_ + n * delta;
  count_ += other.count_;
}

Eigen::VectorXd CovarianceAccumulator::Mean() const {
  if (count_ == 0) throw DataError("no samples");
  return shift_ + sum_ / static_cast<double>(count_);
}

Eigen::MatrixXd CovarianceAccumulator::Covariance() const {
  if (count_ < 2) throw DataError("covariance needs at least two samples");
  const double n = static_cast<double>(count_);
  Eigen::MatrixXd full = outer_.selfadjointView<Eigen::Lower>();
  full -= sum_ * sum_.transpose() / n;
  full /= n - 1.0;
  return full;
}

// --- Fitting ---------------------------------------------------------------

PcaTransform PcaFromCovariance(const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov,
                               int keep, int skip, PcaMode mode) {
  const auto d = static_cast<int>(mean.size());
  if (cov.rows() != d || cov.cols() != d) throw DataError("covariance shape mismatch");
  CheckWindow(d, keep, skip);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DataError("eigendecomposition failed");
  const Eigen::VectorXd &values = solver.eigenvalues();
  const Eigen::MatrixXd &vectors = solver.eigenvectors();

  std::vector<Eigen::Index> peak(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) {
    vectors.col(k).cwiseAbs().maxCoeff(&peak[static_cast<size_t>(k)]);
  }
  std::vector<int> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (values(a) != values(b)) return values(a) > values(b);
    return peak[static_cast<size_t>(a)] < peak[static_cast<size_t>(b)];
  });

  PcaTransform t;
  t.mean = mean;
  t.components.resize(d, d);
  t.eigenvalues.resize(d);
  for (int k = 0; k < d; ++k) {
    const int src = order[static_cast<size_t>(k)];
    Eigen::VectorXd v = vectors.col(src);
    if (v(peak[static_cast<size_t>(src)]) < 0) v = -v;
    t.components.col(k) = v;
    t.eigenvalues(k) = std::max(0.0, values(src));
  }
  t.skip = skip;
  t.keep = keep;
  t.mode = mode;
  return t;
}

SentencePcaResult FitSentencePca(std::span<const SentenceSample> samples, int keep,
                                 std::optional<int> skip) {
  if (samples.empty()) throw DataError("no sentence samples");
  const int d = samples[0].table->dim();
  for (const auto &s : samples) {
    if (s.table == nullptr) throw DataError("sentence sample without a table");
    if (s.table->dim() != d) throw DataError("tables have different dimensions");
  }
  const int r = CheckedSkip(skip, d);
  CheckWindow(d, keep, r);

  SentencePcaResult result;
  CovarianceAccumulator acc(d);
  Eigen::VectorXd sentence(d);
  for (const auto &sample : samples) {
    const Vocabulary &vocab = sample.table->vocab();
    const Matrix &m = sample.table->matrix();
    for (const SentenceRecord &rec : sample.sentences) {
      sentence.setZero();
      int n = 0;
      for (const auto &tok : rec.tokens) {
        if (auto id = vocab.FindTagged(tok, rec.language)) {
          sentence += m.row(*id).transpose();
          ++n;
        }
      }
      if (n == 0) {
        ++result.skipped_empty;
        continue;
      }
      sentence /= static_cast<double>(n);
      acc.Add(sentence);
    }
  }
  result.used_sentences = static_cast<size_t>(acc.count());
  if (acc.count() < d || acc.count() < 2) {
    throw DataError("rank-deficient sample: " + std::to_string(acc.count()) +
                    " usable sentences for dimension " + std::to_string(d));
  }
  result.transform = PcaFromCovariance(acc.Mean(), acc.Covariance(), keep, r,
                                       PcaMode::kSentence);
  return result;
}

PcaTransform FitWordPca(const EmbeddingTable &table, int keep, std::optional<int> skip) {
  const int d = table.dim();
  const int r = CheckedSkip(skip, d);
  CheckWindow(d, keep, r);
  if (static_cast<int64_t>(table.size()) < d || table.size() < 2) {
    throw DataError("rank-deficient sample: " + std::to_string(table.size()) +
                    " rows for dimension " + std::to_string(d));
  }
  CovarianceAccumulator acc(d);
  const Matrix &m = table.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) acc.Add(m.row(i).transpose());
  return PcaFromCovariance(acc.Mean(), acc.Covariance(), keep, r, PcaMode::kWord);
}

EmbeddingTable Pretransform(const EmbeddingTable &table, const PcaTransform &transform) {
  transform.Validate();
  if (table.dim() != transform.dim()) {
    throw DataError("table dimension " + std::to_string(table.dim()) +
                    " does not match transform dimension " +
                    std::to_string(transform.dim()));
  }
  const Eigen::MatrixXd kept = transform.KeptComponents();
  Matrix centred = table.matrix().rowwise() - transform.mean.transpose();
  Matrix out = centred * kept;
  EmbeddingTable result(table.vocab(), std::move(out), StageTag::kPca);
  result.set_metadata(table.metadata());
  return result;
}

Eigen::MatrixXd ProjectComponents(const Matrix &items, const PcaTransform &transform,
                                  std::span<const int> indices) {
  const int d = transform.dim();
  if (items.cols() != d) throw DataError("item dimension does not match transform");
  Eigen::MatrixXd selected(d, static_cast<Eigen::Index>(indices.size()));
  for (size_t k = 0; k < indices.size(); ++k) {
    const int idx = indices[k];
    if (idx < 1 || idx > d) {
      throw DataError("component index " + std::to_string(idx) + " outside 1.." +
                      std::to_string(d));
    }
    selected.col(static_cast<Eigen::Index>(k)) = transform.components.col(idx - 1);
  }
  Matrix centred = items.rowwise() - transform.mean.transpose();
  return centred * selected;
}

ComponentExtremes ComponentExtremeWords(const EmbeddingTable &table,
                                        const PcaTransform &transform, int component,
                                        size_t k, size_t limit) {
  const size_t n = limit == 0 ? table.size() : std::min(limit, table.size());
  const int idx[] = {component};
  const Eigen::MatrixXd values =
      ProjectComponents(table.matrix().topRows(static_cast<Eigen::Index>(n)), transform, idx);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return values(static_cast<Eigen::Index>(a), 0) > values(static_cast<Eigen::Index>(b), 0);
  });
  ComponentExtremes out;
  out.component = component;
  const size_t m = std::min(k, n);
  for (size_t i = 0; i < m; ++i) {
    const size_t row = order[i];
    out.largest.emplace_back(table.vocab().word(row), values(static_cast<Eigen::Index>(row), 0));
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return values(static_cast<Eigen::Index>(a), 0) < values(static_cast<Eigen::Index>(b), 0);
  });
  for (size_t i = 0; i < m; ++i) {
    const size_t row = order[i];
    out.smallest.emplace_back(table.vocab().word(row),
                              values(static_cast<Eigen::Index>(row), 0));
  }
  return out;
}

// --- Serialization ---------------------------------------------------------

void SavePcaTransform(const PcaTransform &transform, const std::string &path) {
  transform.Validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  BinaryWriter w(&out);
  const int d = transform.dim();
  w.Bytes(kPcaMagic);
  w.U8(kPcaVersion);
  w.U32(static_cast<uint32_t>(d));
  w.U32(static_cast<uint32_t>(transform.skip));
  w.U32(static_cast<uint32_t>(transform.keep));
  w.U8(static_cast<uint8_t>(transform.mode));
  for (int i = 0; i < d; ++i) w.F64(transform.mean(i));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) w.F64(transform.components(i, j));
  }
  for (int i = 0; i < d; ++i) w.F64(transform.eigenvalues(i));
  w.Metadata(transform.metadata);
  out.flush();
  if (!out) throw IoError("error writing " + path);
}

PcaTransform LoadPcaTransform(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  BinaryReader r(&in);
  try {
    if (r.Bytes(4) != kPcaMagic) throw FormatError("not an SWP1 PCA transform");
    if (r.U8() != kPcaVersion) throw FormatError("unsupported SWP1 version");
    PcaTransform t;
    const auto d = static_cast<int>(r.U32());
    t.skip = static_cast<int>(r.U32());
    t.keep = static_cast<int>(r.U32());
    const uint8_t mode = r.U8();
    if (mode > 1) throw FormatError("invalid PCA mode byte");
    t.mode = static_cast<PcaMode>(mode);
    t.mean.resize(d);
    t.components.resize(d, d);
    t.eigenvalues.resize(d);
    for (int i = 0; i < d; ++i) t.mean(i) = r.F64();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) t.components(i, j) = r.F64();
    }
    for (int i = 0; i < d; ++i) t.eigenvalues(i) = r.F64();
    t.metadata = r.Metadata();
    try {
      t.Validate();
    } catch (const DataError &e) {
      throw FormatError(e.what());
    }
    return t;
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace swe
