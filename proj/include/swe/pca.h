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

// PCA fitted on sentence embeddings (or, as an ablation, on word rows),
// with the leading `skip` components discarded and the next `keep`
// components retained.
//
// Because a sentence embedding is the plain mean of its word rows, the
// affine map x -> W^T (x - mean) can be applied to every word row once and
// sentence encoding stays a plain average in the reduced space.

#ifndef SWE_PCA_H_
#define SWE_PCA_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "swe/embedding.h"

namespace swe {

enum class PcaMode : uint8_t { kSentence = 0, kWord = 1 };

struct PcaTransform {
  Eigen::VectorXd mean;
  // d x d, orthonormal columns in non-increasing eigenvalue order. The
  // largest-magnitude entry of every column is positive.
  Eigen::MatrixXd components;
  Eigen::VectorXd eigenvalues;
  int skip = 0;
  int keep = 0;
  PcaMode mode = PcaMode::kSentence;
  std::map<std::string, std::string> metadata;

  int dim() const { return static_cast<int>(mean.size()); }
  // Throws DataError when the window or shapes are inconsistent.
  void Validate() const;
  // Columns skip .. skip+keep-1 of `components`.
  Eigen::MatrixXd KeptComponents() const;
};

// The number of dominant components dropped by default: floor(d / 100).
inline int DefaultSkip(int dim) { return dim / 100; }

// Single-pass accumulator of sum(x) and sum(x x^T) in 64-bit, shifted by
// the first sample for numerical stability.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int dim);
  void Add(const Eigen::Ref<const Eigen::VectorXd> &x);
  void Merge(const CovarianceAccumulator &other);
  int64_t count() const { return count_; }
  Eigen::VectorXd Mean() const;
  // Unbiased sample covariance (divides by n - 1).
  Eigen::MatrixXd Covariance() const;

 private:
  int dim_;
  int64_t count_ = 0;
  Eigen::VectorXd shift_;
  Eigen::VectorXd sum_;
  Eigen::MatrixXd outer_;
};

// Eigen-decomposes a covariance matrix into a PcaTransform with the sign
// and ordering conventions applied.
PcaTransform PcaFromCovariance(const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov,
                               int keep, int skip, PcaMode mode);

// Sentences from one table. The language tag of each record, if any, is
// used for tagged lookups in a joint vocabulary.
struct SentenceSample {
  const EmbeddingTable *table = nullptr;
  std::span<const SentenceRecord> sentences;
};

struct SentencePcaResult {
  PcaTransform transform;
  size_t used_sentences = 0;
  size_t skipped_empty = 0;
};

// Fits PCA on the concatenated sentence matrix of all samples, each
// sentence being the unweighted mean of its in-vocabulary rows. `skip`
// defaults to floor(d / 100).
SentencePcaResult FitSentencePca(std::span<const SentenceSample> samples, int keep,
                                 std::optional<int> skip = std::nullopt);

// Word-level variant: PCA over the rows of `table`.
PcaTransform FitWordPca(const EmbeddingTable &table, int keep,
                        std::optional<int> skip = std::nullopt);

// Row w of the result is the kept window of W^T (E(w) - mean).
EmbeddingTable Pretransform(const EmbeddingTable &table, const PcaTransform &transform);

// Values of components `indices` (1-based) for every row of `items`,
// computed as coordinates of W^T (x - mean). Result is rows x indices.
Eigen::MatrixXd ProjectComponents(const Matrix &items, const PcaTransform &transform,
                                  std::span<const int> indices);

struct ComponentExtremes {
  int component = 0;
  std::vector<std::pair<std::string, double>> largest;
  std::vector<std::pair<std::string, double>> smallest;
};

// Words with the `k` largest and smallest values of one component among
// the first `limit` rows (0 = all). Ties are broken by row order.
ComponentExtremes ComponentExtremeWords(const EmbeddingTable &table,
                                        const PcaTransform &transform, int component,
                                        size_t k, size_t limit = 0);

// Binary layout ("SWP1"): "SWP1" | u8 version=1 | u32 d | u32 skip |
// u32 keep | u8 mode | d x f64 mean | d*d x f64 components (row-major) |
// d x f64 eigenvalues | u32 n | n x (key, value).
void SavePcaTransform(const PcaTransform &transform, const std::string &path);
PcaTransform LoadPcaTransform(const std::string &path);

}  // namespace swe

#endif  // SWE_PCA_H_
