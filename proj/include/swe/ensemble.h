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

// Weighted concatenation of several embedding models. Member i's sentence
// embedding f_i(z) is scaled to norm sqrt(lambda_i), the blocks are
// concatenated and the result is divided by sqrt(sum lambda). The dot
// product of two such vectors is the lambda-weighted mean of the
// per-member cosines.

#ifndef SWE_ENSEMBLE_H_
#define SWE_ENSEMBLE_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "swe/config.h"
#include "swe/embedding.h"
#include "swe/encode.h"

namespace swe {

struct EnsembleMember {
  std::shared_ptr<const EmbeddingTable> table;
  double weight = 1.0;
  // Optional subword tokenizer for this member's vocabulary.
  std::shared_ptr<const SubwordTokenizer> tokenizer;
};

struct EnsembleSpec {
  std::vector<EnsembleMember> members;

  // Throws DataError unless there are >= 2 members with positive weights.
  void Validate() const;
  int total_dim() const;
  double total_weight() const;

  // Config lines "member = <table path> [weight]" (weight defaults to 1)
  // and optionally "pieces = <piece file>" applying to every member.
  static EnsembleSpec Load(const std::string &path);
};

struct EnsembleEmbedding {
  Eigen::VectorXd vector;
  // One flag per member: true when that block is zero.
  std::vector<uint8_t> empty_members;
  bool empty() const;
};

// `options.normalize` is ignored: each block is normalized by construction.
EnsembleEmbedding EnsembleEncode(std::string_view text, const EnsembleSpec &spec,
                                 const EncodeOptions &options = {});

// Union-vocabulary table whose row for w is the concatenation of each
// member's row (zeros where a member lacks w).
struct PrecombinedTable {
  EmbeddingTable table;
  std::vector<int> block_dims;
  std::vector<double> weights;
};

PrecombinedTable PrecombineTables(const EnsembleSpec &spec);

// Averages rows of the precombined table and normalizes each block the
// way EnsembleEncode does.
EnsembleEmbedding EncodeSubspaceNormalized(std::string_view text,
                                           const PrecombinedTable &combined,
                                           const SubwordTokenizer *tokenizer = nullptr,
                                           const EncodeOptions &options = {});

}  // namespace swe

#endif  // SWE_ENSEMBLE_H_
