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

#include "swe/ensemble.h"

#include <cmath>
#include <filesystem>
#include <sstream>

namespace swe {
namespace {

// Scales `block` in place to norm sqrt(weight); false if it is zero.
bool ScaleBlock(Eigen::Ref<Eigen::VectorXd> block, double weight) {
  const double norm = block.norm();
  if (!(norm > 0)) {
    block.setZero();
    return false;
  }
  block *= std::sqrt(weight) / norm;
  return true;
}

}  // namespace

void EnsembleSpec::Validate() const {
  if (members.size() < 2) throw DataError("an ensemble needs at least two members");
  for (size_t i = 0; i < members.size(); ++i) {
    if (!members[i].table) throw DataError("ensemble member " + std::to_string(i) + " has no table");
    if (!(members[i].weight > 0)) {
      throw DataError("ensemble member " + std::to_string(i) + " has non-positive weight");
    }
  }
}

int EnsembleSpec::total_dim() const {
  int d = 0;
  for (const auto &m : members) d += m.table->dim();
  return d;
}

double EnsembleSpec::total_weight() const {
  double w = 0;
  for (const auto &m : members) w += m.weight;
  return w;
}

EnsembleSpec EnsembleSpec::Load(const std::string &path) {
  const KeyValueFile kv = KeyValueFile::Load(path);
  kv.RequireKnownKeys({"member", "pieces"});
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string &p) {
    const std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).string();
  };
  std::shared_ptr<const SubwordTokenizer> tokenizer;
  if (auto pieces = kv.Get("pieces")) {
    tokenizer = std::make_shared<PieceTableTokenizer>(PieceTableTokenizer::FromFile(resolve(*pieces)));
  }
  EnsembleSpec spec;
  for (const std::string &value : kv.GetAll("member")) {
    std::istringstream in(value);
    std::string table_path, weight_text;
    in >> table_path >> weight_text;
    if (table_path.empty()) throw DataError(path + ": member line needs a table path");
    EnsembleMember member;
    member.table = std::make_shared<const EmbeddingTable>(LoadTable(resolve(table_path)));
    member.weight = weight_text.empty() ? 1.0 : ParseDouble(weight_text, "member weight");
    member.tokenizer = tokenizer;
    spec.members.push_back(std::move(member));
  }
  spec.Validate();
  return spec;
}

bool EnsembleEmbedding::empty() const {
  for (uint8_t e : empty_members) {
    if (e == 0) return false;
  }
  return true;
}

EnsembleEmbedding EnsembleEncode(std::string_view text, const EnsembleSpec &spec,
                                 const EncodeOptions &options) {
  spec.Validate();
  EncodeOptions raw = options;
  raw.normalize = false;
  EnsembleEmbedding out;
  out.vector = Eigen::VectorXd::Zero(spec.total_dim());
  out.empty_members.assign(spec.members.size(), 0);
  int offset = 0;
  for (size_t i = 0; i < spec.members.size(); ++i) {
    const EnsembleMember &m = spec.members[i];
    const int d = m.table->dim();
    auto block = out.vector.segment(offset, d);
    const Encoder encoder(*m.table, m.tokenizer.get(), raw);
    const bool ok = encoder.EncodeInto(text, block) && ScaleBlock(block, m.weight);
    if (!ok) {
      block.setZero();
      out.empty_members[i] = 1;
    }
    offset += d;
  }
  out.vector /= std::sqrt(spec.total_weight());
  return out;
}

PrecombinedTable PrecombineTables(const EnsembleSpec &spec) {
  spec.Validate();
  const CaseMode mode = spec.members[0].table->vocab().case_mode();
  bool all_frequencies = true;
  for (const auto &m : spec.members) {
    if (m.table->vocab().case_mode() != mode) {
      throw DataError("ensemble members use different case modes");
    }
    all_frequencies = all_frequencies && m.table->vocab().has_frequencies();
  }

  // Union of vocabularies in member order.
  std::vector<std::string> words;
  std::vector<uint64_t> freqs;
  std::unordered_map<std::string, size_t, StringHash, std::equal_to<>> index;
  for (const auto &m : spec.members) {
    const Vocabulary &v = m.table->vocab();
    for (size_t i = 0; i < v.size(); ++i) {
      std::string key = FoldCase(v.word(i), mode);
      if (index.contains(key)) continue;
      index.emplace(std::move(key), words.size());
      words.push_back(v.word(i));
      if (all_frequencies) freqs.push_back(v.frequency(i));
    }
  }
  size_t shared = 0;
  for (const auto &w : words) {
    bool everywhere = true;
    for (const auto &m : spec.members) everywhere = everywhere && m.table->vocab().Find(w).has_value();
    if (everywhere) ++shared;
  }
  if (shared == 0) throw DataError("ensemble members share no vocabulary words");

  PrecombinedTable out;
  Matrix combined = Matrix::Zero(static_cast<Eigen::Index>(words.size()), spec.total_dim());
  int offset = 0;
  for (const auto &m : spec.members) {
    const Vocabulary &v = m.table->vocab();
    for (size_t i = 0; i < v.size(); ++i) {
      const size_t row = index.find(FoldCase(v.word(i), mode))->second;
      combined.block(static_cast<Eigen::Index>(row), offset, 1, m.table->dim()) =
          m.table->matrix().row(static_cast<Eigen::Index>(i));
    }
    offset += m.table->dim();
    out.block_dims.push_back(m.table->dim());
    out.weights.push_back(m.weight);
  }
  out.table = EmbeddingTable(Vocabulary(std::move(words), std::move(freqs), mode),
                             std::move(combined), spec.members[0].table->stage());
  std::string dims, weights;
  for (size_t i = 0; i < out.block_dims.size(); ++i) {
    if (i > 0) {
      dims += ',';
      weights += ',';
    }
    dims += std::to_string(out.block_dims[i]);
    std::ostringstream w;
    w.precision(17);
    w << out.weights[i];
    weights += w.str();
  }
  out.table.set_metadata({{"ensemble_block_dims", dims}, {"ensemble_weights", weights}});
  return out;
}

EnsembleEmbedding EncodeSubspaceNormalized(std::string_view text,
                                           const PrecombinedTable &combined,
                                           const SubwordTokenizer *tokenizer,
                                           const EncodeOptions &options) {
  EncodeOptions raw = options;
  raw.normalize = false;
  const Encoder encoder(combined.table, tokenizer, raw);
  EnsembleEmbedding out;
  out.vector.resize(combined.table.dim());
  out.empty_members.assign(combined.block_dims.size(), 0);
  const bool any = encoder.EncodeInto(text, out.vector);
  double total_weight = 0;
  int offset = 0;
  for (size_t i = 0; i < combined.block_dims.size(); ++i) {
    auto block = out.vector.segment(offset, combined.block_dims[i]);
    if (!any || !ScaleBlock(block, combined.weights[i])) out.empty_members[i] = 1;
    total_weight += combined.weights[i];
    offset += combined.block_dims[i];
  }
  out.vector /= std::sqrt(total_weight);
  return out;
}

}  // namespace swe
