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

#include "swe/extract.h"

#include <nlohmann/json.hpp>

#include "swe/binary_io.h"

namespace swe {
namespace {

constexpr std::string_view kDumpMagic = "SWD1";

class BinaryOccurrenceReader : public OccurrenceReader {
 public:
  explicit BinaryOccurrenceReader(const std::string &path)
      : path_(path), in_(path, std::ios::binary), reader_(&in_) {
    if (!in_) throw IoError("cannot open " + path);
    try {
      if (reader_.Bytes(4) != kDumpMagic) throw FormatError("not an SWD1 dump");
      dim_ = static_cast<int>(reader_.U32());
      if (dim_ <= 0) throw FormatError("dump dimension must be positive");
      const uint32_t n = reader_.U32();
      words_.reserve(n);
      for (uint32_t i = 0; i < n; ++i) words_.push_back(reader_.String());
    } catch (const FormatError &e) {
      throw FormatError(path + ": " + e.what());
    }
    floats_.resize(static_cast<size_t>(dim_));
    row_.resize(static_cast<size_t>(dim_));
  }

  bool Next(Occurrence *out) override {
    if (reader_.AtEnd()) return false;
    try {
      const uint32_t id = reader_.U32();
      if (id >= words_.size()) {
        throw FormatError("record " + std::to_string(records_) + " has word id " +
                          std::to_string(id) + " outside the word list");
      }
      reader_.Bytes(reinterpret_cast<char *>(floats_.data()), floats_.size() * sizeof(float));
      for (size_t j = 0; j < floats_.size(); ++j) row_[j] = floats_[j];
      out->word_id = id;
      out->vector = row_;
      ++records_;
      return true;
    } catch (const FormatError &e) {
      throw FormatError(path_ + ": " + e.what());
    }
  }

  const std::vector<std::string> &words() const override { return words_; }
  int dim() const override { return dim_; }

 private:
  std::string path_;
  std::ifstream in_;
  BinaryReader reader_;
  int dim_ = 0;
  std::vector<std::string> words_;
  std::vector<float> floats_;
  std::vector<double> row_;
  uint64_t records_ = 0;
};

class JsonlOccurrenceReader : public OccurrenceReader {
 public:
  explicit JsonlOccurrenceReader(const std::string &path) : path_(path), in_(path) {
    if (!in_) throw IoError("cannot open " + path);
  }

  bool Next(Occurrence *out) override {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Parse(line);
      out->word_id = current_id_;
      out->vector = row_;
      return true;
    }
    return false;
  }

  const std::vector<std::string> &words() const override { return words_; }
  int dim() const override { return dim_; }

 private:
  [[noreturn]] void Fail(const std::string &what) const {
    throw FormatError(path_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  std::vector<double> ToVector(const nlohmann::json &j) const {
    if (!j.is_array()) Fail("vector must be an array");
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto &x : j) {
      if (!x.is_number()) Fail("vector entries must be numbers");
      v.push_back(x.get<double>());
    }
    return v;
  }

  void CheckDim(size_t n) {
    if (n == 0) Fail("empty vector");
    if (dim_ == 0) dim_ = static_cast<int>(n);
    if (static_cast<int>(n) != dim_) {
      Fail("dimension mismatch: expected " + std::to_string(dim_) + ", got " +
           std::to_string(n));
    }
  }

  void Parse(const std::string &line) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      Fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("word") || !j["word"].is_string()) {
      Fail("record needs a string \"word\"");
    }
    const std::string word = j["word"].get<std::string>();
    if (j.contains("vec")) {
      row_ = ToVector(j["vec"]);
      CheckDim(row_.size());
    } else if (j.contains("pieces")) {
      if (!j["pieces"].is_array() || j["pieces"].empty()) Fail("\"pieces\" must be non-empty");
      std::vector<Eigen::VectorXd> pieces;
      for (const auto &p : j["pieces"]) {
        std::vector<double> v = ToVector(p);
        CheckDim(v.size());
        pieces.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                           static_cast<Eigen::Index>(v.size())));
      }
      const Eigen::VectorXd mean = AverageSubwords(pieces);
      row_.assign(mean.data(), mean.data() + mean.size());
    } else {
      Fail("record needs \"vec\" or \"pieces\"");
    }
    auto it = ids_.find(word);
    if (it == ids_.end()) {
      it = ids_.emplace(word, static_cast<uint32_t>(words_.size())).first;
      words_.push_back(word);
    }
    current_id_ = it->second;
  }

  std::string path_;
  std::ifstream in_;
  size_t line_no_ = 0;
  int dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, uint32_t> ids_;
  std::vector<double> row_;
  uint32_t current_id_ = 0;
};

}  // namespace

std::unique_ptr<OccurrenceReader> OpenOccurrenceDump(const std::string &path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  if (probe.gcount() == 4 && std::string_view(magic, 4) == kDumpMagic) {
    return std::make_unique<BinaryOccurrenceReader>(path);
  }
  return std::make_unique<JsonlOccurrenceReader>(path);
}

MemoryOccurrenceReader::MemoryOccurrenceReader(std::vector<std::string> words,
                                               std::vector<uint32_t> word_ids,
                                               Matrix vectors)
    : words_(std::move(words)), word_ids_(std::move(word_ids)), vectors_(std::move(vectors)) {
  if (word_ids_.size() != static_cast<size_t>(vectors_.rows())) {
    throw DataError("word id count does not match vector count");
  }
  for (uint32_t id : word_ids_) {
    if (id >= words_.size()) throw DataError("word id outside the word list");
  }
  row_.resize(static_cast<size_t>(vectors_.cols()));
}

bool MemoryOccurrenceReader::Next(Occurrence *out) {
  if (next_ >= word_ids_.size()) return false;
  for (Eigen::Index j = 0; j < vectors_.cols(); ++j) {
    row_[static_cast<size_t>(j)] = vectors_(static_cast<Eigen::Index>(next_), j);
  }
  out->word_id = word_ids_[next_++];
  out->vector = row_;
  return true;
}

OccurrenceDumpWriter::OccurrenceDumpWriter(const std::string &path, int dim,
                                           std::vector<std::string> words)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), dim_(dim),
      n_words_(words.size()) {
  if (!out_) throw IoError("cannot write " + path);
  if (dim <= 0) throw DataError("dump dimension must be positive");
  BinaryWriter w(&out_);
  w.Bytes(kDumpMagic);
  w.U32(static_cast<uint32_t>(dim));
  w.U32(static_cast<uint32_t>(words.size()));
  for (const auto &word : words) w.String(word);
}

void OccurrenceDumpWriter::Write(uint32_t word_id, std::span<const double> vector) {
  if (word_id >= n_words_) throw DataError("word id outside the word list");
  if (static_cast<int>(vector.size()) != dim_) throw DataError("dimension mismatch");
  BinaryWriter w(&out_);
  w.U32(word_id);
  for (double v : vector) w.F32(static_cast<float>(v));
}

void OccurrenceDumpWriter::Close() {
  out_.close();
  if (!out_) throw IoError("error writing " + path_);
}

DecontextualizeResult Decontextualize(OccurrenceReader &dump, const Vocabulary &vocab,
                                      int max_occurrences) {
  if (max_occurrences < 1) throw DataError("max_occurrences must be at least 1");
  if (vocab.empty()) throw DataError("empty vocabulary");
  DecontextualizeResult result;
  result.occurrences.assign(vocab.size(), 0);
  Matrix sums;
  int dim = dump.dim();
  if (dim > 0) sums = Matrix::Zero(static_cast<Eigen::Index>(vocab.size()), dim);

  // Dump word id -> vocabulary row, resolved once per dump word.
  constexpr int32_t kUnresolved = -2;
  constexpr int32_t kOutOfVocab = -1;
  std::vector<int32_t> rows;

  Occurrence occ;
  while (dump.Next(&occ)) {
    if (dim == 0) {
      dim = static_cast<int>(occ.vector.size());
      sums = Matrix::Zero(static_cast<Eigen::Index>(vocab.size()), dim);
    }
    if (static_cast<int>(occ.vector.size()) != dim) {
      throw FormatError("dimension mismatch in occurrence stream: expected " +
                        std::to_string(dim) + ", got " + std::to_string(occ.vector.size()));
    }
    if (rows.size() < dump.words().size()) rows.resize(dump.words().size(), kUnresolved);
    int32_t &row = rows[occ.word_id];
    if (row == kUnresolved) {
      auto id = vocab.Find(dump.words()[occ.word_id]);
      row = id ? *id : kOutOfVocab;
    }
    if (row == kOutOfVocab) {
      ++result.skipped_out_of_vocab;
      continue;
    }
    uint32_t &count = result.occurrences[static_cast<size_t>(row)];
    if (count >= static_cast<uint32_t>(max_occurrences)) {
      ++result.skipped_over_cap;
      continue;
    }
    ++count;
    for (int j = 0; j < dim; ++j) sums(row, j) += occ.vector[static_cast<size_t>(j)];
  }
  if (dim == 0) throw DataError("occurrence dump has no records");

  for (size_t i = 0; i < vocab.size(); ++i) {
    const uint32_t count = result.occurrences[i];
    if (count == 0) {
      result.missing.push_back(static_cast<int32_t>(i));
    } else {
      sums.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(count);
    }
  }
  if (!result.missing.empty()) {
    Warn(std::to_string(result.missing.size()) +
         " vocabulary words have no occurrences and were given zero vectors");
  }
  result.table = EmbeddingTable(vocab, std::move(sums), StageTag::kRaw);
  return result;
}

Eigen::VectorXd AverageSubwords(std::span<const Eigen::VectorXd> pieces) {
  if (pieces.empty()) throw DataError("cannot average an empty list of subwords");
  Eigen::VectorXd sum = pieces[0];
  for (size_t i = 1; i < pieces.size(); ++i) {
    if (pieces[i].size() != sum.size()) throw DataError("subword dimension mismatch");
    sum += pieces[i];
  }
  return sum / static_cast<double>(pieces.size());
}

void WriteOccurrenceReport(const DecontextualizeResult &result, const std::string &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  const Vocabulary &vocab = result.table.vocab();
  for (size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.word(i) << '\t' << result.occurrences[i] << '\t'
        << (result.occurrences[i] == 0 ? "missing" : "ok") << '\n';
  }
  if (!out) throw IoError("error writing " + path);
}

}  // namespace swe
