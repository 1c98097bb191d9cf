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

#include "swe/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "swe/config.h"

namespace swe {
namespace {

double Cosine(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0) || !(nb > 0)) return 0.0;
  return a.dot(b) / (na * nb);
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string Where(const std::string &path, size_t line_no) {
  return path + ":" + std::to_string(line_no) + ": ";
}

}  // namespace

// --- Correlations ----------------------------------------------------------

std::vector<double> AverageRanks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean(i+1 .. j+1).
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
  if (x.size() < 2) throw DataError("correlation needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0) || !(syy > 0)) throw DataError("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double Spearman(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) throw DataError("correlation inputs differ in length");
  if (pred.size() < 2) throw DataError("correlation needs at least two points");
  const std::vector<double> rp = AverageRanks(pred);
  const std::vector<double> rg = AverageRanks(gold);
  try {
    return Pearson(rp, rg);
  } catch (const DataError &) {
    throw DataError("zero rank variance");
  }
}

TextEncoder MakeTextEncoder(const Encoder &encoder) {
  return [&encoder](std::string_view text) { return encoder.Encode(text); };
}

// --- STS -------------------------------------------------------------------

StsDataset StsDataset::Load(const std::string &path) {
  StsDataset ds;
  size_t line_no = 0;
  for (const std::string &line : ReadLines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 3) {
      throw FormatError(Where(path, line_no) + "expected sent1<TAB>sent2<TAB>score");
    }
    StsRecord rec{std::string(fields[0]), std::string(fields[1]), 0};
    try {
      rec.score = ParseDouble(fields[2], "score");
    } catch (const DataError &e) {
      throw FormatError(Where(path, line_no) + e.what());
    }
    ds.records.push_back(std::move(rec));
  }
  ds.Validate();
  return ds;
}

void StsDataset::Validate() const {
  if (records.size() < 2) throw DataError("STS dataset needs at least two pairs");
  for (const auto &r : records) {
    if (!std::isfinite(r.score)) throw DataError("non-finite gold score");
  }
}

StsResult StsEval(const StsDataset &dataset, const TextEncoder &encoder) {
  dataset.Validate();
  StsResult result;
  std::vector<double> pred, gold;
  pred.reserve(dataset.records.size());
  gold.reserve(dataset.records.size());
  for (const auto &rec : dataset.records) {
    const SentenceEmbedding a = encoder(rec.sentence1);
    const SentenceEmbedding b = encoder(rec.sentence2);
    if (a.empty || b.empty) {
      ++result.empty_pairs;
      pred.push_back(0.0);
    } else {
      pred.push_back(Cosine(a.vector, b.vector));
    }
    gold.push_back(rec.score);
  }
  result.pairs = dataset.records.size();
  if (result.empty_pairs == result.pairs) throw DataError("every STS pair encoded as empty");
  result.score = 100.0 * Spearman(pred, gold);
  return result;
}

// --- Retrieval -------------------------------------------------------------

RetrievalDataset RetrievalDataset::Load(const std::string &source_path,
                                        const std::string &target_path,
                                        const std::string &gold_path) {
  RetrievalDataset ds;
  ds.sources = ReadLines(source_path);
  ds.targets = ReadLines(target_path);
  size_t line_no = 0;
  for (const std::string &line : ReadLines(gold_path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 2) throw FormatError(Where(gold_path, line_no) + "expected src<TAB>tgt");
    try {
      const long long s = ParseInt(fields[0], "src_idx");
      const long long t = ParseInt(fields[1], "tgt_idx");
      if (s < 0 || t < 0) throw DataError("negative index");
      ds.gold.emplace_back(static_cast<size_t>(s), static_cast<size_t>(t));
    } catch (const DataError &e) {
      throw FormatError(Where(gold_path, line_no) + e.what());
    }
  }
  ds.Validate();
  return ds;
}

void RetrievalDataset::Validate() const {
  if (sources.empty() || targets.empty()) throw DataError("retrieval sides must be non-empty");
  for (const auto &[s, t] : gold) {
    if (s >= sources.size() || t >= targets.size()) {
      throw DataError("gold pair (" + std::to_string(s) + ", " + std::to_string(t) +
                      ") out of range");
    }
  }
}

RetrievalResult ScorePairs(std::span<const std::pair<size_t, size_t>> predicted,
                           std::span<const std::pair<size_t, size_t>> gold) {
  const std::set<std::pair<size_t, size_t>> gold_set(gold.begin(), gold.end());
  const std::set<std::pair<size_t, size_t>> pred_set(predicted.begin(), predicted.end());
  RetrievalResult r;
  r.predicted = pred_set.size();
  for (const auto &p : pred_set) r.correct += gold_set.contains(p) ? 1 : 0;
  r.precision = r.predicted == 0 ? 0.0 : static_cast<double>(r.correct) / r.predicted;
  r.recall = gold_set.empty() ? 0.0 : static_cast<double>(r.correct) / gold_set.size();
  r.f1 = r.precision + r.recall > 0
             ? 2 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

RetrievalResult RetrievalEvalEmbeddings(const Matrix &sources, const Matrix &targets,
                                        std::span<const std::pair<size_t, size_t>> gold,
                                        std::optional<double> threshold) {
  if (sources.rows() == 0 || targets.rows() == 0) {
    throw DataError("retrieval sides must be non-empty");
  }
  if (sources.cols() != targets.cols()) throw DataError("retrieval dimension mismatch");
  std::vector<std::pair<size_t, size_t>> predicted;
  for (Eigen::Index i = 0; i < sources.rows(); ++i) {
    const Eigen::VectorXd a = sources.row(i).transpose();
    double best = -std::numeric_limits<double>::infinity();
    Eigen::Index best_j = 0;
    for (Eigen::Index j = 0; j < targets.rows(); ++j) {
      const double c = Cosine(a, targets.row(j).transpose());
      if (c > best) {
        best = c;
        best_j = j;
      }
    }
    if (threshold && best < *threshold) continue;
    predicted.emplace_back(static_cast<size_t>(i), static_cast<size_t>(best_j));
  }
  return ScorePairs(predicted, gold);
}

RetrievalResult RetrievalEval(const RetrievalDataset &dataset, const TextEncoder &source,
                              const TextEncoder &target, std::optional<double> threshold) {
  dataset.Validate();
  auto encode_all = [](const std::vector<std::string> &texts, const TextEncoder &enc) {
    Matrix m;
    for (size_t i = 0; i < texts.size(); ++i) {
      const SentenceEmbedding e = enc(texts[i]);
      if (i == 0) m.resize(static_cast<Eigen::Index>(texts.size()), e.vector.size());
      if (e.vector.size() != m.cols()) throw DataError("encoder dimension changed");
      if (e.empty) {
        m.row(static_cast<Eigen::Index>(i)).setZero();
      } else {
        m.row(static_cast<Eigen::Index>(i)) = e.vector.transpose();
      }
    }
    return m;
  };
  return RetrievalEvalEmbeddings(encode_all(dataset.sources, source),
                                 encode_all(dataset.targets, target), dataset.gold, threshold);
}

// --- Norm analyses ---------------------------------------------------------

const std::set<std::string, std::less<>> &UniversalPosTags() {
  static const std::set<std::string, std::less<>> tags = {
      "ADJ", "ADP", "ADV", "AUX",  "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
      "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};
  return tags;
}

PosTagMap PosTagMap::Load(const std::string &path,
                          const std::set<std::string, std::less<>> &tagset) {
  PosTagMap map;
  size_t line_no = 0;
  for (const std::string &line : ReadLines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 2) throw FormatError(Where(path, line_no) + "expected word<TAB>tag");
    if (!tagset.empty() && !tagset.contains(fields[1])) {
      throw FormatError(Where(path, line_no) + "tag '" + std::string(fields[1]) +
                        "' is not in the tag set");
    }
    map.tags[std::string(fields[0])] = std::string(fields[1]);
  }
  return map;
}

std::map<std::string, double> PosNormProfile(const EmbeddingTable &table,
                                             const PosTagMap &tags) {
  std::map<std::string, std::pair<double, size_t>> sums;
  for (const auto &[word, tag] : tags.tags) {
    if (auto id = table.vocab().Find(word)) {
      auto &[sum, count] = sums[tag];
      sum += table.row(*id).norm();
      ++count;
    }
  }
  if (sums.empty()) throw DataError("no tagged word is in the table");
  std::map<std::string, double> profile;
  double peak = 0;
  for (const auto &[tag, sc] : sums) {
    const double mean = sc.first / static_cast<double>(sc.second);
    profile[tag] = mean;
    peak = std::max(peak, mean);
  }
  if (!(peak > 0)) throw DataError("all tagged rows have zero norm");
  for (auto &[tag, value] : profile) value /= peak;
  return profile;
}

double NormFrequencySpearman(const EmbeddingTable &table) {
  const Vocabulary &vocab = table.vocab();
  std::vector<double> norms(table.size());
  std::vector<double> ranks(table.size());
  for (size_t i = 0; i < table.size(); ++i) {
    norms[i] = table.row(static_cast<int32_t>(i)).norm();
  }
  if (vocab.has_frequencies()) {
    // Rank 1 = most frequent: rank ascending by negated count.
    std::vector<double> neg(table.size());
    for (size_t i = 0; i < table.size(); ++i) neg[i] = -static_cast<double>(vocab.frequency(i));
    ranks = AverageRanks(neg);
  } else {
    for (size_t i = 0; i < table.size(); ++i) ranks[i] = static_cast<double>(i + 1);
  }
  return Spearman(norms, ranks);
}

// --- Component correlation -------------------------------------------------

ScoredDocs ScoredDocs::Load(const std::string &path) {
  ScoredDocs docs;
  size_t line_no = 0;
  for (const std::string &line : ReadLines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(Where(path, line_no) + "expected score<TAB>text");
    ScoredDoc doc;
    try {
      doc.score = ParseDouble(std::string_view(line).substr(0, tab), "score");
    } catch (const DataError &e) {
      throw FormatError(Where(path, line_no) + e.what());
    }
    if (!std::isfinite(doc.score)) throw FormatError(Where(path, line_no) + "non-finite score");
    doc.text = line.substr(tab + 1);
    docs.docs.push_back(std::move(doc));
  }
  return docs;
}

ComponentCorrelation ComponentCorrelate(const ScoredDocs &docs, const EmbeddingTable &table,
                                        const PcaTransform &transform, int component,
                                        const SubwordTokenizer *tokenizer) {
  EncodeOptions opts;
  opts.normalize = false;
  const Encoder encoder(table, tokenizer, opts);
  Matrix encoded(static_cast<Eigen::Index>(docs.docs.size()), table.dim());
  std::vector<double> scores;
  ComponentCorrelation out;
  Eigen::VectorXd v(table.dim());
  for (const auto &doc : docs.docs) {
    if (!encoder.EncodeInto(doc.text, v)) {
      ++out.skipped_empty;
      continue;
    }
    encoded.row(static_cast<Eigen::Index>(scores.size())) = v.transpose();
    scores.push_back(doc.score);
  }
  encoded.conservativeResize(static_cast<Eigen::Index>(scores.size()), table.dim());
  const int indices[] = {component};
  const Eigen::MatrixXd values = ProjectComponents(encoded, transform, indices);
  std::vector<double> comp(values.data(), values.data() + values.rows());
  out.used = scores.size();
  out.pearson = Pearson(comp, scores);
  return out;
}

}  // namespace swe
