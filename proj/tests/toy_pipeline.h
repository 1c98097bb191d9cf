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

// Small end-to-end pipeline fixture used by the CLI tests and the
// acceptance binary.

#ifndef SWE_TESTS_TOY_PIPELINE_H_
#define SWE_TESTS_TOY_PIPELINE_H_

#include <charconv>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "swe/cli.h"
#include "swe/embedding.h"
#include "test_util.h"

namespace swe::testing {

inline std::string Shortest(double v) {
  char buf[32];
  return std::string(buf, std::to_chars(buf, buf + sizeof(buf), v).ptr);
}

struct CliResult {
  int status = 0;
  std::string out;
  std::string err;
};

inline CliResult RunSwe(std::vector<std::string> args) {
  args.insert(args.begin(), "swe");
  std::ostringstream out, err;
  CliResult r;
  r.status = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Value of "key=value" in a report, or "" if absent.
inline std::string ReportValue(const std::string &report, const std::string &key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

// Writes the inputs of the toy pipeline into `dir`: a corpus, a JSONL
// occurrence dump (d=16), teacher vectors for the corpus sentences and an
// STS set. Content depends only on `seed`.
inline void WriteToyInputs(const std::string &dir, uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  const size_t n_words = 60;
  const int dim = 16;
  const std::vector<std::string> words = WordList(n_words);
  const Matrix base = RandomMatrix(n_words, dim, rng);
  const Matrix hidden = RandomMatrix(n_words, 8, rng);
  std::uniform_int_distribution<size_t> pick(0, n_words - 1);
  std::uniform_int_distribution<int> len(3, 8);
  std::normal_distribution<double> noise(0.0, 0.1);

  std::vector<std::vector<size_t>> sentences(300);
  std::string corpus;
  for (auto &s : sentences) {
    for (int i = 0, n = len(rng); i < n; ++i) s.push_back(pick(rng));
    for (size_t i = 0; i < s.size(); ++i) corpus += (i ? " " : "") + words[s[i]];
    corpus += "\n";
  }
  WriteFile(dir + "/corpus.txt", corpus);

  std::string dump;
  for (size_t w = 0; w < n_words; ++w) {
    for (int k = 0; k < 3; ++k) {
      dump += "{\"word\": \"" + words[w] + "\", \"vec\": [";
      for (int j = 0; j < dim; ++j) dump += (j ? ", " : "") + Shortest(base(w, j) + noise(rng));
      dump += "]}\n";
    }
  }
  WriteFile(dir + "/dump.jsonl", dump);

  Matrix teacher(static_cast<Eigen::Index>(sentences.size()), 8);
  for (size_t i = 0; i < sentences.size(); ++i) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(8);
    for (size_t w : sentences[i]) v += hidden.row(w);
    teacher.row(i) = v / static_cast<double>(sentences[i].size());
  }
  SaveSentenceEmbeddings(teacher, dir + "/teacher.swt");

  std::string sts;
  for (size_t i = 0; i + 1 < 120; i += 2) {
    const Eigen::VectorXd a = teacher.row(i).transpose(), b = teacher.row(i + 1).transpose();
    std::string s1, s2;
    for (size_t k = 0; k < sentences[i].size(); ++k) s1 += (k ? " " : "") + words[sentences[i][k]];
    for (size_t k = 0; k < sentences[i + 1].size(); ++k) {
      s2 += (k ? " " : "") + words[sentences[i + 1][k]];
    }
    sts += s1 + "\t" + s2 + "\t" + Shortest(5 * (1 + NaiveCosine(a, b)) / 2) + "\n";
  }
  WriteFile(dir + "/sts.tsv", sts);
}

// The vocab -> extract -> pca -> distill -> encode -> sts-eval commands,
// run inside `dir`.
inline std::vector<std::vector<std::string>> ToyPipeline(const std::string &dir) {
  const auto f = [&](const std::string &name) { return dir + "/" + name; };
  return {
      {"vocab", "--corpus", f("corpus.txt"), "--out", f("vocab.tsv")},
      {"extract", "--dump", f("dump.jsonl"), "--vocab", f("vocab.tsv"), "--out", f("raw.swe")},
      {"pca", "--table", f("raw.swe"), "--sentences", f("corpus.txt"), "--dim", "8", "--out",
       f("pca.swp"), "--table-out", f("pca.swe")},
      {"distill", "--table", f("pca.swe"), "--teacher", f("teacher.swt"), "--sentences",
       f("corpus.txt"), "--out", f("student.swe"), "--steps", "60", "--batch-size", "16",
       "--val-every", "20", "--lr", "0.01", "--val-fraction", "0.1", "--history",
       f("history.tsv")},
      {"encode", "--table", f("student.swe"), "--input", f("corpus.txt"), "--out",
       f("vectors.txt")},
      {"sts-eval", "--table", f("student.swe"), "--data", f("sts.tsv")},
  };
}

// Artifacts the pipeline writes, relative to its directory.
inline std::vector<std::string> ToyArtifacts() {
  return {"vocab.tsv",       "vocab.tsv.prov",     "raw.swe",     "raw.swe.prov",
          "raw.swe.occurrences.tsv", "pca.swp",    "pca.swp.prov", "pca.swe",
          "pca.swe.prov",    "student.swe",        "student.swe.prov", "history.tsv",
          "vectors.txt",     "vectors.txt.prov"};
}

}  // namespace swe::testing

#endif  // SWE_TESTS_TOY_PIPELINE_H_
