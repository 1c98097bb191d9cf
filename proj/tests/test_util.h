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

// Fixtures and independent oracles shared by the tests.

#ifndef SWE_TESTS_TEST_UTIL_H_
#define SWE_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "swe/base.h"
#include "swe/embedding.h"

namespace swe::testing {

inline Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng,
                           double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

inline std::vector<std::string> WordList(size_t n, const std::string &prefix = "w") {
  std::vector<std::string> words;
  words.reserve(n);
  for (size_t i = 0; i < n; ++i) words.push_back(prefix + std::to_string(i));
  return words;
}

// Words w0..w{n-1} with strictly decreasing counts n..1.
inline EmbeddingTable RandomTable(size_t n, int dim, std::mt19937_64 &rng,
                                  StageTag stage = StageTag::kRaw) {
  std::vector<uint64_t> freqs(n);
  for (size_t i = 0; i < n; ++i) freqs[i] = n - i;
  return EmbeddingTable(Vocabulary(WordList(n), freqs), RandomMatrix(n, dim, rng), stage);
}

// Random sentence over the words of `table`, `min_len`..`max_len` tokens.
inline std::string RandomSentence(const EmbeddingTable &table, std::mt19937_64 &rng,
                                  int min_len = 3, int max_len = 10) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<size_t> pick(0, table.size() - 1);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += table.vocab().word(pick(rng));
  }
  return s;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "swe_test_XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw IoError("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  std::string File(const std::string &name) const { return (path_ / name).string(); }
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void WriteFile(const std::string &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

inline std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Cyclic Jacobi eigensolver for symmetric matrices. Eigenvalues come back
// in non-increasing order; each eigenvector is flipped so its
// largest-magnitude entry is positive.
struct EigenPairs {
  std::vector<double> values;
  Eigen::MatrixXd vectors;  // columns
};

inline EigenPairs JacobiEigen(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  EigenPairs out;
  out.vectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    out.values.push_back(a(order[c], order[c]));
    Eigen::VectorXd col = v.col(order[c]);
    Eigen::Index peak = 0;
    for (Eigen::Index k = 1; k < n; ++k) {
      if (std::abs(col(k)) > std::abs(col(peak))) peak = k;
    }
    if (col(peak) < 0) col = -col;
    out.vectors.col(c) = col;
  }
  return out;
}

// Two-pass sample covariance of the rows of `x` (divides by n - 1).
inline Eigen::MatrixXd NaiveCovariance(const Matrix &x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) mean += x.row(i).transpose();
  mean /= static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) {
        cov(a, b) += (x(i, a) - mean(a)) * (x(i, b) - mean(b));
      }
    }
  }
  return cov / static_cast<double>(n - 1);
}

// Central differences of `f` at `x`, one coordinate at a time.
inline Matrix FiniteDifferenceGradient(const std::function<double(const Matrix &)> &f,
                                       const Matrix &x, double h = 1e-5) {
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double orig = probe(i, j);
      probe(i, j) = orig + h;
      const double up = f(probe);
      probe(i, j) = orig - h;
      const double down = f(probe);
      probe(i, j) = orig;
      grad(i, j) = (up - down) / (2 * h);
    }
  }
  return grad;
}

// Largest coordinate error relative to the largest gradient magnitude.
inline double MaxRelativeError(const Matrix &analytic, const Matrix &numeric) {
  const double scale = std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-12});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

// Direct cosine of two vectors.
inline double NaiveCosine(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  double ab = 0, aa = 0, bb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    ab += a(i) * b(i);
    aa += a(i) * a(i);
    bb += b(i) * b(i);
  }
  return ab / std::sqrt(aa * bb);
}

// Naive ranking oracle: rank = 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> NaiveRanks(const std::vector<double> &x) {
  std::vector<double> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) less += 1;
      if (x[j] == x[i]) equal += 1;
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

// Pearson from the covariance formula, accumulated in long double.
inline double NaivePearson(const std::vector<double> &x, const std::vector<double> &y) {
  const size_t n = x.size();
  long double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double cxy = 0, cxx = 0, cyy = 0;
  for (size_t i = 0; i < n; ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(cxy / std::sqrt(cxx * cyy));
}

}  // namespace swe::testing

#endif  // SWE_TESTS_TEST_UTIL_H_
