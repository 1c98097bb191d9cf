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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "swe/distill.h"
#include "test_util.h"

namespace swe {
namespace {

using testing::RandomMatrix;

SimilarityMatrix RandomCosines(int k, int d, std::mt19937_64 &rng,
                               SimilarityKind kind = SimilarityKind::kStudent) {
  return CosineMatrix(RandomMatrix(k, d, rng), kind);
}

// Direct double loop over the loss definition with explicit exp/log.
double NaiveKdLoss(const Eigen::MatrixXd &s, const Eigen::MatrixXd &t, double tau) {
  const Eigen::Index k = s.rows();
  double loss = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    double zs = 0, zt = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == i) continue;
      zs += std::exp(s(i, j) / tau);
      zt += std::exp(t(i, j) / tau);
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == i) continue;
      loss -= (std::exp(t(i, j) / tau) / zt) * std::log(std::exp(s(i, j) / tau) / zs);
    }
  }
  return loss / static_cast<double>(k);
}

TEST(OffDiagonalSoftmax, RowsSumToOneWithZeroDiagonal) {
  std::mt19937_64 rng(1);
  const SimilarityMatrix s = RandomCosines(7, 4, rng);
  const Eigen::MatrixXd p = OffDiagonalSoftmax(s.values, 0.05);
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(p(i, i), 0.0);
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
  }
}

TEST(KdLoss, TwoSentenceBatchIsExactlyZero) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    EXPECT_EQ(KdLoss(RandomCosines(2, 3, rng), RandomCosines(2, 3, rng)), 0.0);
  }
}

TEST(KdLoss, MatchesNaiveOracle) {
  Eigen::MatrixXd s(3, 3), t(3, 3);
  s << 1, 0.2, -0.4, 0.2, 1, 0.7, -0.4, 0.7, 1;
  t << 1, 0.5, 0.1, 0.5, 1, -0.3, 0.1, -0.3, 1;
  EXPECT_NEAR(KdLoss({s}, {t}), NaiveKdLoss(s, t, 0.05), 1e-12);
  EXPECT_NEAR(KdLoss({s}, {t}, 0.3), NaiveKdLoss(s, t, 0.3), 1e-12);
}

TEST(KdLoss, GibbsBound) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 3 + trial % 6;
    const SimilarityMatrix t = RandomCosines(k, 5, rng);
    const SimilarityMatrix s = RandomCosines(k, 5, rng);
    EXPECT_GE(KdLoss(s, t), KdLoss(t, t) - 1e-12);
  }
}

TEST(KdLoss, RowShiftInvariance) {
  std::mt19937_64 rng(4);
  const SimilarityMatrix s = RandomCosines(6, 4, rng);
  const SimilarityMatrix t = RandomCosines(6, 4, rng);
  SimilarityMatrix s2 = s, t2 = t;
  s2.values.row(2).array() += 0.37;
  t2.values.row(4).array() -= 1.1;
  EXPECT_NEAR(KdLoss(s2, t2), KdLoss(s, t), 1e-12);
}

TEST(KdLoss, DegenerateBatch) {
  const SimilarityMatrix one{Eigen::MatrixXd::Ones(1, 1)};
  try {
    KdLoss(one, one);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("degenerate batch"), std::string::npos);
  }
  EXPECT_THROW(KdLoss({Eigen::MatrixXd::Identity(3, 3)}, {Eigen::MatrixXd::Identity(3, 3)}, 0.0),
               DataError);
}

TEST(KdLossGradient, MatchesFiniteDifferencesOnFreeMatrix) {
  std::mt19937_64 rng(5);
  const SimilarityMatrix t = RandomCosines(5, 3, rng);
  const Matrix s0 = RandomCosines(5, 3, rng).values;
  auto f = [&](const Matrix &s) { return KdLoss({s}, t, 0.2); };
  const Matrix analytic = KdLossGradient({s0}, t, 0.2);
  Matrix numeric = testing::FiniteDifferenceGradient(f, s0);
  EXPECT_LT(testing::MaxRelativeError(analytic, numeric), 1e-7);
}

TEST(KdGrad, MatchesFiniteDifferencesOnToyProblem) {
  std::mt19937_64 rng(6);
  const Matrix params = RandomMatrix(6, 3, rng);
  const std::vector<TokenIds> batch = {{0, 1}, {2}, {1, 3, 4}, {5, 0}};
  const SimilarityMatrix t = RandomCosines(4, 5, rng, SimilarityKind::kTeacher);
  auto f = [&](const Matrix &p) { return KdLoss(CosineMatrix(MeanEmbeddings(batch, p)), t); };
  const RowGradient g = KdGrad(batch, params, t);
  EXPECT_NEAR(g.loss, f(params), 1e-15);
  const Matrix numeric = testing::FiniteDifferenceGradient(f, params);
  EXPECT_LT(testing::MaxRelativeError(g.ToDense(6, 3), numeric), 1e-4);
}

TEST(KdGrad, AbsentWordHasExactlyZeroGradient) {
  std::mt19937_64 rng(7);
  const Matrix params = RandomMatrix(8, 3, rng);
  const std::vector<TokenIds> batch = {{0, 1}, {2}, {3, 1}};
  const RowGradient g = KdGrad(batch, params, RandomCosines(3, 4, rng));
  const Matrix dense = g.ToDense(8, 3);
  for (int r = 4; r < 8; ++r) EXPECT_EQ(dense.row(r).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.rows, (std::vector<int32_t>{0, 1, 2, 3}));
}

TEST(KdGrad, StudentEqualToTeacherIsStationary) {
  std::mt19937_64 rng(8);
  const Matrix params = RandomMatrix(5, 4, rng);
  const std::vector<TokenIds> batch = {{0}, {1}, {2}, {3}, {4}};
  const SimilarityMatrix t = CosineMatrix(params, SimilarityKind::kTeacher);
  EXPECT_LT(KdGrad(batch, params, t).values.norm(), 1e-8);
}

TEST(KdGrad, ScaleInvariantLoss) {
  std::mt19937_64 rng(9);
  const Matrix params = RandomMatrix(6, 3, rng);
  const std::vector<TokenIds> batch = {{0, 1}, {2, 3}, {4}, {5}};
  const SimilarityMatrix t = RandomCosines(4, 3, rng);
  EXPECT_NEAR(KdGrad(batch, 3.5 * params, t).loss, KdGrad(batch, params, t).loss, 1e-12);
}

TEST(TeacherBatchSource, MisalignmentIsAnError) {
  TeacherBatchSource src;
  src.sentences = {"a", "b"};
  src.vectors = Matrix::Ones(3, 2);
  EXPECT_THROW(src.Validate(), DataError);
  testing::TempDir dir;
  SaveSentenceEmbeddings(Matrix::Ones(3, 2), dir.File("t.swt"));
  testing::WriteFile(dir.File("s.txt"), "a\nb\n");
  EXPECT_THROW(TeacherBatchSource::Load(dir.File("t.swt"), dir.File("s.txt")), DataError);
}

struct KdFixture {
  EmbeddingTable student;
  TeacherBatchSource teacher;
};

// Teacher = fixed random linear map of the initial student sentence
// embeddings.
KdFixture MakeKdTask(uint64_t seed, int n_words, int n_sentences, int d, int d_teacher) {
  std::mt19937_64 rng(seed);
  KdFixture f{testing::RandomTable(n_words, d, rng, StageTag::kPca), {}};
  const Matrix proj = RandomMatrix(d, d_teacher, rng);
  Encoder enc(f.student, nullptr, EncodeOptions{.normalize = false});
  f.teacher.vectors.resize(n_sentences, d_teacher);
  for (int i = 0; i < n_sentences; ++i) {
    f.teacher.sentences.push_back(testing::RandomSentence(f.student, rng, 2, 6));
    f.teacher.vectors.row(i) = enc.Encode(f.teacher.sentences.back()).vector.transpose() * proj;
  }
  return f;
}

TEST(TrainKd, DeterministicTrainedSnapshot) {
  const KdFixture f = MakeKdTask(10, 60, 200, 6, 5);
  TrainConfig c;
  c.learning_rate = 0.01;
  c.max_steps = 60;
  c.batch_size = 16;
  c.val_every = 20;
  c.val_fraction = 0.1;
  const KdTrainResult a = TrainKd(f.student, f.teacher, c);
  const KdTrainResult b = TrainKd(f.student, f.teacher, c);
  EXPECT_EQ(a.table.matrix(), b.table.matrix());
  EXPECT_EQ(a.table.stage(), StageTag::kTrained);
  EXPECT_EQ(a.validation_sentences, 20u);
  EXPECT_EQ(a.train_sentences, 180u);
  EXPECT_LT(a.history.best_loss, a.history.validations.front().loss);
  c.seed = 43;
  EXPECT_NE(TrainKd(f.student, f.teacher, c).table.matrix(), a.table.matrix());
}

TEST(TrainKd, WarnsOnRawStageAndDropsEmptySentences) {
  KdFixture f = MakeKdTask(11, 40, 100, 4, 4);
  f.student = EmbeddingTable(f.student.vocab(), f.student.matrix(), StageTag::kRaw);
  f.teacher.sentences[0] = "!!! unknownword";
  std::vector<std::string> warnings;
  SetWarningSink([&](std::string_view m) { warnings.emplace_back(m); });
  TrainConfig c;
  c.max_steps = 5;
  c.batch_size = 8;
  const KdTrainResult r = TrainKd(f.student, f.teacher, c);
  SetWarningSink(nullptr);
  EXPECT_EQ(r.dropped_sentences, 1u);
  ASSERT_FALSE(warnings.empty());
  EXPECT_NE(warnings[0].find("not PCA-transformed"), std::string::npos);
}

TEST(TrainKd, SmoothedTrainingLossDecreases) {
  const KdFixture f = MakeKdTask(12, 80, 400, 8, 6);
  TrainConfig c;
  c.learning_rate = 0.01;
  c.max_steps = 400;
  c.batch_size = 32;
  c.val_every = 100;
  c.patience = 100;
  const KdTrainResult r = TrainKd(f.student, f.teacher, c);
  const auto &loss = r.history.train_loss;
  ASSERT_EQ(loss.size(), 400u);
  double prev = 1e300;
  for (int w = 0; w < 4; ++w) {
    double mean = 0;
    for (int i = w * 100; i < (w + 1) * 100; ++i) mean += loss[i];
    mean /= 100;
    EXPECT_LT(mean, prev) << "window " << w;
    prev = mean;
  }
}

}  // namespace
}  // namespace swe
