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

#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swe/cli.h"
#include "swe/distill.h"
#include "swe/embedding.h"
#include "swe/encode.h"
#include "swe/ensemble.h"
#include "swe/eval.h"
#include "swe/extract.h"
#include "swe/pca.h"
#include "swe/text.h"
#include "swe/train.h"
#include "swe/xlingual.h"

namespace py = pybind11;
using namespace swe;

namespace {

CaseMode ParseCase(const std::string &name) {
  if (name == "sensitive") return CaseMode::kSensitive;
  if (name == "insensitive") return CaseMode::kInsensitive;
  throw DataError("case must be 'sensitive' or 'insensitive'");
}

std::vector<TokenIds> ToBatch(const std::vector<std::vector<int32_t>> &rows) {
  return std::vector<TokenIds>(rows.begin(), rows.end());
}

EncodeOptions MakeOptions(bool normalize, std::optional<double> sif_alpha, bool pretokenized,
                          const std::string &language) {
  EncodeOptions o;
  o.normalize = normalize;
  o.sif_alpha = sif_alpha;
  o.tokenize = pretokenized ? TokenizeMode::kPretokenized : TokenizeMode::kWhitespace;
  o.language = language;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Static sentence embeddings: tables, PCA, distillation, encoding and metrics.";

  static py::exception<Error> error(m, "SweError", PyExc_RuntimeError);
  static py::exception<IoError> io_error(m, "IoError", error.ptr());
  static py::exception<FormatError> format_error(m, "FormatError", error.ptr());
  static py::exception<DataError> data_error(m, "DataError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const IoError &e) {
      py::set_error(io_error, e.what());
    } catch (const FormatError &e) {
      py::set_error(format_error, e.what());
    } catch (const DataError &e) {
      py::set_error(data_error, e.what());
    } catch (const Error &e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init([](std::vector<std::string> words, const Matrix &matrix,
                       const std::string &stage, std::vector<uint64_t> frequencies,
                       const std::string &case_mode) {
             return EmbeddingTable(Vocabulary(std::move(words), std::move(frequencies),
                                              ParseCase(case_mode)),
                                   matrix, ParseStageTag(stage));
           }),
           py::arg("words"), py::arg("matrix"), py::arg("stage") = "raw",
           py::arg("frequencies") = std::vector<uint64_t>{},
           py::arg("case_mode") = "sensitive")
      .def_property_readonly("words", [](const EmbeddingTable &t) { return t.vocab().words(); })
      .def_property_readonly("frequencies",
                             [](const EmbeddingTable &t) { return t.vocab().frequencies(); })
      .def_property_readonly("matrix", [](const EmbeddingTable &t) { return t.matrix(); })
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def_property_readonly("stage",
                             [](const EmbeddingTable &t) { return std::string(StageTagName(t.stage())); })
      .def_property("metadata", &EmbeddingTable::metadata, &EmbeddingTable::set_metadata)
      .def("find", [](const EmbeddingTable &t, const std::string &w) { return t.vocab().Find(w); })
      .def("__len__", &EmbeddingTable::size);

  m.def("load_table", &LoadTable, py::arg("path"));
  m.def(
      "save_table",
      [](const EmbeddingTable &t, const std::string &path, const std::string &format) {
        if (format != "binary" && format != "text") throw DataError("format must be binary or text");
        SaveTable(t, path, format == "text" ? TableFormat::kText : TableFormat::kBinary);
      },
      py::arg("table"), py::arg("path"), py::arg("format") = "binary");

  m.def(
      "build_vocab",
      [](const std::vector<std::string> &tokens, size_t cap, const std::string &case_mode) {
        const Vocabulary v = BuildVocab(std::span<const std::string>(tokens), cap, ParseCase(case_mode));
        return py::make_tuple(v.words(), v.frequencies());
      },
      py::arg("tokens"), py::arg("cap"), py::arg("case_mode") = "sensitive",
      "Returns (words, counts) for the `cap` most frequent tokens.");

  m.def(
      "decontextualize",
      [](std::vector<std::string> dump_words, std::vector<uint32_t> word_ids,
         const Matrix &vectors, std::vector<std::string> vocab, int max_occurrences) {
        MemoryOccurrenceReader reader(std::move(dump_words), std::move(word_ids), vectors);
        DecontextualizeResult r =
            Decontextualize(reader, Vocabulary(std::move(vocab), {}), max_occurrences);
        return py::make_tuple(std::move(r.table), r.occurrences, r.missing);
      },
      py::arg("dump_words"), py::arg("word_ids"), py::arg("vectors"), py::arg("vocab"),
      py::arg("max_occurrences") = 100,
      "Returns (table, occurrence counts, missing row ids).");
  m.def(
      "average_subwords",
      [](const std::vector<Eigen::VectorXd> &pieces) { return AverageSubwords(pieces); },
      py::arg("pieces"));

  py::class_<PcaTransform>(m, "PcaTransform")
      .def_readonly("mean", &PcaTransform::mean)
      .def_readonly("components", &PcaTransform::components)
      .def_readonly("eigenvalues", &PcaTransform::eigenvalues)
      .def_readonly("skip", &PcaTransform::skip)
      .def_readonly("keep", &PcaTransform::keep)
      .def_property_readonly("mode", [](const PcaTransform &t) {
        return std::string(t.mode == PcaMode::kWord ? "word" : "sentence");
      })
      .def("kept_components", &PcaTransform::KeptComponents);

  m.def(
      "fit_sentence_pca",
      [](const EmbeddingTable &table, const std::vector<std::string> &sentences, int dim,
         std::optional<int> skip, const std::string &language) {
        std::vector<SentenceRecord> records;
        for (const auto &s : sentences) {
          SentenceRecord rec{s, {}, language};
          for (auto tok : Tokenize(s)) rec.tokens.emplace_back(tok);
          records.push_back(std::move(rec));
        }
        const SentenceSample sample{&table, records};
        return FitSentencePca(std::span<const SentenceSample>(&sample, 1), dim, skip).transform;
      },
      py::arg("table"), py::arg("sentences"), py::arg("dim"), py::arg("skip") = py::none(),
      py::arg("language") = "");
  m.def("fit_word_pca", &FitWordPca, py::arg("table"), py::arg("dim"),
        py::arg("skip") = py::none());
  m.def("pretransform", &Pretransform, py::arg("table"), py::arg("transform"));
  m.def(
      "project_components",
      [](const Matrix &items, const PcaTransform &t, const std::vector<int> &indices) {
        return ProjectComponents(items, t, indices);
      },
      py::arg("items"), py::arg("transform"), py::arg("indices"));
  m.def("save_pca", &SavePcaTransform, py::arg("transform"), py::arg("path"));
  m.def("load_pca", &LoadPcaTransform, py::arg("path"));

  m.def(
      "encode",
      [](const EmbeddingTable &table, const std::vector<std::string> &texts, bool normalize,
         std::optional<double> sif_alpha, std::optional<std::vector<std::string>> pieces,
         bool pretokenized, const std::string &language, int threads) {
        std::optional<PieceTableTokenizer> tok;
        if (pieces) tok.emplace(*pieces);
        const Encoder enc(table, tok ? &*tok : nullptr,
                          MakeOptions(normalize, sif_alpha, pretokenized, language));
        EncodedBatch batch;
        {
          py::gil_scoped_release release;
          batch = enc.EncodeBatch(texts, threads);
        }
        std::vector<bool> empty(batch.empty.begin(), batch.empty.end());
        return py::make_tuple(batch.vectors, empty);
      },
      py::arg("table"), py::arg("texts"), py::arg("normalize") = true,
      py::arg("sif_alpha") = py::none(), py::arg("pieces") = py::none(),
      py::arg("pretokenized") = false, py::arg("language") = "", py::arg("threads") = 1,
      "Returns (vectors, empty flags), one row per text.");
  m.def(
      "sif_reweight",
      [](const EmbeddingTable &t, const std::vector<double> &probs, double alpha) {
        return SifReweight(t, probs, alpha);
      },
      py::arg("table"), py::arg("probabilities"), py::arg("alpha") = kDefaultSifAlpha);
  m.def(
      "unigram_probabilities",
      [](const EmbeddingTable &t) { return UnigramProbabilities(t.vocab()); }, py::arg("table"));

  m.def(
      "cosine_matrix", [](const Matrix &rows) { return CosineMatrix(rows).values; },
      py::arg("rows"));
  m.def(
      "kd_loss",
      [](const Eigen::MatrixXd &s, const Eigen::MatrixXd &t, double tau) {
        return KdLoss({s, SimilarityKind::kStudent}, {t, SimilarityKind::kTeacher}, tau);
      },
      py::arg("student"), py::arg("teacher"), py::arg("tau") = kDefaultTau);
  m.def(
      "kd_grad",
      [](const std::vector<std::vector<int32_t>> &batch, const Matrix &params,
         const Eigen::MatrixXd &teacher, double tau) {
        const RowGradient g = KdGrad(ToBatch(batch), params,
                                     {teacher, SimilarityKind::kTeacher}, tau);
        return py::make_tuple(g.loss, g.ToDense(params.rows(), params.cols()));
      },
      py::arg("batch"), py::arg("params"), py::arg("teacher"), py::arg("tau") = kDefaultTau,
      "Returns (loss, dense gradient) for sentences given as row-id lists.");
  m.def(
      "contrastive_loss",
      [](const Eigen::MatrixXd &u, double tau) {
        return ContrastiveLoss({u, SimilarityKind::kCrossLingual}, tau);
      },
      py::arg("u"), py::arg("tau") = kDefaultTau);
  m.def(
      "contrastive_grad",
      [](const std::vector<std::vector<int32_t>> &source,
         const std::vector<std::vector<int32_t>> &target, const Matrix &params, double tau) {
        const RowGradient g = ContrastiveGrad(ToBatch(source), ToBatch(target), params, tau);
        return py::make_tuple(g.loss, g.ToDense(params.rows(), params.cols()));
      },
      py::arg("source"), py::arg("target"), py::arg("params"), py::arg("tau") = kDefaultTau);

  m.def(
      "ensemble_encode",
      [](const std::vector<std::string> &texts, const std::vector<EmbeddingTable> &tables,
         std::vector<double> weights) {
        EnsembleSpec spec;
        if (weights.empty()) weights.assign(tables.size(), 1.0);
        if (weights.size() != tables.size()) throw DataError("one weight per table");
        for (size_t i = 0; i < tables.size(); ++i) {
          spec.members.push_back({std::make_shared<const EmbeddingTable>(tables[i]), weights[i], nullptr});
        }
        spec.Validate();
        Matrix out(static_cast<Eigen::Index>(texts.size()), spec.total_dim());
        for (size_t i = 0; i < texts.size(); ++i) {
          out.row(static_cast<Eigen::Index>(i)) = EnsembleEncode(texts[i], spec).vector.transpose();
        }
        return out;
      },
      py::arg("texts"), py::arg("tables"), py::arg("weights") = std::vector<double>{});

  m.def("spearman", [](const std::vector<double> &a, const std::vector<double> &b) {
    return Spearman(a, b);
  });
  m.def("pearson", [](const std::vector<double> &a, const std::vector<double> &b) {
    return Pearson(a, b);
  });
  m.def(
      "retrieval_eval",
      [](const Matrix &src, const Matrix &tgt,
         const std::vector<std::pair<size_t, size_t>> &gold, std::optional<double> threshold) {
        const RetrievalResult r = RetrievalEvalEmbeddings(src, tgt, gold, threshold);
        py::dict d;
        d["precision"] = r.precision;
        d["recall"] = r.recall;
        d["f1"] = r.f1;
        d["predicted"] = r.predicted;
        d["correct"] = r.correct;
        return d;
      },
      py::arg("sources"), py::arg("targets"), py::arg("gold"), py::arg("threshold") = py::none());

  m.def(
      "run_cli",
      [](const std::vector<std::string> &args) {
        std::vector<std::string> argv = {"swe"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::ostringstream out, err;
        int status;
        {
          py::gil_scoped_release release;
          status = RunCli(argv, out, err);
        }
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI subcommand; returns (status, stdout, stderr).");
}
