// Copyright 2026 The cometkb Authors.
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

// Python bindings: metrics, data utilities, schedules and the command-line
// pipeline. Tuples cross the boundary as (subject, relation, object) tuples.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.h"
#include "cometkb/dataset.h"
#include "cometkb/error.h"
#include "cometkb/evaluation.h"
#include "cometkb/synthetic.h"
#include "cometkb/text.h"
#include "cometkb/training.h"
#include "cometkb/vocab.h"

namespace py = pybind11;

namespace cometkb {
namespace {

using Triple = std::tuple<std::string, std::string, std::string>;

std::vector<KnowledgeTuple> to_tuples(const std::vector<Triple>& in) {
  std::vector<KnowledgeTuple> out;
  out.reserve(in.size());
  for (const auto& [s, r, o] : in) out.push_back({s, r, o, Partition::kTrain});
  return out;
}

std::vector<Triple> to_triples(const std::vector<KnowledgeTuple>& in) {
  std::vector<Triple> out;
  out.reserve(in.size());
  for (const auto& t : in) out.emplace_back(t.subject, t.relation, t.object);
  return out;
}

TrainConfig make_config(const std::string& preset, const std::map<std::string, std::string>& overrides) {
  TrainConfig c = TrainConfig::preset(preset);
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

int call_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"cometkb"};
  for (const auto& a : args) argv.push_back(a.c_str());
  py::gil_scoped_release release;
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace
}  // namespace cometkb

PYBIND11_MODULE(_core, m) {
  using namespace cometkb;
  m.doc() = "cometkb native core";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("normalize_text", &normalize_text, py::arg("text"));
  m.def("split_words", &split_words, py::arg("text"));

  m.def(
      "render_relation",
      [](const std::string& schema, const std::string& relation, const std::string& mode) {
        const SchemaSet set = SchemaSet::builtin(schema);
        return render_relation(set.at(relation), parse_relation_mode(mode));
      },
      py::arg("schema"), py::arg("relation"), py::arg("mode") = "language");

  m.def(
      "synthetic_kb",
      [](std::uint64_t seed) {
        const SyntheticKb kb = make_synthetic_kb(seed);
        const DatasetSplit split = make_split(kb.tuples);
        py::dict out;
        out["train"] = to_triples(split.train);
        out["dev"] = to_triples(split.dev);
        out["test"] = to_triples(split.test);
        out["text"] = kb.text;
        out["subjects"] = kb.subjects;
        return out;
      },
      py::arg("seed"), "Synthetic knowledge base split into train, dev and test.");

  m.def(
      "bleu2",
      [](const std::vector<Tokens>& candidates, const std::vector<std::vector<Tokens>>& references) {
        return bleu2(candidates, references);
      },
      py::arg("candidates"), py::arg("references"));

  m.def(
      "novelty",
      [](const std::vector<Triple>& generated, const std::vector<Triple>& train) {
        const NoveltyMetrics n = novelty_metrics(to_tuples(generated), to_tuples(train));
        py::dict out;
        out["n_t_sro"] = n.n_t_sro;
        out["n_t_o"] = n.n_t_o;
        out["n_u_o"] = n.n_u_o;
        out["generated"] = n.generated;
        out["unique_objects"] = n.unique_objects;
        return out;
      },
      py::arg("generated"), py::arg("train"));

  m.def(
      "object_edit_distance",
      [](const std::string& a, const std::string& b) {
        return object_edit_distance(a, b, Stopwords::builtin()).value();
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "unigram_baseline_ppl",
      [](const std::vector<Triple>& train, const std::vector<Triple>& eval) {
        return unigram_baseline_ppl(to_tuples(train), to_tuples(eval));
      },
      py::arg("train"), py::arg("eval"));

  m.def(
      "train_config",
      [](const std::string& preset, const std::map<std::string, std::string>& overrides) {
        std::map<std::string, std::string> out;
        for (const auto& [k, v] : make_config(preset, overrides).to_key_values()) out[k] = v;
        return out;
      },
      py::arg("preset") = "desk", py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "lr_at",
      [](std::int64_t step, const std::string& preset, const std::map<std::string, std::string>& overrides) {
        return lr_at(step, make_config(preset, overrides));
      },
      py::arg("step"), py::arg("preset") = "desk",
      py::arg("overrides") = std::map<std::string, std::string>{});

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static(
          "build",
          [](const std::vector<Triple>& tuples, const std::string& schema, int min_count,
             const std::vector<std::string>& text) {
            return Vocabulary::build(to_tuples(tuples), SchemaSet::builtin(schema), min_count, text);
          },
          py::arg("tuples"), py::arg("schema") = "atomic", py::arg("min_count") = 1,
          py::arg("text") = std::vector<std::string>{})
      .def_static("from_json", &Vocabulary::from_json)
      .def("to_json", &Vocabulary::to_json)
      .def("hash", &Vocabulary::hash)
      .def("__len__", &Vocabulary::size)
      .def("encode", &Vocabulary::encode, py::arg("text"))
      .def("decode", [](const Vocabulary& v, const std::vector<int>& ids) { return v.decode(ids); })
      .def_property_readonly("tokens", &Vocabulary::tokens);

  m.def("run_cli", &call_cli, py::arg("args"),
        "Run the cometkb tool in-process with the given arguments; returns its exit code.");
}
