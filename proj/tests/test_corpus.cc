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

#include <algorithm>
#include <set>
#include <sstream>

#include "cometkb/corpus.h"
#include "cometkb/error.h"
#include "cometkb/random.h"
#include "cometkb/synthetic.h"
#include "cometkb/text.h"
#include "doctest.h"

namespace cometkb {
namespace {

std::vector<KnowledgeTuple> read_jsonl(const std::string& text, const SchemaSet& schemas) {
  std::istringstream in(text);
  return read_tuples(in, TupleFormat::kJsonl, schemas);
}

KnowledgeTuple tuple(std::string s, std::string r, std::string o, Partition p) {
  return {std::move(s), std::move(r), std::move(o), p};
}

TEST_CASE("text normalization") {
  CHECK(normalize_text("  Take \t a   NAP \n") == "take a nap");
  CHECK(normalize_text("") == "");
  CHECK(split_words(" a  b ") == std::vector<std::string>{"a", "b"});
  CHECK(split_camel_case("HasSubevent") == std::vector<std::string>{"has", "subevent"});
  CHECK(split_camel_case("xIntent") == std::vector<std::string>{"x", "intent"});
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("jsonl tuples load in file order, normalized") {
  const SchemaSet cn = SchemaSet::builtin("conceptnet");
  auto tuples = read_jsonl(
      R"({"subject":"take a nap","relation":"Causes","object":"have energy","split":"train"})"
      "\n\n"
      R"({"subject":"  Go  Running ","relation":"IsA","object":"EXERCISE","split":"dev"})"
      "\n",
      cn);
  REQUIRE(tuples.size() == 2);
  CHECK(tuples[0].subject == "take a nap");
  CHECK(tuples[0].relation == "Causes");
  CHECK(tuples[0].object == "have energy");
  CHECK(tuples[0].split == Partition::kTrain);
  CHECK(tuples[1].subject == "go running");
  CHECK(tuples[1].object == "exercise");
  CHECK(tuples[1].split == Partition::kDev);
}

TEST_CASE("empty input gives no tuples") {
  CHECK(read_jsonl("", SchemaSet::builtin("atomic")).empty());
}

TEST_CASE("load errors name the line or the relation") {
  const SchemaSet cn = SchemaSet::builtin("conceptnet");
  try {
    read_jsonl(R"({"subject":"a","relation":"NotARel","object":"b"})", cn);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("NotARel") != std::string::npos);
  }
  try {
    read_jsonl(R"({"subject":"a","relation":"IsA","object":"b"})"
               "\n{broken\n",
               cn);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(read_jsonl(R"({"subject":"  ","relation":"IsA","object":"b"})", cn), DataError);
}

TEST_CASE("tsv column order is relation, subject, object") {
  std::istringstream in("IsA\tdog\tanimal\n");
  auto t = read_tuples(in, TupleFormat::kTsv, SchemaSet::builtin("conceptnet"), Partition::kTest);
  REQUIRE(t.size() == 1);
  CHECK(t[0].subject == "dog");
  CHECK(t[0].object == "animal");
  CHECK(t[0].split == Partition::kTest);
}

TEST_CASE("jsonl round trip through tuple_to_jsonl") {
  const SchemaSet atomic = SchemaSet::builtin("atomic");
  KnowledgeTuple t = tuple("personx goes to the store", "xIntent", "to get food", Partition::kDev);
  auto back = read_jsonl(tuple_to_jsonl(t), atomic);
  REQUIRE(back.size() == 1);
  CHECK(back[0].same_triple(t));
  CHECK(back[0].split == Partition::kDev);
}

TEST_CASE("relation rendering") {
  const SchemaSet cn = SchemaSet::builtin("conceptnet");
  CHECK(render_relation(cn.at("IsA"), RelationMode::kLanguage) ==
        std::vector<std::string>{"is", "a"});
  CHECK(render_relation(cn.at("HasSubevent"), RelationMode::kLanguage) ==
        std::vector<std::string>{"has", "subevent"});
  CHECK(render_relation(cn.at("IsA"), RelationMode::kSymbol) == std::vector<std::string>{"<IsA>"});
  RelationSchema bare{"Bare", {}, {}};
  CHECK_THROWS_AS(render_relation(bare, RelationMode::kLanguage), ConfigError);
}

TEST_CASE("rendering property over both built-in schemas") {
  for (const char* name : {"atomic", "conceptnet"}) {
    const SchemaSet schemas = SchemaSet::builtin(name);
    for (const auto& r : schemas.relations()) {
      const auto symbol = render_relation(r, RelationMode::kSymbol);
      CHECK(symbol.size() == 1);
      const auto words = render_relation(r, RelationMode::kLanguage);
      CHECK(!words.empty());
      CHECK(std::find(words.begin(), words.end(), symbol[0]) == words.end());
    }
  }
}

TEST_CASE("meta tokens") {
  const SchemaSet atomic = SchemaSet::builtin("atomic");
  CHECK(apply_meta_tokens(atomic.at("xReact"), true) ==
        std::vector<std::string>{"<X>", "<Post>", "<Involuntary>"});
  CHECK(apply_meta_tokens(atomic.at("xIntent"), true) ==
        std::vector<std::string>{"<X>", "<Pre>", "<Voluntary>"});
  for (const auto& r : atomic.relations()) CHECK(apply_meta_tokens(r, false).empty());
  const SchemaSet cn = SchemaSet::builtin("conceptnet");
  CHECK_THROWS_AS(apply_meta_tokens(cn.at("IsA"), true), ConfigError);
}

TEST_CASE("built-in schema sizes") {
  CHECK(SchemaSet::builtin("atomic").size() == 9);
  CHECK(SchemaSet::builtin("conceptnet").size() == 34);
  CHECK_THROWS_AS(SchemaSet::builtin("wordnet"), ArgumentError);
}

TEST_CASE("schema json round trip") {
  const SchemaSet atomic = SchemaSet::builtin("atomic");
  const SchemaSet back = SchemaSet::from_json(atomic.to_json(), "atomic");
  REQUIRE(back.size() == atomic.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.relations()[i].id == atomic.relations()[i].id);
    CHECK(back.relations()[i].surface_form == atomic.relations()[i].surface_form);
    CHECK(back.relations()[i].meta_tokens == atomic.relations()[i].meta_tokens);
  }
  CHECK_THROWS_AS(SchemaSet::from_json(R"([{"id":"A","surface_form":["a"],"meta_tokens":["<Z>"]}])", "x"),
                  ConfigError);
}

TEST_CASE("make_split keeps partitions disjoint") {
  std::vector<KnowledgeTuple> tuples = {
      tuple("a", "IsA", "b", Partition::kTrain), tuple("a", "IsA", "b", Partition::kTrain),
      tuple("a", "IsA", "b", Partition::kDev),   tuple("c", "IsA", "d", Partition::kDev),
      tuple("c", "IsA", "d", Partition::kTest),  tuple("e", "IsA", "f", Partition::kTest),
  };
  DatasetSplit split = make_split(tuples);
  CHECK(split.train.size() == 1);
  CHECK(split.dev.size() == 1);
  CHECK(split.test.size() == 1);
  CHECK(split.test[0].subject == "e");
  CHECK(partitions_disjoint(split));
}

DatasetSplit numbered_split(int n) {
  DatasetSplit s;
  for (int i = 0; i < n; ++i) s.train.push_back(tuple("s" + std::to_string(i), "xIntent", "o", Partition::kTrain));
  s.dev.push_back(tuple("dev", "xNeed", "o", Partition::kDev));
  s.test.push_back(tuple("test", "xAttr", "o", Partition::kTest));
  return s;
}

TEST_CASE("subsample_training") {
  const DatasetSplit s = numbered_split(200);
  const DatasetSplit full = subsample_training(s, 1.0, 7);
  REQUIRE(full.train.size() == 200);
  for (int i = 0; i < 200; ++i) CHECK(full.train[i].same_triple(s.train[i]));

  const DatasetSplit a = subsample_training(s, 0.5, 7), b = subsample_training(s, 0.5, 7);
  REQUIRE(a.train.size() == 100);
  for (int i = 0; i < 100; ++i) CHECK(a.train[i].same_triple(b.train[i]));
  CHECK(a.dev.size() == 1);
  CHECK(a.test.size() == 1);

  // Sample keeps original order and has no repeats.
  auto index = [](const KnowledgeTuple& t) { return std::stoi(t.subject.substr(1)); };
  for (std::size_t i = 1; i < a.train.size(); ++i) CHECK(index(a.train[i - 1]) < index(a.train[i]));

  CHECK(subsample_training(s, 0.10, 3).train.size() == 20);
  CHECK(subsample_training(s, 0.001, 3).train.size() == 1);
  CHECK_THROWS_AS(subsample_training(s, 0.0, 3), ArgumentError);
  CHECK_THROWS_AS(subsample_training(s, 1.5, 3), ArgumentError);
  CHECK_THROWS_AS(subsample_training(DatasetSplit{}, 0.5, 3), ArgumentError);
}

TEST_CASE("subsample size is round(fraction * n) at corpus scale") {
  DatasetSplit s;
  s.train.resize(710000, tuple("s", "xIntent", "o", Partition::kTrain));
  CHECK(subsample_training(s, 0.10, 1).train.size() == 71000);
}

TEST_CASE("filter_relations") {
  const SchemaSet atomic = SchemaSet::builtin("atomic");
  const SyntheticKb kb = make_synthetic_kb(5);
  const DatasetSplit split = make_split(kb.tuples);

  const auto& t2 = relation_split("personxy-t2");
  CHECK(t2 == std::set<std::string>{"oEffect", "oReact", "oWant"});
  const DatasetSplit only = filter_relations(split, t2, atomic);
  CHECK(!only.train.empty());
  for (const auto* part : {&only.train, &only.dev, &only.test})
    for (const auto& t : *part) CHECK(t2.count(t.relation) == 1);
  CHECK(partitions_disjoint(only));

  const auto& pre = relation_split("prepost-t1");
  CHECK(pre.count("xIntent") == 1);
  CHECK(pre.count("xNeed") == 1);
  CHECK(pre.count("xAttr") == 0);

  std::set<std::string> all;
  for (const auto& r : atomic.relations()) all.insert(r.id);
  CHECK(filter_relations(split, all, atomic).size() == split.size());
  CHECK_THROWS_AS(filter_relations(split, {"Bogus"}, atomic), ArgumentError);
  CHECK_THROWS_AS(relation_split("nope"), ArgumentError);
}

TEST_CASE("disjointness survives filtering and subsampling") {
  const SchemaSet atomic = SchemaSet::builtin("atomic");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DatasetSplit split = make_split(make_synthetic_kb(seed).tuples);
    CHECK(partitions_disjoint(split));
    CHECK(partitions_disjoint(subsample_training(split, 0.3, seed)));
    for (const auto& name : relation_split_names()) {
      CHECK(partitions_disjoint(filter_relations(split, relation_split(name), atomic)));
    }
  }
}

TEST_CASE("synthetic mini-KB") {
  const SyntheticKb kb = make_synthetic_kb(1);
  CHECK(kb.tuples.size() >= 1800);
  CHECK(kb.tuples.size() <= 2200);
  CHECK(kb.subjects.size() == 40);
  const SchemaSet atomic = SchemaSet::builtin("atomic");
  std::set<std::string> train_subjects, held_subjects;
  for (const auto& t : kb.tuples) {
    CHECK(atomic.contains(t.relation));
    (t.split == Partition::kTrain ? train_subjects : held_subjects).insert(t.subject);
  }
  for (const auto& s : held_subjects) CHECK(train_subjects.count(s) == 0);
  CHECK(!kb.text.empty());

  const SyntheticKb again = make_synthetic_kb(1);
  REQUIRE(again.tuples.size() == kb.tuples.size());
  for (std::size_t i = 0; i < kb.tuples.size(); ++i) CHECK(again.tuples[i].same_triple(kb.tuples[i]));
  CHECK(again.text == kb.text);
}

}  // namespace
}  // namespace cometkb
