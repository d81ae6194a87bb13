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

#include "cometkb/synthetic.h"

#include <array>
#include <map>

#include "cometkb/random.h"
#include "cometkb/text.h"

namespace cometkb {

namespace {

struct Category {
  std::array<std::pair<const char*, const char*>, 4> verbs;  // (third person, base)
  std::array<const char*, 4> nouns;
  const char* place;
  std::array<const char*, 3> feelings;
  std::array<const char*, 2> traits;
  const char* need;
  const char* goal;
};

const std::array<Category, 5> kCategories = {{
    {{{{"cooks", "cook"}, {"bakes", "bake"}, {"slices", "slice"}, {"tastes", "taste"}}},
     {"soup", "bread", "cake", "pasta"},
     "kitchen",
     {"full", "satisfied", "warm"},
     {"hungry", "skilled"},
     "groceries",
     "a meal"},
    {{{{"writes", "write"}, {"reads", "read"}, {"prints", "print"}, {"signs", "sign"}}},
     {"report", "contract", "letter", "memo"},
     "office",
     {"productive", "relieved", "bored"},
     {"diligent", "busy"},
     "a pen",
     "a promotion"},
    {{{{"kicks", "kick"}, {"throws", "throw"}, {"catches", "catch"}, {"chases", "chase"}}},
     {"ball", "frisbee", "bat", "net"},
     "field",
     {"excited", "sweaty", "strong"},
     {"athletic", "fast"},
     "shoes",
     "the game"},
    {{{{"hugs", "hug"}, {"calls", "call"}, {"visits", "visit"}, {"thanks", "thank"}}},
     {"friend", "neighbor", "cousin", "teacher"},
     "house",
     {"loved", "grateful", "cheerful"},
     {"kind", "friendly"},
     "a phone",
     "a friendship"},
    {{{{"drives", "drive"}, {"packs", "pack"}, {"books", "book"}, {"rides", "ride"}}},
     {"car", "bag", "ticket", "bike"},
     "station",
     {"adventurous", "nervous", "free"},
     {"curious", "restless"},
     "money",
     "a trip"},
}};

struct RelationTemplates {
  const char* relation;
  std::array<const char*, 6> phrases;
  const char* frame;  // {s} and {o} are replaced
};

const std::array<RelationTemplates, 9> kRelations = {{
    {"xIntent",
     {"to {base} the {noun}", "to get {goal}", "to feel {feel0}", "to be {trait0}",
      "to visit the {place}", "to have fun"},
     "{s} because they wanted {o}"},
    {"xNeed",
     {"to find the {noun}", "to go to the {place}", "to buy {need}", "to get {need}",
      "to learn how to {base}", "to wake up"},
     "before {s} , they needed {o}"},
    {"xAttr",
     {"{trait0}", "{trait1}", "{feel0}", "{feel2}", "careful", "eager"},
     "{s} , so they are {o}"},
    {"xEffect",
     {"gets {goal}", "goes to the {place}", "loses the {noun}", "uses {need}",
      "takes a break", "learns something"},
     "{s} , then personx {o}"},
    {"xReact",
     {"{feel0}", "{feel1}", "{feel2}", "happy", "proud of the {noun}", "tired"},
     "when {s} , they feel {o}"},
    {"xWant",
     {"to {base} more", "to keep the {noun}", "to leave the {place}", "to share {goal}",
      "to rest", "to go home"},
     "after {s} , they want {o}"},
    {"oEffect",
     {"gets the {noun}", "goes to the {place}", "thanks personx", "smiles",
      "receives {goal}", "none"},
     "{s} , then others {o}"},
    {"oReact",
     {"{feel0}", "{feel1}", "grateful", "impressed", "happy for personx", "none"},
     "when {s} , others feel {o}"},
    {"oWant",
     {"to {base} the {noun} too", "to join personx", "to visit the {place}",
      "to thank personx", "to get {goal}", "none"},
     "after {s} , others want {o}"},
}};

std::string fill(std::string text, const std::map<std::string, std::string>& slots) {
  for (const auto& [key, value] : slots) {
    const std::string token = "{" + key + "}";
    for (std::size_t pos; (pos = text.find(token)) != std::string::npos;) {
      text.replace(pos, token.size(), value);
    }
  }
  return normalize_text(text);
}

}  // namespace

SyntheticKb make_synthetic_kb(std::uint64_t seed) {
  Rng rng(seed);
  SyntheticKb kb;
  for (const Category& cat : kCategories) {
    const int held = static_cast<int>(rng.below(4));
    for (int i = 0; i < 4; ++i) {
      for (int shift = 0; shift < 2; ++shift) {
        const int v = i, n = (i + shift) % 4;
        Partition split = Partition::kTrain;
        if (v == held && n == held) split = Partition::kDev;
        if (v == (held + 2) % 4 && n == (held + 3) % 4) split = Partition::kTest;

        const std::map<std::string, std::string> slots = {
            {"base", cat.verbs[v].second}, {"noun", cat.nouns[n]},
            {"place", cat.place},          {"feel0", cat.feelings[0]},
            {"feel1", cat.feelings[1]},    {"feel2", cat.feelings[2]},
            {"trait0", cat.traits[0]},     {"trait1", cat.traits[1]},
            {"need", cat.need},            {"goal", cat.goal}};
        const std::string subject =
            normalize_text(std::string("personx ") + cat.verbs[v].first + " the " + cat.nouns[n]);
        kb.subjects.push_back(subject);

        for (const RelationTemplates& rel : kRelations) {
          std::array<int, 6> order = {0, 1, 2, 3, 4, 5};
          for (int j = 5; j > 0; --j) std::swap(order[j], order[rng.below(j + 1)]);
          const int count = 5 + static_cast<int>(rng.below(2));
          for (int k = 0; k < count; ++k) {
            kb.tuples.push_back({subject, rel.relation, fill(rel.phrases[order[k]], slots), split});
          }
          for (const char* phrase : rel.phrases) {
            kb.text.push_back(fill(rel.frame, {{"s", subject}, {"o", fill(phrase, slots)}}));
          }
        }
      }
    }
  }
  return kb;
}

}  // namespace cometkb
