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

#ifndef COMETKB_SYNTHETIC_H_
#define COMETKB_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cometkb/corpus.h"

namespace cometkb {

// A small ATOMIC-style knowledge base from a template grammar: 5 event
// categories, 8 subjects each, the 9 ATOMIC relations and about 2000 tuples.
// One subject per category goes to dev and one to test, so dev and test
// subjects never occur in train. Object phrases depend on the category and
// reuse the subject's verb and noun.
struct SyntheticKb {
  std::vector<KnowledgeTuple> tuples;  // split field set
  // Plain sentences stating every (subject, relation, phrase) combination in
  // words, for language-model pretraining.
  std::vector<std::string> text;
  std::vector<std::string> subjects;
};

SyntheticKb make_synthetic_kb(std::uint64_t seed);

}  // namespace cometkb

#endif  // COMETKB_SYNTHETIC_H_
