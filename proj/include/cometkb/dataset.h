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

#ifndef COMETKB_DATASET_H_
#define COMETKB_DATASET_H_

#include <filesystem>
#include <string>
#include <vector>

#include "cometkb/corpus.h"
#include "cometkb/vocab.h"

namespace cometkb {

inline constexpr int kDatasetFormatVersion = 1;

// The output of `cometkb prepare`: partitions, schema, vocabulary, segment
// widths and optional pretraining text, stored together in one directory.
struct PreparedDataset {
  SchemaSet schemas;
  Vocabulary vocab;
  DatasetSplit split;
  int max_subject = 17;
  int max_object = 15;
  int min_count = 1;
  std::vector<std::string> text;

  // Layout for a rendering mode; the relation width follows the schema.
  Layout layout(RelationMode mode, bool meta_tokens) const;
};

// Writes dataset.json, schema.json, vocab.json, {train,dev,test}.jsonl and,
// when present, text.txt.
void save_dataset(const std::filesystem::path& dir, const PreparedDataset& dataset);
// Throws DataError when a file is missing or the vocabulary hash disagrees
// with the manifest.
PreparedDataset load_dataset(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cometkb

#endif  // COMETKB_DATASET_H_
