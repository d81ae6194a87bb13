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

#include "cometkb/dataset.h"

#include <fstream>
#include <sstream>

#include "cometkb/error.h"
#include "json.hpp"

namespace cometkb {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Layout PreparedDataset::layout(RelationMode mode, bool meta_tokens) const {
  Layout l = Layout::defaults_for(schemas, mode, meta_tokens);
  l.max_subject = max_subject;
  l.max_object = max_object;
  return l;
}

void save_dataset(const std::filesystem::path& dir, const PreparedDataset& d) {
  std::filesystem::create_directories(dir);
  json manifest = {{"format_version", kDatasetFormatVersion},
                   {"schema", d.schemas.name()},
                   {"max_subject", d.max_subject},
                   {"max_object", d.max_object},
                   {"min_count", d.min_count},
                   {"vocab_hash", d.vocab.hash()},
                   {"vocab_size", d.vocab.size()},
                   {"counts",
                    {{"train", d.split.train.size()},
                     {"dev", d.split.dev.size()},
                     {"test", d.split.test.size()}}},
                   {"text_lines", d.text.size()}};
  manifest["relation_subset"] =
      d.split.relation_subset ? json(*d.split.relation_subset) : json(nullptr);
  write_file(dir / "dataset.json", manifest.dump(2) + "\n");
  write_file(dir / "schema.json", d.schemas.to_json() + "\n");
  write_file(dir / "vocab.json", d.vocab.to_json() + "\n");
  write_tuples(dir / "train.jsonl", d.split.train);
  write_tuples(dir / "dev.jsonl", d.split.dev);
  write_tuples(dir / "test.jsonl", d.split.test);
  if (!d.text.empty()) {
    std::string text;
    for (const auto& line : d.text) text += line + "\n";
    write_file(dir / "text.txt", text);
  }
}

PreparedDataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "dataset.json")) {
    throw DataError(dir.string() + " is not a prepared dataset (no dataset.json)");
  }
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "dataset.json"));
  } catch (const json::exception& e) {
    throw DataError("dataset.json: " + std::string(e.what()));
  }
  if (manifest.value("format_version", -1) != kDatasetFormatVersion) {
    throw DataError("dataset.json: unsupported format version");
  }
  PreparedDataset d;
  d.schemas = SchemaSet::from_json(read_file(dir / "schema.json"),
                                   manifest.value("schema", std::string("custom")));
  d.vocab = Vocabulary::from_json(read_file(dir / "vocab.json"));
  if (d.vocab.hash() != manifest.value("vocab_hash", std::string())) {
    throw DataError("vocab.json does not match the hash recorded in dataset.json");
  }
  d.max_subject = manifest.at("max_subject").get<int>();
  d.max_object = manifest.at("max_object").get<int>();
  d.min_count = manifest.value("min_count", 1);
  if (manifest.contains("relation_subset") && !manifest["relation_subset"].is_null()) {
    d.split.relation_subset = manifest["relation_subset"].get<std::set<std::string>>();
  }
  d.split.train = load_tuples(dir / "train.jsonl", TupleFormat::kJsonl, d.schemas);
  d.split.dev = load_tuples(dir / "dev.jsonl", TupleFormat::kJsonl, d.schemas);
  d.split.test = load_tuples(dir / "test.jsonl", TupleFormat::kJsonl, d.schemas);
  if (std::filesystem::exists(dir / "text.txt")) {
    std::istringstream in(read_file(dir / "text.txt"));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) d.text.push_back(line);
    }
  }
  return d;
}

}  // namespace cometkb
