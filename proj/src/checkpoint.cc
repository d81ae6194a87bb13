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

#include "cometkb/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cometkb/error.h"
#include "json.hpp"

namespace cometkb {

using nlohmann::json;

namespace {

static_assert(sizeof(float) == 4);

void put_float(std::string& out, float value) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

float get_float(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

json config_json(const ModelConfig& c) {
  return json{{"n_layers", c.n_layers},       {"d_model", c.d_model},
              {"n_heads", c.n_heads},         {"d_ff", c.d_ff},
              {"max_seq_len", c.max_seq_len}, {"dropout", c.dropout},
              {"vocab_size", c.vocab_size}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.n_layers = j.at("n_layers").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.vocab_size = j.at("vocab_size").get<int>();
  return c;
}

// Empty parameter set with every tensor shaped for `config`.
Parameters<float> shaped_like(const ModelConfig& config) {
  return init_parameters<float>(config, 0, 0);
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) {
  return config_json(config).dump();
}

ModelConfig model_config_from_json(std::string_view json_text) {
  try {
    return config_from(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  json tensors = json::array();
  std::size_t offset = 0;
  visit_slots(checkpoint.params, [&](const std::string& name, ParamKind,
                                     const nn::Tensor<float>& t) {
    tensors.push_back(json{{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size() * sizeof(float);
  });
  json manifest = {{"format_version", kCheckpointFormatVersion},
                   {"config", config_json(checkpoint.config)},
                   {"vocab_hash", checkpoint.vocab_hash},
                   {"metadata", checkpoint.metadata},
                   {"payload_bytes", offset},
                   {"tensors", tensors}};
  std::string out = manifest.dump();
  out.push_back('\n');
  out.reserve(out.size() + offset);
  visit_slots(checkpoint.params, [&](const std::string&, ParamKind,
                                     const nn::Tensor<float>& t) {
    for (float v : t.values()) put_float(out, v);
  });
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes,
                            std::optional<std::string_view> expected_vocab_hash) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) {
    throw TruncatedCheckpointError("checkpoint manifest is not terminated");
  }
  json manifest;
  try {
    manifest = json::parse(bytes.substr(0, newline));
  } catch (const json::exception&) {
    throw TruncatedCheckpointError("checkpoint manifest is not valid JSON");
  }
  const int version = manifest.value("format_version", -1);
  if (version != kCheckpointFormatVersion) {
    throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                 ", this build reads version " +
                                 std::to_string(kCheckpointFormatVersion));
  }

  Checkpoint ck;
  try {
    ck.config = config_from(manifest.at("config"));
    ck.vocab_hash = manifest.at("vocab_hash").get<std::string>();
    ck.metadata = manifest.value("metadata", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint manifest: ") + e.what());
  }
  if (expected_vocab_hash && *expected_vocab_hash != ck.vocab_hash) {
    throw VocabMismatchError("checkpoint vocabulary " + ck.vocab_hash +
                             " does not match vocabulary " +
                             std::string(*expected_vocab_hash));
  }

  ck.params = shaped_like(ck.config);
  const std::string_view payload = bytes.substr(newline + 1);
  const json& tensors = manifest.at("tensors");
  std::size_t index = 0;
  visit_slots(ck.params, [&](const std::string& name, ParamKind, nn::Tensor<float>& t) {
    if (index >= tensors.size()) {
      throw CheckpointError("checkpoint lacks tensor " + name);
    }
    const json& entry = tensors[index++];
    if (entry.at("name").get<std::string>() != name ||
        entry.at("shape").get<std::vector<int>>() != t.shape()) {
      throw CheckpointError("checkpoint tensor " + std::to_string(index - 1) +
                            " does not match " + name + " " + t.shape_string());
    }
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t need = t.size() * sizeof(float);
    if (offset + need > payload.size()) {
      throw TruncatedCheckpointError("checkpoint payload ends inside tensor " + name);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = get_float(payload.data() + offset + 4 * i);
    }
  });
  if (index != tensors.size()) throw CheckpointError("checkpoint has extra tensors");
  if (payload.size() != manifest.value("payload_bytes", payload.size())) {
    throw TruncatedCheckpointError("checkpoint payload has " +
                                   std::to_string(payload.size()) + " bytes, manifest says " +
                                   manifest.at("payload_bytes").dump());
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::string_view> expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str(), expected_vocab_hash);
}

}  // namespace cometkb
