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

#ifndef COMETKB_CHECKPOINT_H_
#define COMETKB_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "cometkb/model.h"

namespace cometkb {

inline constexpr int kCheckpointFormatVersion = 1;

// A checkpoint file is one line of JSON (the manifest), a newline, then the
// float32 little-endian payload of every tensor in manifest order.
struct Checkpoint {
  ModelConfig config;
  std::string vocab_hash;
  // Free-form string settings the producer wants to travel with the weights
  // (encoding layout, relation mode and so on).
  std::map<std::string, std::string> metadata;
  Parameters<float> params;
};

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view json_text);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
// Throws CheckpointVersionError, VocabMismatchError (when expected_vocab_hash
// is given and differs) or TruncatedCheckpointError.
Checkpoint parse_checkpoint(std::string_view bytes,
                            std::optional<std::string_view> expected_vocab_hash = {});

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::string_view> expected_vocab_hash = {});

}  // namespace cometkb

#endif  // COMETKB_CHECKPOINT_H_
