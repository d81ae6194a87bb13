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

#ifndef COMETKB_KEY_VALUE_H_
#define COMETKB_KEY_VALUE_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cometkb {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// `key = value` per line; blank lines and lines starting with '#' are skipped.
// Later duplicates override earlier ones. Throws ConfigError with the line.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& values);

}  // namespace cometkb

#endif  // COMETKB_KEY_VALUE_H_
