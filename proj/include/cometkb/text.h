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

#ifndef COMETKB_TEXT_H_
#define COMETKB_TEXT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cometkb {

// Lowercases, trims, and collapses internal whitespace runs to one space.
std::string normalize_text(std::string_view text);

// Splits on whitespace; empty pieces are dropped.
std::vector<std::string> split_words(std::string_view text);

std::string join_words(std::span<const std::string> words);

// "HasSubevent" -> {"has", "subevent"}; "xIntent" -> {"x", "intent"}.
std::vector<std::string> split_camel_case(std::string_view identifier);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace cometkb

#endif  // COMETKB_TEXT_H_
