// Copyright 2026 The Annoflow Authors.
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

#ifndef ANNOFLOW_TOKENIZE_HPP_
#define ANNOFLOW_TOKENIZE_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annoflow/types.hpp"

namespace annoflow {

enum class CharClass { kSpace, kWord, kPunct };

// Fixed, table-driven classification (no locale, no ICU) so tokenization is
// identical on every platform. ASCII letters/digits and all non-ASCII code
// points outside the listed space, punctuation and symbol blocks are word
// characters.
CharClass classify(char32_t cp);

// Maximal runs of word characters form one token, every other non-space
// character is a token by itself, whitespace separates.
std::vector<TokenSpan> tokenize(std::u32string_view text);
std::vector<TokenSpan> tokenize(std::string_view utf8_text);

// Token spans per document id.
using TokenIndex = std::map<std::string, std::vector<TokenSpan>>;

TokenIndex tokenize_corpus(std::span<const Document> docs);

}  // namespace annoflow

#endif  // ANNOFLOW_TOKENIZE_HPP_
