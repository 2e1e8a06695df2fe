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

#include "annoflow/tokenize.hpp"

#include "annoflow/utf8.hpp"

namespace annoflow {

namespace {

struct Range {
  char32_t lo;
  char32_t hi;
};

constexpr Range kSpaceRanges[] = {
    {0x0009, 0x000D}, {0x0020, 0x0020}, {0x0085, 0x0085}, {0x00A0, 0x00A0},
    {0x1680, 0x1680}, {0x2000, 0x200A}, {0x2028, 0x2029}, {0x202F, 0x202F},
    {0x205F, 0x205F}, {0x3000, 0x3000},
};

// Non-ASCII blocks treated as punctuation/symbols.
constexpr Range kPunctRanges[] = {
    {0x0080, 0x00BF},    // Latin-1 controls, punctuation, currency
    {0x00D7, 0x00D7},    // multiplication sign
    {0x00F7, 0x00F7},    // division sign
    {0x2000, 0x2BFF},    // general punctuation through misc symbols/arrows
    {0x2E00, 0x2E7F},    // supplemental punctuation
    {0x3001, 0x303F},    // CJK punctuation
    {0xE000, 0xF8FF},    // private use
    {0xFE10, 0xFE1F},    // vertical forms
    {0xFE30, 0xFE6F},    // CJK compatibility forms, small forms
    {0xFEFF, 0xFEFF},    // byte order mark
    {0xFF01, 0xFF0F},    // fullwidth ASCII punctuation
    {0xFF1A, 0xFF20},
    {0xFF3B, 0xFF40},
    {0xFF5B, 0xFF65},
    {0x1F000, 0x1FAFF},  // emoji and pictographs
};

template <std::size_t N>
bool in_ranges(char32_t cp, const Range (&ranges)[N]) {
  for (const Range &r : ranges) {
    if (cp >= r.lo && cp <= r.hi) return true;
  }
  return false;
}

}  // namespace

CharClass classify(char32_t cp) {
  if (in_ranges(cp, kSpaceRanges)) return CharClass::kSpace;
  if (cp < 0x80) {
    const bool alnum = (cp >= U'0' && cp <= U'9') ||
                       (cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z');
    return alnum ? CharClass::kWord : CharClass::kPunct;
  }
  return in_ranges(cp, kPunctRanges) ? CharClass::kPunct : CharClass::kWord;
}

std::vector<TokenSpan> tokenize(std::u32string_view text) {
  std::vector<TokenSpan> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    switch (classify(text[i])) {
      case CharClass::kSpace:
        ++i;
        break;
      case CharClass::kPunct:
        tokens.push_back({i, i + 1});
        ++i;
        break;
      case CharClass::kWord: {
        std::size_t j = i + 1;
        while (j < text.size() && classify(text[j]) == CharClass::kWord) ++j;
        tokens.push_back({i, j});
        i = j;
        break;
      }
    }
  }
  return tokens;
}

std::vector<TokenSpan> tokenize(std::string_view utf8_text) {
  return tokenize(std::u32string_view(decode_utf8(utf8_text)));
}

TokenIndex tokenize_corpus(std::span<const Document> docs) {
  TokenIndex index;
  for (const Document &doc : docs) {
    index.emplace(doc.id(), tokenize(std::u32string_view(doc.scalars())));
  }
  return index;
}

}  // namespace annoflow
