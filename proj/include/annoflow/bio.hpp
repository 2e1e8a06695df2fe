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

#ifndef ANNOFLOW_BIO_HPP_
#define ANNOFLOW_BIO_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annoflow/types.hpp"

namespace annoflow {

// Encodes non-overlapping entity spans as one BIO tag per token. A token takes
// a span's label when it shares at least one character with it; the first
// such token gets B-, later ones I-. If a token touches two spans (possible
// with boundaries inside a token) the earlier span keeps it.
//
// Throws "OverlappingSpans" or "UnexpectedConflictLabel".
std::vector<std::string> spans_to_bio(std::span<const TokenSpan> tokens,
                                      std::span<const Span> spans);

// Decodes BIO tags back to token-aligned spans. An I-X that does not continue
// a B-X/I-X run is read as B-X. Throws "LengthMismatch" or "InvalidTag".
std::vector<Span> bio_to_spans(std::span<const TokenSpan> tokens,
                               std::span<const std::string> tags);

// "B-X" / "I-X" -> "X", "O" -> "O".
std::string_view strip_bio(std::string_view tag);

// Token-level class of every token ("O" or an entity label).
std::vector<std::string> token_labels(std::span<const TokenSpan> tokens,
                                      std::span<const Span> spans);

}  // namespace annoflow

#endif  // ANNOFLOW_BIO_HPP_
