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

#ifndef ANNOFLOW_MERGE_HPP_
#define ANNOFLOW_MERGE_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annoflow/io.hpp"
#include "annoflow/types.hpp"

namespace annoflow {

enum class ConflictStatus { kOpen, kResolved };

// A region of disagreement: one or more `???` variants that overlap
// transitively. Ids are "<doc_id>#<n>", n counting from 1 in text order.
struct Conflict {
  std::string conflict_id;
  std::string doc_id;
  std::vector<Span> variants;
  ConflictStatus status = ConflictStatus::kOpen;

  std::size_t start() const;
  std::size_t end() const;

  friend bool operator==(const Conflict &, const Conflict &) = default;
};

enum class ResolutionAction { kAcceptVariant, kRelabel, kReshape, kDrop };

struct Resolution {
  std::string conflict_id;
  ResolutionAction action = ResolutionAction::kDrop;
  std::optional<int> variant_index;
  std::optional<std::string> label;
  std::optional<std::size_t> start;
  std::optional<std::size_t> end;
  std::string resolver = "collective";

  friend bool operator==(const Resolution &, const Resolution &) = default;
};

struct MergeResult {
  AnnotationSet merged;
  std::vector<Conflict> conflicts;
};

// Stage-2 merge of two annotators' sets for one document. Spans with equal
// (start, end, label) on both sides are kept as agreed; every other span
// becomes a `???` variant carrying its original label and author, and
// variants are grouped into conflicts by transitive overlap.
//
// Throws "DocMismatch", "SchemeMismatch", "SameAuthor" or
// "UnexpectedConflictLabel" (an input is itself a merged set).
MergeResult merge_pair(const AnnotationSet &a, const AnnotationSet &b);

// Checks the shape of a resolution against its conflict and the scheme
// (variant index in range, label known, offsets well formed).
void validate_resolution(const Resolution &r, const Conflict &conflict,
                         const LabelScheme &scheme,
                         std::optional<std::size_t> text_length = std::nullopt);

// The span a resolution produces, or nothing for a drop.
std::optional<Span> resolved_span(const Resolution &r,
                                  const Conflict &conflict);

// Stage-3: agreed spans plus one outcome per conflict, as a GOLD set.
// Every conflict needs exactly one resolution.
//
// Throws "UnresolvedConflict" (detail.conflict_ids), "UnknownConflict",
// "DuplicateResolution" or "OverlapAfterResolution" (detail.spans).
AnnotationSet apply_resolutions(
    const AnnotationSet &merged, std::span<const Conflict> conflicts,
    std::span<const Resolution> resolutions, const LabelScheme &scheme,
    std::optional<std::size_t> text_length = std::nullopt);

// Like apply_resolutions but tolerates conflicts that have no resolution
// yet; used to reject a colliding decision as soon as it is submitted.
// Returns the spans decided so far (agreed + resolved).
std::vector<Span> check_partial_resolutions(
    const AnnotationSet &merged, std::span<const Conflict> conflicts,
    std::span<const Resolution> resolutions, const LabelScheme &scheme,
    std::optional<std::size_t> text_length = std::nullopt);

std::string to_string(ResolutionAction action);
ResolutionAction resolution_action_from_string(const std::string &s);
std::string to_string(ConflictStatus status);

json to_json(const Conflict &c);
Conflict conflict_from_json(const json &j);
json to_json(const Resolution &r);
Resolution resolution_from_json(const json &j);

}  // namespace annoflow

#endif  // ANNOFLOW_MERGE_HPP_
