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

#ifndef ANNOFLOW_TAXONOMY_HPP_
#define ANNOFLOW_TAXONOMY_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "annoflow/io.hpp"
#include "annoflow/types.hpp"

namespace annoflow {

// An irreversible simplification of the class system: every old label maps
// to a new label or to "O" (dropped). There is deliberately no inverse.
struct ClassAdjustment {
  int from_version = 1;
  int to_version = 2;
  std::map<std::string, std::string> mapping;
  std::string rationale;
  std::string timestamp;  // RFC 3339

  friend bool operator==(const ClassAdjustment &,
                         const ClassAdjustment &) = default;
};

// The scheme after `adj`: distinct non-O images in the order of the old
// labels that first produce them.
//
// Throws "VersionSkew", "PartialMapping" (detail.unmapped), "UnknownLabel"
// or "InvalidMapping" (reserved `???` on either side).
LabelScheme validate_adjustment(const LabelScheme &old_scheme,
                                const ClassAdjustment &adj);

// Relabels finalized or individual data. Spans mapped to O disappear;
// neighbouring spans that end up with the same label stay separate.
//
// Throws "VersionSkew", "UnresolvedConflictsPresent" or "UnknownLabel".
std::vector<AnnotationSet> apply_adjustment(std::span<const AnnotationSet> data,
                                            const ClassAdjustment &adj);

json to_json(const ClassAdjustment &adj);
ClassAdjustment class_adjustment_from_json(const json &j);

}  // namespace annoflow

#endif  // ANNOFLOW_TAXONOMY_HPP_
