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

#include "annoflow/taxonomy.hpp"

#include <algorithm>
#include <set>

#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

void check_versions(const ClassAdjustment &adj, int current) {
  if (adj.from_version != current || adj.to_version != adj.from_version + 1) {
    throw validation_error(
        "VersionSkew",
        "adjustment maps v" + std::to_string(adj.from_version) + " -> v" +
            std::to_string(adj.to_version) + " but data is at v" +
            std::to_string(current),
        {{"from_version", adj.from_version},
         {"to_version", adj.to_version},
         {"current", current}});
  }
}

}  // namespace

LabelScheme validate_adjustment(const LabelScheme &old_scheme,
                                const ClassAdjustment &adj) {
  check_versions(adj, old_scheme.version());
  for (const auto &[from, to] : adj.mapping) {
    if (from == kConflictLabel || to == kConflictLabel || to.empty()) {
      throw validation_error("InvalidMapping",
                             "mapping '" + from + "' -> '" + to +
                                 "' uses a reserved or empty label",
                             {{"from", from}, {"to", to}});
    }
    if (!old_scheme.contains(from)) {
      throw validation_error("UnknownLabel",
                             "mapping names '" + from +
                                 "' which is not in scheme v" +
                                 std::to_string(old_scheme.version()),
                             {{"label", from}});
    }
  }
  json unmapped = json::array();
  for (const auto &l : old_scheme.labels()) {
    if (!adj.mapping.count(l)) unmapped.push_back(l);
  }
  if (!unmapped.empty()) {
    throw validation_error("PartialMapping",
                           "mapping does not cover " + unmapped.dump(),
                           {{"unmapped", unmapped}});
  }
  std::vector<std::string> labels;
  for (const auto &l : old_scheme.labels()) {
    const std::string &image = adj.mapping.at(l);
    if (image == kOutsideLabel) continue;
    if (std::find(labels.begin(), labels.end(), image) == labels.end()) {
      labels.push_back(image);
    }
  }
  return LabelScheme(adj.to_version, std::move(labels));
}

std::vector<AnnotationSet> apply_adjustment(std::span<const AnnotationSet> data,
                                            const ClassAdjustment &adj) {
  std::vector<AnnotationSet> out;
  out.reserve(data.size());
  for (const AnnotationSet &set : data) {
    check_versions(adj, set.scheme_version());
    if (set.has_conflicts()) {
      throw state_error("UnresolvedConflictsPresent",
                        "annotations of " + set.doc_id() +
                            " still contain ??? spans",
                        {{"doc_id", set.doc_id()}});
    }
    std::vector<Span> spans;
    for (const Span &s : set.spans()) {
      auto it = adj.mapping.find(s.label());
      if (it == adj.mapping.end()) {
        throw validation_error("UnknownLabel",
                               "label '" + s.label() + "' in " + set.doc_id() +
                                   " is not covered by the mapping",
                               {{"doc_id", set.doc_id()}, {"label", s.label()}});
      }
      if (it->second == kOutsideLabel) continue;
      spans.push_back(s.with_label(it->second));
    }
    out.emplace_back(set.doc_id(), set.author(), adj.to_version,
                     std::move(spans));
  }
  return out;
}

json to_json(const ClassAdjustment &adj) {
  return {{"from_version", adj.from_version},
          {"to_version", adj.to_version},
          {"mapping", adj.mapping},
          {"rationale", adj.rationale},
          {"timestamp", adj.timestamp}};
}

ClassAdjustment class_adjustment_from_json(const json &j) {
  return parse_or_throw("class adjustment", [&] {
    ClassAdjustment adj;
    adj.from_version = j.at("from_version").get<int>();
    adj.to_version = j.at("to_version").get<int>();
    adj.mapping = j.at("mapping").get<std::map<std::string, std::string>>();
    adj.rationale = j.value("rationale", std::string());
    adj.timestamp = j.value("timestamp", std::string());
    return adj;
  });
}

}  // namespace annoflow
