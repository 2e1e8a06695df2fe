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

#include "annoflow/merge.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

json key_json(const Span &s) {
  return {{"start", s.start()}, {"end", s.end()}, {"label", s.label()}};
}

const Span &variant_at(const Conflict &c, const Resolution &r) {
  std::size_t index = 0;
  if (r.variant_index) {
    index = static_cast<std::size_t>(*r.variant_index);
  }
  return c.variants.at(index);
}

void require_absent(const Resolution &r, bool index, bool label, bool range) {
  auto bad = [&](const char *field) {
    throw validation_error("InvalidResolution",
                           "field '" + std::string(field) +
                               "' not allowed for action " +
                               to_string(r.action),
                           {{"conflict_id", r.conflict_id}});
  };
  if (index && r.variant_index) bad("variant_index");
  if (label && r.label) bad("label");
  if (range && (r.start || r.end)) bad("start/end");
}

std::vector<Span> resolve(const AnnotationSet &merged,
                          std::span<const Conflict> conflicts,
                          std::span<const Resolution> resolutions,
                          const LabelScheme &scheme,
                          std::optional<std::size_t> text_length,
                          bool require_complete) {
  if (merged.scheme_version() != scheme.version()) {
    throw validation_error("SchemeMismatch",
                           "merged set and scheme versions differ",
                           {{"doc_id", merged.doc_id()}});
  }
  std::map<std::string, const Conflict *> by_id;
  std::multiset<Span> expected_variants;
  for (const Conflict &c : conflicts) {
    if (c.doc_id != merged.doc_id()) {
      throw validation_error(
          "DocMismatch",
          "conflict " + c.conflict_id + " does not belong to " + merged.doc_id(),
          {{"conflict_id", c.conflict_id}, {"doc_id", merged.doc_id()}});
    }
    if (!by_id.emplace(c.conflict_id, &c).second) {
      throw validation_error("DuplicateConflict",
                             "duplicate conflict id " + c.conflict_id,
                             {{"conflict_id", c.conflict_id}});
    }
    expected_variants.insert(c.variants.begin(), c.variants.end());
  }
  std::multiset<Span> present_variants;
  for (const Span &s : merged.spans()) {
    if (s.is_conflict()) present_variants.insert(s);
  }
  if (present_variants != expected_variants) {
    throw validation_error(
        "ConflictMismatch",
        "conflict list does not match the ??? spans of " + merged.doc_id(),
        {{"doc_id", merged.doc_id()}});
  }

  std::vector<Span> spans;
  for (const Span &s : merged.spans()) {
    if (!s.is_conflict()) spans.push_back(s);
  }
  std::map<Span, std::string> produced_by;
  std::set<std::string> resolved;
  for (const Resolution &r : resolutions) {
    auto it = by_id.find(r.conflict_id);
    if (it == by_id.end()) {
      throw not_found_error("UnknownConflict",
                            "unknown conflict id " + r.conflict_id,
                            {{"conflict_id", r.conflict_id}});
    }
    if (!resolved.insert(r.conflict_id).second) {
      throw validation_error("DuplicateResolution",
                             "more than one resolution for " + r.conflict_id,
                             {{"conflict_id", r.conflict_id}});
    }
    validate_resolution(r, *it->second, scheme, text_length);
    if (auto span = resolved_span(r, *it->second)) {
      produced_by.emplace(*span, r.conflict_id);
      spans.push_back(std::move(*span));
    }
  }
  if (require_complete && resolved.size() != by_id.size()) {
    json ids = json::array();
    for (const auto &[id, c] : by_id) {
      if (!resolved.count(id)) ids.push_back(id);
    }
    throw state_error("UnresolvedConflict",
                      std::to_string(ids.size()) +
                          " conflict(s) without resolution: " + ids.dump(),
                      {{"conflict_ids", ids}});
  }

  std::sort(spans.begin(), spans.end());
  if (auto hit = find_overlap(spans)) {
    json detail = {{"doc_id", merged.doc_id()},
                   {"spans", {key_json(hit->first), key_json(hit->second)}}};
    json ids = json::array();
    for (const Span *s : {&hit->first, &hit->second}) {
      auto p = produced_by.find(*s);
      ids.push_back(p == produced_by.end() ? json(nullptr) : json(p->second));
    }
    detail["conflict_ids"] = ids;
    throw validation_error(
        "OverlapAfterResolution",
        "resolved span (" + std::to_string(hit->second.start()) + "," +
            std::to_string(hit->second.end()) + ") collides with (" +
            std::to_string(hit->first.start()) + "," +
            std::to_string(hit->first.end()) + ") in " + merged.doc_id(),
        detail);
  }
  return spans;
}

}  // namespace

std::size_t Conflict::start() const {
  std::size_t s = variants.front().start();
  for (const Span &v : variants) s = std::min(s, v.start());
  return s;
}

std::size_t Conflict::end() const {
  std::size_t e = 0;
  for (const Span &v : variants) e = std::max(e, v.end());
  return e;
}

MergeResult merge_pair(const AnnotationSet &a, const AnnotationSet &b) {
  if (a.doc_id() != b.doc_id()) {
    throw validation_error("DocMismatch",
                           "cannot merge " + a.doc_id() + " with " + b.doc_id(),
                           {{"a", a.doc_id()}, {"b", b.doc_id()}});
  }
  if (a.author() == b.author()) {
    throw validation_error("SameAuthor",
                           "both sets of " + a.doc_id() + " are by " +
                               a.author(),
                           {{"doc_id", a.doc_id()}, {"author", a.author()}});
  }
  if (a.scheme_version() != b.scheme_version()) {
    throw validation_error(
        "SchemeMismatch",
        "scheme versions differ for " + a.doc_id() + ": " +
            std::to_string(a.scheme_version()) + " vs " +
            std::to_string(b.scheme_version()),
        {{"doc_id", a.doc_id()}});
  }
  if (a.is_merged() || b.is_merged()) {
    throw validation_error("UnexpectedConflictLabel",
                           "merge inputs must be individual or gold sets",
                           {{"doc_id", a.doc_id()}});
  }

  // Each side is overlap-free, so an exact (start, end, label) partner is
  // unique when it exists.
  std::map<std::tuple<std::size_t, std::size_t, std::string>, const Span *>
      b_keys;
  for (const Span &s : b.spans()) {
    b_keys.emplace(std::make_tuple(s.start(), s.end(), s.label()), &s);
  }
  std::vector<Span> agreed;
  std::vector<Span> variants;
  std::set<const Span *> matched_b;
  for (const Span &s : a.spans()) {
    auto it = b_keys.find(std::make_tuple(s.start(), s.end(), s.label()));
    if (it == b_keys.end()) {
      variants.push_back(Span::conflict(s.start(), s.end(), s.label(),
                                        a.author(), s.confidence()));
      continue;
    }
    matched_b.insert(it->second);
    agreed.push_back(*it->second == s ? s : Span(s.start(), s.end(), s.label()));
  }
  for (const Span &s : b.spans()) {
    if (matched_b.count(&s)) continue;
    variants.push_back(Span::conflict(s.start(), s.end(), s.label(),
                                      b.author(), s.confidence()));
  }

  std::sort(variants.begin(), variants.end());
  std::vector<Conflict> conflicts;
  std::size_t reach = 0;
  for (const Span &v : variants) {
    if (conflicts.empty() || v.start() >= reach) {
      Conflict c;
      c.doc_id = a.doc_id();
      c.conflict_id = a.doc_id() + "#" + std::to_string(conflicts.size() + 1);
      conflicts.push_back(std::move(c));
    }
    conflicts.back().variants.push_back(v);
    reach = conflicts.back().variants.size() == 1 ? v.end()
                                                  : std::max(reach, v.end());
  }

  std::vector<Span> all = agreed;
  all.insert(all.end(), variants.begin(), variants.end());
  return {AnnotationSet(a.doc_id(), std::string(kMergedAuthor),
                        a.scheme_version(), std::move(all)),
          std::move(conflicts)};
}

void validate_resolution(const Resolution &r, const Conflict &conflict,
                         const LabelScheme &scheme,
                         std::optional<std::size_t> text_length) {
  auto fail = [&](const std::string &msg) {
    throw validation_error("InvalidResolution", r.conflict_id + ": " + msg,
                           {{"conflict_id", r.conflict_id}});
  };
  if (r.resolver.empty()) fail("resolver must be nonempty");
  auto check_label = [&](const std::string &label) {
    if (!scheme.contains(label)) {
      throw validation_error(
          "UnknownLabel",
          r.conflict_id + ": label '" + label + "' is not in scheme v" +
              std::to_string(scheme.version()),
          {{"conflict_id", r.conflict_id}, {"label", label}});
    }
  };
  auto check_index = [&](bool required) {
    if (!r.variant_index) {
      if (required || conflict.variants.size() != 1) {
        fail("variant_index is required");
      }
      return;
    }
    if (*r.variant_index < 0 ||
        static_cast<std::size_t>(*r.variant_index) >= conflict.variants.size()) {
      fail("variant_index " + std::to_string(*r.variant_index) +
           " out of range");
    }
  };
  switch (r.action) {
    case ResolutionAction::kAcceptVariant:
      require_absent(r, false, true, true);
      check_index(true);
      check_label(*variant_at(conflict, r).candidate_label());
      break;
    case ResolutionAction::kRelabel:
      require_absent(r, false, false, true);
      check_index(false);
      if (!r.label) fail("relabel needs a label");
      check_label(*r.label);
      break;
    case ResolutionAction::kReshape:
      require_absent(r, true, false, false);
      if (!r.label || !r.start || !r.end) {
        fail("reshape needs start, end and label");
      }
      check_label(*r.label);
      if (*r.start >= *r.end) fail("reshape needs start < end");
      if (text_length && *r.end > *text_length) {
        fail("reshape end " + std::to_string(*r.end) +
             " exceeds document length " + std::to_string(*text_length));
      }
      break;
    case ResolutionAction::kDrop:
      require_absent(r, true, true, true);
      break;
  }
}

std::optional<Span> resolved_span(const Resolution &r,
                                  const Conflict &conflict) {
  switch (r.action) {
    case ResolutionAction::kAcceptVariant: {
      const Span &v = variant_at(conflict, r);
      return Span(v.start(), v.end(), *v.candidate_label());
    }
    case ResolutionAction::kRelabel: {
      const Span &v = variant_at(conflict, r);
      return Span(v.start(), v.end(), *r.label);
    }
    case ResolutionAction::kReshape:
      return Span(*r.start, *r.end, *r.label);
    case ResolutionAction::kDrop:
      return std::nullopt;
  }
  return std::nullopt;
}

AnnotationSet apply_resolutions(const AnnotationSet &merged,
                                std::span<const Conflict> conflicts,
                                std::span<const Resolution> resolutions,
                                const LabelScheme &scheme,
                                std::optional<std::size_t> text_length) {
  return AnnotationSet(merged.doc_id(), std::string(kGoldAuthor),
                       merged.scheme_version(),
                       resolve(merged, conflicts, resolutions, scheme,
                               text_length, true));
}

std::vector<Span> check_partial_resolutions(
    const AnnotationSet &merged, std::span<const Conflict> conflicts,
    std::span<const Resolution> resolutions, const LabelScheme &scheme,
    std::optional<std::size_t> text_length) {
  return resolve(merged, conflicts, resolutions, scheme, text_length, false);
}

std::string to_string(ResolutionAction action) {
  switch (action) {
    case ResolutionAction::kAcceptVariant:
      return "accept_variant";
    case ResolutionAction::kRelabel:
      return "relabel";
    case ResolutionAction::kReshape:
      return "reshape";
    case ResolutionAction::kDrop:
      return "drop";
  }
  return "drop";
}

ResolutionAction resolution_action_from_string(const std::string &s) {
  if (s == "accept_variant") return ResolutionAction::kAcceptVariant;
  if (s == "relabel") return ResolutionAction::kRelabel;
  if (s == "reshape") return ResolutionAction::kReshape;
  if (s == "drop") return ResolutionAction::kDrop;
  throw validation_error("InvalidResolution", "unknown action '" + s + "'",
                         {{"action", s}});
}

std::string to_string(ConflictStatus status) {
  return status == ConflictStatus::kOpen ? "open" : "resolved";
}

json to_json(const Conflict &c) {
  json variants = json::array();
  for (const Span &v : c.variants) variants.push_back(to_json(v));
  return {{"conflict_id", c.conflict_id},
          {"doc_id", c.doc_id},
          {"variants", std::move(variants)},
          {"status", to_string(c.status)}};
}

Conflict conflict_from_json(const json &j) {
  return parse_or_throw("conflict", [&] {
    Conflict c;
    c.conflict_id = j.at("conflict_id").get<std::string>();
    c.doc_id = j.at("doc_id").get<std::string>();
    for (const json &v : j.at("variants")) {
      c.variants.push_back(span_from_json(v));
    }
    const auto status = j.value("status", std::string("open"));
    if (status != "open" && status != "resolved") {
      throw validation_error("SchemaViolation",
                             "unknown conflict status '" + status + "'");
    }
    c.status = status == "open" ? ConflictStatus::kOpen
                                : ConflictStatus::kResolved;
    if (c.variants.empty()) {
      throw validation_error("SchemaViolation",
                             "conflict " + c.conflict_id + " has no variants");
    }
    for (const Span &v : c.variants) {
      if (!v.is_conflict()) {
        throw validation_error("SchemaViolation", "conflict " + c.conflict_id +
                                                      " has a non-??? variant");
      }
    }
    return c;
  });
}

json to_json(const Resolution &r) {
  return {{"conflict_id", r.conflict_id},
          {"action", to_string(r.action)},
          {"variant_index", optional_to_json(r.variant_index)},
          {"label", optional_to_json(r.label)},
          {"start", optional_to_json(r.start)},
          {"end", optional_to_json(r.end)},
          {"resolver", r.resolver}};
}

Resolution resolution_from_json(const json &j) {
  return parse_or_throw("resolution", [&] {
    Resolution r;
    r.conflict_id = j.at("conflict_id").get<std::string>();
    r.action = resolution_action_from_string(j.at("action").get<std::string>());
    if (auto v = optional_integer(j, "variant_index")) {
      r.variant_index = static_cast<int>(*v);
    }
    r.label = optional_string(j, "label");
    auto offset = [&](const char *key) -> std::optional<std::size_t> {
      auto v = optional_integer(j, key);
      if (!v) return std::nullopt;
      if (*v < 0) {
        throw validation_error("InvalidResolution",
                               std::string(key) + " must be >= 0");
      }
      return static_cast<std::size_t>(*v);
    };
    r.start = offset("start");
    r.end = offset("end");
    r.resolver = j.value("resolver", std::string("collective"));
    return r;
  });
}

}  // namespace annoflow
