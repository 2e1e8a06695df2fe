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

#include "annoflow/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "annoflow/errors.hpp"
#include "annoflow/utf8.hpp"

namespace annoflow {

namespace {

nlohmann::json span_json(const Span &s) {
  nlohmann::json j = {{"start", s.start()}, {"end", s.end()},
                      {"label", s.label()}};
  if (s.candidate_label()) j["candidate_label"] = *s.candidate_label();
  if (s.origin()) j["origin"] = *s.origin();
  return j;
}

}  // namespace

Document::Document(std::string id, std::string text,
                   std::map<std::string, std::string> meta)
    : id_(std::move(id)), text_(std::move(text)), meta_(std::move(meta)) {
  if (id_.empty()) {
    throw validation_error("InvalidDocument", "document id must be nonempty");
  }
  scalars_ = decode_utf8(text_);
  if (scalars_.empty()) {
    throw validation_error("InvalidDocument",
                           "document '" + id_ + "' has empty text",
                           {{"doc_id", id_}});
  }
}

std::string Document::slice(std::size_t start, std::size_t end) const {
  end = std::min(end, scalars_.size());
  start = std::min(start, end);
  return encode_utf8(std::u32string_view(scalars_).substr(start, end - start));
}

Span::Span(std::size_t start, std::size_t end, std::string label,
           std::optional<std::string> origin,
           std::optional<std::string> candidate_label,
           std::optional<double> confidence)
    : start_(start),
      end_(end),
      label_(std::move(label)),
      candidate_label_(std::move(candidate_label)),
      origin_(std::move(origin)),
      confidence_(confidence) {
  if (start_ >= end_) {
    throw validation_error("InvalidSpan", "span must satisfy start < end",
                           span_json(*this));
  }
  if (label_.empty() || label_ == kOutsideLabel) {
    throw validation_error("InvalidSpan",
                           "span label must be a nonempty entity class",
                           span_json(*this));
  }
  if (is_conflict()) {
    if (!candidate_label_ || !origin_) {
      throw validation_error(
          "InvalidSpan", "conflict span needs candidate_label and origin",
          span_json(*this));
    }
    if (candidate_label_->empty() || *candidate_label_ == kConflictLabel ||
        *candidate_label_ == kOutsideLabel) {
      throw validation_error("InvalidSpan", "invalid candidate_label",
                             span_json(*this));
    }
  } else if (candidate_label_) {
    throw validation_error("InvalidSpan",
                           "candidate_label is only allowed on ??? spans",
                           span_json(*this));
  }
  if (confidence_ &&
      (!std::isfinite(*confidence_) || *confidence_ < 0 || *confidence_ > 1)) {
    throw validation_error("InvalidSpan", "confidence must lie in [0, 1]",
                           span_json(*this));
  }
}

Span Span::conflict(std::size_t start, std::size_t end,
                    std::string candidate_label, std::string origin,
                    std::optional<double> confidence) {
  return Span(start, end, std::string(kConflictLabel), std::move(origin),
              std::move(candidate_label), confidence);
}

Span Span::with_label(std::string label) const {
  return Span(start_, end_, std::move(label), origin_, std::nullopt,
              confidence_);
}

std::optional<std::pair<Span, Span>> find_overlap(
    std::span<const Span> sorted) {
  // With spans sorted by start, a collision always involves the span that
  // reaches furthest so far.
  std::optional<std::size_t> reach;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (reach && sorted[*reach].end() > sorted[i].start()) {
      return std::make_pair(sorted[*reach], sorted[i]);
    }
    if (!reach || sorted[i].end() > sorted[*reach].end()) reach = i;
  }
  return std::nullopt;
}

AnnotationSet::AnnotationSet(std::string doc_id, std::string author,
                             int scheme_version, std::vector<Span> spans)
    : doc_id_(std::move(doc_id)),
      author_(std::move(author)),
      scheme_version_(scheme_version),
      spans_(std::move(spans)) {
  if (doc_id_.empty() || author_.empty()) {
    throw validation_error("InvalidAnnotationSet",
                           "doc_id and author must be nonempty");
  }
  if (scheme_version_ < 1) {
    throw validation_error("InvalidAnnotationSet",
                           "scheme_version must be >= 1",
                           {{"doc_id", doc_id_}});
  }
  std::sort(spans_.begin(), spans_.end());
  auto dup = std::adjacent_find(spans_.begin(), spans_.end());
  if (dup != spans_.end()) {
    throw validation_error("DuplicateSpan",
                           "duplicate span in annotations of '" + doc_id_ + "'",
                           {{"doc_id", doc_id_}, {"span", span_json(*dup)}});
  }
  std::vector<Span> checked;
  if (is_merged()) {
    std::copy_if(spans_.begin(), spans_.end(), std::back_inserter(checked),
                 [](const Span &s) { return !s.is_conflict(); });
  } else {
    for (const Span &s : spans_) {
      if (s.is_conflict()) {
        throw validation_error(
            "UnexpectedConflictLabel",
            "??? spans are only allowed in MERGED sets (doc '" + doc_id_ + "')",
            {{"doc_id", doc_id_}, {"author", author_}, {"span", span_json(s)}});
      }
    }
    checked = spans_;
  }
  if (auto hit = find_overlap(checked)) {
    throw validation_error(
        "OverlappingSpans",
        "overlapping spans in annotations of '" + doc_id_ + "' by '" +
            author_ + "'",
        {{"doc_id", doc_id_},
         {"author", author_},
         {"spans", {span_json(hit->first), span_json(hit->second)}}});
  }
}

bool AnnotationSet::has_conflicts() const {
  return std::any_of(spans_.begin(), spans_.end(),
                     [](const Span &s) { return s.is_conflict(); });
}

void AnnotationSet::check_bounds(const Document &doc) const {
  for (const Span &s : spans_) {
    if (s.end() > doc.length()) {
      throw validation_error(
          "SpanOutOfRange",
          "span ends at " + std::to_string(s.end()) + " but document '" +
              doc.id() + "' has length " + std::to_string(doc.length()),
          {{"doc_id", doc.id()}, {"span", span_json(s)}});
    }
  }
}

LabelScheme::LabelScheme(int version, std::vector<std::string> labels)
    : version_(version), labels_(std::move(labels)) {
  if (version_ < 1) {
    throw validation_error("InvalidScheme", "scheme version must be >= 1");
  }
  if (labels_.empty()) {
    throw validation_error("InvalidScheme", "scheme has no labels");
  }
  std::set<std::string_view> seen;
  for (const auto &l : labels_) {
    if (l.empty() || l == kOutsideLabel || l == kConflictLabel) {
      throw validation_error("InvalidScheme",
                             "reserved or empty label '" + l + "' in scheme");
    }
    if (!seen.insert(l).second) {
      throw validation_error("InvalidScheme",
                             "duplicate label '" + l + "' in scheme");
    }
  }
}

bool LabelScheme::contains(std::string_view label) const {
  return index_of(label) < labels_.size();
}

std::size_t LabelScheme::index_of(std::string_view label) const {
  return static_cast<std::size_t>(
      std::find(labels_.begin(), labels_.end(), label) - labels_.begin());
}

}  // namespace annoflow
