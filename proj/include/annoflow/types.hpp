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

#ifndef ANNOFLOW_TYPES_HPP_
#define ANNOFLOW_TYPES_HPP_

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace annoflow {

// Reserved labels. `O` is never stored; `???` marks merge conflicts.
inline constexpr std::string_view kOutsideLabel = "O";
inline constexpr std::string_view kConflictLabel = "???";

// Reserved authors for derived annotation sets.
inline constexpr std::string_view kMergedAuthor = "MERGED";
inline constexpr std::string_view kGoldAuthor = "GOLD";

// A unit of text (one job ad). Offsets everywhere count Unicode scalar values
// of `text`.
class Document {
 public:
  Document(std::string id, std::string text,
           std::map<std::string, std::string> meta = {});

  const std::string &id() const { return id_; }
  const std::string &text() const { return text_; }
  const std::map<std::string, std::string> &meta() const { return meta_; }
  const std::u32string &scalars() const { return scalars_; }
  std::size_t length() const { return scalars_.size(); }

  // UTF-8 substring over scalar offsets [start, end), clamped to the text.
  std::string slice(std::size_t start, std::size_t end) const;

  friend bool operator==(const Document &a, const Document &b) {
    return a.id_ == b.id_ && a.text_ == b.text_ && a.meta_ == b.meta_;
  }

 private:
  std::string id_;
  std::string text_;
  std::map<std::string, std::string> meta_;
  std::u32string scalars_;
};

// Half-open character interval [start, end) with a label. Invariants are
// checked on construction, so an invalid Span cannot exist.
class Span {
 public:
  Span(std::size_t start, std::size_t end, std::string label,
       std::optional<std::string> origin = std::nullopt,
       std::optional<std::string> candidate_label = std::nullopt,
       std::optional<double> confidence = std::nullopt);

  // A `???` variant that remembers the label its author assigned.
  static Span conflict(std::size_t start, std::size_t end,
                       std::string candidate_label, std::string origin,
                       std::optional<double> confidence = std::nullopt);

  std::size_t start() const { return start_; }
  std::size_t end() const { return end_; }
  std::size_t length() const { return end_ - start_; }
  const std::string &label() const { return label_; }
  const std::optional<std::string> &origin() const { return origin_; }
  const std::optional<std::string> &candidate_label() const {
    return candidate_label_;
  }
  const std::optional<double> &confidence() const { return confidence_; }

  bool is_conflict() const { return label_ == kConflictLabel; }

  // True when the two intervals share at least one character.
  bool overlaps(const Span &other) const {
    return start_ < other.end_ && other.start_ < end_;
  }

  // (start, end, label): the identity used for agreement and evaluation.
  std::tuple<std::size_t, std::size_t, const std::string &> key() const {
    return {start_, end_, label_};
  }

  Span with_label(std::string label) const;

  friend bool operator==(const Span &, const Span &) = default;
  // Sorts by start, end, label, then candidate, origin and confidence.
  friend auto operator<=>(const Span &, const Span &) = default;

 private:
  std::size_t start_;
  std::size_t end_;
  std::string label_;
  std::optional<std::string> candidate_label_;
  std::optional<std::string> origin_;
  std::optional<double> confidence_;
};

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const TokenSpan &, const TokenSpan &) = default;
  friend auto operator<=>(const TokenSpan &, const TokenSpan &) = default;
};

// Returns the first pair of overlapping spans in a sorted list, if any.
std::optional<std::pair<Span, Span>> find_overlap(std::span<const Span> sorted);

// One author's spans for one document. The constructor sorts the spans and
// rejects duplicates; individual and GOLD sets must be overlap-free and
// conflict-free, MERGED sets only require that agreed spans do not overlap.
class AnnotationSet {
 public:
  AnnotationSet(std::string doc_id, std::string author, int scheme_version,
                std::vector<Span> spans);

  const std::string &doc_id() const { return doc_id_; }
  const std::string &author() const { return author_; }
  int scheme_version() const { return scheme_version_; }
  const std::vector<Span> &spans() const { return spans_; }

  bool is_merged() const { return author_ == kMergedAuthor; }
  bool is_gold() const { return author_ == kGoldAuthor; }
  bool has_conflicts() const;

  // Throws "SpanOutOfRange" if a span ends past the document text.
  void check_bounds(const Document &doc) const;

  friend bool operator==(const AnnotationSet &,
                         const AnnotationSet &) = default;

 private:
  std::string doc_id_;
  std::string author_;
  int scheme_version_;
  std::vector<Span> spans_;
};

// A versioned class system. `O` and `???` are implicit and never listed.
class LabelScheme {
 public:
  LabelScheme(int version, std::vector<std::string> labels);

  int version() const { return version_; }
  const std::vector<std::string> &labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool contains(std::string_view label) const;
  // Position in `labels()`, or size() if absent.
  std::size_t index_of(std::string_view label) const;

  friend bool operator==(const LabelScheme &, const LabelScheme &) = default;

 private:
  int version_;
  std::vector<std::string> labels_;
};

}  // namespace annoflow

#endif  // ANNOFLOW_TYPES_HPP_
