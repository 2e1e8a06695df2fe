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

#include "annoflow/bio.hpp"

#include <algorithm>

#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

struct ParsedTag {
  char prefix;  // 'O', 'B' or 'I'
  std::string_view label;
};

ParsedTag parse_tag(std::string_view tag) {
  if (tag == kOutsideLabel) return {'O', {}};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    std::string_view label = tag.substr(2);
    if (label != kOutsideLabel && label != kConflictLabel) {
      return {tag[0], label};
    }
  }
  throw validation_error("InvalidTag", "malformed BIO tag '" +
                                           std::string(tag) + "'",
                         {{"tag", tag}});
}

}  // namespace

std::vector<std::string> spans_to_bio(std::span<const TokenSpan> tokens,
                                      std::span<const Span> spans) {
  std::vector<Span> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end());
  for (const Span &s : sorted) {
    if (s.is_conflict()) {
      throw validation_error("UnexpectedConflictLabel",
                             "cannot BIO-encode a ??? span");
    }
  }
  if (auto hit = find_overlap(sorted)) {
    throw validation_error(
        "OverlappingSpans", "cannot BIO-encode overlapping spans",
        {{"spans",
          {{hit->first.start(), hit->first.end(), hit->first.label()},
           {hit->second.start(), hit->second.end(), hit->second.label()}}}});
  }

  std::vector<std::string> tags(tokens.size(), std::string(kOutsideLabel));
  std::vector<bool> taken(tokens.size(), false);
  // Tokens are sorted, so the first token that can touch a span is found by
  // binary search on token end.
  for (const Span &s : sorted) {
    auto it = std::partition_point(
        tokens.begin(), tokens.end(),
        [&](const TokenSpan &t) { return t.end <= s.start(); });
    bool first = true;
    for (; it != tokens.end() && it->start < s.end(); ++it) {
      const auto i = static_cast<std::size_t>(it - tokens.begin());
      if (taken[i]) continue;
      taken[i] = true;
      tags[i] = (first ? "B-" : "I-") + s.label();
      first = false;
    }
  }
  return tags;
}

std::vector<Span> bio_to_spans(std::span<const TokenSpan> tokens,
                               std::span<const std::string> tags) {
  if (tokens.size() != tags.size()) {
    throw validation_error(
        "LengthMismatch",
        "got " + std::to_string(tags.size()) + " tags for " +
            std::to_string(tokens.size()) + " tokens",
        {{"tokens", tokens.size()}, {"tags", tags.size()}});
  }
  std::vector<Span> spans;
  std::size_t open_start = 0;
  std::size_t open_end = 0;
  std::string open_label;
  auto close = [&] {
    if (!open_label.empty()) {
      spans.emplace_back(open_start, open_end, open_label);
      open_label.clear();
    }
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const ParsedTag tag = parse_tag(tags[i]);
    if (tag.prefix == 'O') {
      close();
    } else if (tag.prefix == 'I' && open_label == tag.label) {
      open_end = tokens[i].end;
    } else {
      close();
      open_start = tokens[i].start;
      open_end = tokens[i].end;
      open_label = std::string(tag.label);
    }
  }
  close();
  return spans;
}

std::string_view strip_bio(std::string_view tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return tag.substr(2);
  }
  return tag;
}

std::vector<std::string> token_labels(std::span<const TokenSpan> tokens,
                                      std::span<const Span> spans) {
  std::vector<std::string> labels = spans_to_bio(tokens, spans);
  for (auto &l : labels) l = std::string(strip_bio(l));
  return labels;
}

}  // namespace annoflow
