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

#include "annoflow/agreement.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "annoflow/bio.hpp"
#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

using SetPairs =
    std::vector<std::pair<const AnnotationSet *, const AnnotationSet *>>;

// Pairs the two sides up by doc id.
SetPairs align(std::span<const AnnotationSet> a,
               std::span<const AnnotationSet> b) {
  std::map<std::string, const AnnotationSet *> by_doc;
  for (const AnnotationSet &s : b) {
    if (!by_doc.emplace(s.doc_id(), &s).second) {
      throw validation_error("DocSetMismatch",
                             "document " + s.doc_id() + " listed twice",
                             {{"doc_id", s.doc_id()}});
    }
  }
  SetPairs pairs;
  std::set<std::string> seen;
  for (const AnnotationSet &s : a) {
    if (!seen.insert(s.doc_id()).second) {
      throw validation_error("DocSetMismatch",
                             "document " + s.doc_id() + " listed twice",
                             {{"doc_id", s.doc_id()}});
    }
    auto it = by_doc.find(s.doc_id());
    if (it == by_doc.end()) {
      throw validation_error("DocSetMismatch",
                             "document " + s.doc_id() + " missing on one side",
                             {{"doc_id", s.doc_id()}});
    }
    pairs.emplace_back(&s, it->second);
  }
  if (pairs.size() != by_doc.size()) {
    throw validation_error("DocSetMismatch",
                           "the two sides cover different documents");
  }
  return pairs;
}

struct MatchCounts {
  std::size_t matched = 0;
  std::size_t a = 0;
  std::size_t b = 0;
};

double dice(const MatchCounts &c) {
  if (c.a + c.b == 0) return 1.0;
  return 2.0 * static_cast<double>(c.matched) / static_cast<double>(c.a + c.b);
}

std::map<std::string, MatchCounts> count_matches(
    std::span<const AnnotationSet> sets_a,
    std::span<const AnnotationSet> sets_b) {
  std::map<std::string, MatchCounts> counts;
  for (const auto &[sa, sb] : align(sets_a, sets_b)) {
    std::set<std::tuple<std::size_t, std::size_t, std::string>> b_keys;
    for (const Span &s : sb->spans()) {
      b_keys.emplace(s.start(), s.end(), s.label());
      ++counts[s.label()].b;
    }
    for (const Span &s : sa->spans()) {
      ++counts[s.label()].a;
      if (b_keys.count({s.start(), s.end(), s.label()})) {
        ++counts[s.label()].matched;
      }
    }
  }
  return counts;
}

}  // namespace

double pairwise_entity_f1(std::span<const AnnotationSet> sets_a,
                          std::span<const AnnotationSet> sets_b) {
  MatchCounts total;
  for (const auto &[label, c] : count_matches(sets_a, sets_b)) {
    total.matched += c.matched;
    total.a += c.a;
    total.b += c.b;
  }
  return dice(total);
}

std::map<std::string, double> per_class_entity_f1(
    std::span<const AnnotationSet> sets_a,
    std::span<const AnnotationSet> sets_b) {
  std::map<std::string, double> out;
  for (const auto &[label, c] : count_matches(sets_a, sets_b)) {
    out[label] = dice(c);
  }
  return out;
}

std::optional<double> pairwise_token_kappa(std::span<const AnnotationSet> sets_a,
                                           std::span<const AnnotationSet> sets_b,
                                           const TokenIndex &tokens) {
  // Contingency counts keyed by class.
  std::map<std::string, double> marginal_a;
  std::map<std::string, double> marginal_b;
  double agree = 0;
  double n = 0;
  for (const auto &[sa, sb] : align(sets_a, sets_b)) {
    auto it = tokens.find(sa->doc_id());
    if (it == tokens.end()) {
      throw validation_error("DocSetMismatch",
                             "no tokenization for document " + sa->doc_id(),
                             {{"doc_id", sa->doc_id()}});
    }
    const auto la = token_labels(it->second, sa->spans());
    const auto lb = token_labels(it->second, sb->spans());
    for (std::size_t i = 0; i < la.size(); ++i) {
      marginal_a[la[i]] += 1;
      marginal_b[lb[i]] += 1;
      if (la[i] == lb[i]) agree += 1;
      n += 1;
    }
  }
  if (n == 0) return std::nullopt;
  const double p_o = agree / n;
  double p_e = 0;
  for (const auto &[label, count] : marginal_a) {
    auto it = marginal_b.find(label);
    if (it != marginal_b.end()) p_e += (count / n) * (it->second / n);
  }
  if (p_e >= 1.0) return std::nullopt;
  return (p_o - p_e) / (1.0 - p_e);
}

AgreementReport compute_agreement(std::span<const AnnotationSet> sets_a,
                                  std::span<const AnnotationSet> sets_b,
                                  const TokenIndex &tokens) {
  AgreementReport r;
  r.doc_count = align(sets_a, sets_b).size();
  if (r.doc_count == 0) {
    throw validation_error("DocSetMismatch", "no documents to compare");
  }
  r.pair = {sets_a.front().author(), sets_b.front().author()};
  r.entity_f1 = pairwise_entity_f1(sets_a, sets_b);
  r.token_kappa = pairwise_token_kappa(sets_a, sets_b, tokens);
  r.per_class_entity_f1 = per_class_entity_f1(sets_a, sets_b);
  return r;
}

json to_json(const AgreementReport &r) {
  return {{"doc_count", r.doc_count},
          {"pair", {r.pair.first, r.pair.second}},
          {"entity_f1", r.entity_f1},
          {"token_kappa", optional_to_json(r.token_kappa)},
          {"per_class_entity_f1", r.per_class_entity_f1}};
}

std::string render_agreement_table(const AgreementReport &r) {
  std::size_t width = 9;
  for (const auto &[label, f1] : r.per_class_entity_f1) {
    width = std::max(width, label.size());
  }
  std::string out = fmt::format("{} vs {} ({} docs)\n", r.pair.first,
                                r.pair.second, r.doc_count);
  out += fmt::format("{:<{}}  {:>9}\n", "Class", width, "entity_f1");
  for (const auto &[label, f1] : r.per_class_entity_f1) {
    out += fmt::format("{:<{}}  {:>9.2f}\n", label, width, f1);
  }
  const std::string kappa =
      r.token_kappa ? fmt::format("{:.2f}", *r.token_kappa) : "undefined";
  out += fmt::format("{:<{}}  {:>9.2f}  token_kappa {}\n", "aggregate", width,
                     r.entity_f1, kappa);
  return out;
}

}  // namespace annoflow
