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

#ifndef ANNOFLOW_AGREEMENT_HPP_
#define ANNOFLOW_AGREEMENT_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "annoflow/io.hpp"
#include "annoflow/tokenize.hpp"
#include "annoflow/types.hpp"

namespace annoflow {

struct AgreementReport {
  std::size_t doc_count = 0;
  std::pair<std::string, std::string> pair;
  double entity_f1 = 1.0;
  // Empty when the marginals are degenerate (p_e = 1), e.g. all tokens O on
  // both sides.
  std::optional<double> token_kappa;
  std::map<std::string, double> per_class_entity_f1;
};

// Micro exact-match F1 between two annotators over the same documents,
// 2 * matches / (|a| + |b|). Both sides empty counts as perfect agreement.
// Throws "DocSetMismatch" if the two sides cover different documents.
double pairwise_entity_f1(std::span<const AnnotationSet> sets_a,
                          std::span<const AnnotationSet> sets_b);

// Per-label version of the above, for every label used by either side.
std::map<std::string, double> per_class_entity_f1(
    std::span<const AnnotationSet> sets_a,
    std::span<const AnnotationSet> sets_b);

// Cohen's kappa over per-token classes (O included), pooled across
// documents. `tokens` must hold a tokenization for every document.
std::optional<double> pairwise_token_kappa(std::span<const AnnotationSet> sets_a,
                                           std::span<const AnnotationSet> sets_b,
                                           const TokenIndex &tokens);

AgreementReport compute_agreement(std::span<const AnnotationSet> sets_a,
                                  std::span<const AnnotationSet> sets_b,
                                  const TokenIndex &tokens);

json to_json(const AgreementReport &r);
// Aligned table: one row per class, footer row for the aggregate.
std::string render_agreement_table(const AgreementReport &r);

}  // namespace annoflow

#endif  // ANNOFLOW_AGREEMENT_HPP_
