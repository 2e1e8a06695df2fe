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

#ifndef ANNOFLOW_EVALUATION_HPP_
#define ANNOFLOW_EVALUATION_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "annoflow/io.hpp"
#include "annoflow/tokenize.hpp"
#include "annoflow/types.hpp"

namespace annoflow {

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts &operator+=(const Counts &o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts &, const Counts &) = default;
};

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  friend bool operator==(const Prf &, const Prf &) = default;
};

// Precision, recall and F1 with 0 for every zero denominator.
Prf prf(const Counts &c);

struct ClassScores {
  Counts entity_counts;
  Counts token_counts;
  Prf entity;
  Prf token;
  std::size_t support = 0;  // gold entities of the class

  friend bool operator==(const ClassScores &, const ClassScores &) = default;
};

using ConfusionMatrix =
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct EvalReport {
  std::vector<std::string> labels;  // scheme order; confusion adds O last
  std::map<std::string, ClassScores> per_class;
  Counts micro_entity_counts;
  Counts micro_token_counts;
  Prf micro_entity;
  Prf micro_token;
  // Token counts, rows = gold class, columns = predicted class.
  ConfusionMatrix confusion;
  std::size_t doc_count = 0;

  double micro_entity_f1() const { return micro_entity.f1; }
  double micro_token_f1() const { return micro_token.f1; }
  std::vector<std::string> confusion_labels() const;
};

bool operator==(const EvalReport &a, const EvalReport &b);

// Entity level: exact (start, end, label) matches, per class and pooled over
// all classes. Token level: BIO-encode both sides over `tokens`, strip the
// prefixes and compare classes; micro scores pool tokens where gold or
// prediction is not O.
//
// Throws "DocSetMismatch" or "SchemeMismatch" (wrong version or unknown
// label).
EvalReport evaluate(std::span<const AnnotationSet> gold,
                    std::span<const AnnotationSet> pred,
                    const LabelScheme &scheme, const TokenIndex &tokens);

enum class ReportFormat { kTable, kJson, kMarkdown };

ReportFormat report_format_from_string(const std::string &s);

// Table and markdown show one row per class (scheme order) with entity and
// token F1 plus support, and a "micro-average" footer.
std::string render_report(const EvalReport &r, ReportFormat format);

json to_json(const EvalReport &r);
EvalReport eval_report_from_json(const json &j);

}  // namespace annoflow

#endif  // ANNOFLOW_EVALUATION_HPP_
