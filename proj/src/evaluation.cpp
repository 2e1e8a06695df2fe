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

#include "annoflow/evaluation.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "annoflow/bio.hpp"
#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_scheme(const AnnotationSet &set, const LabelScheme &scheme) {
  if (set.scheme_version() != scheme.version()) {
    throw validation_error("SchemeMismatch",
                           "annotations of " + set.doc_id() + " are at v" +
                               std::to_string(set.scheme_version()) +
                               ", scheme is v" +
                               std::to_string(scheme.version()),
                           {{"doc_id", set.doc_id()}});
  }
  for (const Span &s : set.spans()) {
    if (!scheme.contains(s.label())) {
      throw validation_error("SchemeMismatch",
                             "label '" + s.label() + "' in " + set.doc_id() +
                                 " is not in scheme v" +
                                 std::to_string(scheme.version()),
                             {{"doc_id", set.doc_id()}, {"label", s.label()}});
    }
  }
}

json counts_json(const Counts &c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
}

Counts counts_from_json(const json &j) {
  return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
          j.at("fn").get<std::size_t>()};
}

json prf_json(const Prf &p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

Prf prf_from_json(const json &j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),
          j.at("f1").get<double>()};
}

}  // namespace

Prf prf(const Counts &c) {
  Prf out;
  out.precision = ratio(c.tp, c.tp + c.fp);
  out.recall = ratio(c.tp, c.tp + c.fn);
  const double sum = out.precision + out.recall;
  out.f1 = sum == 0 ? 0.0 : 2 * out.precision * out.recall / sum;
  return out;
}

std::vector<std::string> EvalReport::confusion_labels() const {
  std::vector<std::string> out = labels;
  out.emplace_back(kOutsideLabel);
  return out;
}

bool operator==(const EvalReport &a, const EvalReport &b) {
  return a.labels == b.labels && a.per_class == b.per_class &&
         a.micro_entity_counts == b.micro_entity_counts &&
         a.micro_token_counts == b.micro_token_counts &&
         a.micro_entity == b.micro_entity && a.micro_token == b.micro_token &&
         a.confusion.rows() == b.confusion.rows() &&
         a.confusion.cols() == b.confusion.cols() &&
         a.confusion == b.confusion && a.doc_count == b.doc_count;
}

EvalReport evaluate(std::span<const AnnotationSet> gold,
                    std::span<const AnnotationSet> pred,
                    const LabelScheme &scheme, const TokenIndex &tokens) {
  std::map<std::string, const AnnotationSet *> pred_by_doc;
  for (const AnnotationSet &p : pred) {
    check_scheme(p, scheme);
    if (p.has_conflicts()) {
      throw validation_error("UnexpectedConflictLabel",
                             "predictions for " + p.doc_id() + " contain ???");
    }
    if (!pred_by_doc.emplace(p.doc_id(), &p).second) {
      throw validation_error("DocSetMismatch",
                             "duplicate predictions for " + p.doc_id(),
                             {{"doc_id", p.doc_id()}});
    }
  }
  std::set<std::string> gold_docs;
  for (const AnnotationSet &g : gold) {
    check_scheme(g, scheme);
    if (g.has_conflicts()) {
      throw validation_error("UnexpectedConflictLabel",
                             "gold for " + g.doc_id() + " contains ???");
    }
    if (!gold_docs.insert(g.doc_id()).second) {
      throw validation_error("DocSetMismatch",
                             "duplicate gold for " + g.doc_id(),
                             {{"doc_id", g.doc_id()}});
    }
    if (!pred_by_doc.count(g.doc_id())) {
      throw validation_error("DocSetMismatch",
                             "no predictions for " + g.doc_id(),
                             {{"doc_id", g.doc_id()}});
    }
  }
  if (gold_docs.size() != pred_by_doc.size()) {
    throw validation_error("DocSetMismatch",
                           "predictions cover documents without gold");
  }

  EvalReport r;
  r.labels = scheme.labels();
  r.doc_count = gold.size();
  const auto n_classes = static_cast<Eigen::Index>(scheme.size() + 1);
  const auto outside = n_classes - 1;
  r.confusion = ConfusionMatrix::Zero(n_classes, n_classes);
  for (const auto &l : r.labels) r.per_class[l];

  auto class_index = [&](std::string_view label) {
    return label == kOutsideLabel
               ? outside
               : static_cast<Eigen::Index>(scheme.index_of(label));
  };

  for (const AnnotationSet &g : gold) {
    const AnnotationSet &p = *pred_by_doc.at(g.doc_id());

    std::set<std::tuple<std::size_t, std::size_t, std::string>> gold_keys;
    for (const Span &s : g.spans()) {
      gold_keys.emplace(s.start(), s.end(), s.label());
      ++r.per_class[s.label()].support;
      ++r.per_class[s.label()].entity_counts.fn;
    }
    for (const Span &s : p.spans()) {
      ClassScores &c = r.per_class[s.label()];
      if (gold_keys.count({s.start(), s.end(), s.label()})) {
        ++c.entity_counts.tp;
        --c.entity_counts.fn;
      } else {
        ++c.entity_counts.fp;
      }
    }

    auto tok = tokens.find(g.doc_id());
    if (tok == tokens.end()) {
      throw validation_error("DocSetMismatch",
                             "no tokenization for " + g.doc_id(),
                             {{"doc_id", g.doc_id()}});
    }
    const auto gold_labels = token_labels(tok->second, g.spans());
    const auto pred_labels = token_labels(tok->second, p.spans());
    for (std::size_t i = 0; i < gold_labels.size(); ++i) {
      const std::string &gl = gold_labels[i];
      const std::string &pl = pred_labels[i];
      ++r.confusion(class_index(gl), class_index(pl));
      if (gl == pl) {
        if (gl != kOutsideLabel) ++r.per_class[gl].token_counts.tp;
        continue;
      }
      if (pl != kOutsideLabel) ++r.per_class[pl].token_counts.fp;
      if (gl != kOutsideLabel) ++r.per_class[gl].token_counts.fn;
    }
  }

  for (auto &[label, c] : r.per_class) {
    c.entity = prf(c.entity_counts);
    c.token = prf(c.token_counts);
    r.micro_entity_counts += c.entity_counts;
    r.micro_token_counts += c.token_counts;
  }
  r.micro_entity = prf(r.micro_entity_counts);
  r.micro_token = prf(r.micro_token_counts);
  return r;
}

ReportFormat report_format_from_string(const std::string &s) {
  if (s == "table") return ReportFormat::kTable;
  if (s == "json") return ReportFormat::kJson;
  if (s == "markdown") return ReportFormat::kMarkdown;
  throw validation_error("InvalidFormat", "unknown report format '" + s + "'",
                         {{"format", s}});
}

std::string render_report(const EvalReport &r, ReportFormat format) {
  if (format == ReportFormat::kJson) return to_json(r).dump(2) + "\n";

  std::size_t total_support = 0;
  for (const auto &[label, c] : r.per_class) total_support += c.support;

  if (format == ReportFormat::kMarkdown) {
    std::string out = "| Class | entity | token | support |\n";
    out += "|:--|--:|--:|--:|\n";
    for (const auto &label : r.labels) {
      const ClassScores &c = r.per_class.at(label);
      out += fmt::format("| {} | {:.2f} | {:.2f} | {} |\n", label, c.entity.f1,
                         c.token.f1, c.support);
    }
    out += fmt::format("| **micro-average** | **{:.2f}** | **{:.2f}** | {} |\n",
                       r.micro_entity.f1, r.micro_token.f1, total_support);
    return out;
  }

  std::size_t width = std::string_view("micro-average").size();
  for (const auto &label : r.labels) width = std::max(width, label.size());
  const std::string rule(width + 26, '-');
  std::string out = fmt::format("{:<{}}  {:>6}  {:>6}  {:>8}\n", "Class",
                                width, "entity", "token", "support");
  out += rule + "\n";
  for (const auto &label : r.labels) {
    const ClassScores &c = r.per_class.at(label);
    out += fmt::format("{:<{}}  {:>6.2f}  {:>6.2f}  {:>8}\n", label, width,
                       c.entity.f1, c.token.f1, c.support);
  }
  out += rule + "\n";
  out += fmt::format("{:<{}}  {:>6.2f}  {:>6.2f}  {:>8}\n", "micro-average",
                     width, r.micro_entity.f1, r.micro_token.f1, total_support);
  return out;
}

json to_json(const EvalReport &r) {
  json per_class = json::object();
  for (const auto &[label, c] : r.per_class) {
    per_class[label] = {{"entity_counts", counts_json(c.entity_counts)},
                        {"token_counts", counts_json(c.token_counts)},
                        {"entity", prf_json(c.entity)},
                        {"token", prf_json(c.token)},
                        {"support", c.support}};
  }
  json confusion = json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) {
      row.push_back(r.confusion(i, j));
    }
    confusion.push_back(std::move(row));
  }
  return {{"labels", r.labels},
          {"per_class", std::move(per_class)},
          {"micro_entity_counts", counts_json(r.micro_entity_counts)},
          {"micro_token_counts", counts_json(r.micro_token_counts)},
          {"micro_entity", prf_json(r.micro_entity)},
          {"micro_token", prf_json(r.micro_token)},
          {"confusion_labels", r.confusion_labels()},
          {"confusion", std::move(confusion)},
          {"doc_count", r.doc_count}};
}

EvalReport eval_report_from_json(const json &j) {
  return parse_or_throw("evaluation report", [&] {
    EvalReport r;
    r.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto &[label, c] : j.at("per_class").items()) {
      ClassScores s;
      s.entity_counts = counts_from_json(c.at("entity_counts"));
      s.token_counts = counts_from_json(c.at("token_counts"));
      s.entity = prf_from_json(c.at("entity"));
      s.token = prf_from_json(c.at("token"));
      s.support = c.at("support").get<std::size_t>();
      r.per_class.emplace(label, s);
    }
    r.micro_entity_counts = counts_from_json(j.at("micro_entity_counts"));
    r.micro_token_counts = counts_from_json(j.at("micro_token_counts"));
    r.micro_entity = prf_from_json(j.at("micro_entity"));
    r.micro_token = prf_from_json(j.at("micro_token"));
    const json &rows = j.at("confusion");
    const auto n = static_cast<Eigen::Index>(rows.size());
    r.confusion = ConfusionMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = rows[static_cast<std::size_t>(i)]
                           .get<std::vector<std::int64_t>>();
      if (static_cast<Eigen::Index>(row.size()) != n) {
        throw validation_error("SchemaViolation", "confusion must be square");
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        r.confusion(i, k) = row[static_cast<std::size_t>(k)];
      }
    }
    r.doc_count = j.at("doc_count").get<std::size_t>();
    return r;
  });
}

}  // namespace annoflow
