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

#include "annoflow/predictions.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "httplib.h"

#include "annoflow/bio.hpp"
#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

[[noreturn]] void schema_violation(const std::string &doc_id,
                                   const std::string &msg) {
  throw validation_error("SchemaViolation",
                         "predictions for " + doc_id + ": " + msg,
                         {{"doc_id", doc_id}});
}

}  // namespace

std::vector<std::string> bio_tag_set(const LabelScheme &scheme) {
  std::vector<std::string> tags{std::string(kOutsideLabel)};
  for (const auto &l : scheme.labels()) {
    tags.push_back("B-" + l);
    tags.push_back("I-" + l);
  }
  return tags;
}

void validate(const TokenProbabilities &p, const LabelScheme &scheme,
              std::optional<std::size_t> text_length) {
  if (p.scheme_version != scheme.version()) {
    schema_violation(p.doc_id, "scheme_version " +
                                   std::to_string(p.scheme_version) +
                                   " but project is at " +
                                   std::to_string(scheme.version()));
  }
  std::set<std::string> expected;
  for (auto &t : bio_tag_set(scheme)) expected.insert(std::move(t));
  std::set<std::string> got(p.label_order.begin(), p.label_order.end());
  if (got.size() != p.label_order.size()) {
    schema_violation(p.doc_id, "label_order has duplicates");
  }
  if (got != expected) {
    for (const auto &t : got) {
      if (!expected.count(t)) schema_violation(p.doc_id, "unknown tag '" + t + "'");
    }
    schema_violation(p.doc_id, "label_order misses tags of the scheme");
  }
  if (static_cast<std::size_t>(p.probs.rows()) != p.tokens.size() ||
      static_cast<std::size_t>(p.probs.cols()) != p.label_order.size()) {
    schema_violation(p.doc_id, "probability matrix shape does not match");
  }
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    const TokenSpan &t = p.tokens[i];
    if (t.start >= t.end || (i > 0 && p.tokens[i - 1].end > t.start) ||
        (text_length && t.end > *text_length)) {
      schema_violation(p.doc_id, "bad token " + std::to_string(i));
    }
  }
  for (Eigen::Index r = 0; r < p.probs.rows(); ++r) {
    const auto row = p.probs.row(r);
    if (!row.allFinite() || (row.array() < 0).any()) {
      schema_violation(p.doc_id, "row " + std::to_string(r) +
                                     " has negative or non-finite entries");
    }
    if (std::abs(row.sum() - 1.0) > kRowSumTolerance) {
      schema_violation(p.doc_id, "row " + std::to_string(r) + " sums to " +
                                     std::to_string(row.sum()));
    }
  }
}

json to_json(const TokenProbabilities &p) {
  json tokens = json::array();
  for (const TokenSpan &t : p.tokens) tokens.push_back({t.start, t.end});
  json probs = json::array();
  for (Eigen::Index r = 0; r < p.probs.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < p.probs.cols(); ++c) row.push_back(p.probs(r, c));
    probs.push_back(std::move(row));
  }
  return {{"doc_id", p.doc_id},
          {"scheme_version", p.scheme_version},
          {"label_order", p.label_order},
          {"tokens", std::move(tokens)},
          {"probs", std::move(probs)}};
}

TokenProbabilities token_probabilities_from_json(const json &j) {
  return parse_or_throw("predictions", [&] {
    TokenProbabilities p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.scheme_version = j.at("scheme_version").get<int>();
    p.label_order = j.at("label_order").get<std::vector<std::string>>();
    for (const json &t : j.at("tokens")) {
      const auto pair = t.get<std::vector<long long>>();
      if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0) {
        schema_violation(p.doc_id, "token must be [start, end]");
      }
      p.tokens.push_back({static_cast<std::size_t>(pair[0]),
                          static_cast<std::size_t>(pair[1])});
    }
    const json &rows = j.at("probs");
    p.probs.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(p.label_order.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto values = rows[r].get<std::vector<double>>();
      if (values.size() != p.label_order.size()) {
        schema_violation(p.doc_id, "row " + std::to_string(r) +
                                       " length differs from label_order");
      }
      for (std::size_t c = 0; c < values.size(); ++c) {
        p.probs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            values[c];
      }
    }
    return p;
  });
}

FilePredictionProvider::FilePredictionProvider(
    const std::filesystem::path &path, std::string name)
    : name_(name.empty() ? "file:" + path.filename().string()
                         : std::move(name)) {
  std::vector<json> rows;
  try {
    rows = read_jsonl(path);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kIo) throw;
    throw io_error("ProviderUnavailable",
                   "prediction file " + path.string() + " is not readable",
                   {{"path", path.string()}});
  }
  for (const json &row : rows) {
    TokenProbabilities p = token_probabilities_from_json(row);
    std::string id = p.doc_id;
    rows_.insert_or_assign(std::move(id), std::move(p));
  }
}

std::vector<TokenProbabilities> FilePredictionProvider::predict(
    std::span<const Document> docs) const {
  std::vector<TokenProbabilities> out;
  for (const Document &d : docs) {
    if (auto it = rows_.find(d.id()); it != rows_.end()) {
      out.push_back(it->second);
    }
  }
  return out;
}

RemotePredictionProvider::RemotePredictionProvider(std::string base_url,
                                                   std::string name,
                                                   int timeout_seconds)
    : base_url_(std::move(base_url)),
      name_(name.empty() ? "remote:" + base_url_ : std::move(name)),
      timeout_seconds_(timeout_seconds) {}

std::vector<TokenProbabilities> RemotePredictionProvider::predict(
    std::span<const Document> docs) const {
  json documents = json::array();
  for (const Document &d : docs) {
    documents.push_back({{"id", d.id()}, {"text", d.text()}});
  }
  const std::string body = json{{"documents", std::move(documents)}}.dump();

  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(timeout_seconds_);
  client.set_write_timeout(timeout_seconds_);
  auto res = client.Post("/predict", body, "application/json");
  if (!res) {
    throw io_error("ProviderUnavailable",
                   "prediction service at " + base_url_ + " unreachable: " +
                       httplib::to_string(res.error()),
                   {{"url", base_url_}});
  }
  if (res->status != 200) {
    throw io_error("ProviderUnavailable",
                   "prediction service at " + base_url_ + " returned HTTP " +
                       std::to_string(res->status),
                   {{"url", base_url_}, {"status", res->status}});
  }
  json payload;
  try {
    payload = json::parse(res->body);
  } catch (const json::parse_error &e) {
    throw validation_error("SchemaViolation",
                           "prediction service response is not JSON: " +
                               std::string(e.what()));
  }
  if (!payload.is_array()) {
    throw validation_error("SchemaViolation",
                           "prediction service response must be an array");
  }
  std::vector<TokenProbabilities> out;
  for (const json &row : payload) {
    out.push_back(token_probabilities_from_json(row));
  }
  return out;
}

std::vector<TokenProbabilities> fetch_predictions(
    const PredictionProvider &provider, std::span<const Document> docs,
    const LabelScheme &scheme) {
  if (docs.empty()) {
    throw validation_error("EmptyRequest", "no documents to predict on");
  }
  std::map<std::string, TokenProbabilities> by_doc;
  for (auto &p : provider.predict(docs)) {
    std::string id = p.doc_id;
    by_doc.insert_or_assign(std::move(id), std::move(p));
  }
  std::vector<TokenProbabilities> out;
  out.reserve(docs.size());
  for (const Document &d : docs) {
    auto it = by_doc.find(d.id());
    if (it == by_doc.end()) {
      throw validation_error("MissingDoc",
                             provider.name() + " returned no predictions for " +
                                 d.id(),
                             {{"doc_id", d.id()}, {"provider", provider.name()}});
    }
    validate(it->second, scheme, d.length());
    out.push_back(std::move(it->second));
  }
  return out;
}

AnnotationSet predictions_to_draft(const TokenProbabilities &p,
                                   double min_entity_confidence,
                                   const std::string &author) {
  if (!(min_entity_confidence >= 0.0 && min_entity_confidence <= 1.0)) {
    throw validation_error("InvalidThreshold",
                           "min_entity_confidence must lie in [0, 1]");
  }
  const auto n = static_cast<std::size_t>(p.probs.rows());
  std::vector<std::string> tags(n);
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = p.probs.row(static_cast<Eigen::Index>(i));
    Eigen::Index arg = 0;
    for (Eigen::Index c = 1; c < row.size(); ++c) {
      if (row(c) > row(arg)) arg = c;
    }
    best[i] = row(arg);
    tags[i] = p.label_order[static_cast<std::size_t>(arg)];
  }

  std::vector<Span> spans;
  for (const Span &s : bio_to_spans(p.tokens, tags)) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (p.tokens[i].start >= s.start() && p.tokens[i].end <= s.end()) {
        sum += best[i];
        ++count;
      }
    }
    const double confidence = std::clamp(sum / static_cast<double>(count), 0.0, 1.0);
    if (confidence < min_entity_confidence) continue;
    spans.emplace_back(s.start(), s.end(), s.label(), std::nullopt,
                       std::nullopt, confidence);
  }
  return AnnotationSet(p.doc_id, author, p.scheme_version, std::move(spans));
}

}  // namespace annoflow
