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

#ifndef ANNOFLOW_IO_HPP_
#define ANNOFLOW_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "annoflow/errors.hpp"
#include "annoflow/types.hpp"

namespace annoflow {

using nlohmann::json;

// Reads a JSON Lines file; blank lines are skipped. Missing or unreadable
// files raise an I/O Error, malformed lines a validation Error naming the
// line number.
std::vector<json> read_jsonl(const std::filesystem::path &path);
json read_json(const std::filesystem::path &path);

// Serialized forms are compact, one object per line, keys sorted.
std::string to_jsonl(const std::vector<json> &rows);

// Replaces `path` atomically (write to a sibling temp file, then rename).
void write_file_atomic(const std::filesystem::path &path,
                       const std::string &content);
void append_line(const std::filesystem::path &path, const std::string &line);
std::string read_file(const std::filesystem::path &path);

// Runs `parse` on one JSON value, turning library exceptions into a
// "SchemaViolation" validation Error that names `where`.
template <typename F>
auto parse_or_throw(const std::string &where, F &&parse) -> decltype(parse()) {
  try {
    return parse();
  } catch (const nlohmann::json::exception &e) {
    throw validation_error("SchemaViolation", where + ": " + e.what(),
                           {{"where", where}});
  }
}

json to_json(const Document &doc);
Document document_from_json(const json &j);

json to_json(const Span &span);
Span span_from_json(const json &j);

json to_json(const AnnotationSet &set);
AnnotationSet annotation_set_from_json(const json &j);

json to_json(const LabelScheme &scheme);
LabelScheme label_scheme_from_json(const json &j);

std::vector<Document> read_documents(const std::filesystem::path &path);
std::vector<AnnotationSet> read_annotation_sets(
    const std::filesystem::path &path);
void write_annotation_sets(const std::filesystem::path &path,
                           const std::vector<AnnotationSet> &sets);

// Helpers for optional JSON fields that may be absent or null.
std::optional<std::string> optional_string(const json &j, const char *key);
std::optional<double> optional_number(const json &j, const char *key);
std::optional<long long> optional_integer(const json &j, const char *key);

template <typename T>
json optional_to_json(const std::optional<T> &v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace annoflow

#endif  // ANNOFLOW_IO_HPP_
