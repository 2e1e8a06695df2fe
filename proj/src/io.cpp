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

#include "annoflow/io.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

namespace annoflow {

namespace fs = std::filesystem;

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("FileNotReadable", "cannot read " + path.string(),
                   {{"path", path.string()}});
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<json> read_jsonl(const fs::path &path) {
  std::istringstream in(read_file(path));
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error &e) {
      throw validation_error(
          "InvalidJson",
          path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
          {{"path", path.string()}, {"line", line_no}});
    }
  }
  return rows;
}

json read_json(const fs::path &path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw validation_error("InvalidJson", path.string() + ": " + e.what(),
                           {{"path", path.string()}});
  }
}

std::string to_jsonl(const std::vector<json> &rows) {
  std::string out;
  for (const json &row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

void write_file_atomic(const fs::path &path, const std::string &content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) {
      throw io_error("FileNotWritable", "cannot write " + path.string(),
                     {{"path", path.string()}});
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw io_error("FileNotWritable", "cannot replace " + path.string(),
                   {{"path", path.string()}});
  }
}

void append_line(const fs::path &path, const std::string &line) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) {
    throw io_error("FileNotWritable", "cannot append to " + path.string(),
                   {{"path", path.string()}});
  }
}

std::optional<std::string> optional_string(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<double> optional_number(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    throw validation_error("SchemaViolation",
                           std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

std::optional<long long> optional_integer(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw validation_error(
        "SchemaViolation", std::string("field '") + key + "' must be an integer");
  }
  return it->get<long long>();
}

json to_json(const Document &doc) {
  return {{"id", doc.id()}, {"text", doc.text()}, {"meta", doc.meta()}};
}

Document document_from_json(const json &j) {
  return parse_or_throw("document", [&] {
    std::map<std::string, std::string> meta;
    if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
      meta = it->get<std::map<std::string, std::string>>();
    }
    return Document(j.at("id").get<std::string>(),
                    j.at("text").get<std::string>(), std::move(meta));
  });
}

json to_json(const Span &span) {
  return {{"start", span.start()},
          {"end", span.end()},
          {"label", span.label()},
          {"candidate_label", optional_to_json(span.candidate_label())},
          {"origin", optional_to_json(span.origin())},
          {"confidence", optional_to_json(span.confidence())}};
}

Span span_from_json(const json &j) {
  return parse_or_throw("span", [&] {
    const auto start = j.at("start").get<long long>();
    const auto end = j.at("end").get<long long>();
    if (start < 0 || end < 0) {
      throw validation_error("InvalidSpan", "span offsets must be >= 0");
    }
    return Span(static_cast<std::size_t>(start), static_cast<std::size_t>(end),
                j.at("label").get<std::string>(), optional_string(j, "origin"),
                optional_string(j, "candidate_label"),
                optional_number(j, "confidence"));
  });
}

json to_json(const AnnotationSet &set) {
  json spans = json::array();
  for (const Span &s : set.spans()) spans.push_back(to_json(s));
  return {{"doc_id", set.doc_id()},
          {"author", set.author()},
          {"scheme_version", set.scheme_version()},
          {"spans", std::move(spans)}};
}

AnnotationSet annotation_set_from_json(const json &j) {
  return parse_or_throw("annotation set", [&] {
    std::vector<Span> spans;
    for (const json &s : j.at("spans")) spans.push_back(span_from_json(s));
    return AnnotationSet(j.at("doc_id").get<std::string>(),
                         j.at("author").get<std::string>(),
                         j.at("scheme_version").get<int>(), std::move(spans));
  });
}

json to_json(const LabelScheme &scheme) {
  return {{"version", scheme.version()}, {"labels", scheme.labels()}};
}

LabelScheme label_scheme_from_json(const json &j) {
  return parse_or_throw("label scheme", [&] {
    return LabelScheme(j.at("version").get<int>(),
                       j.at("labels").get<std::vector<std::string>>());
  });
}

std::vector<Document> read_documents(const fs::path &path) {
  std::vector<Document> docs;
  for (const json &row : read_jsonl(path)) {
    docs.push_back(document_from_json(row));
  }
  return docs;
}

std::vector<AnnotationSet> read_annotation_sets(const fs::path &path) {
  std::vector<AnnotationSet> sets;
  for (const json &row : read_jsonl(path)) {
    sets.push_back(annotation_set_from_json(row));
  }
  return sets;
}

void write_annotation_sets(const fs::path &path,
                           const std::vector<AnnotationSet> &sets) {
  std::vector<json> rows;
  rows.reserve(sets.size());
  for (const auto &s : sets) rows.push_back(to_json(s));
  write_file_atomic(path, to_jsonl(rows));
}

}  // namespace annoflow
