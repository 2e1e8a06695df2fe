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

#include "annoflow/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>

#include "annoflow/errors.hpp"

namespace annoflow {

namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

std::string iter_name(int index) { return "iter-" + std::to_string(index); }

bool stage_at_least(Stage s, Stage min) {
  return static_cast<int>(s) >= static_cast<int>(min);
}

std::vector<json> rows_of(const std::map<std::string, AnnotationSet> &sets) {
  std::vector<json> rows;
  for (const auto &[id, s] : sets) rows.push_back(to_json(s));
  return rows;
}

std::map<std::string, AnnotationSet> sets_by_doc(const fs::path &path) {
  std::map<std::string, AnnotationSet> out;
  if (!fs::exists(path)) return out;
  for (auto &s : read_annotation_sets(path)) {
    std::string id = s.doc_id();
    out.insert_or_assign(std::move(id), std::move(s));
  }
  return out;
}

json iteration_json(const Iteration &it) {
  return {{"index", it.index},
          {"doc_ids", it.doc_ids},
          {"stage", to_string(it.stage)},
          {"sampling", to_json(it.sampling)},
          {"assignments", it.assignments.parts.empty()
                              ? json(nullptr)
                              : to_json(it.assignments)},
          {"scheme_version", it.scheme_version},
          {"draft_provider", optional_to_json(it.draft_provider)}};
}

}  // namespace

DirectoryLock::DirectoryLock(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = dir / ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
  if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
    if (fd_ >= 0) ::close(fd_);
    throw io_error("LockFailed", "cannot lock " + path.string(),
                   {{"path", path.string()}});
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void save_project(const Project &project, const fs::path &dir) {
  json schemes = json::array();
  for (const auto &s : project.schemes) schemes.push_back(to_json(s));
  json adjustments = json::array();
  for (const auto &a : project.adjustments) adjustments.push_back(to_json(a));
  json iterations = json::array();
  for (const auto &it : project.iterations) iterations.push_back(iteration_json(it));
  const json manifest = {
      {"format", "annoflow-project"},
      {"format_version", kFormatVersion},
      {"name", project.name},
      {"annotators", project.annotators},
      {"schemes", std::move(schemes)},
      {"adjustments", std::move(adjustments)},
      {"iterations", std::move(iterations)},
      {"splits", project.splits ? json("splits.json") : json(nullptr)}};

  std::vector<json> corpus;
  for (const auto &d : project.corpus) corpus.push_back(to_json(d));
  write_file_atomic(dir / "corpus.jsonl", to_jsonl(corpus));

  for (const Iteration &it : project.iterations) {
    const fs::path ann = dir / "annotations" / iter_name(it.index);
    for (const auto &[author, sets] : it.individual) {
      write_file_atomic(ann / (author + ".jsonl"), to_jsonl(rows_of(sets)));
    }
    if (!it.drafts.empty()) {
      write_file_atomic(ann / "drafts.jsonl", to_jsonl(rows_of(it.drafts)));
    }
    if (stage_at_least(it.stage, Stage::kMerged)) {
      write_file_atomic(ann / "merged.jsonl", to_jsonl(rows_of(it.merged)));
      std::vector<json> conflicts;
      for (const auto &c : it.conflicts) conflicts.push_back(to_json(c));
      write_file_atomic(dir / "conflicts" / (iter_name(it.index) + ".jsonl"),
                        to_jsonl(conflicts));
      std::vector<json> resolutions;
      for (const auto &r : it.resolutions) resolutions.push_back(to_json(r));
      write_file_atomic(dir / "resolutions" / (iter_name(it.index) + ".jsonl"),
                        to_jsonl(resolutions));
    }
    if (stage_at_least(it.stage, Stage::kResolved)) {
      write_file_atomic(ann / "gold.jsonl", to_jsonl(rows_of(it.gold)));
    }
  }

  std::vector<json> audit;
  for (const auto &e : project.audit_log) audit.push_back(to_json(e));
  write_file_atomic(dir / "audit.jsonl", to_jsonl(audit));

  if (project.splits) {
    const Splits &s = *project.splits;
    write_file_atomic(dir / "splits.json",
                      json{{"train", s.train},
                           {"val", s.val},
                           {"test", s.test},
                           {"seed", s.seed}}
                              .dump(2) +
                          "\n");
  }
  // The manifest goes last: it is what makes the other files reachable.
  write_file_atomic(dir / "project.json", manifest.dump(2) + "\n");
}

Project load_project(const fs::path &dir) {
  if (!fs::exists(dir / "project.json")) {
    throw io_error("ProjectLoadError",
                   "no project.json in " + dir.string(),
                   {{"path", dir.string()}});
  }
  const json manifest = read_json(dir / "project.json");
  return parse_or_throw("project manifest", [&] {
    if (manifest.at("format_version").get<int>() != kFormatVersion) {
      throw validation_error("SchemaViolation",
                             "unsupported project format version");
    }
    Project p;
    p.name = manifest.at("name").get<std::string>();
    p.annotators = manifest.at("annotators").get<std::vector<std::string>>();
    for (const json &s : manifest.at("schemes")) {
      p.schemes.push_back(label_scheme_from_json(s));
    }
    if (p.schemes.empty()) {
      throw validation_error("SchemaViolation", "project has no scheme");
    }
    for (const json &a : manifest.at("adjustments")) {
      p.adjustments.push_back(class_adjustment_from_json(a));
    }
    p.corpus = read_documents(dir / "corpus.jsonl");

    for (const json &j : manifest.at("iterations")) {
      Iteration it;
      it.index = j.at("index").get<int>();
      it.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
      it.stage = stage_from_string(j.at("stage").get<std::string>());
      it.sampling = sampling_config_from_json(j.at("sampling"));
      if (!j.at("assignments").is_null()) {
        it.assignments = assignment_plan_from_json(j.at("assignments"));
      }
      it.scheme_version = j.at("scheme_version").get<int>();
      it.draft_provider = optional_string(j, "draft_provider");

      const fs::path ann = dir / "annotations" / iter_name(it.index);
      if (fs::is_directory(ann)) {
        for (const auto &entry : fs::directory_iterator(ann)) {
          if (entry.path().extension() != ".jsonl") continue;
          const std::string stem = entry.path().stem().string();
          if (stem == "drafts" || stem == "merged" || stem == "gold") continue;
          it.individual[stem] = sets_by_doc(entry.path());
        }
      }
      it.drafts = sets_by_doc(ann / "drafts.jsonl");
      it.merged = sets_by_doc(ann / "merged.jsonl");
      it.gold = sets_by_doc(ann / "gold.jsonl");
      const fs::path conflicts = dir / "conflicts" / (iter_name(it.index) + ".jsonl");
      if (fs::exists(conflicts)) {
        for (const json &c : read_jsonl(conflicts)) {
          it.conflicts.push_back(conflict_from_json(c));
        }
      }
      const fs::path resolutions =
          dir / "resolutions" / (iter_name(it.index) + ".jsonl");
      if (fs::exists(resolutions)) {
        for (const json &r : read_jsonl(resolutions)) {
          it.resolutions.push_back(resolution_from_json(r));
        }
      }
      p.iterations.push_back(std::move(it));
    }

    for (const json &e : read_jsonl(dir / "audit.jsonl")) {
      p.audit_log.push_back(audit_event_from_json(e));
    }
    if (!manifest.at("splits").is_null()) {
      const json s = read_json(dir / "splits.json");
      Splits splits;
      splits.train = s.at("train").get<std::vector<std::string>>();
      splits.val = s.at("val").get<std::vector<std::string>>();
      splits.test = s.at("test").get<std::vector<std::string>>();
      splits.seed = s.at("seed").get<std::uint64_t>();
      p.splits = std::move(splits);
    }
    return p;
  });
}

ProjectStore::ProjectStore(fs::path dir)
    : dir_(std::move(dir)), project_(load_project(dir_)) {}

ProjectStore::ProjectStore(fs::path dir, Project project)
    : dir_(std::move(dir)), project_(std::move(project)) {}

}  // namespace annoflow
