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

#ifndef ANNOFLOW_WORKFLOW_HPP_
#define ANNOFLOW_WORKFLOW_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annoflow/agreement.hpp"
#include "annoflow/io.hpp"
#include "annoflow/merge.hpp"
#include "annoflow/predictions.hpp"
#include "annoflow/sampling.hpp"
#include "annoflow/taxonomy.hpp"
#include "annoflow/types.hpp"

namespace annoflow {

// Stages move forward one at a time; PreAnnotated may be skipped.
enum class Stage {
  kSampled,
  kPreAnnotated,
  kAssigned,
  kAnnotated,
  kMerged,
  kResolved,
  kFinalized,
};

std::string to_string(Stage stage);
Stage stage_from_string(const std::string &s);

// parts[i] is annotated by the two annotators that hold a duty for part i.
struct AssignmentPlan {
  std::vector<std::vector<std::string>> parts;
  std::vector<std::pair<std::string, std::size_t>> duties;

  std::optional<std::size_t> part_of(const std::string &doc_id) const;
  std::vector<std::string> annotators_of_part(std::size_t part) const;
  // The two annotators expected to upload `doc_id`; empty if not planned.
  std::vector<std::string> annotators_of_doc(const std::string &doc_id) const;

  friend bool operator==(const AssignmentPlan &,
                         const AssignmentPlan &) = default;
};

// Splits `doc_ids` into N contiguous parts (N = number of annotators, sizes
// differing by at most one) and gives part i to annotators i and i+1 mod N of
// the id-sorted annotator list rotated left by `rotation`. Every part gets two
// distinct annotators and every annotator exactly two parts.
//
// Throws "TooFewAnnotators" (N < 2) or "BatchTooSmall" (fewer docs than N).
AssignmentPlan build_assignment(std::span<const std::string> doc_ids,
                                std::span<const std::string> annotators,
                                std::size_t rotation = 0);

struct Iteration {
  int index = 1;
  std::vector<std::string> doc_ids;
  Stage stage = Stage::kSampled;
  SamplingConfig sampling;
  AssignmentPlan assignments;
  int scheme_version = 1;
  std::optional<std::string> draft_provider;
  std::map<std::string, AnnotationSet> drafts;
  // author -> doc id -> uploaded set
  std::map<std::string, std::map<std::string, AnnotationSet>> individual;
  std::map<std::string, AnnotationSet> merged;
  std::vector<Conflict> conflicts;
  // Every accepted decision in order; the last one per conflict counts.
  std::vector<Resolution> resolutions;
  std::map<std::string, AnnotationSet> gold;

  bool contains(const std::string &doc_id) const;
  // Latest resolution per conflict id.
  std::map<std::string, Resolution> effective_resolutions() const;
  const Conflict *find_conflict(const std::string &conflict_id) const;
};

struct AuditEvent {
  std::uint64_t seq = 0;
  std::string timestamp;
  std::string event;
  std::optional<int> iteration;
  // Set exactly for stage transitions: the stage entered.
  std::optional<Stage> stage;
  json detail = json::object();
};

struct Splits {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  friend bool operator==(const Splits &, const Splits &) = default;
};

// RFC 3339 UTC timestamp of the current time.
std::string utc_now();

struct Project {
  std::string name;
  std::vector<Document> corpus;
  std::vector<LabelScheme> schemes;  // schemes[i + 1] = adjustments[i](schemes[i])
  std::vector<ClassAdjustment> adjustments;
  std::vector<std::string> annotators;  // sorted
  std::vector<Iteration> iterations;
  std::vector<AuditEvent> audit_log;
  std::optional<Splits> splits;
  // Time source for audit entries; not persisted.
  std::function<std::string()> clock = utc_now;

  const LabelScheme &scheme() const { return schemes.back(); }
  const Document *find_document(const std::string &id) const;
  const Document &document(const std::string &id) const;
  Iteration &iteration(int index);
  const Iteration &iteration(int index) const;
  // Index of the iteration that is not yet Finalized, if any.
  std::optional<int> in_flight() const;
  // Documents of finalized iterations, sorted.
  std::vector<std::string> labeled_pool() const;
  // Corpus minus every sampled document, sorted.
  std::vector<std::string> unlabeled_pool() const;

  const AuditEvent &record(std::string event, std::optional<int> iteration,
                           std::optional<Stage> stage, json detail = json::object());
};

// Throws "TooFewAnnotators", "InvalidAnnotator", "EmptyCorpus",
// "DuplicateDocuments" or "InvalidScheme".
Project create_project(std::string name, std::vector<Document> documents,
                       LabelScheme scheme, std::vector<std::string> annotators,
                       std::function<std::string()> clock = utc_now);

// Draws a batch from never-sampled documents into a new iteration (stage
// Sampled). Uncertainty strategies score the whole pool with `provider`.
// Throws "IterationInFlight", "PoolExhausted", "ProviderRequired".
Iteration &sample_iteration(Project &project, const SamplingConfig &sampling,
                            const PredictionProvider *provider = nullptr);

// Sampled -> PreAnnotated: one draft per document, shared by both of its
// annotators.
Iteration &bootstrap_iteration(Project &project, int index,
                               const PredictionProvider &provider,
                               double min_entity_confidence = 0.0);

// Sampled | PreAnnotated -> Assigned, rotating the annotator order by the
// iteration index.
Iteration &assign_iteration(Project &project, int index);

struct PlanOptions {
  double min_entity_confidence = 0.0;
  // Continue without drafts if the provider is unreachable during bootstrap.
  bool skip_bootstrap_on_failure = false;
};

// sample -> (bootstrap if a provider is given) -> assign, all or nothing.
Iteration &plan_iteration(Project &project, const SamplingConfig &sampling,
                          const PredictionProvider *provider = nullptr,
                          const PlanOptions &options = {});

// Stores uploads per (doc, author); a later upload replaces an earlier one.
// Advances Assigned -> Annotated once both copies of every doc exist.
// Throws "UnknownDoc", "WrongAnnotator", "VersionSkew", "UnknownLabel".
Iteration &ingest_individual_annotations(Project &project, int index,
                                         std::span<const AnnotationSet> sets);

struct MergeSummary {
  std::size_t docs = 0;
  std::size_t agreed_spans = 0;
  std::size_t conflicts = 0;
  std::size_t variants = 0;
  std::map<std::string, std::size_t> spans_per_annotator;
};

json to_json(const MergeSummary &s);

// Annotated -> Merged.
MergeSummary merge_iteration(Project &project, int index);

// Records one decision while the iteration is Merged (last write wins per
// conflict). Rejects decisions that would collide with agreed spans or with
// other decided conflicts. Returns the updated conflict.
const Conflict &record_resolution(Project &project, int index,
                                  const Resolution &resolution);

// Merged -> Resolved -> Finalized. `resolutions` are recorded first; then
// every conflict must have a decision. Throws "UnresolvedConflict" listing
// all open ids, or "OverlapAfterResolution".
Iteration &finalize_iteration(Project &project, int index,
                              std::span<const Resolution> resolutions = {});

// Applies a class-system adjustment to gold, individual and draft data and
// appends one audit entry. Refused while an iteration is Merged or Resolved.
const LabelScheme &remap(Project &project, ClassAdjustment adjustment);

// Seeded split of all finalized documents. Refused if splits exist unless
// `force` is set (the overwrite is logged).
const Splits &split_dataset(Project &project, std::size_t train,
                            std::size_t val, std::size_t test,
                            std::uint64_t seed, bool force = false);

// Gold sets of finalized iterations, optionally restricted to a split
// ("train", "val" or "test"), sorted by doc id.
std::vector<AnnotationSet> gold_sets(const Project &project,
                                     const std::string &split = {});

// One report per annotator pair over the iteration's individual uploads.
std::vector<AgreementReport> iteration_agreement(const Project &project,
                                                 int index);

json status(const Project &project);

// Stage history per iteration, rebuilt from transition events only.
std::map<int, std::vector<Stage>> replay_stage_history(
    std::span<const AuditEvent> audit_log);

json to_json(const AuditEvent &e);
AuditEvent audit_event_from_json(const json &j);
json to_json(const AssignmentPlan &plan);
AssignmentPlan assignment_plan_from_json(const json &j);

// Project directory layout:
//   project.json, corpus.jsonl, audit.jsonl, splits.json,
//   annotations/iter-<k>/{<author>,drafts,merged,gold}.jsonl,
//   conflicts/iter-<k>.jsonl, resolutions/iter-<k>.jsonl
void save_project(const Project &project, const std::filesystem::path &dir);
Project load_project(const std::filesystem::path &dir);

}  // namespace annoflow

#endif  // ANNOFLOW_WORKFLOW_HPP_
