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

#include "annoflow/workflow.hpp"

#include <algorithm>
#include <ctime>
#include <regex>
#include <set>

#include "annoflow/errors.hpp"
#include "annoflow/tokenize.hpp"

namespace annoflow {

namespace {

constexpr const char *kStageNames[] = {"Sampled",  "PreAnnotated", "Assigned",
                                       "Annotated", "Merged",      "Resolved",
                                       "Finalized"};

void require_stage(const Iteration &it, std::initializer_list<Stage> allowed,
                   const std::string &operation) {
  for (Stage s : allowed) {
    if (it.stage == s) return;
  }
  throw state_error("InvalidStage",
                    operation + " is not allowed: iteration " +
                        std::to_string(it.index) + " is " + to_string(it.stage),
                    {{"iteration", it.index}, {"stage", to_string(it.stage)}});
}

void transition(Project &project, Iteration &it, Stage to, std::string event,
                json detail = json::object()) {
  it.stage = to;
  project.record(std::move(event), it.index, to, std::move(detail));
}

void check_labels(const AnnotationSet &set, const LabelScheme &scheme) {
  for (const Span &s : set.spans()) {
    if (!scheme.contains(s.label())) {
      throw validation_error("UnknownLabel",
                             "label '" + s.label() + "' in " + set.doc_id() +
                                 " is not in scheme v" +
                                 std::to_string(scheme.version()),
                             {{"doc_id", set.doc_id()}, {"label", s.label()}});
    }
  }
}

std::vector<Document> documents_for(const Project &project,
                                    std::span<const std::string> ids) {
  std::vector<Document> docs;
  docs.reserve(ids.size());
  for (const auto &id : ids) docs.push_back(project.document(id));
  return docs;
}

std::map<std::string, AnnotationSet> remap_sets(
    const std::map<std::string, AnnotationSet> &sets,
    const ClassAdjustment &adj) {
  std::vector<AnnotationSet> flat;
  for (const auto &[id, s] : sets) flat.push_back(s);
  std::map<std::string, AnnotationSet> out;
  for (auto &s : apply_adjustment(flat, adj)) {
    std::string id = s.doc_id();
    out.emplace(std::move(id), std::move(s));
  }
  return out;
}

}  // namespace

std::string to_string(Stage stage) {
  return kStageNames[static_cast<int>(stage)];
}

Stage stage_from_string(const std::string &s) {
  for (int i = 0; i < 7; ++i) {
    if (s == kStageNames[i]) return static_cast<Stage>(i);
  }
  throw validation_error("SchemaViolation", "unknown stage '" + s + "'");
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::size_t> AssignmentPlan::part_of(
    const std::string &doc_id) const {
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (std::find(parts[i].begin(), parts[i].end(), doc_id) != parts[i].end()) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<std::string> AssignmentPlan::annotators_of_part(
    std::size_t part) const {
  std::vector<std::string> out;
  for (const auto &[annotator, p] : duties) {
    if (p == part) out.push_back(annotator);
  }
  return out;
}

std::vector<std::string> AssignmentPlan::annotators_of_doc(
    const std::string &doc_id) const {
  auto part = part_of(doc_id);
  return part ? annotators_of_part(*part) : std::vector<std::string>{};
}

AssignmentPlan build_assignment(std::span<const std::string> doc_ids,
                                std::span<const std::string> annotators,
                                std::size_t rotation) {
  const std::size_t n = annotators.size();
  if (n < 2) {
    throw validation_error("TooFewAnnotators",
                           "cross-checking needs at least 2 annotators");
  }
  if (doc_ids.size() < n) {
    throw validation_error("BatchTooSmall",
                           "a batch of " + std::to_string(doc_ids.size()) +
                               " documents cannot be split into " +
                               std::to_string(n) + " parts",
                           {{"k", doc_ids.size()}, {"annotators", n}});
  }
  std::vector<std::string> order(annotators.begin(), annotators.end());
  std::sort(order.begin(), order.end());
  std::rotate(order.begin(), order.begin() + static_cast<long>(rotation % n),
              order.end());

  AssignmentPlan plan;
  const std::size_t base = doc_ids.size() / n;
  const std::size_t extra = doc_ids.size() % n;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t size = base + (i < extra ? 1 : 0);
    plan.parts.emplace_back(doc_ids.begin() + static_cast<long>(next),
                            doc_ids.begin() + static_cast<long>(next + size));
    next += size;
    plan.duties.emplace_back(order[i], i);
    plan.duties.emplace_back(order[(i + 1) % n], i);
  }
  return plan;
}

bool Iteration::contains(const std::string &doc_id) const {
  return std::find(doc_ids.begin(), doc_ids.end(), doc_id) != doc_ids.end();
}

std::map<std::string, Resolution> Iteration::effective_resolutions() const {
  std::map<std::string, Resolution> out;
  for (const Resolution &r : resolutions) out.insert_or_assign(r.conflict_id, r);
  return out;
}

const Conflict *Iteration::find_conflict(const std::string &conflict_id) const {
  for (const Conflict &c : conflicts) {
    if (c.conflict_id == conflict_id) return &c;
  }
  return nullptr;
}

const Document *Project::find_document(const std::string &id) const {
  auto it = std::find_if(corpus.begin(), corpus.end(),
                         [&](const Document &d) { return d.id() == id; });
  return it == corpus.end() ? nullptr : &*it;
}

const Document &Project::document(const std::string &id) const {
  if (const Document *d = find_document(id)) return *d;
  throw not_found_error("UnknownDoc", "no document with id " + id,
                        {{"doc_id", id}});
}

Iteration &Project::iteration(int index) {
  return const_cast<Iteration &>(std::as_const(*this).iteration(index));
}

const Iteration &Project::iteration(int index) const {
  if (index < 1 || static_cast<std::size_t>(index) > iterations.size()) {
    throw not_found_error("UnknownIteration",
                          "no iteration " + std::to_string(index),
                          {{"iteration", index}});
  }
  return iterations[static_cast<std::size_t>(index - 1)];
}

std::optional<int> Project::in_flight() const {
  for (const Iteration &it : iterations) {
    if (it.stage != Stage::kFinalized) return it.index;
  }
  return std::nullopt;
}

std::vector<std::string> Project::labeled_pool() const {
  std::vector<std::string> out;
  for (const Iteration &it : iterations) {
    if (it.stage == Stage::kFinalized) {
      out.insert(out.end(), it.doc_ids.begin(), it.doc_ids.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Project::unlabeled_pool() const {
  std::set<std::string> sampled;
  for (const Iteration &it : iterations) {
    sampled.insert(it.doc_ids.begin(), it.doc_ids.end());
  }
  std::vector<std::string> out;
  for (const Document &d : corpus) {
    if (!sampled.count(d.id())) out.push_back(d.id());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const AuditEvent &Project::record(std::string event,
                                  std::optional<int> iteration,
                                  std::optional<Stage> stage, json detail) {
  AuditEvent e;
  e.seq = audit_log.size() + 1;
  e.timestamp = clock ? clock() : utc_now();
  e.event = std::move(event);
  e.iteration = iteration;
  e.stage = stage;
  e.detail = std::move(detail);
  audit_log.push_back(std::move(e));
  return audit_log.back();
}

Project create_project(std::string name, std::vector<Document> documents,
                       LabelScheme scheme, std::vector<std::string> annotators,
                       std::function<std::string()> clock) {
  if (name.empty()) {
    throw validation_error("InvalidProject", "project name must be nonempty");
  }
  static const std::regex kAnnotatorId("[A-Za-z0-9._-]+");
  std::sort(annotators.begin(), annotators.end());
  if (std::adjacent_find(annotators.begin(), annotators.end()) !=
      annotators.end()) {
    throw validation_error("InvalidAnnotator", "duplicate annotator ids");
  }
  for (const auto &a : annotators) {
    if (!std::regex_match(a, kAnnotatorId) || a == kMergedAuthor ||
        a == kGoldAuthor || a == "drafts" || a == "merged" || a == "gold") {
      throw validation_error("InvalidAnnotator",
                             "annotator id '" + a + "' is reserved or invalid",
                             {{"annotator", a}});
    }
  }
  if (annotators.size() < 2) {
    throw validation_error(
        "TooFewAnnotators",
        "cross-checking needs at least 2 annotators, got " +
            std::to_string(annotators.size()),
        {{"annotators", annotators.size()}});
  }
  if (documents.empty()) {
    throw validation_error("EmptyCorpus", "the corpus has no documents");
  }
  std::map<std::string, int> seen;
  for (const Document &d : documents) ++seen[d.id()];
  json duplicates = json::array();
  for (const auto &[id, count] : seen) {
    if (count > 1) duplicates.push_back(id);
  }
  if (!duplicates.empty()) {
    throw validation_error("DuplicateDocuments",
                           "duplicate document ids: " + duplicates.dump(),
                           {{"doc_ids", duplicates}});
  }

  Project p;
  p.name = std::move(name);
  p.corpus = std::move(documents);
  p.schemes.push_back(std::move(scheme));
  p.annotators = std::move(annotators);
  if (clock) p.clock = std::move(clock);
  p.record("project_created", std::nullopt, std::nullopt,
           {{"name", p.name},
            {"documents", p.corpus.size()},
            {"annotators", p.annotators},
            {"scheme", to_json(p.scheme())}});
  return p;
}

Iteration &sample_iteration(Project &project, const SamplingConfig &sampling,
                            const PredictionProvider *provider) {
  if (auto busy = project.in_flight()) {
    throw state_error("IterationInFlight",
                      "iteration " + std::to_string(*busy) +
                          " is not finalized yet",
                      {{"iteration", *busy}});
  }
  const std::vector<std::string> pool = project.unlabeled_pool();
  if (sampling.batch_size == 0) {
    throw validation_error("InvalidBatchSize", "batch size must be >= 1");
  }
  if (sampling.batch_size > pool.size()) {
    throw state_error("PoolExhausted",
                      "only " + std::to_string(pool.size()) +
                          " unsampled documents left, batch size is " +
                          std::to_string(sampling.batch_size),
                      {{"available", pool.size()}, {"k", sampling.batch_size}});
  }
  std::vector<std::string> batch;
  if (sampling.strategy == SamplingStrategy::kRandom) {
    batch = select_random(pool, sampling.batch_size, sampling.seed);
  } else {
    if (!provider) {
      throw validation_error(
          "ProviderRequired",
          to_string(sampling.strategy) + " sampling needs a prediction provider");
    }
    const auto docs = documents_for(project, pool);
    std::vector<UncertaintyScore> scores;
    for (const auto &p : fetch_predictions(*provider, docs, project.scheme())) {
      scores.push_back(score_uncertainty(p, sampling.strategy));
    }
    batch = select_batch(scores, sampling.batch_size);
  }

  Iteration it;
  it.index = static_cast<int>(project.iterations.size()) + 1;
  it.doc_ids = std::move(batch);
  it.sampling = sampling;
  it.scheme_version = project.scheme().version();
  project.iterations.push_back(std::move(it));
  Iteration &added = project.iterations.back();
  transition(project, added, Stage::kSampled, "iteration_sampled",
             {{"sampling", to_json(sampling)}, {"doc_ids", added.doc_ids}});
  return added;
}

Iteration &bootstrap_iteration(Project &project, int index,
                               const PredictionProvider &provider,
                               double min_entity_confidence) {
  Iteration &it = project.iteration(index);
  require_stage(it, {Stage::kSampled}, "bootstrap");
  const auto docs = documents_for(project, it.doc_ids);
  std::map<std::string, AnnotationSet> drafts;
  for (const auto &p : fetch_predictions(provider, docs, project.scheme())) {
    AnnotationSet draft =
        predictions_to_draft(p, min_entity_confidence, provider.name());
    drafts.emplace(p.doc_id, std::move(draft));
  }
  std::size_t spans = 0;
  for (const auto &[id, d] : drafts) spans += d.spans().size();
  it.drafts = std::move(drafts);
  it.draft_provider = provider.name();
  transition(project, it, Stage::kPreAnnotated, "iteration_pre_annotated",
             {{"provider", provider.name()},
              {"min_entity_confidence", min_entity_confidence},
              {"draft_spans", spans}});
  return it;
}

Iteration &assign_iteration(Project &project, int index) {
  Iteration &it = project.iteration(index);
  require_stage(it, {Stage::kSampled, Stage::kPreAnnotated}, "assign");
  AssignmentPlan plan =
      build_assignment(it.doc_ids, project.annotators,
                       static_cast<std::size_t>(it.index - 1));
  it.assignments = std::move(plan);
  transition(project, it, Stage::kAssigned, "iteration_assigned",
             {{"assignments", to_json(it.assignments)}});
  return it;
}

Iteration &plan_iteration(Project &project, const SamplingConfig &sampling,
                          const PredictionProvider *provider,
                          const PlanOptions &options) {
  Project work = project;
  Iteration &it = sample_iteration(work, sampling, provider);
  const int index = it.index;
  if (provider) {
    try {
      bootstrap_iteration(work, index, *provider, options.min_entity_confidence);
    } catch (const Error &e) {
      if (e.code() != "ProviderUnavailable" || !options.skip_bootstrap_on_failure) {
        throw;
      }
      work.record("bootstrap_skipped", index, std::nullopt,
                  {{"provider", provider->name()}, {"reason", e.what()}});
    }
  }
  // Fails before anything is committed if the batch cannot be split.
  assign_iteration(work, index);
  project = std::move(work);
  return project.iteration(index);
}

Iteration &ingest_individual_annotations(Project &project, int index,
                                         std::span<const AnnotationSet> sets) {
  Iteration &it = project.iteration(index);
  require_stage(it, {Stage::kAssigned, Stage::kAnnotated}, "import");
  const LabelScheme &scheme = project.scheme();
  for (const AnnotationSet &s : sets) {
    if (!it.contains(s.doc_id())) {
      throw validation_error("UnknownDoc",
                             "document " + s.doc_id() +
                                 " is not part of iteration " +
                                 std::to_string(index),
                             {{"doc_id", s.doc_id()}, {"iteration", index}});
    }
    const auto expected = it.assignments.annotators_of_doc(s.doc_id());
    if (std::find(expected.begin(), expected.end(), s.author()) ==
        expected.end()) {
      throw validation_error("WrongAnnotator",
                             s.author() + " is not assigned to document " +
                                 s.doc_id(),
                             {{"doc_id", s.doc_id()},
                              {"author", s.author()},
                              {"assigned", expected}});
    }
    if (s.scheme_version() != scheme.version()) {
      throw validation_error(
          "VersionSkew",
          "annotations of " + s.doc_id() + " by " + s.author() + " use v" +
              std::to_string(s.scheme_version()) + ", project is at v" +
              std::to_string(scheme.version()),
          {{"doc_id", s.doc_id()}, {"author", s.author()}});
    }
    check_labels(s, scheme);
    s.check_bounds(project.document(s.doc_id()));
  }

  json uploaded = json::array();
  for (const AnnotationSet &s : sets) {
    it.individual[s.author()].insert_or_assign(s.doc_id(), s);
    uploaded.push_back({{"doc_id", s.doc_id()}, {"author", s.author()}});
  }
  project.record("annotations_ingested", index, std::nullopt,
                 {{"sets", std::move(uploaded)}});

  bool complete = true;
  for (const auto &doc : it.doc_ids) {
    for (const auto &a : it.assignments.annotators_of_doc(doc)) {
      auto by_author = it.individual.find(a);
      if (by_author == it.individual.end() || !by_author->second.count(doc)) {
        complete = false;
      }
    }
  }
  if (complete && it.stage == Stage::kAssigned) {
    transition(project, it, Stage::kAnnotated, "iteration_annotated");
  }
  return it;
}

json to_json(const MergeSummary &s) {
  return {{"docs", s.docs},
          {"agreed_spans", s.agreed_spans},
          {"conflicts", s.conflicts},
          {"variants", s.variants},
          {"spans_per_annotator", s.spans_per_annotator}};
}

MergeSummary merge_iteration(Project &project, int index) {
  Iteration &it = project.iteration(index);
  require_stage(it, {Stage::kAnnotated}, "merge");
  MergeSummary summary;
  std::map<std::string, AnnotationSet> merged;
  std::vector<Conflict> conflicts;
  for (const auto &doc : it.doc_ids) {
    const auto pair = it.assignments.annotators_of_doc(doc);
    const AnnotationSet &a = it.individual.at(pair.at(0)).at(doc);
    const AnnotationSet &b = it.individual.at(pair.at(1)).at(doc);
    MergeResult r = merge_pair(a, b);
    summary.spans_per_annotator[a.author()] += a.spans().size();
    summary.spans_per_annotator[b.author()] += b.spans().size();
    for (const Span &s : r.merged.spans()) {
      if (s.is_conflict()) {
        ++summary.variants;
      } else {
        ++summary.agreed_spans;
      }
    }
    summary.conflicts += r.conflicts.size();
    std::move(r.conflicts.begin(), r.conflicts.end(),
              std::back_inserter(conflicts));
    merged.emplace(doc, std::move(r.merged));
  }
  summary.docs = it.doc_ids.size();
  it.merged = std::move(merged);
  it.conflicts = std::move(conflicts);
  transition(project, it, Stage::kMerged, "iteration_merged", to_json(summary));
  return summary;
}

const Conflict &record_resolution(Project &project, int index,
                                  const Resolution &resolution) {
  Iteration &it = project.iteration(index);
  require_stage(it, {Stage::kMerged}, "resolve");
  const Conflict *target = it.find_conflict(resolution.conflict_id);
  if (!target) {
    throw not_found_error("UnknownConflict",
                          "unknown conflict id " + resolution.conflict_id,
                          {{"conflict_id", resolution.conflict_id},
                           {"iteration", index}});
  }
  const std::string doc_id = target->doc_id;
  std::vector<Conflict> doc_conflicts;
  std::copy_if(it.conflicts.begin(), it.conflicts.end(),
               std::back_inserter(doc_conflicts),
               [&](const Conflict &c) { return c.doc_id == doc_id; });
  std::vector<Resolution> decided;
  for (auto &[id, r] : it.effective_resolutions()) {
    if (id != resolution.conflict_id && it.find_conflict(id)->doc_id == doc_id) {
      decided.push_back(r);
    }
  }
  decided.push_back(resolution);
  check_partial_resolutions(it.merged.at(doc_id), doc_conflicts, decided,
                            project.scheme(),
                            project.document(doc_id).length());

  it.resolutions.push_back(resolution);
  auto c = std::find_if(it.conflicts.begin(), it.conflicts.end(),
                        [&](const Conflict &x) {
                          return x.conflict_id == resolution.conflict_id;
                        });
  c->status = ConflictStatus::kResolved;
  project.record("resolution_recorded", index, std::nullopt,
                 to_json(resolution));
  return *c;
}

Iteration &finalize_iteration(Project &project, int index,
                              std::span<const Resolution> resolutions) {
  Project work = project;
  Iteration &it = work.iteration(index);
  require_stage(it, {Stage::kMerged}, "finalize");
  for (const Resolution &r : resolutions) record_resolution(work, index, r);

  const auto effective = it.effective_resolutions();
  json open = json::array();
  for (const Conflict &c : it.conflicts) {
    if (!effective.count(c.conflict_id)) open.push_back(c.conflict_id);
  }
  if (!open.empty()) {
    throw state_error("UnresolvedConflict",
                      std::to_string(open.size()) +
                          " conflict(s) still open: " + open.dump(),
                      {{"conflict_ids", open}, {"iteration", index}});
  }

  std::map<std::string, AnnotationSet> gold;
  for (const auto &doc : it.doc_ids) {
    std::vector<Conflict> doc_conflicts;
    std::vector<Resolution> doc_resolutions;
    for (const Conflict &c : it.conflicts) {
      if (c.doc_id != doc) continue;
      doc_conflicts.push_back(c);
      doc_resolutions.push_back(effective.at(c.conflict_id));
    }
    gold.emplace(doc, apply_resolutions(it.merged.at(doc), doc_conflicts,
                                        doc_resolutions, work.scheme(),
                                        work.document(doc).length()));
  }
  it.gold = std::move(gold);
  transition(work, it, Stage::kResolved, "iteration_resolved",
             {{"resolutions", effective.size()}});
  std::size_t spans = 0;
  for (const auto &[id, g] : it.gold) spans += g.spans().size();
  transition(work, it, Stage::kFinalized, "iteration_finalized",
             {{"docs", it.gold.size()}, {"gold_spans", spans}});
  project = std::move(work);
  return project.iteration(index);
}

const LabelScheme &remap(Project &project, ClassAdjustment adjustment) {
  for (const Iteration &it : project.iterations) {
    if (it.stage == Stage::kMerged || it.stage == Stage::kResolved) {
      throw state_error("UnresolvedConflictsPresent",
                        "iteration " + std::to_string(it.index) +
                            " is being adjudicated; finalize it first",
                        {{"iteration", it.index}});
    }
  }
  const bool stamped = adjustment.timestamp.empty();
  if (stamped) adjustment.timestamp = project.clock();
  LabelScheme next = validate_adjustment(project.scheme(), adjustment);

  // Merged sets and conflicts of finalized iterations keep their original
  // version as a historical record.
  auto current = [&](const std::map<std::string, AnnotationSet> &sets) {
    return !sets.empty() &&
           sets.begin()->second.scheme_version() == adjustment.from_version;
  };
  std::vector<Iteration> updated = project.iterations;
  for (Iteration &it : updated) {
    if (current(it.gold)) it.gold = remap_sets(it.gold, adjustment);
    for (auto &[author, sets] : it.individual) {
      if (current(sets)) sets = remap_sets(sets, adjustment);
    }
    if (current(it.drafts)) it.drafts = remap_sets(it.drafts, adjustment);
    if (it.stage != Stage::kFinalized) it.scheme_version = next.version();
  }
  project.iterations = std::move(updated);
  project.schemes.push_back(next);
  project.adjustments.push_back(adjustment);
  project.record("class_adjustment", std::nullopt, std::nullopt,
                 to_json(adjustment));
  // One clock reading for both records.
  if (stamped) project.audit_log.back().timestamp = adjustment.timestamp;
  return project.scheme();
}

const Splits &split_dataset(Project &project, std::size_t train,
                            std::size_t val, std::size_t test,
                            std::uint64_t seed, bool force) {
  if (project.splits && !force) {
    throw state_error("SplitExists",
                      "dataset is already split; pass force to re-split");
  }
  const auto pool = project.labeled_pool();
  if (train + val + test != pool.size()) {
    throw validation_error(
        "CountMismatch",
        "split sizes " + std::to_string(train) + "+" + std::to_string(val) +
            "+" + std::to_string(test) + " do not add up to " +
            std::to_string(pool.size()) + " finalized documents",
        {{"train", train}, {"val", val}, {"test", test},
         {"finalized", pool.size()}});
  }
  std::vector<std::string> order =
      pool.empty() ? pool : select_random(pool, pool.size(), seed);
  Splits s;
  s.seed = seed;
  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<std::string> part(order.begin() + static_cast<long>(from),
                                  order.begin() + static_cast<long>(from + count));
    std::sort(part.begin(), part.end());
    return part;
  };
  s.train = take(0, train);
  s.val = take(train, val);
  s.test = take(train + val, test);
  const bool replaced = project.splits.has_value();
  project.splits = std::move(s);
  project.record("dataset_split", std::nullopt, std::nullopt,
                 {{"train", train},
                  {"val", val},
                  {"test", test},
                  {"seed", seed},
                  {"forced", replaced}});
  return *project.splits;
}

std::vector<AnnotationSet> gold_sets(const Project &project,
                                     const std::string &split) {
  std::set<std::string> wanted;
  if (!split.empty()) {
    if (!project.splits) {
      throw state_error("NoSplits", "the dataset has not been split yet");
    }
    const Splits &s = *project.splits;
    const std::vector<std::string> *ids = split == "train" ? &s.train
                                          : split == "val" ? &s.val
                                          : split == "test" ? &s.test
                                                            : nullptr;
    if (!ids) {
      throw validation_error("UnknownSplit", "unknown split '" + split + "'");
    }
    wanted.insert(ids->begin(), ids->end());
  }
  std::vector<AnnotationSet> out;
  for (const Iteration &it : project.iterations) {
    if (it.stage != Stage::kFinalized) continue;
    for (const auto &[doc, g] : it.gold) {
      if (split.empty() || wanted.count(doc)) out.push_back(g);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const AnnotationSet &a, const AnnotationSet &b) {
              return a.doc_id() < b.doc_id();
            });
  return out;
}

std::vector<AgreementReport> iteration_agreement(const Project &project,
                                                 int index) {
  const Iteration &it = project.iteration(index);
  // Group docs by their (sorted) annotator pair.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> groups;
  for (const auto &doc : it.doc_ids) {
    auto pair = it.assignments.annotators_of_doc(doc);
    if (pair.size() != 2) continue;
    std::sort(pair.begin(), pair.end());
    auto a = it.individual.find(pair[0]);
    auto b = it.individual.find(pair[1]);
    if (a == it.individual.end() || b == it.individual.end() ||
        !a->second.count(doc) || !b->second.count(doc)) {
      continue;
    }
    groups[{pair[0], pair[1]}].push_back(doc);
  }
  if (groups.empty()) {
    throw state_error("NoAnnotations",
                      "iteration " + std::to_string(index) +
                          " has no document annotated by both annotators");
  }
  std::vector<AgreementReport> reports;
  for (const auto &[pair, docs] : groups) {
    std::vector<AnnotationSet> side_a;
    std::vector<AnnotationSet> side_b;
    std::vector<Document> texts;
    for (const auto &doc : docs) {
      side_a.push_back(it.individual.at(pair.first).at(doc));
      side_b.push_back(it.individual.at(pair.second).at(doc));
      texts.push_back(project.document(doc));
    }
    reports.push_back(compute_agreement(side_a, side_b, tokenize_corpus(texts)));
  }
  return reports;
}

json status(const Project &project) {
  json iterations = json::array();
  for (const Iteration &it : project.iterations) {
    std::size_t open = 0;
    const auto effective = it.effective_resolutions();
    for (const Conflict &c : it.conflicts) {
      if (!effective.count(c.conflict_id)) ++open;
    }
    iterations.push_back({{"index", it.index},
                          {"stage", to_string(it.stage)},
                          {"docs", it.doc_ids.size()},
                          {"scheme_version", it.scheme_version},
                          {"conflicts", it.conflicts.size()},
                          {"open_conflicts", open}});
  }
  json s = {{"name", project.name},
            {"documents", project.corpus.size()},
            {"annotators", project.annotators},
            {"scheme", to_json(project.scheme())},
            {"labeled", project.labeled_pool().size()},
            {"unlabeled", project.unlabeled_pool().size()},
            {"iterations", std::move(iterations)},
            {"audit_events", project.audit_log.size()}};
  if (project.splits) {
    s["splits"] = {{"train", project.splits->train.size()},
                   {"val", project.splits->val.size()},
                   {"test", project.splits->test.size()}};
  } else {
    s["splits"] = nullptr;
  }
  return s;
}

std::map<int, std::vector<Stage>> replay_stage_history(
    std::span<const AuditEvent> audit_log) {
  std::map<int, std::vector<Stage>> history;
  for (const AuditEvent &e : audit_log) {
    if (e.stage && e.iteration) history[*e.iteration].push_back(*e.stage);
  }
  return history;
}

json to_json(const AuditEvent &e) {
  return {{"seq", e.seq},
          {"timestamp", e.timestamp},
          {"event", e.event},
          {"iteration", optional_to_json(e.iteration)},
          {"stage", e.stage ? json(to_string(*e.stage)) : json(nullptr)},
          {"detail", e.detail}};
}

AuditEvent audit_event_from_json(const json &j) {
  return parse_or_throw("audit event", [&] {
    AuditEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp = j.at("timestamp").get<std::string>();
    e.event = j.at("event").get<std::string>();
    if (auto v = optional_integer(j, "iteration")) e.iteration = static_cast<int>(*v);
    if (auto s = optional_string(j, "stage")) e.stage = stage_from_string(*s);
    e.detail = j.value("detail", json::object());
    return e;
  });
}

json to_json(const AssignmentPlan &plan) {
  json parts = json::array();
  for (std::size_t i = 0; i < plan.parts.size(); ++i) {
    parts.push_back({{"part_index", i}, {"doc_ids", plan.parts[i]}});
  }
  json duties = json::array();
  for (const auto &[annotator, part] : plan.duties) {
    duties.push_back({{"annotator", annotator}, {"part_index", part}});
  }
  return {{"parts", std::move(parts)}, {"duties", std::move(duties)}};
}

AssignmentPlan assignment_plan_from_json(const json &j) {
  return parse_or_throw("assignment plan", [&] {
    AssignmentPlan plan;
    for (const json &p : j.at("parts")) {
      const auto idx = p.at("part_index").get<std::size_t>();
      if (idx != plan.parts.size()) {
        throw validation_error("SchemaViolation", "parts out of order");
      }
      plan.parts.push_back(p.at("doc_ids").get<std::vector<std::string>>());
    }
    for (const json &d : j.at("duties")) {
      plan.duties.emplace_back(d.at("annotator").get<std::string>(),
                               d.at("part_index").get<std::size_t>());
    }
    return plan;
  });
}

}  // namespace annoflow
