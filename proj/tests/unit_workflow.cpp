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


#include "doctest.h"

#include "annoflow/errors.hpp"
#include "annoflow/store.hpp"
#include "annoflow/workflow.hpp"
#include "support.hpp"

using namespace annoflow;
using namespace annoflow::testing;

namespace {

std::optional<Error> error_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e;
  }
  return std::nullopt;
}

std::string code_of(const std::function<void()> &f) {
  auto e = error_of(f);
  return e ? e->code() : "<none>";
}

Project small_project(std::size_t docs = 12,
                      std::vector<std::string> annotators = {"anna", "bo"}) {
  return create_project("p", synthetic_corpus(docs, 6), LabelScheme(1, {"X", "Y"}),
                        std::move(annotators), fixed_clock());
}

SamplingConfig random_k(std::size_t k, std::uint64_t seed = 1) {
  return {SamplingStrategy::kRandom, k, seed};
}

// Each assigned annotator of each doc submits the same single span.
std::vector<AnnotationSet> agreeing_sets(const Iteration &it) {
  std::vector<AnnotationSet> out;
  for (const auto &doc : it.doc_ids) {
    for (const auto &a : it.assignments.annotators_of_doc(doc)) {
      out.emplace_back(doc, a, it.scheme_version, std::vector<Span>{word_span(0, 0, "X")});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("create_project validation") {
  const auto docs = synthetic_corpus(3);
  const LabelScheme scheme(1, {"X"});
  CHECK(code_of([&] { create_project("p", docs, scheme, {"solo"}); }) == "TooFewAnnotators");
  CHECK(code_of([&] { create_project("p", docs, scheme, {"a", "a"}); }) == "InvalidAnnotator");
  CHECK(code_of([&] { create_project("p", {}, scheme, {"a", "b"}); }) == "EmptyCorpus");
  CHECK(code_of([&] { create_project("p", docs, scheme, {"a", "GOLD"}); }) ==
        "InvalidAnnotator");
  CHECK(code_of([&] { create_project("p", docs, scheme, {"a", "b c"}); }) ==
        "InvalidAnnotator");
  auto dup = docs;
  dup.push_back(docs[1]);
  const auto e = error_of([&] { create_project("p", dup, scheme, {"a", "b"}); });
  REQUIRE(e);
  CHECK(e->code() == "DuplicateDocuments");
  CHECK(e->detail().at("doc_ids") == json::array({docs[1].id()}));

  const Project p = create_project("p", docs, scheme, {"b", "a", "c", "d", "e"});
  CHECK(p.annotators == std::vector<std::string>{"a", "b", "c", "d", "e"});
  CHECK(p.iterations.empty());
  REQUIRE(p.audit_log.size() == 1);
  CHECK(p.audit_log[0].event == "project_created");
}

TEST_CASE("full-size project: 16 classes, 5 annotators") {
  const Project p = create_project("ads", synthetic_corpus(260), LabelScheme(1, sixteen_labels()),
                                   {"a1", "a2", "a3", "a4", "a5"});
  CHECK(p.corpus.size() == 260);
  CHECK(p.scheme().size() == 16);
  CHECK(p.unlabeled_pool().size() == 260);
}

TEST_CASE("assignment examples") {
  std::vector<std::string> fifty;
  for (int i = 0; i < 50; ++i) fifty.push_back(fmt::format("d{:02}", i));
  const std::vector<std::string> five{"a", "b", "c", "d", "e"};
  const auto plan = build_assignment(fifty, five);
  CHECK(plan.parts.size() == 5);
  for (const auto &part : plan.parts) CHECK(part.size() == 10);
  CHECK(plan.duties.size() == 10);
  std::map<std::string, int> load;
  for (const auto &[a, part] : plan.duties) ++load[a];
  for (const auto &a : five) CHECK(load[a] == 2);
  CHECK(plan.annotators_of_part(0) == std::vector<std::string>{"a", "b"});
  CHECK(plan.annotators_of_part(4) == std::vector<std::string>{"e", "a"});

  const std::vector<std::string> four{"w", "x", "y", "z"};
  const std::vector<std::string> two{"a", "b"};
  const auto small = build_assignment(four, two);
  CHECK(small.parts.size() == 2);
  for (const auto &doc : four) {
    auto who = small.annotators_of_doc(doc);
    std::sort(who.begin(), who.end());
    CHECK(who == two);
  }
  CHECK(code_of([&] { build_assignment(std::span(four).first(1), two); }) == "BatchTooSmall");
  const std::vector<std::string> one{"a"};
  CHECK(code_of([&] { build_assignment(four, one); }) == "TooFewAnnotators");
  CHECK(assignment_plan_from_json(to_json(plan)) == plan);
}

TEST_CASE("iteration state machine") {
  Project p = small_project();
  Iteration &it = plan_iteration(p, random_k(4));
  CHECK(it.stage == Stage::kAssigned);
  CHECK(it.doc_ids.size() == 4);
  CHECK(code_of([&] { plan_iteration(p, random_k(4)); }) == "IterationInFlight");
  CHECK(code_of([&] { merge_iteration(p, 1); }) == "InvalidStage");
  CHECK(code_of([&] { merge_iteration(p, 7); }) == "UnknownIteration");

  ingest_individual_annotations(p, 1, agreeing_sets(p.iteration(1)));
  CHECK(p.iteration(1).stage == Stage::kAnnotated);
  const MergeSummary summary = merge_iteration(p, 1);
  CHECK(summary.conflicts == 0);
  CHECK(summary.agreed_spans == 4);
  CHECK(p.iteration(1).stage == Stage::kMerged);
  CHECK(code_of([&] { merge_iteration(p, 1); }) == "InvalidStage");
  CHECK(code_of([&] { plan_iteration(p, random_k(4)); }) == "IterationInFlight");

  finalize_iteration(p, 1);
  CHECK(p.iteration(1).stage == Stage::kFinalized);
  for (const auto &[doc, gold] : p.iteration(1).gold) {
    CHECK(gold.is_gold());
    CHECK(gold.spans() == p.iteration(1).merged.at(doc).spans());
  }
  CHECK(p.labeled_pool().size() == 4);
  CHECK(code_of([&] { finalize_iteration(p, 1); }) == "InvalidStage");
}

TEST_CASE("ingestion rules") {
  Project p = small_project(12, {"anna", "bo", "cy"});
  plan_iteration(p, random_k(6));
  const Iteration &it = p.iteration(1);
  const std::string doc = it.assignments.parts[0][0];
  const auto assigned = it.assignments.annotators_of_doc(doc);
  std::string outsider;
  for (const auto &a : p.annotators) {
    if (std::find(assigned.begin(), assigned.end(), a) == assigned.end()) outsider = a;
  }
  REQUIRE_FALSE(outsider.empty());
  const std::vector<AnnotationSet> wrong{AnnotationSet(doc, outsider, 1, {})};
  CHECK(code_of([&] { ingest_individual_annotations(p, 1, wrong); }) == "WrongAnnotator");

  std::string unsampled;
  for (const auto &d : p.unlabeled_pool()) {
    if (!it.contains(d)) unsampled = d;
  }
  const std::vector<AnnotationSet> stranger{AnnotationSet(unsampled, assigned[0], 1, {})};
  CHECK(code_of([&] { ingest_individual_annotations(p, 1, stranger); }) == "UnknownDoc");
  const std::vector<AnnotationSet> skew{AnnotationSet(doc, assigned[0], 2, {})};
  CHECK(code_of([&] { ingest_individual_annotations(p, 1, skew); }) == "VersionSkew");
  const std::vector<AnnotationSet> bad_label{
      AnnotationSet(doc, assigned[0], 1, {word_span(0, 0, "Z")})};
  CHECK(code_of([&] { ingest_individual_annotations(p, 1, bad_label); }) == "UnknownLabel");
  const std::vector<AnnotationSet> too_long{
      AnnotationSet(doc, assigned[0], 1, {Span(0, 500, "X")})};
  CHECK(code_of([&] { ingest_individual_annotations(p, 1, too_long); }) == "SpanOutOfRange");

  // A re-upload replaces the earlier copy.
  const std::vector<AnnotationSet> first{
      AnnotationSet(doc, assigned[0], 1, {word_span(0, 0, "X")})};
  const std::vector<AnnotationSet> second{
      AnnotationSet(doc, assigned[0], 1, {word_span(1, 1, "Y")})};
  ingest_individual_annotations(p, 1, first);
  ingest_individual_annotations(p, 1, second);
  CHECK(p.iteration(1).individual.at(assigned[0]).size() == 1);
  CHECK(p.iteration(1).individual.at(assigned[0]).at(doc) == second[0]);
  CHECK(p.iteration(1).stage == Stage::kAssigned);

  ingest_individual_annotations(p, 1, agreeing_sets(p.iteration(1)));
  CHECK(p.iteration(1).stage == Stage::kAnnotated);
  for (const auto &d : p.iteration(1).doc_ids) {
    std::size_t copies = 0;
    for (const auto &[a, sets] : p.iteration(1).individual) copies += sets.count(d);
    CHECK(copies == 2);
  }
}

TEST_CASE("pools stay disjoint and docs are never resampled") {
  Project p = small_project(10);
  std::set<std::string> seen;
  for (int round = 0; round < 5; ++round) {
    const int k = plan_iteration(p, random_k(2, round)).index;
    for (const auto &d : p.iteration(k).doc_ids) CHECK(seen.insert(d).second);
    ingest_individual_annotations(p, k, agreeing_sets(p.iteration(k)));
    merge_iteration(p, k);
    finalize_iteration(p, k);
    const auto labeled = p.labeled_pool();
    const auto unlabeled = p.unlabeled_pool();
    CHECK(labeled.size() + unlabeled.size() == p.corpus.size());
    std::set<std::string> both(labeled.begin(), labeled.end());
    both.insert(unlabeled.begin(), unlabeled.end());
    CHECK(both.size() == p.corpus.size());
  }
  const auto e = error_of([&] { plan_iteration(p, random_k(2)); });
  REQUIRE(e);
  CHECK(e->code() == "PoolExhausted");
  CHECK(e->kind() == ErrorKind::kState);
}

TEST_CASE("uncertainty sampling through a provider") {
  TempDir tmp;
  Project p = small_project(6);
  const LabelScheme &scheme = p.scheme();
  std::vector<json> rows;
  for (std::size_t i = 0; i < p.corpus.size(); ++i) {
    TokenProbabilities t = confident_prediction(p.corpus[i], scheme, 6);
    // Docs 1 and 4 are the uncertain ones.
    if (i == 1 || i == 4) t.probs.setConstant(1.0 / static_cast<double>(t.probs.cols()));
    rows.push_back(to_json(t));
  }
  write_file_atomic(tmp / "preds.jsonl", to_jsonl(rows));
  const FilePredictionProvider provider(tmp / "preds.jsonl");
  SamplingConfig cfg{SamplingStrategy::kEntropy, 2, 0};
  CHECK(code_of([&] { plan_iteration(p, cfg); }) == "ProviderRequired");
  const Iteration &it = plan_iteration(p, cfg, &provider);
  CHECK(it.doc_ids == std::vector<std::string>{"doc-01", "doc-04"});
  CHECK(it.drafts.size() == 2);
  CHECK(it.draft_provider == "file:preds.jsonl");
}

TEST_CASE("plan_iteration commits nothing when bootstrap fails") {
  TempDir tmp;
  Project p = small_project(6);
  const RemotePredictionProvider dead("http://127.0.0.1:1", "dead", 2);
  const auto before_log = p.audit_log.size();
  CHECK(code_of([&] { plan_iteration(p, random_k(2), &dead); }) == "ProviderUnavailable");
  CHECK(p.iterations.empty());
  CHECK(p.audit_log.size() == before_log);

  PlanOptions skip;
  skip.skip_bootstrap_on_failure = true;
  const Iteration &it = plan_iteration(p, random_k(2), &dead, skip);
  CHECK(it.stage == Stage::kAssigned);
  CHECK(it.drafts.empty());
  bool skipped = false;
  for (const auto &e : p.audit_log) skipped |= e.event == "bootstrap_skipped";
  CHECK(skipped);
}

TEST_CASE("end-to-end toy run") {
  TempDir tmp;
  Project p = e2e_project(tmp / "preds.jsonl");
  run_e2e(p, tmp / "preds.jsonl");
  const Iteration &it = p.iteration(1);
  CHECK(it.stage == Stage::kFinalized);
  std::map<std::string, std::size_t> per_doc;
  for (const auto &c : it.conflicts) ++per_doc[c.doc_id];
  for (const auto &doc : it.doc_ids) {
    CHECK(per_doc[doc] == e2e_expected_conflicts(e2e_doc_number(doc)));
  }
  for (const auto &[doc, gold] : it.gold) {
    CHECK_FALSE(gold.has_conflicts());
    CHECK_FALSE(find_overlap(gold.spans()).has_value());
  }
  REQUIRE(p.splits);
  CHECK(p.splits->train.size() == 14);
  CHECK(p.splits->val.size() == 3);
  CHECK(p.splits->test.size() == 3);
  CHECK(gold_sets(p, "test").size() == 3);
  CHECK(gold_sets(p).size() == 20);
  CHECK(code_of([&] { gold_sets(p, "dev"); }) == "UnknownSplit");

  const auto reports = iteration_agreement(p, 1);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].pair == std::pair<std::string, std::string>{"anna", "bo"});
  CHECK(reports[0].entity_f1 < 1.0);
  CHECK(reports[0].doc_count == 20);
}

TEST_CASE("unresolved conflicts block finalization") {
  TempDir tmp;
  Project p = e2e_project(tmp / "preds.jsonl");
  const FilePredictionProvider provider(tmp / "preds.jsonl");
  plan_iteration(p, random_k(kE2eDocs), &provider);
  ingest_individual_annotations(p, 1, e2e_annotations(p.iteration(1)));
  merge_iteration(p, 1);
  auto rs = e2e_resolutions(p.iteration(1));
  const std::string missing = rs.back().conflict_id;
  rs.pop_back();
  const auto e = error_of([&] { finalize_iteration(p, 1, rs); });
  REQUIRE(e);
  CHECK(e->code() == "UnresolvedConflict");
  CHECK(e->detail().at("conflict_ids") == json::array({missing}));
  CHECK(p.iteration(1).stage == Stage::kMerged);
  CHECK(p.iteration(1).resolutions.empty());

  // Decisions can also be recorded one at a time; the last one wins.
  for (const auto &r : rs) record_resolution(p, 1, r);
  Resolution drop;
  drop.conflict_id = missing;
  drop.action = ResolutionAction::kDrop;
  record_resolution(p, 1, drop);
  Resolution unknown = drop;
  unknown.conflict_id = "nope#1";
  CHECK(code_of([&] { record_resolution(p, 1, unknown); }) == "UnknownConflict");
  finalize_iteration(p, 1);
  CHECK(p.iteration(1).stage == Stage::kFinalized);
}

TEST_CASE("audit log replays the stage history") {
  TempDir tmp;
  Project p = e2e_project(tmp / "preds.jsonl");
  run_e2e(p, tmp / "preds.jsonl");
  const auto history = replay_stage_history(p.audit_log);
  REQUIRE(history.count(1));
  CHECK(history.at(1) == std::vector<Stage>{Stage::kSampled, Stage::kPreAnnotated,
                                            Stage::kAssigned, Stage::kAnnotated,
                                            Stage::kMerged, Stage::kResolved,
                                            Stage::kFinalized});
  for (std::size_t i = 0; i < p.audit_log.size(); ++i) {
    CHECK(p.audit_log[i].seq == i + 1);
    CHECK(audit_event_from_json(to_json(p.audit_log[i])).event == p.audit_log[i].event);
  }
}

TEST_CASE("class adjustment inside a project") {
  TempDir tmp;
  Project p = e2e_project(tmp / "preds.jsonl");
  run_e2e(p, tmp / "preds.jsonl");
  ClassAdjustment adj;
  adj.from_version = 1;
  adj.to_version = 2;
  adj.mapping = {{"SKILL_HARD", "SKILL"}, {"JOB_TITLE", "JOB"}, {"JOB_TASK", "O"}};
  adj.rationale = "coarser classes";
  const auto log_before = p.audit_log.size();
  const LabelScheme &s2 = remap(p, adj);
  CHECK(s2.labels() == std::vector<std::string>{"SKILL", "JOB"});
  CHECK(p.audit_log.size() == log_before + 1);
  CHECK(p.audit_log.back().event == "class_adjustment");
  CHECK(p.adjustments.back().timestamp == p.audit_log.back().timestamp);
  for (const auto &g : gold_sets(p)) {
    CHECK(g.scheme_version() == 2);
    for (const Span &s : g.spans()) CHECK(s2.contains(s.label()));
  }
  CHECK(code_of([&] { remap(p, adj); }) == "VersionSkew");

  // Refused while conflicts are open.
  Project q = e2e_project(tmp / "preds2.jsonl");
  const FilePredictionProvider provider(tmp / "preds2.jsonl");
  plan_iteration(q, random_k(kE2eDocs), &provider);
  ingest_individual_annotations(q, 1, e2e_annotations(q.iteration(1)));
  merge_iteration(q, 1);
  CHECK(code_of([&] { remap(q, adj); }) == "UnresolvedConflictsPresent");
}

TEST_CASE("dataset splits") {
  TempDir tmp;
  Project p = e2e_project(tmp / "preds.jsonl");
  run_e2e(p, tmp / "preds.jsonl");
  const Splits first = *p.splits;
  std::set<std::string> all(first.train.begin(), first.train.end());
  all.insert(first.val.begin(), first.val.end());
  all.insert(first.test.begin(), first.test.end());
  CHECK(all.size() == 20);
  CHECK(code_of([&] { split_dataset(p, 14, 3, 3, 11); }) == "SplitExists");
  CHECK(code_of([&] { split_dataset(p, 10, 3, 3, 11, true); }) == "CountMismatch");
  CHECK(split_dataset(p, 14, 3, 3, 11, true) == first);
  CHECK(p.audit_log.back().detail.at("forced") == true);
  const Splits &everything = split_dataset(p, 20, 0, 0, 3, true);
  CHECK(everything.train.size() == 20);
  CHECK(everything.val.empty());

  Project fresh = small_project();
  CHECK(code_of([&] { gold_sets(fresh, "train"); }) == "NoSplits");
}

TEST_CASE("save, load, save is byte-identical") {
  TempDir tmp;
  Project p = e2e_project(tmp / "preds.jsonl");
  run_e2e(p, tmp / "preds.jsonl");
  save_project(p, tmp / "a");
  const Project loaded = load_project(tmp / "a");
  save_project(loaded, tmp / "b");
  const auto a = snapshot_files(tmp / "a");
  CHECK(a.size() > 5);
  CHECK(a == snapshot_files(tmp / "b"));
  CHECK(loaded.iteration(1).gold == p.iteration(1).gold);
  CHECK(loaded.iteration(1).conflicts == p.iteration(1).conflicts);
  CHECK(loaded.splits == p.splits);

  const auto e = error_of([&] { load_project(tmp / "missing"); });
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::kIo);
}

TEST_CASE("store writes are all-or-nothing") {
  TempDir tmp;
  ProjectStore store(tmp / "proj", small_project());
  store.write([](Project &) {});
  const auto before = snapshot_files(tmp / "proj");
  CHECK(code_of([&] {
          store.write([](Project &p) {
            plan_iteration(p, random_k(4));
            throw validation_error("Boom", "abort");
          });
        }) == "Boom");
  CHECK(store.read([](const Project &p) { return p.iterations.size(); }) == 0);
  CHECK(snapshot_files(tmp / "proj") == before);

  const int k = store.write([](Project &p) { return plan_iteration(p, random_k(4)).index; });
  CHECK(k == 1);
  ProjectStore reopened(tmp / "proj");
  CHECK(reopened.read([](const Project &p) { return p.iteration(1).stage; }) ==
        Stage::kAssigned);
}
