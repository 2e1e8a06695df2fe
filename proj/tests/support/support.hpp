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

// Shared helpers for the test binaries: temp dirs, random generators,
// brute-force oracles and a small synthetic corpus.

#ifndef ANNOFLOW_TESTS_SUPPORT_HPP_
#define ANNOFLOW_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "annoflow/evaluation.hpp"
#include "annoflow/io.hpp"
#include "annoflow/merge.hpp"
#include "annoflow/predictions.hpp"
#include "annoflow/types.hpp"
#include "annoflow/workflow.hpp"

namespace annoflow::testing {

namespace fs = std::filesystem;
using Rng = std::mt19937_64;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "annoflow-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const fs::path &path() const { return path_; }
  fs::path operator/(const std::string &p) const { return path_ / p; }

 private:
  fs::path path_;
};

inline std::size_t rand_in(Rng &rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng &rng, double p = 0.5) {
  return std::bernoulli_distribution(p)(rng);
}

// Words of three letters separated by one space: token i is [4i, 4i + 3).
inline std::string word_text(std::size_t n_words) {
  std::string text;
  for (std::size_t i = 0; i < n_words; ++i) {
    if (i) text += ' ';
    text += fmt::format("w{:02}", i % 100);
  }
  return text;
}

inline std::vector<TokenSpan> word_tokens(std::size_t n_words) {
  std::vector<TokenSpan> out;
  for (std::size_t i = 0; i < n_words; ++i) out.push_back({4 * i, 4 * i + 3});
  return out;
}

// Character span covering words [first, last].
inline Span word_span(std::size_t first, std::size_t last, std::string label) {
  return Span(4 * first, 4 * last + 3, std::move(label));
}

inline std::vector<std::string> make_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(fmt::format("L{}", i));
  return out;
}

// Up to max_spans random non-overlapping character spans inside [0, length).
inline std::vector<Span> random_spans(Rng &rng, std::size_t length,
                                      std::size_t max_spans,
                                      const std::vector<std::string> &labels) {
  std::vector<Span> out;
  const std::size_t want = rand_in(rng, 0, max_spans);
  for (std::size_t attempt = 0; out.size() < want && attempt < 50; ++attempt) {
    const std::size_t start = rand_in(rng, 0, length - 1);
    const std::size_t end = rand_in(rng, start + 1, std::min(length, start + 20));
    Span s(start, end, labels[rand_in(rng, 0, labels.size() - 1)]);
    if (std::none_of(out.begin(), out.end(),
                     [&](const Span &o) { return o.overlaps(s); })) {
      out.push_back(s);
    }
  }
  return out;
}

// Same, but aligned to whole words of a word_text document.
inline std::vector<Span> random_word_spans(Rng &rng, std::size_t n_words,
                                           std::size_t max_spans,
                                           const std::vector<std::string> &labels) {
  std::vector<Span> out;
  const std::size_t want = rand_in(rng, 0, max_spans);
  for (std::size_t attempt = 0; out.size() < want && attempt < 50; ++attempt) {
    const std::size_t first = rand_in(rng, 0, n_words - 1);
    const std::size_t last = rand_in(rng, first, std::min(n_words - 1, first + 3));
    Span s = word_span(first, last, labels[rand_in(rng, 0, labels.size() - 1)]);
    if (std::none_of(out.begin(), out.end(),
                     [&](const Span &o) { return o.overlaps(s); })) {
      out.push_back(s);
    }
  }
  return out;
}

// ---- brute-force evaluation oracle ----

struct OracleCounts {
  std::map<std::string, Counts> entity;
  std::map<std::string, Counts> token;
  std::map<std::string, std::size_t> support;
  Counts micro_entity;
  Counts micro_token;
  std::map<std::pair<std::string, std::string>, std::int64_t> confusion;
};

// Label of a token: the earliest-starting span sharing a character with it.
inline std::string oracle_token_label(const TokenSpan &t,
                                      const std::vector<Span> &spans) {
  const Span *best = nullptr;
  for (const Span &s : spans) {
    if (s.start() < t.end && t.start < s.end() &&
        (!best || s.start() < best->start())) {
      best = &s;
    }
  }
  return best ? best->label() : std::string(kOutsideLabel);
}

inline OracleCounts oracle_counts(
    const std::vector<std::tuple<std::vector<TokenSpan>, std::vector<Span>,
                                 std::vector<Span>>> &docs,
    const std::vector<std::string> &labels) {
  OracleCounts o;
  for (const auto &l : labels) {
    o.entity[l];
    o.token[l];
    o.support[l] = 0;
  }
  for (const auto &[tokens, gold, pred] : docs) {
    for (const Span &g : gold) {
      ++o.support[g.label()];
      bool hit = false;
      for (const Span &p : pred) {
        hit = hit || (p.start() == g.start() && p.end() == g.end() &&
                      p.label() == g.label());
      }
      if (hit) {
        ++o.entity[g.label()].tp;
      } else {
        ++o.entity[g.label()].fn;
      }
    }
    for (const Span &p : pred) {
      bool hit = false;
      for (const Span &g : gold) {
        hit = hit || (p.start() == g.start() && p.end() == g.end() &&
                      p.label() == g.label());
      }
      if (!hit) ++o.entity[p.label()].fp;
    }
    for (const TokenSpan &t : tokens) {
      const std::string g = oracle_token_label(t, gold);
      const std::string p = oracle_token_label(t, pred);
      ++o.confusion[{g, p}];
      if (g == p) {
        if (g != kOutsideLabel) ++o.token[g].tp;
        continue;
      }
      if (p != kOutsideLabel) ++o.token[p].fp;
      if (g != kOutsideLabel) ++o.token[g].fn;
    }
  }
  for (const auto &l : labels) {
    o.micro_entity += o.entity[l];
    o.micro_token += o.token[l];
  }
  return o;
}

inline double oracle_f1(const Counts &c) {
  const double p = c.tp + c.fp ? double(c.tp) / double(c.tp + c.fp) : 0.0;
  const double r = c.tp + c.fn ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// ---- merge oracle pieces ----

using VariantKey = std::tuple<std::size_t, std::size_t, std::string, std::string>;

inline VariantKey variant_key(const Span &v) {
  return {v.start(), v.end(), v.candidate_label().value_or(""),
          v.origin().value_or("")};
}

inline std::set<std::set<VariantKey>> conflict_groups(
    const std::vector<Conflict> &conflicts) {
  std::set<std::set<VariantKey>> out;
  for (const Conflict &c : conflicts) {
    std::set<VariantKey> g;
    for (const Span &v : c.variants) g.insert(variant_key(v));
    out.insert(std::move(g));
  }
  return out;
}

inline std::set<std::tuple<std::size_t, std::size_t, std::string>> agreed_keys(
    const AnnotationSet &merged) {
  std::set<std::tuple<std::size_t, std::size_t, std::string>> out;
  for (const Span &s : merged.spans()) {
    if (!s.is_conflict()) out.insert({s.start(), s.end(), s.label()});
  }
  return out;
}

// ---- synthetic project ----

inline std::vector<Document> synthetic_corpus(std::size_t n, std::size_t words = 12) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    docs.emplace_back(fmt::format("doc-{:02}", i), word_text(words));
  }
  return docs;
}

// A clock that ticks one second per call, for reproducible audit logs.
inline std::function<std::string()> fixed_clock() {
  auto tick = std::make_shared<int>(0);
  return [tick] {
    const int t = (*tick)++;
    return fmt::format("2026-01-01T00:{:02}:{:02}Z", (t / 60) % 60, t % 60);
  };
}

// Confident predictions tagging word 0 as B-<label0> and the rest O.
inline TokenProbabilities confident_prediction(const Document &doc,
                                               const LabelScheme &scheme,
                                               std::size_t n_words) {
  TokenProbabilities p;
  p.doc_id = doc.id();
  p.scheme_version = scheme.version();
  p.label_order = bio_tag_set(scheme);
  p.tokens = word_tokens(n_words);
  p.probs = ProbabilityMatrix::Zero(static_cast<Eigen::Index>(n_words),
                                    static_cast<Eigen::Index>(p.label_order.size()));
  for (std::size_t r = 0; r < n_words; ++r) {
    p.probs(static_cast<Eigen::Index>(r), r == 0 ? 1 : 0) = 0.9;
    p.probs(static_cast<Eigen::Index>(r), r == 0 ? 0 : 1) = 0.1;
  }
  return p;
}

// Report fixture with pooled entity counts TP=18, FP=7, FN=7. Each case is a
// four-word document; gold and prediction cover words [first, last] or nothing.
struct ReportFixture {
  std::vector<Document> docs;
  LabelScheme scheme{1, {"SKILL_HARD", "JOB_TITLE", "JOB_TASK"}};
  std::vector<AnnotationSet> gold;
  std::vector<AnnotationSet> pred;
};

inline ReportFixture report_fixture() {
  using Words = std::optional<std::pair<std::size_t, std::size_t>>;
  struct Case {
    const char *label;
    Words gold;
    Words pred;
    int copies;
  };
  const Words one = std::pair<std::size_t, std::size_t>{1, 1};
  const Words two = std::pair<std::size_t, std::size_t>{1, 2};
  const Case cases[] = {
      {"SKILL_HARD", one, one, 8},  {"SKILL_HARD", two, one, 2},
      {"JOB_TITLE", one, one, 6},   {"JOB_TITLE", one, std::nullopt, 2},
      {"JOB_TITLE", std::nullopt, one, 2},
      {"JOB_TASK", one, one, 4},    {"JOB_TASK", one, two, 3},
  };
  ReportFixture f;
  auto spans = [](const Words &w, const char *label) {
    std::vector<Span> out;
    if (w) out.push_back(word_span(w->first, w->second, label));
    return out;
  };
  for (const Case &c : cases) {
    for (int i = 0; i < c.copies; ++i) {
      const std::string id = fmt::format("ad-{:02}", f.docs.size());
      f.docs.emplace_back(id, word_text(4));
      f.gold.emplace_back(id, "GOLD", 1, spans(c.gold, c.label));
      f.pred.emplace_back(id, "model", 1, spans(c.pred, c.label));
    }
  }
  return f;
}

// ---- random evaluation instances ----

struct EvalInstance {
  std::vector<Document> docs;
  LabelScheme scheme{1, {"L0"}};
  std::vector<AnnotationSet> gold;
  std::vector<AnnotationSet> pred;
  std::vector<std::tuple<std::vector<TokenSpan>, std::vector<Span>, std::vector<Span>>>
      oracle_input;
};

// Up to 10 docs, 5 entities per doc and 4 classes. Predictions are edits of
// the gold: kept, shifted, relabelled, dropped, plus spurious extras.
inline EvalInstance random_eval_instance(Rng &rng) {
  EvalInstance inst;
  const auto labels = make_labels(rand_in(rng, 1, 4));
  inst.scheme = LabelScheme(1, labels);
  const std::size_t n_docs = rand_in(rng, 1, 10);
  for (std::size_t d = 0; d < n_docs; ++d) {
    const std::size_t words = rand_in(rng, 1, 16);
    const std::string id = fmt::format("doc-{}", d);
    inst.docs.emplace_back(id, word_text(words));
    const std::size_t length = inst.docs.back().length();
    const bool aligned = coin(rng, 0.7);
    auto gold = aligned ? random_word_spans(rng, words, 5, labels)
                        : random_spans(rng, length, 5, labels);
    std::vector<Span> pred;
    auto try_add = [&](const Span &s) {
      if (std::none_of(pred.begin(), pred.end(),
                       [&](const Span &o) { return o.overlaps(s); })) {
        pred.push_back(s);
      }
    };
    for (const Span &g : gold) {
      switch (rand_in(rng, 0, 4)) {
        case 0:
        case 1:
          try_add(g);
          break;
        case 2: {
          const std::size_t start = g.start() > 0 && coin(rng) ? g.start() - 1 : g.start();
          const std::size_t end = std::min(length, g.end() + rand_in(rng, 0, 4));
          try_add(Span(start, end, g.label()));
          break;
        }
        case 3:
          try_add(g.with_label(labels[rand_in(rng, 0, labels.size() - 1)]));
          break;
        default:
          break;
      }
    }
    for (const Span &extra : random_spans(rng, length, 2, labels)) try_add(extra);
    inst.gold.emplace_back(id, "GOLD", 1, gold);
    inst.pred.emplace_back(id, "model", 1, pred);
    inst.oracle_input.emplace_back(word_tokens(words), inst.gold.back().spans(),
                                   inst.pred.back().spans());
  }
  return inst;
}

// Empty when the report agrees with the oracle, else a description.
inline std::string compare_with_oracle(const EvalReport &r, const OracleCounts &o,
                                       const std::vector<std::string> &labels,
                                       double tol) {
  auto close = [&](double a, double b) { return std::abs(a - b) <= tol; };
  auto prf_ok = [&](const Prf &p, const Counts &c) {
    const double prec = c.tp + c.fp ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    const double rec = c.tp + c.fn ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    return close(p.precision, prec) && close(p.recall, rec) && close(p.f1, oracle_f1(c));
  };
  for (const auto &l : labels) {
    const ClassScores &c = r.per_class.at(l);
    if (!(c.entity_counts == o.entity.at(l))) return "entity counts of " + l;
    if (!(c.token_counts == o.token.at(l))) return "token counts of " + l;
    if (c.support != o.support.at(l)) return "support of " + l;
    if (!prf_ok(c.entity, o.entity.at(l))) return "entity scores of " + l;
    if (!prf_ok(c.token, o.token.at(l))) return "token scores of " + l;
  }
  if (!(r.micro_entity_counts == o.micro_entity)) return "micro entity counts";
  if (!(r.micro_token_counts == o.micro_token)) return "micro token counts";
  if (!prf_ok(r.micro_entity, o.micro_entity)) return "micro entity scores";
  if (!prf_ok(r.micro_token, o.micro_token)) return "micro token scores";
  std::vector<std::string> axis = labels;
  axis.emplace_back(kOutsideLabel);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    for (std::size_t j = 0; j < axis.size(); ++j) {
      auto it = o.confusion.find({axis[i], axis[j]});
      const std::int64_t want = it == o.confusion.end() ? 0 : it->second;
      if (r.confusion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != want) {
        return "confusion cell " + axis[i] + "/" + axis[j];
      }
    }
  }
  return {};
}

// ---- class adjustments ----

// Maps every label to O, to another label of the scheme, or to a fresh one.
// The first label always survives so the new scheme is never empty.
inline ClassAdjustment random_adjustment(Rng &rng, const LabelScheme &old) {
  ClassAdjustment adj;
  adj.from_version = old.version();
  adj.to_version = old.version() + 1;
  adj.rationale = "random";
  adj.timestamp = "2026-01-01T00:00:00Z";
  const auto &labels = old.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t pick = rand_in(rng, 0, 5);
    if (pick == 0 && i > 0) {
      adj.mapping[labels[i]] = std::string(kOutsideLabel);
    } else if (pick <= 2) {
      adj.mapping[labels[i]] = labels[rand_in(rng, 0, labels.size() - 1)];
    } else if (pick == 3) {
      adj.mapping[labels[i]] = fmt::format("N{}_{}", old.version(), rand_in(rng, 0, 3));
    } else {
      adj.mapping[labels[i]] = labels[i];
    }
  }
  return adj;
}

inline ClassAdjustment compose(const ClassAdjustment &first,
                               const ClassAdjustment &second) {
  ClassAdjustment out = first;
  for (auto &[from, to] : out.mapping) {
    if (to != kOutsideLabel) to = second.mapping.at(to);
  }
  return out;
}

// Sixteen classes folded into the ten of the final scheme.
inline const std::vector<std::string> &sixteen_labels() {
  static const std::vector<std::string> labels{
      "SKILL_HARD", "SKILL_SOFT", "JOB_TITLE", "JOB_LOCATION", "EMPLOYER_TITLE",
      "JOB_TASK", "EDUCATION_DEGREE", "JOB_TIME", "EXPERIENCE_DURATION",
      "EMPLOYER_BENEFIT", "SKILL_LANGUAGE", "SKILL_TOOL", "PERSONALITY",
      "EDUCATION_FIELD", "SALARY", "CONTACT"};
  return labels;
}

inline ClassAdjustment sixteen_to_ten(int from_version = 1) {
  ClassAdjustment adj;
  adj.from_version = from_version;
  adj.to_version = from_version + 1;
  adj.rationale = "fold rare and confusable classes";
  for (std::size_t i = 0; i < 10; ++i) {
    adj.mapping[sixteen_labels()[i]] = sixteen_labels()[i];
  }
  adj.mapping["SKILL_LANGUAGE"] = "SKILL_HARD";
  adj.mapping["SKILL_TOOL"] = "SKILL_HARD";
  adj.mapping["PERSONALITY"] = "SKILL_SOFT";
  adj.mapping["EDUCATION_FIELD"] = "EDUCATION_DEGREE";
  adj.mapping["SALARY"] = std::string(kOutsideLabel);
  adj.mapping["CONTACT"] = std::string(kOutsideLabel);
  return adj;
}

// ---- end-to-end pipeline fixture ----
//
// 20 twelve-word docs, annotators anna and bo. anna tags word 0 SKILL_HARD,
// words 3-4 JOB_TITLE and word 8 JOB_TASK. bo copies anna except on seeded
// docs: i % 3 == 0 relabels 3-4 as JOB_TASK, i % 4 == 1 stretches it to 3-5,
// i % 5 == 2 leaves word 8 untagged.

inline constexpr std::size_t kE2eDocs = 20;
inline constexpr std::size_t kE2eWords = 12;

inline LabelScheme e2e_scheme() {
  return LabelScheme(1, {"SKILL_HARD", "JOB_TITLE", "JOB_TASK"});
}

inline std::size_t e2e_doc_number(const std::string &doc_id) {
  return static_cast<std::size_t>(std::stoul(doc_id.substr(4)));
}

// Conflicts the seeded disagreements must produce in one doc.
inline std::size_t e2e_expected_conflicts(std::size_t i) {
  return static_cast<std::size_t>(i % 3 == 0 || i % 4 == 1) + (i % 5 == 2);
}

inline std::vector<Span> e2e_spans(const std::string &author, std::size_t i) {
  std::vector<Span> spans{word_span(0, 0, "SKILL_HARD")};
  if (author == "bo" && (i % 3 == 0 || i % 4 == 1)) {
    spans.push_back(word_span(3, i % 4 == 1 ? 5 : 4, i % 3 == 0 ? "JOB_TASK" : "JOB_TITLE"));
  } else {
    spans.push_back(word_span(3, 4, "JOB_TITLE"));
  }
  if (!(author == "bo" && i % 5 == 2)) spans.push_back(word_span(8, 8, "JOB_TASK"));
  return spans;
}

// Writes the prediction file and returns a fresh project.
inline Project e2e_project(const fs::path &predictions_file) {
  const auto docs = synthetic_corpus(kE2eDocs, kE2eWords);
  std::vector<json> rows;
  for (const Document &d : docs) {
    rows.push_back(to_json(confident_prediction(d, e2e_scheme(), kE2eWords)));
  }
  write_file_atomic(predictions_file, to_jsonl(rows));
  return create_project("job-ads", docs, e2e_scheme(), {"bo", "anna"}, fixed_clock());
}

inline std::vector<AnnotationSet> e2e_annotations(const Iteration &it) {
  std::vector<AnnotationSet> out;
  for (const auto &doc : it.doc_ids) {
    for (const auto &author : it.assignments.annotators_of_doc(doc)) {
      out.emplace_back(doc, author, it.scheme_version,
                       e2e_spans(author, e2e_doc_number(doc)));
    }
  }
  return out;
}

// Scripted decisions: alternate between taking a variant and relabelling it.
inline std::vector<Resolution> e2e_resolutions(const Iteration &it) {
  std::vector<Resolution> out;
  for (std::size_t n = 0; n < it.conflicts.size(); ++n) {
    const Conflict &c = it.conflicts[n];
    Resolution r;
    r.conflict_id = c.conflict_id;
    r.variant_index = 0;
    if (n % 2 == 0) {
      r.action = ResolutionAction::kAcceptVariant;
    } else {
      r.action = ResolutionAction::kRelabel;
      r.label = "JOB_TITLE";
    }
    out.push_back(r);
  }
  return out;
}

// Runs one iteration of every doc through to Finalized, then splits 14/3/3.
inline void run_e2e(Project &p, const fs::path &predictions_file) {
  const FilePredictionProvider provider(predictions_file);
  SamplingConfig cfg{SamplingStrategy::kRandom, kE2eDocs, 7};
  const int k = plan_iteration(p, cfg, &provider).index;
  ingest_individual_annotations(p, k, e2e_annotations(p.iteration(k)));
  merge_iteration(p, k);
  finalize_iteration(p, k, e2e_resolutions(p.iteration(k)));
  split_dataset(p, 14, 3, 3, 11);
}

// Every regular file under dir, keyed by relative path.
inline std::map<std::string, std::string> snapshot_files(const fs::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() == ".lock") continue;
    out[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
  }
  return out;
}

}  // namespace annoflow::testing

#endif  // ANNOFLOW_TESTS_SUPPORT_HPP_
