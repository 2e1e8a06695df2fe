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

// annoflow: command-line driver for iterative, cross-checked NER annotation
// projects.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "annoflow/agreement.hpp"
#include "annoflow/errors.hpp"
#include "annoflow/evaluation.hpp"
#include "annoflow/io.hpp"
#include "annoflow/predictions.hpp"
#include "annoflow/server.hpp"
#include "annoflow/store.hpp"
#include "annoflow/tokenize.hpp"
#include "annoflow/workflow.hpp"

namespace fs = std::filesystem;
using namespace annoflow;

namespace {

struct GlobalOptions {
  std::string project = ".";
  std::string format = "table";
};

struct ProviderOptions {
  std::string predictions;
  std::string url;
  std::string name;

  void add_to(CLI::App *cmd) {
    cmd->add_option("--predictions", predictions,
                    "JSON Lines file of token probabilities");
    cmd->add_option("--provider-url", url,
                    "base URL of a prediction service (POST /predict)");
    cmd->add_option("--provider-name", name,
                    "identity recorded as the author of drafts");
  }

  std::unique_ptr<PredictionProvider> make() const {
    if (!predictions.empty() && !url.empty()) {
      throw validation_error("InvalidArguments",
                             "use either --predictions or --provider-url");
    }
    if (!predictions.empty()) {
      return std::make_unique<FilePredictionProvider>(predictions, name);
    }
    if (!url.empty()) {
      return std::make_unique<RemotePredictionProvider>(url, name);
    }
    return nullptr;
  }
};

void print(const GlobalOptions &g, const json &j, const std::string &text) {
  if (g.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

void check_format(const std::string &format) {
  if (format != "table" && format != "json" && format != "markdown") {
    throw validation_error("InvalidFormat",
                           "--format must be table, json or markdown");
  }
}

int resolve_iteration(const Project &p, std::optional<int> requested) {
  if (requested) return *requested;
  if (auto active = p.in_flight()) return *active;
  if (p.iterations.empty()) {
    throw state_error("NoIteration", "the project has no iterations yet");
  }
  return p.iterations.back().index;
}

LabelScheme read_scheme(const std::string &labels, const std::string &path) {
  if (!labels.empty() == !path.empty()) {
    throw validation_error("InvalidArguments",
                           "give exactly one of --labels or --scheme");
  }
  if (!labels.empty()) {
    std::vector<std::string> out;
    std::stringstream in(labels);
    for (std::string item; std::getline(in, item, ',');) {
      if (!item.empty()) out.push_back(item);
    }
    return LabelScheme(1, out);
  }
  if (fs::path(path).extension() == ".json") {
    const json j = read_json(path);
    if (j.is_array()) return LabelScheme(1, j.get<std::vector<std::string>>());
    return label_scheme_from_json(j);
  }
  std::vector<std::string> out;
  std::stringstream in(read_file(path));
  for (std::string line; std::getline(in, line);) {
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (!line.empty()) out.push_back(line);
  }
  return LabelScheme(1, out);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Writes one task file per annotator: their documents in annotation-file
// form, pre-filled with the drafts when the iteration was bootstrapped.
void export_tasks(const Project &p, const Iteration &it, const fs::path &dir) {
  for (const auto &annotator : p.annotators) {
    std::vector<json> rows;
    for (const auto &[a, part] : it.assignments.duties) {
      if (a != annotator) continue;
      for (const auto &doc : it.assignments.parts[part]) {
        std::vector<Span> spans;
        if (auto d = it.drafts.find(doc); d != it.drafts.end()) {
          spans = d->second.spans();
        }
        json row = to_json(
            AnnotationSet(doc, annotator, it.scheme_version, std::move(spans)));
        row["text"] = p.document(doc).text();
        rows.push_back(std::move(row));
      }
    }
    write_file_atomic(dir / (annotator + ".jsonl"), to_jsonl(rows));
  }
}

std::string assignment_text(const Iteration &it) {
  std::string out = fmt::format("iteration {} -> {}\n", it.index, to_string(it.stage));
  for (std::size_t i = 0; i < it.assignments.parts.size(); ++i) {
    const auto who = it.assignments.annotators_of_part(i);
    out += fmt::format("  part {}: {} docs -> {}\n", i,
                       it.assignments.parts[i].size(), fmt::join(who, ", "));
  }
  return out;
}

ReviewServer *g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"annoflow: iterative, cross-checked NER annotation workflow"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--project", g.project, "project directory")->capture_default_str();
  app.add_option("--format", g.format, "output format: table, json, markdown")
      ->capture_default_str();

  // init
  auto *init = app.add_subcommand("init", "create a project");
  std::string name, corpus, labels, scheme_path, annotators;
  init->add_option("--name", name, "project name")->required();
  init->add_option("--corpus", corpus, "documents (JSON Lines)")->required();
  init->add_option("--labels", labels, "comma-separated entity classes");
  init->add_option("--scheme", scheme_path, "label file (.json or one per line)");
  init->add_option("--annotators", annotators, "comma-separated annotator ids")
      ->required();

  // sample
  auto *sample = app.add_subcommand("sample", "draw the next batch");
  std::size_t k = 0;
  std::string strategy = "random";
  std::uint64_t seed = 0;
  ProviderOptions sample_provider;
  sample->add_option("--k", k, "batch size")->required();
  sample->add_option("--strategy", strategy,
                     "random, least_confidence, margin or entropy")
      ->capture_default_str();
  sample->add_option("--seed", seed, "seed for random sampling")->capture_default_str();
  sample_provider.add_to(sample);

  // bootstrap
  auto *bootstrap = app.add_subcommand("bootstrap", "pre-annotate the batch");
  std::optional<int> iteration;
  double min_confidence = 0.0;
  ProviderOptions boot_provider;
  bootstrap->add_option("--iteration", iteration, "iteration index");
  bootstrap->add_option("--min-confidence", min_confidence,
                        "drop draft entities below this confidence")
      ->capture_default_str();
  boot_provider.add_to(bootstrap);

  // assign
  auto *assign = app.add_subcommand("assign", "split the batch among annotators");
  std::string export_dir;
  assign->add_option("--iteration", iteration, "iteration index");
  assign->add_option("--export-dir", export_dir,
                     "write one task file per annotator here");

  // import
  auto *import = app.add_subcommand("import", "ingest individual annotations");
  std::vector<std::string> files;
  import->add_option("--iteration", iteration, "iteration index");
  import->add_option("files", files, "annotation files (JSON Lines)")->required();

  // merge
  auto *merge = app.add_subcommand("merge", "merge the two annotations per doc");
  merge->add_option("--iteration", iteration, "iteration index");

  // serve
  auto *serve = app.add_subcommand("serve", "run the review server");
  std::string bind = "127.0.0.1:8080";
  std::string ui_dir;
  serve->add_option("--bind", bind, "host:port")->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "directory with the built review UI");

  // finalize
  auto *finalize = app.add_subcommand("finalize", "turn resolved data into gold");
  std::string resolutions_file;
  finalize->add_option("--iteration", iteration, "iteration index");
  finalize->add_option("--resolutions", resolutions_file,
                       "resolutions to record first (JSON Lines)");

  // remap
  auto *remap_cmd = app.add_subcommand("remap", "apply a class-system adjustment");
  std::string adjustment_file;
  remap_cmd->add_option("--adjustment", adjustment_file, "adjustment (JSON)")
      ->required();

  // agreement
  auto *agreement = app.add_subcommand("agreement", "inter-annotator agreement");
  agreement->add_option("--iteration", iteration, "iteration index");

  // evaluate
  auto *evaluate_cmd = app.add_subcommand("evaluate", "score predictions against gold");
  std::string pred_file, gold_file, split_name;
  evaluate_cmd->add_option("--pred", pred_file, "predicted annotations (JSON Lines)")
      ->required();
  evaluate_cmd->add_option("--gold", gold_file,
                           "gold annotations (default: the project's gold)");
  evaluate_cmd->add_option("--split", split_name, "train, val or test");

  // split
  auto *split = app.add_subcommand("split", "split finalized docs");
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  bool force = false;
  split->add_option("--train", n_train)->required();
  split->add_option("--val", n_val)->required();
  split->add_option("--test", n_test)->required();
  split->add_option("--seed", seed)->capture_default_str();
  split->add_flag("--force", force, "replace an existing split");

  // status
  auto *status_cmd = app.add_subcommand("status", "show project state");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "annoflow: error [InvalidArguments]: " << e.what() << "\n";
    return 1;
  }

  const fs::path dir = g.project;
  try {
    check_format(g.format);

    if (init->parsed()) {
      if (fs::exists(dir / "project.json")) {
        throw state_error("ProjectExists",
                          "a project already exists in " + dir.string());
      }
      Project p = create_project(name, read_documents(corpus),
                                 read_scheme(labels, scheme_path),
                                 split_list(annotators));
      DirectoryLock lock(dir);
      save_project(p, dir);
      print(g, status(p),
            fmt::format("created project '{}' with {} documents, {} annotators, "
                        "{} classes\n",
                        p.name, p.corpus.size(), p.annotators.size(),
                        p.scheme().size()));
      return 0;
    }

    ProjectStore store(dir);

    if (sample->parsed()) {
      SamplingConfig cfg;
      cfg.strategy = sampling_strategy_from_string(strategy);
      cfg.batch_size = k;
      cfg.seed = seed;
      auto provider = sample_provider.make();
      json out = store.write([&](Project &p) {
        const Iteration &it = sample_iteration(p, cfg, provider.get());
        return json{{"iteration", it.index},
                    {"stage", to_string(it.stage)},
                    {"doc_ids", it.doc_ids}};
      });
      print(g, out,
            fmt::format("iteration {} sampled {} documents ({})\n",
                        out["iteration"].get<int>(), out["doc_ids"].size(), strategy));
    } else if (bootstrap->parsed()) {
      auto provider = boot_provider.make();
      if (!provider) {
        throw validation_error("ProviderRequired",
                               "bootstrap needs --predictions or --provider-url");
      }
      json out = store.write([&](Project &p) {
        const int idx = resolve_iteration(p, iteration);
        const Iteration &it = bootstrap_iteration(p, idx, *provider, min_confidence);
        std::size_t spans = 0;
        for (const auto &[id, d] : it.drafts) spans += d.spans().size();
        return json{{"iteration", idx},
                    {"stage", to_string(it.stage)},
                    {"draft_spans", spans}};
      });
      print(g, out,
            fmt::format("iteration {} pre-annotated: {} draft spans\n",
                        out["iteration"].get<int>(), out["draft_spans"].get<std::size_t>()));
    } else if (assign->parsed()) {
      auto [out, text] = store.write([&](Project &p) {
        const int idx = resolve_iteration(p, iteration);
        const Iteration &it = assign_iteration(p, idx);
        if (!export_dir.empty()) export_tasks(p, it, export_dir);
        return std::make_pair(
            json{{"iteration", idx}, {"assignments", to_json(it.assignments)}},
            assignment_text(it));
      });
      print(g, out, text);
    } else if (import->parsed()) {
      std::vector<AnnotationSet> sets;
      for (const auto &f : files) {
        for (auto &s : read_annotation_sets(f)) sets.push_back(std::move(s));
      }
      json out = store.write([&](Project &p) {
        const int idx = resolve_iteration(p, iteration);
        const Iteration &it = ingest_individual_annotations(p, idx, sets);
        return json{{"iteration", idx},
                    {"stage", to_string(it.stage)},
                    {"imported", sets.size()}};
      });
      print(g, out,
            fmt::format("imported {} annotation sets; iteration {} is {}\n",
                        sets.size(), out["iteration"].get<int>(),
                        out["stage"].get<std::string>()));
    } else if (merge->parsed()) {
      json out = store.write([&](Project &p) {
        const int idx = resolve_iteration(p, iteration);
        json s = to_json(merge_iteration(p, idx));
        s["iteration"] = idx;
        return s;
      });
      print(g, out,
            fmt::format("iteration {} merged: {} docs, {} agreed spans, {} "
                        "conflicts ({} variants)\n",
                        out["iteration"].get<int>(), out["docs"].get<std::size_t>(),
                        out["agreed_spans"].get<std::size_t>(),
                        out["conflicts"].get<std::size_t>(),
                        out["variants"].get<std::size_t>()));
    } else if (serve->parsed()) {
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) {
        throw validation_error("InvalidArguments", "--bind must be host:port");
      }
      int port = 0;
      try {
        port = std::stoi(bind.substr(colon + 1));
      } catch (const std::exception &) {
        throw validation_error("InvalidArguments", "--bind must be host:port");
      }
      ReviewServer server(dir, ui_dir);
      const int bound = server.bind(bind.substr(0, colon), port);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "serving " << dir.string() << " on http://"
                << bind.substr(0, colon) << ":" << bound << "\n";
      server.run();
      g_server = nullptr;
    } else if (finalize->parsed()) {
      std::vector<Resolution> resolutions;
      if (!resolutions_file.empty()) {
        for (const json &row : read_jsonl(resolutions_file)) {
          resolutions.push_back(resolution_from_json(row));
        }
      }
      json out = store.write([&](Project &p) {
        const int idx = resolve_iteration(p, iteration);
        const Iteration &it = finalize_iteration(p, idx, resolutions);
        std::size_t spans = 0;
        for (const auto &[id, s] : it.gold) spans += s.spans().size();
        return json{{"iteration", idx},
                    {"stage", to_string(it.stage)},
                    {"gold_docs", it.gold.size()},
                    {"gold_spans", spans}};
      });
      print(g, out,
            fmt::format("iteration {} finalized: {} gold docs, {} spans\n",
                        out["iteration"].get<int>(),
                        out["gold_docs"].get<std::size_t>(),
                        out["gold_spans"].get<std::size_t>()));
    } else if (remap_cmd->parsed()) {
      const ClassAdjustment adj =
          class_adjustment_from_json(read_json(adjustment_file));
      json out = store.write([&](Project &p) { return to_json(remap(p, adj)); });
      print(g, out,
            fmt::format("scheme v{}: {} classes\n", out["version"].get<int>(),
                        out["labels"].size()));
    } else if (agreement->parsed()) {
      const auto reports = store.read([&](const Project &p) {
        return iteration_agreement(p, resolve_iteration(p, iteration));
      });
      json out = json::array();
      std::string text;
      for (const auto &r : reports) {
        out.push_back(to_json(r));
        text += render_agreement_table(r);
      }
      print(g, out, text);
    } else if (evaluate_cmd->parsed()) {
      const auto [gold, scheme, tokens] = store.read([&](const Project &p) {
        std::vector<AnnotationSet> gold_data =
            gold_file.empty() ? gold_sets(p, split_name)
                              : read_annotation_sets(gold_file);
        std::vector<Document> docs;
        for (const auto &s : gold_data) docs.push_back(p.document(s.doc_id()));
        return std::make_tuple(gold_data, p.scheme(), tokenize_corpus(docs));
      });
      if (gold.empty()) {
        throw state_error("NoGold", "there is no gold data to evaluate against");
      }
      std::set<std::string> wanted;
      for (const auto &s : gold) wanted.insert(s.doc_id());
      std::vector<AnnotationSet> pred;
      for (auto &s : read_annotation_sets(pred_file)) {
        if (wanted.count(s.doc_id())) pred.push_back(std::move(s));
      }
      const EvalReport report = evaluate(gold, pred, scheme, tokens);
      std::cout << render_report(report, report_format_from_string(g.format));
    } else if (split->parsed()) {
      json out = store.write([&](Project &p) {
        const Splits &s = split_dataset(p, n_train, n_val, n_test, seed, force);
        return json{{"train", s.train}, {"val", s.val}, {"test", s.test},
                    {"seed", s.seed}};
      });
      print(g, out,
            fmt::format("split: {} train, {} val, {} test\n", out["train"].size(),
                        out["val"].size(), out["test"].size()));
    } else if (status_cmd->parsed()) {
      const json s = store.read([](const Project &p) { return status(p); });
      std::string text = fmt::format(
          "{}: {} documents ({} labeled, {} unlabeled), scheme v{} ({} classes), "
          "{} annotators\n",
          s["name"].get<std::string>(), s["documents"].get<std::size_t>(),
          s["labeled"].get<std::size_t>(), s["unlabeled"].get<std::size_t>(),
          s["scheme"]["version"].get<int>(), s["scheme"]["labels"].size(),
          s["annotators"].size());
      for (const auto &it : s["iterations"]) {
        text += fmt::format("  iteration {}: {} ({} docs, {} open conflicts)\n",
                            it["index"].get<int>(), it["stage"].get<std::string>(),
                            it["docs"].get<std::size_t>(),
                            it["open_conflicts"].get<std::size_t>());
      }
      print(g, s, text);
    }
    return 0;
  } catch (const Error &e) {
    std::cerr << "annoflow: error [" << e.code() << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error &e) {
    std::cerr << "annoflow: error [IoFailure]: " << e.what() << "\n";
    return 3;
  } catch (const json::exception &e) {
    std::cerr << "annoflow: error [SchemaViolation]: " << e.what() << "\n";
    return 1;
  }
}
