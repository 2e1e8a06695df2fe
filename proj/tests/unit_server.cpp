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


#include <thread>

#include "doctest.h"

#include "annoflow/errors.hpp"
#include "annoflow/server.hpp"
#include "annoflow/utf8.hpp"
#include "support.hpp"

#include "httplib.h"

using namespace annoflow;
using namespace annoflow::testing;

namespace {

class RunningServer {
 public:
  explicit RunningServer(const fs::path &dir, fs::path ui = {})
      : server_(dir, std::move(ui)) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.run(); });
    server_.wait_until_ready();
  }
  ~RunningServer() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  ReviewServer server_;
  int port_ = 0;
  std::thread thread_;
};

// The e2e fixture stopped right after merging, saved to dir/project.
fs::path merged_fixture(const TempDir &tmp) {
  Project p = e2e_project(tmp / "preds.jsonl");
  const FilePredictionProvider provider(tmp / "preds.jsonl");
  plan_iteration(p, {SamplingStrategy::kRandom, kE2eDocs, 7}, &provider);
  ingest_individual_annotations(p, 1, e2e_annotations(p.iteration(1)));
  merge_iteration(p, 1);
  save_project(p, tmp / "project");
  return tmp / "project";
}

json get_json(httplib::Client &c, const std::string &path, int expect = 200) {
  auto res = c.Get(path);
  REQUIRE(res);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

json post_json(httplib::Client &c, const std::string &path, const json &body,
               int expect = 200) {
  auto res = c.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

}  // namespace

TEST_CASE("read endpoints") {
  TempDir tmp;
  const fs::path dir = merged_fixture(tmp);
  RunningServer server(dir);
  auto c = server.client();

  const json project = get_json(c, "/api/project");
  CHECK(project.at("name") == "job-ads");
  CHECK(project.at("active_iteration") == 1);
  CHECK(project.at("scheme").at("labels").size() == 3);

  const json it = get_json(c, "/api/iterations/1");
  CHECK(it.at("stage") == "Merged");
  CHECK(it.at("open") == it.at("conflicts"));

  const json open = get_json(c, "/api/iterations/1/conflicts?status=open");
  const Project p = load_project(dir);
  CHECK(open.at("conflicts").size() == p.iteration(1).conflicts.size());
  for (const json &conflict : open.at("conflicts")) {
    CHECK(conflict.at("status") == "open");
    CHECK(conflict.at("resolution").is_null());
    const Document &doc = p.document(conflict.at("doc_id"));
    for (const json &v : conflict.at("variants")) {
      CHECK(v.at("label") == "???");
      CHECK(v.at("text") == doc.slice(v.at("start"), v.at("end")));
      CHECK(v.at("window").at("text") ==
            doc.slice(v.at("window").at("start"), v.at("window").at("end")));
    }
  }
  CHECK(get_json(c, "/api/iterations/1/conflicts?status=resolved").at("conflicts").empty());
  CHECK(get_json(c, "/api/iterations/1/conflicts?status=maybe", 422).at("code") ==
        "InvalidFilter");

  const json doc = get_json(c, "/api/docs/doc-00");
  CHECK(doc.at("length") == p.document("doc-00").length());
  CHECK(doc.at("iteration") == 1);
  CHECK_FALSE(doc.at("merged_spans").empty());
  CHECK(doc.at("gold_spans").empty());
  CHECK(get_json(c, "/api/docs/nope", 404).at("code") == "UnknownDoc");
  CHECK(get_json(c, "/api/iterations/9", 404).at("code") == "UnknownIteration");

  auto page = c.Get("/");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body.find("<html") != std::string::npos);
}

TEST_CASE("resolution session, restart and finalize") {
  TempDir tmp;
  const fs::path dir = merged_fixture(tmp);
  const auto resolutions = e2e_resolutions(load_project(dir).iteration(1));
  REQUIRE(resolutions.size() > 1);
  {
    RunningServer server(dir);
    auto c = server.client();
    Resolution bad = resolutions[0];
    bad.action = ResolutionAction::kRelabel;
    bad.label = "NOT_A_LABEL";
    CHECK(post_json(c, "/api/iterations/1/resolutions", to_json(bad), 422).at("code") ==
          "UnknownLabel");
    Resolution ghost = resolutions[0];
    ghost.conflict_id = "ghost#1";
    CHECK(post_json(c, "/api/iterations/1/resolutions", to_json(ghost), 404).at("code") ==
          "UnknownConflict");
    auto junk = c.Post("/api/iterations/1/resolutions", "{", "application/json");
    REQUIRE(junk);
    CHECK(junk->status == 422);

    const json view = post_json(c, "/api/iterations/1/resolutions", to_json(resolutions[0]));
    CHECK(view.at("status") == "resolved");
    CHECK(view.at("resolution").at("conflict_id") == resolutions[0].conflict_id);
    const json blocked = post_json(c, "/api/iterations/1/finalize", json::object(), 409);
    CHECK(blocked.at("code") == "UnresolvedConflict");
  }
  // The first decision survived the restart.
  {
    RunningServer server(dir);
    auto c = server.client();
    const json it = get_json(c, "/api/iterations/1");
    CHECK(it.at("resolved") == 1);
    for (std::size_t i = 1; i < resolutions.size(); ++i) {
      post_json(c, "/api/iterations/1/resolutions", to_json(resolutions[i]));
    }
    CHECK(get_json(c, "/api/iterations/1/conflicts?status=open").at("conflicts").empty());
    const json done = post_json(c, "/api/iterations/1/finalize", json::object());
    CHECK(done.at("stage") == "Finalized");
    CHECK_FALSE(get_json(c, "/api/docs/doc-00").at("gold_spans").empty());
    CHECK(post_json(c, "/api/iterations/1/finalize", json::object(), 409).at("code") ==
          "InvalidStage");
  }
  CHECK(load_project(dir).iteration(1).stage == Stage::kFinalized);
}

TEST_CASE("offsets count Unicode scalars") {
  TempDir tmp;
  // "Vi söker en utvecklare på 😀 Malmö"
  const std::string text =
      "Vi s\xC3\xB6ker en utvecklare p\xC3\xA5 \xF0\x9F\x98\x80 Malm\xC3\xB6";
  const std::u32string scalars = decode_utf8(text);
  const std::size_t malmo = scalars.find(U"Malm");
  REQUIRE(malmo == 28);
  std::vector<Document> docs{Document("ad-1", text), Document("ad-2", text)};
  Project p = create_project("u", docs, LabelScheme(1, {"JOB_LOCATION", "SKILL_HARD"}),
                             {"anna", "bo"});
  plan_iteration(p, {SamplingStrategy::kRandom, 2, 0});
  std::vector<AnnotationSet> sets;
  for (const auto &d : p.iteration(1).doc_ids) {
    sets.emplace_back(d, "anna", 1, std::vector<Span>{Span(malmo, malmo + 5, "JOB_LOCATION")});
    sets.emplace_back(d, "bo", 1, std::vector<Span>{Span(26, 27, "SKILL_HARD")});
  }
  ingest_individual_annotations(p, 1, sets);
  merge_iteration(p, 1);
  save_project(p, tmp / "project");

  RunningServer server(tmp / "project");
  auto c = server.client();
  const json view = get_json(c, "/api/iterations/1/conflicts");
  std::set<std::string> texts;
  for (const json &conflict : view.at("conflicts")) {
    for (const json &v : conflict.at("variants")) texts.insert(v.at("text"));
  }
  CHECK(texts == std::set<std::string>{"Malm\xC3\xB6", "\xF0\x9F\x98\x80"});
  CHECK(get_json(c, "/api/docs/ad-1").at("length") == scalars.size());
}

TEST_CASE("static UI mount and bind failures") {
  TempDir tmp;
  const fs::path dir = merged_fixture(tmp);
  fs::create_directories(tmp / "ui");
  write_file_atomic(tmp / "ui" / "index.html", "<html>review</html>");
  write_file_atomic(tmp / "ui" / "app.js", "console.log(1);");
  RunningServer server(dir, tmp / "ui");
  auto c = server.client();
  auto index = c.Get("/");
  REQUIRE(index);
  CHECK(index->body == "<html>review</html>");
  auto js = c.Get("/app.js");
  REQUIRE(js);
  CHECK(js->body == "console.log(1);");

  ReviewServer second(dir);
  try {
    second.bind("127.0.0.1", server.port());
    FAIL("expected AddressInUse");
  } catch (const Error &e) {
    CHECK(e.code() == "AddressInUse");
    CHECK(e.kind() == ErrorKind::kIo);
  }
  try {
    ReviewServer missing(tmp / "nothing-here");
    FAIL("expected a load error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
}
