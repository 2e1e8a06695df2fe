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

#include "annoflow/server.hpp"

#include <algorithm>

#include "httplib.h"

#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

constexpr const char *kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>annoflow review</title></head>
<body>
<h1>annoflow review session</h1>
<p>The review UI assets are not installed. Start the server with
<code>--ui-dir</code> pointing at the built UI, or use the JSON API
under <a href="/api/project">/api/project</a>.</p>
</body></html>
)";

int http_status(const Error &e) {
  switch (e.kind()) {
    case ErrorKind::kValidation:
      return 422;
    case ErrorKind::kState:
      return 409;
    case ErrorKind::kNotFound:
      return 404;
    case ErrorKind::kIo:
      return 500;
  }
  return 500;
}

void send_json(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response &res, const Error &e) {
  send_json(res, http_status(e),
            {{"code", e.code()}, {"message", e.what()}, {"detail", e.detail()}});
}

// Runs a handler, mapping library errors to structured error bodies.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request &req, httplib::Response &res) {
    try {
      f(req, res);
    } catch (const Error &e) {
      send_error(res, e);
    } catch (const std::exception &e) {
      send_json(res, 500,
                {{"code", "InternalError"}, {"message", e.what()}, {"detail", nullptr}});
    }
  };
}

int iteration_param(const httplib::Request &req) {
  const std::string &raw = req.matches[1];
  try {
    std::size_t used = 0;
    const int k = std::stoi(raw, &used);
    if (used == raw.size()) return k;
  } catch (const std::exception &) {
  }
  throw not_found_error("UnknownIteration", "no iteration " + raw,
                        {{"iteration", raw}});
}

json iteration_summary(const Iteration &it) {
  const auto effective = it.effective_resolutions();
  std::size_t resolved = 0;
  for (const Conflict &c : it.conflicts) {
    if (effective.count(c.conflict_id)) ++resolved;
  }
  return {{"index", it.index},
          {"stage", to_string(it.stage)},
          {"scheme_version", it.scheme_version},
          {"doc_ids", it.doc_ids},
          {"docs", it.doc_ids.size()},
          {"conflicts", it.conflicts.size()},
          {"resolved", resolved},
          {"open", it.conflicts.size() - resolved}};
}

json conflict_view(const Project &project, const Iteration &it,
                   const Conflict &c,
                   const std::map<std::string, Resolution> &effective) {
  const Document &doc = project.document(c.doc_id);
  json variants = json::array();
  for (const Span &v : c.variants) {
    const std::size_t from = v.start() > kConflictWindow ? v.start() - kConflictWindow : 0;
    const std::size_t to = std::min(doc.length(), v.end() + kConflictWindow);
    json view = to_json(v);
    view["text"] = doc.slice(v.start(), v.end());
    view["window"] = {{"start", from}, {"end", to}, {"text", doc.slice(from, to)}};
    variants.push_back(std::move(view));
  }
  auto r = effective.find(c.conflict_id);
  return {{"conflict_id", c.conflict_id},
          {"doc_id", c.doc_id},
          {"iteration", it.index},
          {"status", r == effective.end() ? "open" : "resolved"},
          {"start", c.start()},
          {"end", c.end()},
          {"variants", std::move(variants)},
          {"resolution", r == effective.end() ? json(nullptr) : to_json(r->second)}};
}

Project load_for_serving(const std::filesystem::path &dir) {
  try {
    return load_project(dir);
  } catch (const Error &e) {
    throw io_error("ProjectLoadError",
                   "cannot load project from " + dir.string() + ": " + e.what(),
                   {{"path", dir.string()}, {"cause", e.code()}});
  }
}

}  // namespace

json conflicts_view(const Project &project, int index,
                    const std::string &status_filter) {
  if (status_filter != "open" && status_filter != "resolved" &&
      status_filter != "all") {
    throw validation_error("InvalidFilter",
                           "status must be open, resolved or all",
                           {{"status", status_filter}});
  }
  const Iteration &it = project.iteration(index);
  const auto effective = it.effective_resolutions();
  json conflicts = json::array();
  for (const Conflict &c : it.conflicts) {
    const bool resolved = effective.count(c.conflict_id) > 0;
    if (status_filter == "open" && resolved) continue;
    if (status_filter == "resolved" && !resolved) continue;
    conflicts.push_back(conflict_view(project, it, c, effective));
  }
  return {{"iteration", index},
          {"stage", to_string(it.stage)},
          {"scheme", to_json(project.scheme())},
          {"conflicts", std::move(conflicts)}};
}

ReviewServer::ReviewServer(const std::filesystem::path &project_dir,
                           std::filesystem::path ui_dir)
    : store_(project_dir, load_for_serving(project_dir)),
      ui_dir_(std::move(ui_dir)),
      http_(std::make_unique<httplib::Server>()) {
  // httplib also sets SO_REUSEPORT, which would let a second server share
  // the port and split the session between two processes.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string &host, int port) {
  int bound = port;
  bool ok;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
    ok = bound > 0;
  } else {
    ok = http_->bind_to_port(host, port);
  }
  if (!ok) {
    throw io_error("AddressInUse",
                   "cannot bind " + host + ":" + std::to_string(port),
                   {{"host", host}, {"port", port}});
  }
  return bound;
}

void ReviewServer::run() { http_->listen_after_bind(); }

void ReviewServer::stop() {
  if (http_) http_->stop();
}

void ReviewServer::wait_until_ready() const { http_->wait_until_ready(); }

void ReviewServer::install_routes() {
  if (!ui_dir_.empty()) {
    http_->set_mount_point("/", ui_dir_.string());
  }
  http_->Get("/", [this](const httplib::Request &, httplib::Response &res) {
    if (!ui_dir_.empty() && std::filesystem::exists(ui_dir_ / "index.html")) {
      res.set_content(read_file(ui_dir_ / "index.html"), "text/html");
    } else {
      res.set_content(kPlaceholderPage, "text/html");
    }
  });

  http_->Get("/api/project", guarded([this](const httplib::Request &,
                                            httplib::Response &res) {
    send_json(res, 200, store_.read([](const Project &p) {
      json iterations = json::array();
      for (const Iteration &it : p.iterations) {
        iterations.push_back({{"index", it.index}, {"stage", to_string(it.stage)}});
      }
      std::optional<int> active = p.in_flight();
      if (!active && !p.iterations.empty()) active = p.iterations.back().index;
      return json{{"name", p.name},
                  {"annotators", p.annotators},
                  {"scheme", to_json(p.scheme())},
                  {"documents", p.corpus.size()},
                  {"iterations", std::move(iterations)},
                  {"active_iteration", optional_to_json(active)}};
    }));
  }));

  http_->Get(R"(/api/iterations/([^/]+))",
             guarded([this](const httplib::Request &req, httplib::Response &res) {
               const int k = iteration_param(req);
               send_json(res, 200, store_.read([&](const Project &p) {
                 return iteration_summary(p.iteration(k));
               }));
             }));

  http_->Get(R"(/api/iterations/([^/]+)/conflicts)",
             guarded([this](const httplib::Request &req, httplib::Response &res) {
               const int k = iteration_param(req);
               const std::string filter =
                   req.has_param("status") ? req.get_param_value("status") : "all";
               send_json(res, 200, store_.read([&](const Project &p) {
                 return conflicts_view(p, k, filter);
               }));
             }));

  http_->Get(R"(/api/docs/(.+))",
             guarded([this](const httplib::Request &req, httplib::Response &res) {
               const std::string id = req.matches[1];
               send_json(res, 200, store_.read([&](const Project &p) {
                 const Document &doc = p.document(id);
                 json out = to_json(doc);
                 out["length"] = doc.length();
                 out["iteration"] = nullptr;
                 out["merged_spans"] = json::array();
                 out["gold_spans"] = json::array();
                 for (const Iteration &it : p.iterations) {
                   if (!it.contains(id)) continue;
                   out["iteration"] = it.index;
                   if (auto m = it.merged.find(id); m != it.merged.end()) {
                     out["merged_spans"] = to_json(m->second)["spans"];
                   }
                   if (auto g = it.gold.find(id); g != it.gold.end()) {
                     out["gold_spans"] = to_json(g->second)["spans"];
                   }
                 }
                 return out;
               }));
             }));

  http_->Post(R"(/api/iterations/([^/]+)/resolutions)",
              guarded([this](const httplib::Request &req, httplib::Response &res) {
                const int k = iteration_param(req);
                json body;
                try {
                  body = json::parse(req.body);
                } catch (const json::parse_error &e) {
                  throw validation_error("InvalidJson", e.what());
                }
                const Resolution r = resolution_from_json(body);
                send_json(res, 200, store_.write([&](Project &p) {
                  record_resolution(p, k, r);
                  const Iteration &it = p.iteration(k);
                  return conflict_view(p, it, *it.find_conflict(r.conflict_id),
                                       it.effective_resolutions());
                }));
              }));

  http_->Post(R"(/api/iterations/([^/]+)/finalize)",
              guarded([this](const httplib::Request &req, httplib::Response &res) {
                const int k = iteration_param(req);
                send_json(res, 200, store_.write([&](Project &p) {
                  return iteration_summary(finalize_iteration(p, k));
                }));
              }));
}

}  // namespace annoflow
