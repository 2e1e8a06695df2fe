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

#ifndef ANNOFLOW_SERVER_HPP_
#define ANNOFLOW_SERVER_HPP_

#include <filesystem>
#include <memory>
#include <string>

#include "annoflow/store.hpp"

namespace httplib {
class Server;
}

namespace annoflow {

// Characters of context shown on each side of a conflict variant.
inline constexpr std::size_t kConflictWindow = 120;

// HTTP+JSON facade over one project directory for the collective review
// session. Reads run concurrently; every write goes through the project
// store's single writer and is on disk before the response is sent.
//
//   GET  /api/project
//   GET  /api/iterations/{k}
//   GET  /api/iterations/{k}/conflicts?status=open|resolved|all
//   GET  /api/docs/{id}
//   POST /api/iterations/{k}/resolutions
//   POST /api/iterations/{k}/finalize
//   GET  /            static review UI (from `ui_dir` when given)
//
// Errors are returned as {"code", "message", "detail"}.
class ReviewServer {
 public:
  // Throws "ProjectLoadError" if the directory holds no valid project.
  explicit ReviewServer(const std::filesystem::path &project_dir,
                        std::filesystem::path ui_dir = {});
  ~ReviewServer();

  // Binds the socket; port 0 picks a free port. Returns the bound port.
  // Throws "AddressInUse".
  int bind(const std::string &host, int port);
  // Serves until stop() is called. Call after bind().
  void run();
  void stop();
  // Blocks until the server accepts connections.
  void wait_until_ready() const;

  ProjectStore &store() { return store_; }

 private:
  void install_routes();

  ProjectStore store_;
  std::filesystem::path ui_dir_;
  std::unique_ptr<httplib::Server> http_;
};

// Body of the conflicts endpoint; exposed for tests and the CLI.
json conflicts_view(const Project &project, int index,
                    const std::string &status_filter);

}  // namespace annoflow

#endif  // ANNOFLOW_SERVER_HPP_
