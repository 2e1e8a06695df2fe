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

#ifndef ANNOFLOW_STORE_HPP_
#define ANNOFLOW_STORE_HPP_

#include <filesystem>
#include <mutex>
#include <shared_mutex>
#include <type_traits>
#include <utility>

#include "annoflow/workflow.hpp"

namespace annoflow {

// Holds an exclusive advisory lock on <dir>/.lock for its lifetime.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path &dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock &) = delete;
  DirectoryLock &operator=(const DirectoryLock &) = delete;

 private:
  int fd_ = -1;
};

// Single-writer, multi-reader access to a project directory. Writers work on
// a copy that is committed only after it has been saved, so a failed
// operation leaves both memory and disk untouched.
class ProjectStore {
 public:
  explicit ProjectStore(std::filesystem::path dir);
  ProjectStore(std::filesystem::path dir, Project project);

  const std::filesystem::path &dir() const { return dir_; }

  template <typename F>
  auto read(F &&f) const {
    std::shared_lock lock(mutex_);
    return std::forward<F>(f)(static_cast<const Project &>(project_));
  }

  // `f` must not return references into the project.
  template <typename F>
  auto write(F &&f) {
    std::unique_lock lock(mutex_);
    DirectoryLock dir_lock(dir_);
    Project work = project_;
    if constexpr (std::is_void_v<std::invoke_result_t<F, Project &>>) {
      std::forward<F>(f)(work);
      save_project(work, dir_);
      project_ = std::move(work);
    } else {
      auto result = std::forward<F>(f)(work);
      save_project(work, dir_);
      project_ = std::move(work);
      return result;
    }
  }

 private:
  std::filesystem::path dir_;
  Project project_;
  mutable std::shared_mutex mutex_;
};

}  // namespace annoflow

#endif  // ANNOFLOW_STORE_HPP_
