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

#ifndef ANNOFLOW_PREDICTIONS_HPP_
#define ANNOFLOW_PREDICTIONS_HPP_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annoflow/io.hpp"
#include "annoflow/types.hpp"

namespace annoflow {

using ProbabilityMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Model output for one document: one probability row per token over the BIO
// tags in `label_order`.
struct TokenProbabilities {
  std::string doc_id;
  int scheme_version = 1;
  std::vector<std::string> label_order;
  std::vector<TokenSpan> tokens;
  ProbabilityMatrix probs;
};

inline constexpr double kRowSumTolerance = 1e-6;

// The tag set a scheme induces: O plus B-/I- for every label.
std::vector<std::string> bio_tag_set(const LabelScheme &scheme);

// Throws "SchemaViolation" unless rows are nonnegative and sum to 1 within
// kRowSumTolerance, label_order is exactly bio_tag_set(scheme), the matrix
// shape matches, and tokens are sorted, disjoint and within `text_length`.
void validate(const TokenProbabilities &p, const LabelScheme &scheme,
              std::optional<std::size_t> text_length = std::nullopt);

json to_json(const TokenProbabilities &p);
TokenProbabilities token_probabilities_from_json(const json &j);

enum class ProviderKind { kFile, kRemote };

// Source of model predictions. Training is entirely the provider's concern.
class PredictionProvider {
 public:
  virtual ~PredictionProvider() = default;

  virtual const std::string &name() const = 0;
  virtual ProviderKind kind() const = 0;

  // Raw predictions for (at least) the requested documents. Implementations
  // must be safe to call concurrently.
  virtual std::vector<TokenProbabilities> predict(
      std::span<const Document> docs) const = 0;
};

// Serves predictions from a JSON Lines file, read once at construction.
class FilePredictionProvider : public PredictionProvider {
 public:
  explicit FilePredictionProvider(const std::filesystem::path &path,
                                  std::string name = {});

  const std::string &name() const override { return name_; }
  ProviderKind kind() const override { return ProviderKind::kFile; }
  std::vector<TokenProbabilities> predict(
      std::span<const Document> docs) const override;

 private:
  std::string name_;
  std::map<std::string, TokenProbabilities> rows_;
};

// POSTs {"documents": [{"id", "text"}]} to <base_url>/predict and expects a
// JSON array of prediction objects back.
class RemotePredictionProvider : public PredictionProvider {
 public:
  explicit RemotePredictionProvider(std::string base_url, std::string name = {},
                                    int timeout_seconds = 300);

  const std::string &name() const override { return name_; }
  ProviderKind kind() const override { return ProviderKind::kRemote; }
  std::vector<TokenProbabilities> predict(
      std::span<const Document> docs) const override;

 private:
  std::string base_url_;
  std::string name_;
  int timeout_seconds_;
};

// One validated TokenProbabilities per requested document, in request order.
// Throws "ProviderUnavailable", "MissingDoc" or "SchemaViolation".
std::vector<TokenProbabilities> fetch_predictions(
    const PredictionProvider &provider, std::span<const Document> docs,
    const LabelScheme &scheme);

// Draft annotations from model output: argmax tag per token (ties go to the
// lower index), BIO decode with repair, span confidence = mean argmax
// probability of its tokens; spans below `min_entity_confidence` are dropped.
AnnotationSet predictions_to_draft(const TokenProbabilities &p,
                                   double min_entity_confidence,
                                   const std::string &author);

}  // namespace annoflow

#endif  // ANNOFLOW_PREDICTIONS_HPP_
