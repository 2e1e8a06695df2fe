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

#include "annoflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "annoflow/errors.hpp"

namespace annoflow {

namespace {

void check_k(std::size_t k, std::size_t available) {
  if (k == 0) {
    throw validation_error("InvalidBatchSize", "batch size must be >= 1");
  }
  if (k > available) {
    throw validation_error("BatchTooLarge",
                           "batch size " + std::to_string(k) +
                               " exceeds the " + std::to_string(available) +
                               " available documents",
                           {{"k", k}, {"available", available}});
  }
}

}  // namespace

void SamplingConfig::validate(std::size_t pool_size) const {
  check_k(batch_size, pool_size);
}

std::string to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::kRandom:
      return "random";
    case SamplingStrategy::kLeastConfidence:
      return "least_confidence";
    case SamplingStrategy::kMargin:
      return "margin";
    case SamplingStrategy::kEntropy:
      return "entropy";
  }
  return "random";
}

SamplingStrategy sampling_strategy_from_string(const std::string &s) {
  if (s == "random") return SamplingStrategy::kRandom;
  if (s == "least_confidence") return SamplingStrategy::kLeastConfidence;
  if (s == "margin") return SamplingStrategy::kMargin;
  if (s == "entropy") return SamplingStrategy::kEntropy;
  throw validation_error("InvalidStrategy",
                         "unknown sampling strategy '" + s + "'",
                         {{"strategy", s}});
}

UncertaintyScore score_uncertainty(const TokenProbabilities &p,
                                   SamplingStrategy method) {
  if (p.probs.rows() == 0) {
    throw validation_error("EmptyDocument",
                           "document " + p.doc_id + " has no tokens",
                           {{"doc_id", p.doc_id}});
  }
  if (method == SamplingStrategy::kRandom) {
    throw validation_error("InvalidStrategy",
                           "random is not an uncertainty measure");
  }
  double total = 0;
  for (Eigen::Index r = 0; r < p.probs.rows(); ++r) {
    const auto row = p.probs.row(r);
    switch (method) {
      case SamplingStrategy::kLeastConfidence:
        total += 1.0 - row.maxCoeff();
        break;
      case SamplingStrategy::kMargin: {
        double first = 0;
        double second = 0;
        for (Eigen::Index c = 0; c < row.size(); ++c) {
          const double v = row(c);
          if (v > first) {
            second = first;
            first = v;
          } else if (v > second) {
            second = v;
          }
        }
        total += 1.0 - (first - second);
        break;
      }
      case SamplingStrategy::kEntropy:
        for (Eigen::Index c = 0; c < row.size(); ++c) {
          const double q = row(c);
          if (q > 0) total -= q * std::log(q);
        }
        break;
      case SamplingStrategy::kRandom:
        break;
    }
  }
  // Rounding can push a fully confident row a hair below zero.
  const double mean = total / static_cast<double>(p.probs.rows());
  return {p.doc_id, std::max(0.0, mean)};
}

std::vector<std::string> select_batch(std::span<const UncertaintyScore> scores,
                                      std::size_t k) {
  check_k(k, scores.size());
  std::set<std::string_view> ids;
  for (const auto &s : scores) {
    if (!std::isfinite(s.value)) {
      throw validation_error("InvalidScore",
                             "non-finite score for " + s.doc_id,
                             {{"doc_id", s.doc_id}});
    }
    if (!ids.insert(s.doc_id).second) {
      throw validation_error("DuplicateDoc", "doc " + s.doc_id + " scored twice",
                             {{"doc_id", s.doc_id}});
    }
  }
  std::vector<const UncertaintyScore *> order;
  order.reserve(scores.size());
  for (const auto &s : scores) order.push_back(&s);
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k),
                    order.end(),
                    [](const UncertaintyScore *a, const UncertaintyScore *b) {
                      if (a->value != b->value) return a->value > b->value;
                      return a->doc_id < b->doc_id;
                    });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(order[i]->doc_id);
  return out;
}

std::vector<std::string> select_random(std::span<const std::string> pool,
                                       std::size_t k, std::uint64_t seed) {
  check_k(k, pool.size());
  std::vector<std::string> ids(pool.begin(), pool.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw validation_error("DuplicateDoc", "pool contains duplicate ids");
  }
  std::mt19937_64 engine(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + uniform_below(engine, ids.size() - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  return ids;
}

json to_json(const UncertaintyScore &s, SamplingStrategy method) {
  return {{"doc_id", s.doc_id}, {"value", s.value}, {"method", to_string(method)}};
}

json to_json(const SamplingConfig &c) {
  return {{"strategy", to_string(c.strategy)},
          {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

SamplingConfig sampling_config_from_json(const json &j) {
  return parse_or_throw("sampling config", [&] {
    SamplingConfig c;
    c.strategy = sampling_strategy_from_string(j.at("strategy").get<std::string>());
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
  });
}

}  // namespace annoflow
