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

#ifndef ANNOFLOW_SAMPLING_HPP_
#define ANNOFLOW_SAMPLING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "annoflow/io.hpp"
#include "annoflow/predictions.hpp"

namespace annoflow {

enum class SamplingStrategy { kRandom, kLeastConfidence, kMargin, kEntropy };

struct SamplingConfig {
  SamplingStrategy strategy = SamplingStrategy::kRandom;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;

  // Throws "InvalidBatchSize" for k = 0 and "BatchTooLarge" when k exceeds
  // the pool.
  void validate(std::size_t pool_size) const;

  friend bool operator==(const SamplingConfig &,
                         const SamplingConfig &) = default;
};

struct UncertaintyScore {
  std::string doc_id;
  double value = 0;
};

std::string to_string(SamplingStrategy s);
SamplingStrategy sampling_strategy_from_string(const std::string &s);

// Mean per-token uncertainty of a document:
//   least_confidence  1 - max p
//   margin            1 - (max p - second max p)
//   entropy           -sum p ln p
// Throws "EmptyDocument" for zero tokens and "InvalidStrategy" for kRandom.
UncertaintyScore score_uncertainty(const TokenProbabilities &p,
                                   SamplingStrategy method);

// The k highest scores, descending; ties by ascending doc id.
std::vector<std::string> select_batch(std::span<const UncertaintyScore> scores,
                                      std::size_t k);

// Uniform sample of k ids without replacement: partial Fisher-Yates over the
// pool sorted by id, driven by std::mt19937_64 (seeded with `seed`) through
// rejection-sampled bounded draws, so results are identical on every
// platform.
std::vector<std::string> select_random(std::span<const std::string> pool,
                                       std::size_t k, std::uint64_t seed);

// Unbiased integer in [0, bound) from a 64-bit engine; exposed for tests.
template <typename Engine>
std::uint64_t uniform_below(Engine &engine, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % bound;
  }
}

json to_json(const UncertaintyScore &s, SamplingStrategy method);
json to_json(const SamplingConfig &c);
SamplingConfig sampling_config_from_json(const json &j);

}  // namespace annoflow

#endif  // ANNOFLOW_SAMPLING_HPP_
