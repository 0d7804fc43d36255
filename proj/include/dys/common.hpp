// Copyright 2026 The dysarthria-severity Authors.
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

#ifndef DYS_COMMON_HPP
#define DYS_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dys {

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Severity labels run 1 (most severe) .. 5 (healthy control).
inline constexpr int kNumClasses = 5;

inline bool valid_label(int label) { return label >= 1 && label <= kNumClasses; }

/// Named sub-seed: hash of (seed, component name).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);
/// Indexed sub-seed: hash of (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = the DYS_THREADS
/// environment variable if set, else the hardware count).
/// Each index is visited exactly once; callers write results by index, so
/// output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace dys

#endif  // DYS_COMMON_HPP
