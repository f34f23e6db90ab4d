// Copyright 2026 The irscreen Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace irscreen {

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold;  // per row, in input order

  std::vector<std::size_t> test_rows(int f) const;
  std::vector<std::size_t> train_rows(int f) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Seeded shuffle then contiguous chunking; k == n gives leave-one-out.
/// With strata, rows are shuffled within each stratum and dealt round-robin.
FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed,
                          std::optional<std::span<const int>> strata = std::nullopt);

}  // namespace irscreen
