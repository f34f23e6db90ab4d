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

#include "irscreen/folds.hpp"

#include <map>
#include <numeric>

#include "irscreen/error.hpp"
#include "irscreen/random.hpp"

namespace irscreen {

std::vector<std::size_t> FoldAssignment::test_rows(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::train_rows(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int f : fold) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed,
                          std::optional<std::span<const int>> strata) {
  require(k >= 2 || (k == 1 && n == 1), ErrorKind::InvalidArgument, "need at least two folds");
  require(n >= static_cast<std::size_t>(k), ErrorKind::InvalidArgument,
          "fewer rows than folds (" + std::to_string(n) + " < " + std::to_string(k) + ")");
  std::mt19937_64 rng(seed);
  FoldAssignment fa;
  fa.k = k;
  fa.fold.assign(n, 0);

  if (strata) {
    require(strata->size() == n, ErrorKind::InvalidArgument, "strata length must match rows");
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[(*strata)[i]].push_back(i);
    std::size_t dealt = 0;
    for (auto& [label, rows] : groups) {
      shuffle_in_place(rows, rng);
      for (std::size_t r : rows) fa.fold[r] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
    }
    return fa;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_in_place(order, rng);
  const std::size_t base = n / static_cast<std::size_t>(k), extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) fa.fold[order[pos++]] = static_cast<int>(f);
  }
  return fa;
}

}  // namespace irscreen
