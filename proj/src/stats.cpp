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

#include "irscreen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "irscreen/error.hpp"

namespace irscreen {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::Domain, "normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double incomplete_beta(double x, double a, double b) {
  require(a > 0.0 && b > 0.0, ErrorKind::Domain, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double student_t_two_sided(double t, double df) {
  require(df > 0.0, ErrorKind::Domain, "t distribution needs df > 0");
  if (!std::isfinite(t)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(df), std::abs(t)));
}

double chi2_1_sf(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(0.5 * x)); }

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                 WilcoxonMethod method) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidArgument,
          "rank-sum test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  const double n = n1 + n2;

  WilcoxonResult res;
  res.rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(a.size()), 0.0);
  const double expected = n1 * (n + 1.0) / 2.0;
  res.all_ties = std::all_of(pooled.begin(), pooled.end(),
                             [&](double v) { return v == pooled.front(); });
  if (res.all_ties) {
    res.p_value = 1.0;
    return res;
  }

  const bool use_exact = method == WilcoxonMethod::Exact ||
                         (method == WilcoxonMethod::Auto && a.size() <= 10 && b.size() <= 10);
  if (use_exact) {
    // Permutation distribution of the doubled rank sum by subset-count DP.
    std::vector<int> doubled(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = static_cast<int>(std::lround(2 * ranks[i]));
    const int k = static_cast<int>(a.size());
    const int max_sum = std::accumulate(doubled.begin(), doubled.end(), 0);
    std::vector<std::vector<double>> ways(static_cast<std::size_t>(k + 1),
                                          std::vector<double>(static_cast<std::size_t>(max_sum + 1), 0.0));
    ways[0][0] = 1.0;
    for (int r : doubled) {
      for (int c = k; c >= 1; --c) {
        for (int s = max_sum; s >= r; --s) {
          ways[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)] +=
              ways[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(s - r)];
        }
      }
    }
    const double obs_dev = std::abs(2.0 * res.rank_sum - 2.0 * expected);
    double total = 0.0, extreme = 0.0;
    for (int s = 0; s <= max_sum; ++s) {
      const double w = ways[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
      total += w;
      if (std::abs(s - 2.0 * expected) >= obs_dev - 1e-9) extreme += w;
    }
    res.exact = true;
    res.p_value = std::min(1.0, extreme / total);
    return res;
  }

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  const double dev = std::max(std::abs(res.rank_sum - expected) - 0.5, 0.0);
  res.z = dev / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(res.z / std::sqrt(2.0)));
  return res;
}

McNemarResult mcnemar(long b, long c) {
  require(b >= 0 && c >= 0, ErrorKind::InvalidArgument, "discordant counts must be >= 0");
  McNemarResult r{b, c, 0.0, 1.0, b + c == 0};
  if (r.degenerate) return r;
  const double num = std::max(std::abs(static_cast<double>(b - c)) - 1.0, 0.0);
  r.chi2 = num * num / static_cast<double>(b + c);
  r.p_value = chi2_1_sf(r.chi2);
  return r;
}

McNemarResult mcnemar(std::span<const bool> first, std::span<const bool> second) {
  require(first.size() == second.size(), ErrorKind::InvalidArgument,
          "paired outcomes must have equal length");
  long b = 0, c = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] && !second[i]) ++b;
    if (!first[i] && second[i]) ++c;
  }
  return mcnemar(b, c);
}

std::vector<double> benjamini_hochberg(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    // m / rank >= 1, so the product never rounds below p
    const double v = p[order[k]] * (static_cast<double>(m) / static_cast<double>(k + 1));
    running = std::min(running, v);
    adj[order[k]] = std::min(running, 1.0);
  }
  return adj;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::InvalidArgument, "pearson needs equal lengths");
  PearsonResult res;
  res.n = x.size();
  if (x.size() < 3) return res;
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return res;
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  res.r = r;
  const double df = static_cast<double>(x.size()) - 2.0;
  if (std::abs(r) >= 1.0) {
    res.p_value = 0.0;
  } else {
    res.p_value = student_t_two_sided(r * std::sqrt(df / (1.0 - r * r)), df);
  }
  return res;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double median_of(std::span<const double> v) { return quantile_of(v, 0.5); }

double quantile_of(std::span<const double> v, double q) {
  require(!v.empty(), ErrorKind::InvalidArgument, "quantile of an empty series");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::optional<double> coefficient_of_variation(std::span<const double> series) {
  if (series.empty()) return std::nullopt;
  const double m = mean_of(series);
  if (m == 0.0) return std::nullopt;
  return 100.0 * population_std(series) / m;
}

}  // namespace irscreen
