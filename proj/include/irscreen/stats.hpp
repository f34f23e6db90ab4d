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

#include <optional>
#include <span>
#include <vector>

namespace irscreen {

double normal_cdf(double z);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);
/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double x, double a, double b);
/// Two-sided tail probability of |T| >= |t| for Student's t with df degrees.
double student_t_two_sided(double t, double df);
/// Upper tail of chi-square with one degree of freedom.
double chi2_1_sf(double x);

/// Midranks (1-based) with ties averaged.
std::vector<double> midranks(std::span<const double> values);

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double rank_sum = 0.0;  // sum of ranks of the first sample
  double z = 0.0;         // normal approximation statistic (0 when exact)
  double p_value = 1.0;   // two-sided
  bool exact = false;
  bool all_ties = false;  // degenerate: every value identical
};

/// Two-sided Wilcoxon rank-sum test. Auto uses the exact permutation
/// distribution when both samples have at most 10 values, otherwise the
/// tie-corrected normal approximation with continuity correction.
WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                 WilcoxonMethod method = WilcoxonMethod::Auto);

struct McNemarResult {
  long b = 0;  // first right, second wrong
  long c = 0;  // first wrong, second right
  double chi2 = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // no discordant pairs
};

/// Continuity-corrected McNemar test on discordant counts.
McNemarResult mcnemar(long b, long c);
/// Paired outcomes (e.g. correct / incorrect per participant).
McNemarResult mcnemar(std::span<const bool> first_correct, std::span<const bool> second_correct);

/// Benjamini-Hochberg adjusted p-values in input order, monotone and <= 1.
std::vector<double> benjamini_hochberg(std::span<const double> p);

struct PearsonResult {
  std::optional<double> r;        // undefined when either side is constant
  std::optional<double> p_value;  // two-sided, t-transform
  std::size_t n = 0;
};

PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// 100 * population std / mean; nullopt for an empty series or zero mean.
std::optional<double> coefficient_of_variation(std::span<const double> series);

double mean_of(std::span<const double> v);
/// Population (1/n) standard deviation.
double population_std(std::span<const double> v);
double median_of(std::span<const double> v);
double quantile_of(std::span<const double> v, double q);

}  // namespace irscreen
