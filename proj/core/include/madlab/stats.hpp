/*
 * Copyright 2026 The madlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef MADLAB_STATS_HPP
#define MADLAB_STATS_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "madlab/metrics.hpp"

namespace madlab
{

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

/// Throws DegenerateSample on fewer than 2 points or zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

struct CorrelationTest {
  double r{};
  double p{};
};

/// r plus the two-sided p of t = r sqrt((n - 2) / (1 - r^2)) on n - 2 df.
CorrelationTest pearson_test(std::span<const double> x, std::span<const double> y);

/// Pooled-SD standardized mean difference (a - b).
double cohens_d(std::span<const double> a, std::span<const double> b);

struct TTestResult {
  double t{};
  double df{};
  double p{};
};

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

enum class UncertaintyMetric { kIntra, kInter, kSys };

inline constexpr UncertaintyMetric kAllUncertaintyMetrics[] = {
    UncertaintyMetric::kIntra, UncertaintyMetric::kInter, UncertaintyMetric::kSys};

std::optional<UncertaintyMetric> parse_uncertainty_metric(std::string_view name);
/// `U_intra`, `U_inter` or `U_sys`.
std::string_view to_string(UncertaintyMetric metric);
double metric_value(const UncertaintyProfile &profile, UncertaintyMetric metric);

struct OutcomeRecord {
  std::string question_id;
  bool correct{};
  UncertaintyProfile profile;
};

struct MetricSeparation {
  UncertaintyMetric metric{};
  double mean_fail{};
  double mean_success{};
  /// NaN when the metric is constant within both classes but differs between them.
  double cohens_d{};
  double t_statistic{};
  double p_value{};
};

struct SeparationReport {
  std::size_t n_fail{};
  std::size_t n_success{};
  std::vector<MetricSeparation> metrics;
};

/// Failure minus success statistics per metric. Throws "no contrast" unless
/// both classes have at least 2 records.
SeparationReport separation_report(std::span<const OutcomeRecord> records);

/// Symmetric matrix over U_intra, U_inter, U_sys and accuracy (0/1).
/// Entries involving a constant column are NaN.
struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> r;
  std::vector<std::vector<double>> p;
};

CorrelationMatrix correlation_matrix(std::span<const OutcomeRecord> records);

struct SelectivePoint {
  double k{};
  double accuracy{};
  std::size_t n_retained{};
};

/// Keeps the ceil(k n / 100) least uncertain records, ties broken by
/// question_id, for each k in (0, 100].
std::vector<SelectivePoint> selective_prediction_curve(std::span<const OutcomeRecord> records,
                                                       std::span<const double> k_grid,
                                                       UncertaintyMetric metric);

struct Stratum {
  double lo{};
  double hi{};
  std::size_t count{};
  /// Empty for an empty bin.
  std::optional<double> accuracy;
};

inline constexpr double kDefaultStrataBoundaries[] = {0.2, 0.4, 0.6, 0.8};

/// Bins [lo, hi) cut at `boundaries` (strictly increasing, inside (0, 1)); the
/// last bin is closed at 1.
std::vector<Stratum> stratify_by_uncertainty(std::span<const OutcomeRecord> records,
                                             UncertaintyMetric metric,
                                             std::span<const double> boundaries = kDefaultStrataBoundaries);

/// `metric,mean_fail,mean_success,d,t,p`
void write_separation_csv(std::ostream &out, const SeparationReport &report);
void write_correlation_csv(std::ostream &out, const CorrelationMatrix &matrix);
void write_correlation_p_csv(std::ostream &out, const CorrelationMatrix &matrix);
/// `k,accuracy,n`
void write_selective_csv(std::ostream &out, std::span<const SelectivePoint> curve);
/// `bin_lo,bin_hi,n,accuracy`
void write_strata_csv(std::ostream &out, std::span<const Stratum> strata);

/// `%.12g`, or `NA` for non-finite values.
std::string format_real(double value);

}  // namespace madlab

#endif  // MADLAB_STATS_HPP
