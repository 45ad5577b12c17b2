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


#include "madlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "madlab/error.hpp"

namespace madlab
{
namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double
mean(std::span<const double> v)
{
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample variance, n - 1 denominator.
double
variance(std::span<const double> v)
{
  const double m = mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

void
require_two(std::span<const double> a, std::span<const double> b)
{
  if (a.size() < 2 || b.size() < 2) throw DegenerateSample("each group needs at least 2 samples");
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double
beta_continued_fraction(double a, double b, double x)
{
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

std::vector<double>
column(std::span<const OutcomeRecord> records, UncertaintyMetric metric)
{
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto &r : records) out.push_back(metric_value(r.profile, metric));
  return out;
}

}  // namespace

double
incomplete_beta(double a, double b, double x)
{
  if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double
student_t_two_sided(double t, double df)
{
  if (!(df > 0.0)) throw Error("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return std::clamp(incomplete_beta(df / 2.0, 0.5, df / (df + t * t)), 0.0, 1.0);
}

double
pearson_r(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size()) throw Error("pearson_r needs equal-length inputs");
  if (x.size() < 2) throw DegenerateSample("degenerate sample");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateSample("degenerate sample");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationTest
pearson_test(std::span<const double> x, std::span<const double> y)
{
  const double r = pearson_r(x, y);
  const auto n = static_cast<double>(x.size());
  if (x.size() < 3 || std::abs(r) == 1.0) return {r, std::abs(r) == 1.0 ? 0.0 : 1.0};
  const double t = r * std::sqrt((n - 2.0) / (1.0 - r * r));
  return {r, student_t_two_sided(t, n - 2.0)};
}

double
cohens_d(std::span<const double> a, std::span<const double> b)
{
  require_two(a, b);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double pooled = std::sqrt(((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0));
  if (pooled == 0.0) throw DegenerateSample("pooled standard deviation is zero");
  return (mean(a) - mean(b)) / pooled;
}

TTestResult
welch_t_test(std::span<const double> a, std::span<const double> b)
{
  require_two(a, b);
  const double va = variance(a) / static_cast<double>(a.size());
  const double vb = variance(b) / static_cast<double>(b.size());
  if (va + vb == 0.0) throw DegenerateSample("both groups have zero variance");
  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) /
                    (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  return {t, df, student_t_two_sided(t, df)};
}

std::optional<UncertaintyMetric>
parse_uncertainty_metric(std::string_view name)
{
  if (name == "U_intra" || name == "intra") return UncertaintyMetric::kIntra;
  if (name == "U_inter" || name == "inter") return UncertaintyMetric::kInter;
  if (name == "U_sys" || name == "sys") return UncertaintyMetric::kSys;
  return std::nullopt;
}

std::string_view
to_string(UncertaintyMetric metric)
{
  switch (metric) {
    case UncertaintyMetric::kIntra: return "U_intra";
    case UncertaintyMetric::kInter: return "U_inter";
    case UncertaintyMetric::kSys: return "U_sys";
  }
  return "?";
}

double
metric_value(const UncertaintyProfile &profile, UncertaintyMetric metric)
{
  switch (metric) {
    case UncertaintyMetric::kIntra: return profile.u_intra;
    case UncertaintyMetric::kInter: return profile.u_inter;
    case UncertaintyMetric::kSys: return profile.u_sys;
  }
  return kNaN;
}

SeparationReport
separation_report(std::span<const OutcomeRecord> records)
{
  SeparationReport report;
  for (const auto &r : records) (r.correct ? report.n_success : report.n_fail) += 1;
  if (report.n_fail < 2 || report.n_success < 2) throw DegenerateSample("no contrast");

  for (const auto metric : kAllUncertaintyMetrics) {
    std::vector<double> fail;
    std::vector<double> success;
    for (const auto &r : records) (r.correct ? success : fail).push_back(metric_value(r.profile, metric));

    MetricSeparation row{metric, mean(fail), mean(success), kNaN, kNaN, kNaN};
    if (variance(fail) + variance(success) > 0.0) {
      row.cohens_d = cohens_d(fail, success);
      const auto t = welch_t_test(fail, success);
      row.t_statistic = t.t;
      row.p_value = t.p;
    } else if (row.mean_fail == row.mean_success) {
      row.cohens_d = 0.0;
      row.t_statistic = 0.0;
      row.p_value = 1.0;
    }
    report.metrics.push_back(row);
  }
  return report;
}

CorrelationMatrix
correlation_matrix(std::span<const OutcomeRecord> records)
{
  if (records.size() < 2) throw DegenerateSample("degenerate sample");
  CorrelationMatrix m;
  std::vector<std::vector<double>> columns;
  for (const auto metric : kAllUncertaintyMetrics) {
    m.names.emplace_back(to_string(metric));
    columns.push_back(column(records, metric));
  }
  m.names.emplace_back("accuracy");
  auto &acc = columns.emplace_back();
  for (const auto &r : records) acc.push_back(r.correct ? 1.0 : 0.0);

  const auto n = columns.size();
  m.r.assign(n, std::vector<double>(n, kNaN));
  m.p.assign(n, std::vector<double>(n, kNaN));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      try {
        const auto test = pearson_test(columns[a], columns[b]);
        m.r[a][b] = m.r[b][a] = test.r;
        m.p[a][b] = m.p[b][a] = test.p;
      } catch (const DegenerateSample &) {
      }
    }
  }
  return m;
}

std::vector<SelectivePoint>
selective_prediction_curve(std::span<const OutcomeRecord> records,
                           std::span<const double> k_grid,
                           UncertaintyMetric metric)
{
  if (records.empty()) throw DegenerateSample("no records to rank");
  std::vector<const OutcomeRecord *> order;
  order.reserve(records.size());
  for (const auto &r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [metric](const OutcomeRecord *a, const OutcomeRecord *b) {
    const double ua = metric_value(a->profile, metric);
    const double ub = metric_value(b->profile, metric);
    if (ua != ub) return ua < ub;
    return a->question_id < b->question_id;
  });

  std::vector<SelectivePoint> curve;
  const auto n = static_cast<double>(records.size());
  for (const double k : k_grid) {
    if (!(k > 0.0 && k <= 100.0)) throw ConfigError(fmt::format("analysis.k_grid entry {} outside (0, 100]", k));
    // Snap to the integer when k n / 100 is integral up to rounding noise.
    const double exact = k * n / 100.0;
    const double nearest = std::round(exact);
    const auto kept = static_cast<std::size_t>(std::abs(exact - nearest) < 1e-9 ? nearest : std::ceil(exact));
    const auto retained = std::clamp<std::size_t>(kept, 1, records.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < retained; ++i) correct += order[i]->correct ? 1 : 0;
    curve.push_back({k, static_cast<double>(correct) / static_cast<double>(retained), retained});
  }
  return curve;
}

std::vector<Stratum>
stratify_by_uncertainty(std::span<const OutcomeRecord> records,
                        UncertaintyMetric metric,
                        std::span<const double> boundaries)
{
  std::vector<double> edges{0.0};
  for (const double b : boundaries) {
    if (!(b > edges.back() && b < 1.0)) throw ConfigError("analysis.strata must increase strictly inside (0, 1)");
    edges.push_back(b);
  }
  edges.push_back(1.0);

  std::vector<Stratum> strata;
  std::vector<std::size_t> correct(edges.size() - 1, 0);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) strata.push_back({edges[b], edges[b + 1], 0, std::nullopt});
  for (const auto &r : records) {
    const double u = metric_value(r.profile, metric);
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, u);
    const auto bin = static_cast<std::size_t>(it - (edges.begin() + 1));
    ++strata[bin].count;
    correct[bin] += r.correct ? 1 : 0;
  }
  for (std::size_t b = 0; b < strata.size(); ++b) {
    if (strata[b].count > 0) {
      strata[b].accuracy = static_cast<double>(correct[b]) / static_cast<double>(strata[b].count);
    }
  }
  return strata;
}

std::string
format_real(double value)
{
  if (!std::isfinite(value)) return "NA";
  return fmt::format("{:.12g}", value);
}

void
write_separation_csv(std::ostream &out, const SeparationReport &report)
{
  out << "metric,mean_fail,mean_success,d,t,p\n";
  for (const auto &m : report.metrics) {
    out << to_string(m.metric) << ',' << format_real(m.mean_fail) << ',' << format_real(m.mean_success) << ','
        << format_real(m.cohens_d) << ',' << format_real(m.t_statistic) << ',' << format_real(m.p_value) << '\n';
  }
}

namespace
{

void
write_matrix(std::ostream &out, const std::vector<std::string> &names, const std::vector<std::vector<double>> &v)
{
  out << "metric";
  for (const auto &n : names) out << ',' << n;
  out << '\n';
  for (std::size_t a = 0; a < names.size(); ++a) {
    out << names[a];
    for (std::size_t b = 0; b < names.size(); ++b) out << ',' << format_real(v[a][b]);
    out << '\n';
  }
}

}  // namespace

void
write_correlation_csv(std::ostream &out, const CorrelationMatrix &matrix)
{
  write_matrix(out, matrix.names, matrix.r);
}

void
write_correlation_p_csv(std::ostream &out, const CorrelationMatrix &matrix)
{
  write_matrix(out, matrix.names, matrix.p);
}

void
write_selective_csv(std::ostream &out, std::span<const SelectivePoint> curve)
{
  out << "k,accuracy,n\n";
  for (const auto &p : curve) out << format_real(p.k) << ',' << format_real(p.accuracy) << ',' << p.n_retained << '\n';
}

void
write_strata_csv(std::ostream &out, std::span<const Stratum> strata)
{
  out << "bin_lo,bin_hi,n,accuracy\n";
  for (const auto &s : strata) {
    out << format_real(s.lo) << ',' << format_real(s.hi) << ',' << s.count << ','
        << (s.accuracy ? format_real(*s.accuracy) : std::string("NA")) << '\n';
  }
}

}  // namespace madlab
