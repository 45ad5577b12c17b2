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


#include <cmath>
#include <sstream>

#include <doctest.h>

#include "madlab/stats.hpp"

using namespace madlab;

namespace
{

using V = std::vector<double>;

OutcomeRecord
record(std::string id, bool correct, double intra, double inter, double sys)
{
  OutcomeRecord r{std::move(id), correct, {}};
  r.profile.u_intra = intra;
  r.profile.u_inter = inter;
  r.profile.u_sys = sys;
  return r;
}

void
check_close(double got, double want, double rel = 1e-9)
{
  CHECK(std::abs(got - want) <= rel * std::max(1.0, std::abs(want)));
}

}  // namespace

TEST_CASE("incomplete beta against high-precision values")
{
  check_close(incomplete_beta(2.5, 0.5, 0.3), 0.018927124071945653504, 1e-12);
  check_close(incomplete_beta(30, 0.5, 0.97), 0.17821754497024154187, 1e-12);
  check_close(incomplete_beta(0.5, 7, 0.01), 0.28748362987172177734, 1e-12);
  CHECK(incomplete_beta(2, 3, 0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1) == 1.0);
  check_close(incomplete_beta(1, 1, 0.37), 0.37, 1e-14);
  // I_x(a, b) = 1 - I_{1-x}(b, a)
  check_close(incomplete_beta(3.5, 1.25, 0.6), 1.0 - incomplete_beta(1.25, 3.5, 0.4), 1e-13);
}

TEST_CASE("Welch t test")
{
  const auto a = welch_t_test(V{0, 0, 0, 1}, V{1, 1, 1, 0});
  check_close(a.t, -1.4142135623730950488);
  check_close(a.df, 6.0);
  check_close(a.p, 0.20703125, 1e-10);

  const V g1{0.1, 0.4, 0.35, 0.8, 0.55};
  const V g2{0.05, 0.2, 0.1, 0.15};
  const auto b = welch_t_test(g1, g2);
  check_close(b.t, 2.6257598784353694489);
  check_close(b.df, 4.6111409441628341225);
  check_close(b.p, 0.050658685745831495509, 1e-9);

  const auto c = welch_t_test(V{1.5, 2.5, 3.5, 2.0, 4.0, 3.0, 2.2}, V{0.9, 1.1, 1.4, 1.0});
  check_close(c.t, 4.4988614859362329591);
  check_close(c.df, 7.1754442907103126003);
  check_close(c.p, 0.0026339797047056575912, 1e-9);

  const auto swapped = welch_t_test(g2, g1);
  CHECK(swapped.t == doctest::Approx(-b.t));
  CHECK(swapped.p == doctest::Approx(b.p));
  CHECK_THROWS_AS(welch_t_test(V{1}, V{1, 2}), DegenerateSample);
}

TEST_CASE("Pearson correlation")
{
  const auto a = pearson_test(V{1, 2, 3}, V{1, 2, 4});
  check_close(a.r, 0.9819805060619657157);
  check_close(a.p, 0.12103771832367672895, 1e-9);

  const auto b = pearson_test(V{0.1, 0.5, 0.3, 0.9, 0.7, 0.2}, V{1, 0, 1, 0, 0, 1});
  check_close(b.r, -0.8885233166386385273);
  check_close(b.p, 0.017947913188873199837, 1e-9);

  const V x{2.0, 4.1, 6.3, 7.9, 10.2, 12.1, 13.8, 16.4};
  const V y{1.1, 1.9, 3.2, 3.8, 5.1, 6.2, 6.8, 8.1};
  const auto c = pearson_test(x, y);
  check_close(c.r, 0.99889969525030763212);
  check_close(c.p, 3.3275187435761352317e-9, 1e-7);

  // Invariant under positive affine maps, sign flips under negation.
  V x2 = x;
  for (auto &v : x2) v = 3.5 * v - 7.0;
  CHECK(pearson_r(x2, y) == doctest::Approx(c.r).epsilon(1e-12));
  for (auto &v : x2) v = -v;
  CHECK(pearson_r(x2, y) == doctest::Approx(-c.r).epsilon(1e-12));

  CHECK(pearson_r(V{1, 2, 3}, V{2, 4, 6}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pearson_r(V{1, 1, 1}, V{1, 2, 3}), DegenerateSample);
  CHECK_THROWS_AS(pearson_r(V{1}, V{1}), DegenerateSample);
  CHECK_THROWS(pearson_r(V{1, 2}, V{1, 2, 3}));
}

TEST_CASE("Cohen's d")
{
  check_close(cohens_d(V{0, 1}, V{2, 3}), -2.8284271247461900976);
  CHECK(std::abs(cohens_d(V{0, 1}, V{2, 3})) == doctest::Approx(2.8284271));
  const V g1{0.1, 0.4, 0.35, 0.8, 0.55};
  const V g2{0.05, 0.2, 0.1, 0.15};
  check_close(cohens_d(g1, g2), 1.576408136177556568);
  CHECK(cohens_d(g2, g1) == doctest::Approx(-cohens_d(g1, g2)));
}

TEST_CASE("separation report contrasts failures with successes")
{
  const std::vector<OutcomeRecord> records{
      record("a", false, 0.6, 0.5, 0.9), record("b", false, 0.4, 0.7, 0.7), record("c", true, 0.1, 0.2, 0.1),
      record("d", true, 0.0, 0.1, 0.2), record("e", true, 0.2, 0.1, 0.15)};
  const auto report = separation_report(records);
  CHECK(report.n_fail == 2);
  CHECK(report.n_success == 3);
  REQUIRE(report.metrics.size() == 3);
  const auto &sys = report.metrics[2];
  CHECK(sys.metric == UncertaintyMetric::kSys);
  CHECK(sys.mean_fail == doctest::Approx(0.8));
  CHECK(sys.mean_success == doctest::Approx(0.15));
  CHECK(sys.cohens_d > 0);
  CHECK(sys.cohens_d == doctest::Approx(cohens_d(V{0.9, 0.7}, V{0.1, 0.2, 0.15})));
  CHECK(sys.t_statistic == doctest::Approx(welch_t_test(V{0.9, 0.7}, V{0.1, 0.2, 0.15}).t));

  const std::vector<OutcomeRecord> one_sided{record("a", true, 0, 0, 0), record("b", true, 0, 0, 0)};
  CHECK_THROWS_WITH_AS(separation_report(one_sided), "no contrast", DegenerateSample);

  const std::vector<OutcomeRecord> flat{record("a", false, 0.5, 0.5, 0.5), record("b", false, 0.5, 0.5, 0.5),
                                        record("c", true, 0.5, 0.5, 0.5), record("d", true, 0.5, 0.5, 0.5)};
  const auto same = separation_report(flat).metrics[0];
  CHECK(same.cohens_d == 0.0);
  CHECK(same.p_value == 1.0);

  std::ostringstream out;
  write_separation_csv(out, report);
  CHECK(out.str().rfind("metric,mean_fail,mean_success,d,t,p\nU_intra,", 0) == 0);
}

TEST_CASE("correlation matrix")
{
  const std::vector<OutcomeRecord> records{
      record("a", false, 0.6, 0.5, 0.9), record("b", false, 0.4, 0.7, 0.7), record("c", true, 0.1, 0.2, 0.1),
      record("d", true, 0.0, 0.1, 0.2), record("e", true, 0.2, 0.1, 0.15)};
  const auto m = correlation_matrix(records);
  CHECK(m.names == std::vector<std::string>{"U_intra", "U_inter", "U_sys", "accuracy"});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(m.r[i][i] == doctest::Approx(1.0));
    for (std::size_t j = 0; j < 4; ++j) CHECK(m.r[i][j] == m.r[j][i]);
  }
  CHECK(m.r[2][3] == doctest::Approx(pearson_r(V{0.9, 0.7, 0.1, 0.2, 0.15}, V{0, 0, 1, 1, 1})));
  CHECK(m.r[2][3] < 0);

  std::vector<OutcomeRecord> constant = records;
  for (auto &r : constant) r.correct = true;
  const auto c = correlation_matrix(constant);
  CHECK(std::isnan(c.r[0][3]));
  std::ostringstream out;
  write_correlation_csv(out, c);
  CHECK(out.str().find("NA") != std::string::npos);
}

TEST_CASE("selective prediction keeps the least uncertain")
{
  std::vector<OutcomeRecord> records;
  for (int n = 0; n < 10; ++n) records.push_back(record("q" + std::to_string(n), n < 6, 0, 0, n / 10.0));
  const V grid{10, 50, 60, 70, 100};
  const auto curve = selective_prediction_curve(records, grid, UncertaintyMetric::kSys);
  CHECK(curve[0].n_retained == 1);
  CHECK(curve[0].accuracy == 1.0);
  CHECK(curve[2].accuracy == 1.0);
  CHECK(curve[3].n_retained == 7);
  CHECK(curve[3].accuracy == doctest::Approx(6.0 / 7));
  CHECK(curve[4].n_retained == 10);
  CHECK(curve[4].accuracy == doctest::Approx(0.6));

  // Ties are broken by id, so reordering the input changes nothing.
  std::vector<OutcomeRecord> tied{record("b", false, 0, 0, 0.5), record("a", true, 0, 0, 0.5),
                                  record("c", false, 0, 0, 0.5)};
  const V half{33};
  CHECK(selective_prediction_curve(tied, half, UncertaintyMetric::kSys)[0].accuracy == 1.0);
  std::swap(tied[0], tied[1]);
  CHECK(selective_prediction_curve(tied, half, UncertaintyMetric::kSys)[0].accuracy == 1.0);

  const V bad{0};
  CHECK_THROWS(selective_prediction_curve(records, bad, UncertaintyMetric::kSys));
  const V over{101};
  CHECK_THROWS(selective_prediction_curve(records, over, UncertaintyMetric::kSys));
}

TEST_CASE("strata bin by uncertainty")
{
  const std::vector<OutcomeRecord> records{record("a", true, 0, 0, 0.0), record("b", false, 0, 0, 0.2),
                                           record("c", true, 0, 0, 0.25), record("d", false, 0, 0, 1.0),
                                           record("e", true, 0, 0, 0.8)};
  const auto s = stratify_by_uncertainty(records, UncertaintyMetric::kSys);
  REQUIRE(s.size() == 5);
  CHECK(s[0].count == 1);
  CHECK(s[0].accuracy == 1.0);
  CHECK(s[1].count == 2);
  CHECK(s[1].accuracy == doctest::Approx(0.5));
  CHECK(s[2].count == 0);
  CHECK_FALSE(s[2].accuracy.has_value());
  CHECK(s[4].count == 2);
  CHECK(s[4].hi == 1.0);

  std::ostringstream out;
  write_strata_csv(out, s);
  CHECK(out.str().find("0.4,0.6,0,NA") != std::string::npos);
}

TEST_CASE("metric names")
{
  CHECK(parse_uncertainty_metric("U_sys") == UncertaintyMetric::kSys);
  CHECK(parse_uncertainty_metric("inter") == UncertaintyMetric::kInter);
  CHECK_FALSE(parse_uncertainty_metric("entropy").has_value());
  CHECK(to_string(UncertaintyMetric::kIntra) == "U_intra");
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(std::nan("")) == "NA");
}
