#include <doctest.h>

#include <cmath>

#include "entlab/acceptance.hpp"
#include "entlab/error.hpp"
#include "entlab/inequality.hpp"
#include "oracles.hpp"

using namespace entlab;

namespace {

CheckOptions fast_options() {
  CheckOptions o;
  o.sum.m_outer = 4000;
  o.sum.knn_m = 20000;
  o.marginal.knn_m = 20000;
  o.m = 20000;
  return o;
}

}  // namespace

TEST_CASE("decision rule") {
  const InequalityReport ok = make_report("r", 1.0, 1.0 - 2e-10, 0.0, 0.0, {}, true);
  CHECK(ok.satisfied);
  CHECK(ok.slack == kAnalyticSlack);
  const InequalityReport bad = make_report("r", 1.0, 0.9, 0.01, 0.01);
  CHECK(bad.slack == doctest::Approx(3.0 * std::hypot(0.01, 0.01)));
  CHECK_FALSE(bad.satisfied);
  CHECK(make_report("r", 1.0, 0.96, 0.01, 0.01).satisfied);

  const InequalityReport agree = agreement_report("a", 1.0, 0.1, 1.2, 0.1);
  CHECK(agree.satisfied);
  CHECK(agree.lhs == doctest::Approx(0.2));
  CHECK_FALSE(agreement_report("a", 1.0, 0.01, 1.2, 0.01).satisfied);

  const InequalityReport zero = make_report_with_slack("z", 0.0, -0.0, 0.0);
  CHECK_FALSE(std::signbit(zero.rhs));
  CHECK_FALSE(std::signbit(zero.margin));

  const InequalityReport back = report_from_json(to_json(bad));
  CHECK(back.name == bad.name);
  CHECK(back.margin == bad.margin);
  CHECK(recompute_satisfied(back) == bad.satisfied);
}

TEST_CASE("entropy sandwich") {
  for (int n : {1, 4, 16}) {
    CAPTURE(n);
    const TwoSidedReport e = check_entropy_sandwich(zoo_model("exponential", n));
    CHECK(e.satisfied());
    CHECK(std::abs(e.upper.margin) < 1e-12);
    const TwoSidedReport c = check_entropy_sandwich(zoo_model("cube", n));
    CHECK(std::abs(c.lower.margin) < 1e-12);
    CHECK(c.upper.margin == doctest::Approx(1.0));
    const TwoSidedReport g = check_entropy_sandwich(zoo_model("gaussian", n));
    CHECK(g.lower.margin == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.upper.margin == doctest::Approx(0.5).epsilon(1e-12));
  }
  DensityModel heavy = make_standard_gaussian(2);
  heavy.kappa = -1.0;
  CHECK_THROWS_AS(check_entropy_sandwich(heavy), UnsupportedOperation);
}

TEST_CASE("concentration profile") {
  const std::vector<double> grid = {0.25, 0.5, 1.0, 2.0};
  const ConcentrationProfile g = concentration_profile(make_standard_gaussian(8), RandomStream(1), 50000, grid);
  REQUIRE(g.oracle_tail.has_value());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CAPTURE(grid[i]);
    CHECK(g.tail_bound[i] == doctest::Approx(4.0 * std::exp(-grid[i] * grid[i] * 8 / 16.0)).epsilon(1e-15));
    CHECK((*g.oracle_tail)[i] == doctest::Approx(oracle::chi_square_two_sided_tail(8, grid[i])).epsilon(1e-9));
    CHECK(std::abs(g.empirical_tail[i] - (*g.oracle_tail)[i]) <= 3.0 * g.tail_se[i] + 1e-12);
    if (i > 0) CHECK(g.empirical_tail[i] <= g.empirical_tail[i - 1]);
  }
  for (const auto& r : concentration_reports(g)) CHECK(r.satisfied);

  // Uniform laws have constant information content.
  const ConcentrationProfile c = concentration_profile(zoo_model("cube", 4), RandomStream(2), 1000, grid);
  for (double t : c.empirical_tail) CHECK(t == 0.0);
  CHECK_FALSE(c.oracle_tail.has_value());

  CHECK_THROWS_AS(concentration_profile(make_standard_gaussian(2), RandomStream(3), 100, {2.5}), InvalidParameter);
  CHECK_THROWS_AS(concentration_profile(make_standard_gaussian(2), RandomStream(3), 100, {-0.1}), InvalidParameter);

  const MassEstimate mass = typical_set_mass(make_standard_gaussian(8), RandomStream(1), 50000, 0.5);
  CHECK(mass.value == doctest::Approx(1.0 - g.empirical_tail[1]));
}

TEST_CASE("submodularity") {
  for (double a : {0.25, 4.0}) {
    for (double c : {0.25, 1.0}) {
      const DensityModel x = make_gaussian(1, Matrix::Constant(1, 1, a));
      const DensityModel z = make_gaussian(1, Matrix::Constant(1, 1, c));
      const InequalityReport r = check_submodularity(x, x, z, RandomStream(1));
      CHECK(r.satisfied);
      CHECK(r.margin == doctest::Approx(oracle::gaussian_submodularity_margin(a, a, c)).epsilon(1e-10));
    }
  }
  const DensityModel g = make_standard_gaussian(1);
  CHECK(std::abs(check_submodularity(g, g, g, RandomStream(1)).margin - 0.5 * std::log(4.0 / 3.0)) < 1e-9);

  const DensityModel cube = zoo_model("cube", 2);
  const DensityModel ball = zoo_model("ball", 2);
  const InequalityReport mc = check_submodularity(cube, cube, ball, RandomStream(2), fast_options());
  CHECK(mc.satisfied);
  CHECK(mc.lhs_se > 0.0);
  CHECK_THROWS_AS(check_submodularity(cube, g, cube, RandomStream(2)), InvalidParameter);
}

TEST_CASE("entropy power inequality") {
  const InequalityReport gg =
      check_epi(make_standard_gaussian(3), make_gaussian(3, 2.0 * Matrix::Identity(3, 3)), RandomStream(1));
  CHECK(gg.params["ratio"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

  const DensityModel u = make_uniform_interval();
  CheckOptions knn = fast_options();
  knn.sum.route = EntropyOptions::Route::knn;
  knn.sum.knn_m = 50000;
  const InequalityReport uu = check_epi(u, u, RandomStream(2), knn);
  CHECK(uu.satisfied);
  const double ratio = uu.params["ratio"].get<double>();
  const double ratio_se = uu.params["ratio_se"].get<double>();
  CHECK(std::abs(ratio - oracle::uniform_pair_epi_ratio()) <= 3.0 * ratio_se);

  const InequalityReport ee = check_epi(make_exponential(), make_exponential(), RandomStream(3), fast_options());
  CHECK(ee.satisfied);
  CHECK(std::abs(ee.rhs - std::exp(2.0 * oracle::gamma2_entropy())) <= 3.0 * ee.rhs_se);
}

TEST_CASE("reverse EPI pipeline") {
  Matrix cov(2, 2);
  cov << 2, 0.5, 0.5, 1;
  CheckOptions o = fast_options();
  const ReverseEpiResult g = reverse_epi_pipeline(make_gaussian(2, cov), make_standard_gaussian(2), RandomStream(1), o);
  CHECK(g.report.satisfied);
  CHECK(g.epi_side.satisfied);
  CHECK(std::abs(g.c_hat - 1.0) <= 3.0 * g.c_hat_se + 1e-9);
  CHECK_FALSE(g.stages.empty());

  const DensityModel u = make_uniform_interval();
  const ReverseEpiResult uu = reverse_epi_pipeline(u, u, RandomStream(2), o);
  CHECK(std::abs(uu.c_hat - oracle::uniform_pair_epi_ratio()) <= 3.0 * uu.c_hat_se);

  o.reverse_epi_ceiling = 0.5;
  CHECK_FALSE(reverse_epi_pipeline(u, u, RandomStream(2), o).report.satisfied);
}

TEST_CASE("kappa entropy lower bound") {
  const ConvexBody cube = unit_cube(2);
  const InequalityReport sharp = check_kappa_entropy_lower(uniform_body_model(cube), cube, 0.5, RandomStream(1));
  CHECK(std::abs(sharp.margin) < 1e-12);
  const ConvexBody big(Box{Vector::Zero(2), Vector::Constant(2, 2.0)});
  const DensityModel cm = uniform_body_model(cube);
  const InequalityReport sum =
      check_kappa_entropy_lower(convolve(cm, cm).model(), big, 0.25, RandomStream(2), fast_options());
  CHECK(sum.satisfied);
  // log 4 + 2 log(1/2) = 0 against h = 2 h(triangle) = 1.
  CHECK(std::abs(sum.lhs) < 1e-12);
  CHECK(std::abs(sum.rhs - 2.0 * oracle::triangular_entropy()) <= 3.0 * sum.rhs_se);
  CHECK_THROWS_AS(check_kappa_entropy_lower(cm, cube, 0.75, RandomStream(1)), InvalidParameter);
  CHECK_THROWS_AS(check_kappa_entropy_lower(cm, cube, 0.0, RandomStream(1)), InvalidParameter);
  CHECK_THROWS_AS(
      check_kappa_entropy_lower(cm, ConvexBody(Box{Vector::Zero(2), Vector::Constant(2, 0.5)}), 0.5, RandomStream(1)),
      InvalidParameter);
}

TEST_CASE("reverse Brunn-Minkowski") {
  const ConvexBody interval(Box{Vector::Zero(1), Vector::Ones(1)});
  const InequalityReport r = check_reverse_bm(interval, interval, RandomStream(1), fast_options());
  CHECK(r.satisfied);
  CHECK(r.lhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(r.margin - oracle::triangular_entropy()) <= 3.0 * r.rhs_se);

  const ConvexBody disc(Ball{Vector::Zero(2), 1.0});
  const InequalityReport d = check_reverse_bm(disc, disc, RandomStream(2), fast_options());
  CHECK(d.satisfied);
  CHECK(d.lhs == doctest::Approx(std::log(4.0 * oracle::kPi) - 2.0 * std::log(2.0)));

  const ConvexBody tri = standard_simplex(2);
  CHECK_THROWS_AS(check_reverse_bm(tri, tri, RandomStream(3)), UnsupportedOperation);
}

TEST_CASE("Gaussian sandwich and hyperplane scan") {
  const TwoSidedReport e = check_gaussian_sandwich(zoo_model("exponential", 4));
  CHECK(e.satisfied());
  CHECK(std::abs(e.upper.margin) < 1e-12);
  const TwoSidedReport c = check_gaussian_sandwich(zoo_model("cube", 4));
  CHECK(std::abs(c.lower.margin) < 1e-12);
  const TwoSidedReport g = check_gaussian_sandwich(zoo_model("gaussian", 4));
  CHECK(g.lower.margin == doctest::Approx(0.5));

  const auto rows = hyperplane_scan({zoo_model("gaussian", 8), zoo_model("cube", 8), zoo_model("exponential", 2)},
                                    RandomStream(4), 40000);
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[0].d_per_n) <= 3.0 * rows[0].d_per_n_se + 1e-12);
  CHECK(rows[1].d_per_n == doctest::Approx(oracle::cube_gaussian_gap()).epsilon(1e-9));
  CHECK(std::abs(rows[2].d_per_n - oracle::exponential_gaussian_gap()) <= 3.0 * rows[2].d_per_n_se);
  CHECK(rows[1].bound == doctest::Approx(0.25 * std::log(8.0) + 1.0));
  for (const auto& row : rows) {
    CHECK_FALSE(row.flagged);
    CHECK(to_report(row).satisfied);
  }
}
