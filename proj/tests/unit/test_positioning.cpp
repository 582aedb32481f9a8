#include <doctest.h>

#include <cmath>

#include "entlab/acceptance.hpp"
#include "entlab/density_model.hpp"
#include "entlab/entropy.hpp"
#include "entlab/positioning.hpp"
#include "oracles.hpp"

using namespace entlab;

TEST_CASE("max-density normalization") {
  Matrix cov(2, 2);
  cov << 3, 1, 1, 2;
  for (const DensityModel& model : {make_gaussian(2, cov), make_power(make_laplace(2.0), 3), zoo_model("ball", 4)}) {
    CAPTURE(model.name);
    const PositionedModel p = normalize_max_density(model);
    CHECK(*p.model.analytic_max_density == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*p.model.analytic_entropy == doctest::Approx(*model.analytic_entropy + p.map.log_det()));
  }
  // Already normalized: the identity map.
  const PositionedModel e = normalize_max_density(make_power(make_exponential(), 3));
  CHECK(e.map.log_det() == 0.0);
}

TEST_CASE("isotropic det-1 position") {
  Matrix cov(3, 3);
  cov << 4, 1, 0, 1, 2, 0.5, 0, 0.5, 1;
  const DensityModel g = make_gaussian(Vector::Constant(3, 2.0), cov);
  const PositionedModel p = isotropic_det1_position(g, RandomStream(1));
  CHECK(std::abs(p.map.log_det()) < 1e-12);
  const Matrix& c = *p.model.covariance;
  const double s = c(0, 0);
  CHECK((c - s * Matrix::Identity(3, 3)).norm() < 1e-10 * s);
  CHECK(p.model.mean->norm() < 1e-12);
  CHECK(*p.model.analytic_entropy == doctest::Approx(*g.analytic_entropy).epsilon(1e-12));

  const DensityModel stretched =
      affine_image(make_power(make_laplace(), 2), AffineMap::diagonal(Vector{{4.0, 0.25}}, Vector::Zero(2)));
  const PositionedModel q = isotropic_det1_position(stretched, RandomStream(2));
  CHECK(q.map.diagonal());
  CHECK((*q.model.covariance)(0, 0) == doctest::Approx((*q.model.covariance)(1, 1)));

  // Estimated moments: the sum of two cubes is isotropic up to sampling error.
  const DensityModel cube = uniform_body_model(unit_cube(2));
  DensityModel sum =
      convolve(cube, affine_image(cube, AffineMap::diagonal(Vector{{3.0, 1.0}}, Vector::Zero(2)))).model();
  sum.mean.reset();
  sum.covariance.reset();
  const PositionedModel r = isotropic_det1_position(sum, RandomStream(3), 200000);
  const MomentEstimate after = moments(r.model, RandomStream(4), 200000);
  CHECK(after.covariance(0, 0) / after.covariance(1, 1) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(r.map.log_det()) < 1e-12);
}

TEST_CASE("ball mass") {
  // Volume-one ball in R^1 is [-1/2, 1/2].
  const DensityModel g = make_standard_gaussian(1);
  const double exact = oracle::normal_interval_mass(0.5);
  for (BallMassMethod method : {BallMassMethod::indicator, BallMassMethod::density_integral}) {
    CAPTURE(to_string(method));
    const BallMass b = ball_mass(g, RandomStream(5), 100000, method);
    CHECK(b.method == method);
    CHECK(std::abs(b.mass - exact) <= 3.0 * b.mass_se);
    CHECK(b.mass_root == doctest::Approx(b.mass));
  }
  const BallMass product = ball_mass(make_standard_gaussian(2), RandomStream(6), 100000);
  CHECK(product.method == BallMassMethod::density_integral);
  CHECK(product.mass_root == doctest::Approx(std::sqrt(product.mass)));

  // A far-away narrow indicator gets no hits: the mass is censored at 1/m.
  const DensityModel wide = affine_image(make_standard_gaussian(16), AffineMap::scaling(16, 50.0));
  const BallMass censored = ball_mass(wide, RandomStream(7), 1000, BallMassMethod::indicator);
  CHECK(censored.censored);
  CHECK(censored.mass == doctest::Approx(1e-3));

  const DensityModel cube = uniform_body_model(unit_cube(2));
  CHECK_THROWS((void)ball_mass(convolve(cube, cube).model(), RandomStream(8), 100, BallMassMethod::density_integral));
}

TEST_CASE("position search improves a stretched model") {
  const DensityModel stretched =
      affine_image(make_standard_gaussian(2), AffineMap::diagonal(Vector{{0.2, 5.0}}, Vector::Zero(2)));
  const PositionSearchResult r = m_position_search(stretched, RandomStream(9), 20000);
  CHECK(r.mass_root > r.start_mass_root);
  CHECK(r.accepted_moves > 0);
  CHECK(std::abs(r.map.log_det()) < 1e-12);
}
