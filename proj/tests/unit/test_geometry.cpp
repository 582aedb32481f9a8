#include <doctest.h>

#include <cmath>

#include "entlab/affine_map.hpp"
#include "entlab/concavity.hpp"
#include "entlab/convex_body.hpp"
#include "entlab/error.hpp"
#include "oracles.hpp"

using namespace entlab;

namespace {

ConvexBody square_polytope(double half) {
  Matrix normals(4, 2);
  normals << 1, 0, -1, 0, 0, 1, 0, -1;
  return ConvexBody(HPolytope{normals, Vector::Constant(4, half)});
}

}  // namespace

TEST_CASE("affine maps") {
  Matrix a(2, 2);
  a << 2, 1, 0, 3;
  const AffineMap map(a, Vector::Constant(2, 1.0));
  CHECK(map.log_det() == doctest::Approx(std::log(6.0)));
  CHECK_FALSE(map.diagonal());
  const Vector x = Vector::Constant(2, 0.7);
  CHECK((map.apply_inverse(map.apply(x)) - x).norm() < 1e-14);
  CHECK(map.inverse().log_det() == doctest::Approx(-std::log(6.0)));
  CHECK(map.then(map.inverse()).log_det() == doctest::Approx(0.0).epsilon(1e-14));

  const AffineMap d = AffineMap::diagonal(Vector::Constant(3, 2.0), Vector::Zero(3));
  CHECK(d.diagonal());
  CHECK(d.log_det() == doctest::Approx(3.0 * std::log(2.0)));
  CHECK(AffineMap::scaling(4, 0.5).log_det() == doctest::Approx(-4.0 * std::log(2.0)));

  Matrix singular(2, 2);
  singular << 1, 2, 2, 4;
  CHECK_THROWS_AS(AffineMap(singular, Vector::Zero(2)), InvalidParameter);
  CHECK_THROWS_AS(AffineMap(Matrix::Identity(2, 2), Vector::Zero(3)), InvalidParameter);
}

TEST_CASE("unit-volume balls") {
  for (int n = 1; n <= 4; ++n) {
    CAPTURE(n);
    const ConvexBody b = unit_volume_ball(n);
    CHECK(std::get<Ball>(b.shape()).radius == doctest::Approx(oracle::unit_volume_radius(n)).epsilon(1e-13));
    CHECK(std::abs(log_volume(b)) < 1e-12);
  }
  CHECK(log_unit_ball_volume(2) == doctest::Approx(std::log(oracle::kPi)));
  CHECK(std::isfinite(log_unit_ball_volume(2000)));
  CHECK_THROWS_AS(unit_volume_ball(0), InvalidParameter);
}

TEST_CASE("volumes and membership") {
  const ConvexBody box(Box{Vector::Zero(3), Vector::Constant(3, 2.0)});
  CHECK(log_volume(box) == doctest::Approx(3.0 * std::log(2.0)));
  CHECK(box.contains(Vector::Constant(3, 1.0)));
  CHECK_FALSE(box.contains(Vector::Constant(3, 2.5)));

  Matrix v(2, 3);
  v << 0, 1, 0, 0, 0, 1;
  const ConvexBody tri(Simplex{v});
  CHECK(log_volume(tri) == doctest::Approx(std::log(0.5)));
  CHECK(tri.contains(Vector::Constant(2, 0.25)));
  CHECK_FALSE(tri.contains(Vector::Constant(2, 0.75)));

  const ConvexBody poly = square_polytope(1.0);
  CHECK_FALSE(poly.has_analytic_volume());
  CHECK_THROWS_AS((void)log_volume(poly), UnsupportedOperation);
  const VolumeEstimate est = volume(poly, RandomStream(3), 100000);
  CHECK_FALSE(est.analytic);
  CHECK(std::abs(est.value - 4.0) <= 3.0 * est.std_error + 1e-12);

  Matrix v_flat(2, 3);
  v_flat << 0, 1, 2, 0, 1, 2;
  CHECK_THROWS_AS(ConvexBody(Simplex{v_flat}), InvalidParameter);
}

TEST_CASE("uniform draws land inside") {
  Rng rng(11, 0);
  Matrix v(3, 4);
  v << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  Matrix shape(2, 2);
  shape << 2, 0.5, 0, 1;
  const std::vector<ConvexBody> bodies = {
      ConvexBody(Ball{Vector::Ones(3), 2.0}),
      ConvexBody(Box{-Vector::Ones(3), Vector::Ones(3)}),
      ConvexBody(Simplex{v}),
      ConvexBody(Ellipsoid{Vector::Zero(2), shape}),
      square_polytope(0.5),
  };
  for (const auto& body : bodies) {
    CAPTURE(body.kind());
    for (int i = 0; i < 2000; ++i) REQUIRE(body.contains(sample_uniform(body, rng), 1e-9));
  }
}

TEST_CASE("uniform mean of the unit square") {
  const ConvexBody square(Box{Vector::Zero(2), Vector::Ones(2)});
  Rng rng(12, 0);
  const int m = 100000;
  Vector sum = Vector::Zero(2);
  for (int i = 0; i < m; ++i) sum += sample_uniform(square, rng);
  const double se = std::sqrt(1.0 / 12.0 / m);
  CHECK(std::abs(sum(0) / m - 0.5) <= 3.0 * se);
  CHECK(std::abs(sum(1) / m - 0.5) <= 3.0 * se);
}

TEST_CASE("hit-and-run mean is the center") {
  Matrix normals(4, 2);
  normals << 1, 0, -1, 0, 0, 1, 0, -1;
  Vector offsets(4);
  offsets << 3, -1, 1, 1;  // [1, 3] x [-1, 1]
  const ConvexBody body(HPolytope{normals, offsets});
  HitAndRunSampler sampler(body, Rng(2, 0));
  Vector sum = Vector::Zero(2);
  const int m = 20000;
  for (int i = 0; i < m; ++i) {
    const Vector x = sampler.next();
    REQUIRE(body.contains(x, 1e-9));
    sum += x;
  }
  CHECK(sum(0) / m == doctest::Approx(2.0).epsilon(0.02));
  CHECK(std::abs(sum(1) / m) < 0.04);
  CHECK(body.contains(polytope_interior_point(std::get<HPolytope>(body.shape()))));
}

TEST_CASE("infeasible polytope") {
  Matrix normals(2, 1);
  normals << 1, -1;
  Vector offsets(2);
  offsets << -1, -1;  // x <= -1 and x >= 1
  const ConvexBody empty(HPolytope{normals, offsets});
  Rng rng(1, 0);
  CHECK_THROWS_AS((void)sample_uniform(empty, rng), InfeasibleBody);
  CHECK_THROWS_AS((void)volume(empty), InfeasibleBody);
}

TEST_CASE("Minkowski sums and images") {
  const ConvexBody b1(Ball{Vector::Zero(2), 1.0});
  const ConvexBody b2(Ball{Vector::Ones(2), 2.0});
  const ConvexBody s = minkowski_sum(b1, b2);
  CHECK(std::get<Ball>(s.shape()).radius == doctest::Approx(3.0));
  CHECK(log_volume(s) == doctest::Approx(std::log(9.0 * oracle::kPi)));

  const ConvexBody c1(Box{Vector::Zero(2), Vector::Ones(2)});
  const ConvexBody c2(Box{Vector::Zero(2), Vector::Constant(2, 3.0)});
  CHECK(log_volume(minkowski_sum(c1, c2)) == doctest::Approx(2.0 * std::log(4.0)));
  CHECK_THROWS_AS(minkowski_sum(c1, b1), UnsupportedOperation);
  CHECK_THROWS_AS(minkowski_sum(c1, ConvexBody(Box{Vector::Zero(3), Vector::Ones(3)})), InvalidParameter);

  Matrix a(2, 2);
  a << 2, 1, 0, 3;
  const AffineMap map(a, Vector::Zero(2));
  CHECK(log_volume(transform(b1, map)) == doctest::Approx(log_volume(b1) + map.log_det()));
  const ConvexBody image = transform(c1, map);
  CHECK(image.kind() == "hpolytope");
  CHECK(image.contains(map.apply(Vector::Constant(2, 0.5))));
  CHECK_FALSE(image.contains(map.apply(Vector::Constant(2, 1.5))));
}

TEST_CASE("concavity of convolutions") {
  for (int n : {1, 2, 4, 8, 16, 32}) {
    CAPTURE(n);
    CHECK(kappa_convolution(1.0 / n, 1.0 / n) == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-15));
  }
  CHECK(kappa_convolution(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(kappa_convolution(0.5, 1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(kappa_convolution(0.5, -0.25) == doctest::Approx(-0.5));
  CHECK(kappa_convolution(0.0, 0.5) == 0.0);
  CHECK(kappa_convolution(0.3, 0.7) == kappa_convolution(0.7, 0.3));
  const double k = 0.25;
  CHECK(kappa_convolution(kappa_convolution(k, k), k) == doctest::Approx(k / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(kappa_convolution(0.5, -0.5), InvalidParameter);
  CHECK_THROWS_AS(kappa_convolution(1.5, 0.5), InvalidParameter);
}
