#include <doctest.h>

#include <cmath>
#include <vector>

#include "entlab/parallel.hpp"
#include "entlab/rng.hpp"

using namespace entlab;

namespace {

std::vector<double> draws(Rng rng, int count) {
  std::vector<double> out(count);
  for (auto& x : out) x = rng.uniform();
  return out;
}

// Sample mean within 4 standard errors of `expected`.
template <class Draw>
void check_mean(Draw draw, double expected, double variance, int m = 200000) {
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += draw();
  CHECK(std::abs(sum / m - expected) < 4.0 * std::sqrt(variance / m));
}

}  // namespace

TEST_CASE("streams are reproducible and distinct") {
  const RandomStream s(42, 7);
  CHECK(draws(s.engine(3), 16) == draws(s.engine(3), 16));
  CHECK(draws(s.engine(3), 16) != draws(s.engine(4), 16));
  CHECK(draws(s.engine(0), 16) != draws(RandomStream(42, 8).engine(0), 16));
  CHECK(draws(s.engine(0), 16) != draws(RandomStream(43, 7).engine(0), 16));
  CHECK(draws(s.child(1).engine(0), 16) != draws(s.child(2).engine(0), 16));
  CHECK(draws(s.child(1).engine(0), 16) == draws(RandomStream(42, 7).child(1).engine(0), 16));
}

TEST_CASE("uniform ranges") {
  Rng rng(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform_open();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("variate moments") {
  Rng rng(5, 1);
  check_mean([&] { return rng.uniform(); }, 0.5, 1.0 / 12.0);
  check_mean([&] { return rng.normal(); }, 0.0, 1.0);
  check_mean(
      [&] {
        const double z = rng.normal();
        return z * z;
      },
      1.0, 2.0);
  check_mean([&] { return rng.exponential(); }, 1.0, 1.0);
  check_mean([&] { return rng.gamma(2.0); }, 2.0, 2.0);
  check_mean([&] { return rng.gamma(3.5); }, 3.5, 3.5);
}

TEST_CASE("chunked loops do not depend on the worker count") {
  const RandomStream stream(9, 2);
  const std::size_t count = 5 * kChunkSize + 17;
  auto run = [&](unsigned workers) {
    set_worker_count(workers);
    std::vector<double> out(count);
    for_each_chunk(count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
      Rng rng = stream.engine(chunk);
      for (std::size_t i = begin; i < end; ++i) out[i] = rng.normal();
    });
    return out;
  };
  const auto one = run(1);
  const auto four = run(4);
  set_worker_count(1);
  CHECK(one == four);
}

TEST_CASE("pairwise summation") {
  std::vector<double> values(1000001, 0.1);
  CHECK(pairwise_sum(values) == doctest::Approx(100000.1).epsilon(1e-14));
  const auto me = mean_and_error(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(me.mean == doctest::Approx(2.5));
  CHECK(me.std_dev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(me.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}
