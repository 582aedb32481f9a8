#pragma once

// Reference values computed by numerical quadrature of closed-form
// densities. Nothing here calls into the library, so a test that compares
// against these values checks the library against an independent route.

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

inline constexpr double kPi = boost::math::constants::pi<double>();

/// -f log f with the 0 log 0 = 0 convention.
inline double neg_f_log_f(double f) { return f > 0.0 ? -f * std::log(f) : 0.0; }

/// Entropy of a 1-d density supported on [lo, hi] (finite).
inline double entropy_on(const std::function<double(double)>& f, double lo, double hi) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double x) { return neg_f_log_f(f(x)); }, lo, hi);
}

/// Entropy of a 1-d density supported on [lo, inf).
inline double entropy_from(const std::function<double(double)>& f, double lo) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double t) { return neg_f_log_f(f(lo + t)); }, 0.0,
                              std::numeric_limits<double>::infinity());
}

/// h(N(0, variance)) in one dimension, by quadrature over [-40 s, 40 s].
inline double gaussian_entropy_1d(double variance) {
  const double s = std::sqrt(variance);
  auto f = [&](double x) { return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * kPi * variance); };
  return entropy_on(f, -40.0 * s, 40.0 * s);
}

/// h(Exp(1)) = 1.
inline double exponential_entropy() {
  return entropy_from([](double x) { return std::exp(-x); }, 0.0);
}

/// h(Laplace(0, 1)) = 1 + log 2, as twice the half-line integral.
inline double laplace_entropy() {
  return 2.0 * entropy_from([](double x) { return 0.5 * std::exp(-x); }, 0.0);
}

/// h(Gamma(2, 1)) = h(Exp + Exp) = 1 + Euler's gamma.
inline double gamma2_entropy() {
  return entropy_from([](double x) { return x * std::exp(-x); }, 0.0);
}

/// h(U1 + U2) for independent Unif[0, 1]: the triangle on [0, 2], = 1/2.
inline double triangular_entropy() {
  return 2.0 * entropy_on([](double x) { return x; }, 0.0, 1.0);
}

/// N(U1 + U2) / (N(U1) + N(U2)) in one dimension; N(U) = 1.
inline double uniform_pair_epi_ratio() { return std::exp(2.0 * triangular_entropy()) / 2.0; }

/// Per-coordinate distance to the moment-matched Gaussian.
inline double exponential_gaussian_gap() { return gaussian_entropy_1d(1.0) - exponential_entropy(); }
inline double cube_gaussian_gap() { return gaussian_entropy_1d(1.0 / 12.0) - 0.0; }

/// Gaussian submodularity margin h(X+Z) + h(Y+Z) - h(X+Y+Z) - h(Z) in one
/// dimension for variances a, b, c.
inline double gaussian_submodularity_margin(double a, double b, double c) {
  return gaussian_entropy_1d(a + c) + gaussian_entropy_1d(b + c) - gaussian_entropy_1d(a + b + c) -
         gaussian_entropy_1d(c);
}

/// Radius of the volume-one ball from the classical closed forms.
inline double unit_volume_radius(int n) {
  switch (n) {
    case 1:
      return 0.5;
    case 2:
      return 1.0 / std::sqrt(kPi);
    case 3:
      return std::cbrt(3.0 / (4.0 * kPi));
    case 4:
      return std::pow(2.0 / (kPi * kPi), 0.25);
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Chi-square(n) density.
inline double chi_square_pdf(double x, int n) {
  if (x <= 0.0) return 0.0;
  const double k = 0.5 * n;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

/// P{|chi2_n / n - 1| >= 2 eps} by quadrature of the density.
inline double chi_square_two_sided_tail(int n, double eps) {
  const double lo = n * (1.0 - 2.0 * eps);
  const double hi = n * (1.0 + 2.0 * eps);
  boost::math::quadrature::exp_sinh<double> upper_integrator;
  const double upper = upper_integrator.integrate([&](double t) { return chi_square_pdf(hi + t, n); }, 0.0,
                                                  std::numeric_limits<double>::infinity());
  double lower = 0.0;
  if (lo > 0.0) {
    boost::math::quadrature::tanh_sinh<double> lower_integrator;
    lower = lower_integrator.integrate([&](double x) { return chi_square_pdf(x, n); }, 0.0, lo);
  }
  return upper + lower;
}

/// P{chi2_n <= x}.
inline double chi_square_cdf(double x, int n) {
  if (x <= 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double t) { return chi_square_pdf(t, n); }, 0.0, x);
}

/// P{|Z| <= r} for a standard normal Z.
inline double normal_interval_mass(double r) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }, -r, r, 15, 1e-14);
}

}  // namespace oracle
