#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <span>
#include <string>

#include "entlab/density_model.hpp"
#include "entlab/rng.hpp"

namespace entlab {

enum class EntropyMethod { analytic, plugin_mc, knn, convolution_mc };

std::string to_string(EntropyMethod method);

/// A differential entropy in nats with its standard error.
struct EntropyEstimate {
  double value = 0.0;
  double std_error = 0.0;
  EntropyMethod method = EntropyMethod::analytic;
  std::size_t sample_size = 0;
  std::string bias_note;
};

nlohmann::ordered_json to_json(const EntropyEstimate& estimate);

/// -log f(x); +infinity outside the support.
double information_content(const DensityModel& model, std::span<const double> x);
inline double information_content(const DensityModel& model, const Vector& x) {
  return information_content(model, as_span(x));
}

/// m iid draws, one point per column. Chunked by kChunkSize so the result
/// depends only on the stream.
Matrix draw_samples(const DensityModel& model, const RandomStream& stream, std::size_t m);

/// Unbiased Monte Carlo mean of -log f(X).
EntropyEstimate plugin_entropy(const DensityModel& model, const RandomStream& stream, std::size_t m);

/// Kozachenko-Leonenko k-nearest-neighbor estimate
///   h = psi(m) - psi(k) + log V_n + (n/m) sum_i log rho_i,
/// rho_i the distance from point i to its k-th neighbor. The standard
/// error comes from the spread of the estimate over 5 disjoint subsamples.
/// Exact duplicates are separated by a deterministic 1e-12 * scale jitter.
EntropyEstimate knn_entropy(const Matrix& samples, int k = 5);

struct DensityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t sample_size = 0;
};

/// p(x) = E f_left(x - Y), Y ~ right (or the mirror when only the right
/// factor is evaluable).
DensityEstimate estimate_convolution_density(const ConvolutionModel& conv, std::span<const double> x,
                                             const RandomStream& stream, std::size_t m_inner);

/// -mean log p_hat(S_i) over m_outer draws S_i of the sum. The log of an
/// unbiased density estimate is biased low by about Var/(2 p^2); the bias
/// is not corrected and is noted in bias_note. A point whose first m_inner
/// inner draws all give zero is re-sampled with doubling batches up to
/// 1024 * m_inner draws; EstimationFailure if it still vanishes. Stopping
/// at the first hit biases those few points slightly upward.
EntropyEstimate convolution_entropy(const ConvolutionModel& conv, const RandomStream& stream, std::size_t m_outer,
                                    std::size_t m_inner = 256);

/// N = exp(2h/n).
double entropy_power(double h, int n);

struct EntropyOptions {
  enum class Route { automatic, plugin, knn, convolution };
  Route route = Route::automatic;
  std::size_t m = 100000;       // plug-in draws / kNN sample size
  std::size_t knn_m = 20000;    // sample size for kNN routes
  std::size_t m_outer = 20000;  // convolution plug-in outer draws
  std::size_t m_inner = 256;
  int k = 5;
  int plugin_max_dim = 4;  // convolution plug-in only up to this dim
  bool use_analytic = true;
  bool use_components = true;  // sum over independent coordinates
};

/// Entropy by the cheapest exact-enough route: analytic value, then a sum
/// over independent coordinates, then plug-in (evaluable density), then the
/// convolution plug-in (low dimension), then kNN. A convolution plug-in
/// that fails on a vanishing density estimate falls back to kNN and says so
/// in bias_note.
EntropyEstimate estimate_entropy(const DensityModel& model, const RandomStream& stream,
                                 const EntropyOptions& options = {});

struct MomentEstimate {
  Vector mean;
  Matrix covariance;
  bool analytic = false;
  bool regularized = false;
  std::size_t sample_size = 0;
};

/// Analytic moments when present, otherwise estimated from
/// max(10 n^2, 1000, m) draws with a 1e-9 diagonal ridge.
MomentEstimate moments(const DensityModel& model, const RandomStream& stream, std::size_t m = 0);

/// D(f) = h(g) - h(f), g the Gaussian with the model's mean and covariance.
EntropyEstimate relative_entropy_to_gaussian(const DensityModel& model, const RandomStream& stream, std::size_t m,
                                             const EntropyOptions& options = {});

/// D(f || U_A) = log|A| - h(X). Throws InvalidParameter when a draw falls
/// outside the body.
EntropyEstimate relative_entropy_to_uniform(const DensityModel& model, const ConvexBody& body,
                                            const RandomStream& stream, const EntropyOptions& options = {});

}  // namespace entlab
