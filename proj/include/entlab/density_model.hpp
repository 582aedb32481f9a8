#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entlab/affine_map.hpp"
#include "entlab/convex_body.hpp"
#include "entlab/linalg.hpp"
#include "entlab/rng.hpp"

namespace entlab {

enum class Family { gaussian, exponential, laplace, gamma, uniform, product, convolution };

std::string to_string(Family family);

using LogDensityFn = std::function<double(std::span<const double>)>;
using SamplerFn = std::function<void(Rng&, std::span<double>)>;

struct ConvolutionFactors;

/// A sampleable probability density on R^n.
///
/// Models are immutable values; the callables share their parameters
/// through captured shared state, so copies are cheap and thread safe.
/// All logarithms are natural and every entropy is in nats.
struct DensityModel {
  std::string name;
  Family family = Family::product;
  int dim = 0;

  /// Natural log of the density; -inf outside the support. Empty when the
  /// density has no closed form (convolutions).
  LogDensityFn log_density;
  SamplerFn sampler;

  std::optional<double> analytic_entropy;
  std::optional<double> analytic_max_density;
  std::optional<Vector> mean;
  std::optional<Matrix> covariance;
  /// Borell concavity parameter; 0 means log-concave.
  std::optional<double> kappa;
  std::optional<ConvexBody> support;

  /// When non-empty, the model is the product of these one-dimensional
  /// models along the coordinate axes (size == dim).
  std::vector<DensityModel> components;

  /// Set for sums of independent vectors (see convolve()).
  std::shared_ptr<const ConvolutionFactors> factors;

  [[nodiscard]] bool evaluable() const { return static_cast<bool>(log_density); }
  [[nodiscard]] bool log_concave() const { return kappa.has_value() && *kappa >= 0.0; }
  [[nodiscard]] bool is_product() const { return !components.empty(); }

  /// Throws UnsupportedOperation when the density is not evaluable.
  [[nodiscard]] double log_density_at(std::span<const double> x) const;
  [[nodiscard]] double log_density_at(const Vector& x) const { return log_density_at(as_span(x)); }

  void sample(Rng& rng, std::span<double> out) const { sampler(rng, out); }
  [[nodiscard]] Vector sample(Rng& rng) const;
};

struct ConvolutionFactors {
  DensityModel left;
  DensityModel right;
};

/// Law of X + Y for independent X ~ left and Y ~ right.
///
/// The sum carries a sampler but never a closed-form log-density; density
/// values come from estimate_convolution_density(). Exact scalar facts
/// (means and covariances add; Gaussian sums stay Gaussian) are recorded.
class ConvolutionModel {
 public:
  explicit ConvolutionModel(DensityModel sum);

  [[nodiscard]] const DensityModel& left() const { return model_.factors->left; }
  [[nodiscard]] const DensityModel& right() const { return model_.factors->right; }
  [[nodiscard]] const DensityModel& model() const { return model_; }
  [[nodiscard]] int dim() const { return model_.dim; }
  [[nodiscard]] std::optional<double> kappa() const { return model_.kappa; }

 private:
  DensityModel model_;
};

/// True for Gaussian models and for sums whose factors are all Gaussian.
bool is_gaussian(const DensityModel& model);

DensityModel make_gaussian(const Vector& mean, const Matrix& covariance);
DensityModel make_gaussian(int dim, const Matrix& covariance);
DensityModel make_standard_gaussian(int dim);

/// Exponential with the given rate on [0, inf).
DensityModel make_exponential(double rate = 1.0);
/// Laplace with location 0 and the given scale.
DensityModel make_laplace(double scale = 1.0);
/// Gamma(shape, scale); shape >= 1 keeps it log-concave.
DensityModel make_gamma(double shape, double scale = 1.0);
/// Uniform on [lower, upper].
DensityModel make_uniform_interval(double lower = 0.0, double upper = 1.0);

/// Product of one-dimensional factors. Products of Gaussians become a
/// diagonal Gaussian; products of uniforms become the uniform law on the box.
DensityModel make_product(const std::vector<DensityModel>& factors);
DensityModel make_power(const DensityModel& factor, int copies);

/// Law of map(X). Entropy shifts by log|det|, the max density divides by
/// |det|, kappa is preserved.
DensityModel affine_image(const DensityModel& model, const AffineMap& map);

/// Law of X + Y for independent X, Y of equal dimension.
ConvolutionModel convolve(const DensityModel& left, const DensityModel& right);

/// Uniform law on a body with analytic volume; kappa = 1/n.
DensityModel uniform_body_model(const ConvexBody& body);

struct MaxDensityResult {
  double value = 0.0;
  bool analytic = false;
  bool converged = true;
  int iterations = 0;
  Vector argmax;
};

/// ||f||_inf. Uses the analytic value when present, otherwise maximizes
/// log_density with a Nelder-Mead search from the mean (relative tolerance
/// 1e-8 on log f). The numerical result is a value of f at a point, hence
/// a lower bound on the supremum.
MaxDensityResult max_density(const DensityModel& model, int opt_budget = 20000);

}  // namespace entlab
