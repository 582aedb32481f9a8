#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <string>

#include "entlab/affine_map.hpp"
#include "entlab/density_model.hpp"
#include "entlab/rng.hpp"

namespace entlab {

struct PositionedModel {
  DensityModel model;
  AffineMap map;
  bool regularized = false;
};

/// Y = lambda X with lambda = ||f||_inf^{1/n}, so that ||f_Y||_inf = 1.
PositionedModel normalize_max_density(const DensityModel& model);

/// Centers the model and applies Sigma^{-1/2} / det(Sigma^{-1/2})^{1/n}:
/// a volume-preserving map after which the covariance is a multiple of
/// the identity. Uses analytic moments when available; diagonal
/// covariances give a diagonal map.
PositionedModel isotropic_det1_position(const DensityModel& model, const RandomStream& stream, std::size_t m = 0);

enum class BallMassMethod {
  automatic,         // density integral when the density is evaluable
  indicator,         // fraction of draws inside the ball
  density_integral,  // |D| * E f(c + Z), Z ~ Unif(D)
};

std::string to_string(BallMassMethod method);

/// Mass of the volume-one ball centered at the model mean.
struct BallMass {
  double mass = 0.0;
  double mass_se = 0.0;
  double mass_root = 0.0;  // mass^{1/n}
  /// True when no draw contributed: mass is then the upper bound 1/m and
  /// mass_root its n-th root.
  bool censored = false;
  BallMassMethod method = BallMassMethod::indicator;
  std::size_t sample_size = 0;
};

BallMass ball_mass(const DensityModel& model, const RandomStream& stream, std::size_t m,
                   BallMassMethod method = BallMassMethod::automatic);

struct PositionSearchResult {
  AffineMap map;           // diagonal, det 1, applied about the model mean
  double mass_root = 0.0;  // re-measured on fresh draws after the search
  double mass_root_se = 0.0;
  double start_mass_root = 0.0;
  int accepted_moves = 0;
};

/// Coordinate search over diagonal det-1 maps about the mean, maximizing the
/// unit-volume-ball mass with common random numbers. Moves scale one axis
/// by t and the others by t^{-1/(n-1)}; the step shrinks when no axis
/// improves.
PositionSearchResult m_position_search(const DensityModel& model, const RandomStream& stream, std::size_t m,
                                       int axes_iters = 8, BallMassMethod method = BallMassMethod::automatic);

/// {map: {linear, shift, log_det}, mass, mass_se, mass_root}
nlohmann::ordered_json positioning_report(const AffineMap& map, const BallMass& mass);
nlohmann::ordered_json to_json(const AffineMap& map);

}  // namespace entlab
