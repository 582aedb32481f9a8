#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "entlab/affine_map.hpp"
#include "entlab/linalg.hpp"
#include "entlab/rng.hpp"

namespace entlab {

struct Ball {
  Vector center;
  double radius = 1.0;
};

/// Axis-aligned box [lower, upper].
struct Box {
  Vector lower;
  Vector upper;
};

/// Columns are the n+1 vertices of an n-simplex.
struct Simplex {
  Matrix vertices;
};

/// { center + shape * u : |u| <= 1 }.
struct Ellipsoid {
  Vector center;
  Matrix shape;
};

/// { x : normals * x <= offsets }; assumed bounded.
struct HPolytope {
  Matrix normals;
  Vector offsets;
};

class ConvexBody {
 public:
  using Shape = std::variant<Ball, Box, Simplex, Ellipsoid, HPolytope>;

  /// Validates the geometry; degenerate bodies (zero volume) are rejected.
  ConvexBody(Ball b);
  ConvexBody(Box b);
  ConvexBody(Simplex s);
  ConvexBody(Ellipsoid e);
  ConvexBody(HPolytope p);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::string kind() const;
  [[nodiscard]] bool has_analytic_volume() const { return !std::holds_alternative<HPolytope>(shape_); }

  [[nodiscard]] bool contains(std::span<const double> x, double tol = 1e-12) const;
  [[nodiscard]] bool contains(const Vector& x, double tol = 1e-12) const { return contains(as_span(x), tol); }

 private:
  struct Cache;
  void build_cache();

  Shape shape_;
  int dim_ = 0;
  std::shared_ptr<const Cache> cache_;
};

/// Euclidean ball of volume one, centered at the origin.
ConvexBody unit_volume_ball(int dim);

/// log of the volume of the unit Euclidean ball in R^n (via lgamma).
double log_unit_ball_volume(int dim);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool analytic = true;
  std::size_t sample_size = 0;
};

/// Exact for Ball/Box/Simplex/Ellipsoid. HPolytopes with dim <= 4 use
/// rejection sampling from the vertex bounding box; larger ones throw
/// UnsupportedOperation.
VolumeEstimate volume(const ConvexBody& body, const RandomStream& stream = RandomStream{}, std::size_t m = 100000);

/// log|A| for bodies with analytic volume (overflow-safe for balls).
double log_volume(const ConvexBody& body);

/// One exact uniform draw for Ball/Box/Simplex/Ellipsoid. For an HPolytope
/// a fresh hit-and-run chain is burned in for every call; use
/// HitAndRunSampler for batches.
Vector sample_uniform(const ConvexBody& body, Rng& rng);
void sample_uniform(const ConvexBody& body, Rng& rng, std::span<double> out);

struct HitAndRunOptions {
  std::size_t burn_in_per_dim = 100;
  std::size_t thinning = 10;
};

/// Hit-and-run chain on an HPolytope.
class HitAndRunSampler {
 public:
  HitAndRunSampler(const ConvexBody& body, Rng rng, HitAndRunOptions options = {});

  Vector next();
  [[nodiscard]] const Vector& state() const { return x_; }

 private:
  void step();

  Matrix normals_;
  Vector offsets_;
  Vector x_;
  Vector slack_;
  Rng rng_;
  HitAndRunOptions options_;
  std::size_t steps_ = 0;
};

/// Interior point of an HPolytope by maximizing the minimum normalized
/// slack with a subgradient search. Throws InfeasibleBody when the best
/// slack found is not positive.
Vector polytope_interior_point(const HPolytope& polytope);

/// Closed-form Minkowski sums: Ball+Ball, Box+Box, and Ellipsoid+Ball when
/// the ellipsoid is itself a ball. Anything else is UnsupportedOperation.
ConvexBody minkowski_sum(const ConvexBody& a, const ConvexBody& b);

/// Image of a body under an affine map.
ConvexBody transform(const ConvexBody& body, const AffineMap& map);

}  // namespace entlab
