#include "entlab/positioning.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "entlab/convex_body.hpp"
#include "entlab/entropy.hpp"
#include "entlab/error.hpp"
#include "entlab/parallel.hpp"

namespace entlab {
namespace {

Vector model_center(const DensityModel& model, const RandomStream& stream, std::size_t m) {
  if (model.mean) return *model.mean;
  return moments(model, stream, m).mean;
}

BallMass finish(double mass, double se, std::size_t m, int n, BallMassMethod method) {
  BallMass out;
  out.method = method;
  out.sample_size = m;
  if (mass <= 0.0) {
    out.censored = true;
    out.mass = 1.0 / static_cast<double>(m);
    out.mass_se = 0.0;
  } else {
    out.mass = mass;
    out.mass_se = se;
  }
  out.mass_root = std::pow(out.mass, 1.0 / n);
  return out;
}

double root_se(const BallMass& b, int n) {
  if (b.censored || b.mass <= 0.0) return 0.0;
  return b.mass_root / (n * b.mass) * b.mass_se;
}

// Common-random-number evaluator for diagonal det-1 maps about `center`.
class CrnMass {
 public:
  CrnMass(const DensityModel& model, const Vector& center, const RandomStream& stream, std::size_t m,
          BallMassMethod method)
      : model_(model), center_(center), method_(method) {
    const ConvexBody ball = unit_volume_ball(model.dim);
    radius_ = std::get<Ball>(ball.shape()).radius;
    if (method_ == BallMassMethod::density_integral) {
      draws_ = Matrix(model.dim, static_cast<Eigen::Index>(m));
      for_each_chunk(m, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Rng rng = stream.engine(chunk);
        for (std::size_t i = begin; i < end; ++i) draws_.col(static_cast<Eigen::Index>(i)) = sample_uniform(ball, rng);
      });
    } else {
      draws_ = draw_samples(model, stream, m).colwise() - center;
    }
  }

  double operator()(const Vector& log_scales) const {
    const auto m = static_cast<std::size_t>(draws_.cols());
    std::vector<double> v(m);
    const Vector scales = log_scales.array().exp();
    for_each_chunk(m, [&](std::size_t, std::size_t begin, std::size_t end) {
      Vector x(draws_.rows());
      for (std::size_t i = begin; i < end; ++i) {
        const auto col = draws_.col(static_cast<Eigen::Index>(i));
        if (method_ == BallMassMethod::density_integral) {
          x = center_ + col.cwiseQuotient(scales);
          const double lf = model_.log_density(as_span(x));
          v[i] = std::isfinite(lf) ? std::exp(lf) : 0.0;
        } else {
          v[i] = col.cwiseProduct(scales).norm() <= radius_ ? 1.0 : 0.0;
        }
      }
    });
    return pairwise_sum(v) / static_cast<double>(m);
  }

 private:
  const DensityModel& model_;
  Vector center_;
  BallMassMethod method_;
  double radius_ = 0.0;
  Matrix draws_;
};

BallMassMethod resolve(const DensityModel& model, BallMassMethod method) {
  if (method == BallMassMethod::automatic)
    return model.evaluable() ? BallMassMethod::density_integral : BallMassMethod::indicator;
  if (method == BallMassMethod::density_integral && !model.evaluable())
    throw UnsupportedOperation("ball_mass: density integral needs an evaluable density");
  return method;
}

}  // namespace

std::string to_string(BallMassMethod method) {
  switch (method) {
    case BallMassMethod::automatic:
      return "automatic";
    case BallMassMethod::indicator:
      return "indicator";
    case BallMassMethod::density_integral:
      return "density_integral";
  }
  return "unknown";
}

PositionedModel normalize_max_density(const DensityModel& model) {
  const MaxDensityResult md = max_density(model);
  if (!(md.value > 0.0) || !std::isfinite(md.value))
    throw UnsupportedOperation("normalize_max_density: max density unavailable for " + model.name);
  const double lambda = std::exp(std::log(md.value) / model.dim);
  const AffineMap map = lambda == 1.0 ? AffineMap::identity(model.dim) : AffineMap::scaling(model.dim, lambda);
  DensityModel scaled = lambda == 1.0 ? model : affine_image(model, map);
  if (lambda != 1.0) scaled.name = "normalized(" + model.name + ")";
  return PositionedModel{std::move(scaled), map, false};
}

PositionedModel isotropic_det1_position(const DensityModel& model, const RandomStream& stream, std::size_t m) {
  const MomentEstimate mom = moments(model, stream, m);
  const int n = model.dim;
  const Matrix& cov = mom.covariance;
  bool regularized = mom.regularized;

  Matrix linear;
  if (is_diagonal(cov)) {
    Vector log_sd(n);
    for (int i = 0; i < n; ++i) {
      if (!(cov(i, i) > 0.0)) throw InvalidParameter("isotropic position: non-positive variance");
      log_sd(i) = 0.5 * std::log(cov(i, i));
    }
    const double log_geo = log_sd.mean();
    linear = Matrix((log_geo - log_sd.array()).exp().matrix().asDiagonal());
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
    Vector lambda = eig.eigenvalues();
    const double floor = 1e-12 * std::max(lambda.maxCoeff(), 1e-300);
    if (lambda.minCoeff() <= floor) {
      lambda = lambda.cwiseMax(floor);
      regularized = true;
    }
    const Vector log_l = lambda.array().log();
    const double mean_log = log_l.mean();
    const Vector weights = (0.5 * (mean_log - log_l.array())).exp();
    linear = eig.eigenvectors() * weights.asDiagonal() * eig.eigenvectors().transpose();
  }
  const AffineMap map(linear, -(linear * mom.mean));
  DensityModel positioned = affine_image(model, map);
  positioned.name = "isotropic(" + model.name + ")";
  return PositionedModel{std::move(positioned), map, regularized};
}

BallMass ball_mass(const DensityModel& model, const RandomStream& stream, std::size_t m, BallMassMethod method) {
  if (m < 2) throw InvalidParameter("ball_mass: need m >= 2");
  const BallMassMethod chosen = resolve(model, method);
  const int n = model.dim;
  const Vector center = model_center(model, stream.child(9), m);
  const ConvexBody ball = unit_volume_ball(n);
  const double radius = std::get<Ball>(ball.shape()).radius;

  std::vector<double> v(m);
  for_each_chunk(m, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = stream.engine(chunk);
    Vector x(n);
    for (std::size_t i = begin; i < end; ++i) {
      if (chosen == BallMassMethod::density_integral) {
        sample_uniform(ball, rng, as_span(x));
        x += center;
        const double lf = model.log_density(as_span(x));
        v[i] = std::isfinite(lf) ? std::exp(lf) : 0.0;
      } else {
        model.sampler(rng, as_span(x));
        v[i] = (x - center).norm() <= radius ? 1.0 : 0.0;
      }
    }
  });
  const auto stats = mean_and_error(v);
  return finish(stats.mean, stats.std_error, m, n, chosen);
}

PositionSearchResult m_position_search(const DensityModel& model, const RandomStream& stream, std::size_t m,
                                       int axes_iters, BallMassMethod method) {
  const int n = model.dim;
  const BallMassMethod chosen = resolve(model, method);
  const Vector center = model_center(model, stream.child(9), m);
  const BallMass start = ball_mass(model, stream.child(7), m, chosen);

  Vector log_scales = Vector::Zero(n);
  int accepted = 0;
  if (n > 1) {
    const CrnMass mass(model, center, stream.child(5), m, chosen);
    double current = mass(log_scales);
    double step = std::log(2.0);
    for (int iter = 0; iter < axes_iters; ++iter) {
      bool improved = false;
      for (int axis = 0; axis < n; ++axis) {
        for (const double sign : {1.0, -1.0}) {
          Vector trial = log_scales.array() - sign * step / (n - 1);
          trial(axis) = log_scales(axis) + sign * step;
          const double value = mass(trial);
          if (value > current) {
            current = value;
            log_scales = trial;
            improved = true;
            ++accepted;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    log_scales.array() -= log_scales.mean();
  }

  const Vector scales = log_scales.array().exp();
  const AffineMap map = AffineMap::diagonal(scales, center - scales.cwiseProduct(center));
  const DensityModel moved = n > 1 ? affine_image(model, map) : model;
  const BallMass final_mass = ball_mass(moved, stream.child(7), m, chosen);

  PositionSearchResult out{map, final_mass.mass_root, root_se(final_mass, n), start.mass_root, accepted};
  return out;
}

nlohmann::ordered_json to_json(const AffineMap& map) {
  nlohmann::ordered_json linear = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < map.linear().rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < map.linear().cols(); ++j) row.push_back(map.linear()(i, j));
    linear.push_back(std::move(row));
  }
  nlohmann::ordered_json shift = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < map.shift().size(); ++i) shift.push_back(map.shift()(i));
  nlohmann::ordered_json j;
  j["linear"] = std::move(linear);
  j["shift"] = std::move(shift);
  j["log_det"] = map.log_det();
  return j;
}

nlohmann::ordered_json positioning_report(const AffineMap& map, const BallMass& mass) {
  nlohmann::ordered_json j;
  j["map"] = to_json(map);
  j["mass"] = mass.mass;
  j["mass_se"] = mass.mass_se;
  j["mass_root"] = mass.mass_root;
  return j;
}

}  // namespace entlab
