#include "entlab/convex_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "entlab/error.hpp"
#include "entlab/parallel.hpp"

namespace entlab {

struct ConvexBody::Cache {
  // Simplex: base vertex and inverse edge matrix; Ellipsoid: inverse shape.
  Vector base;
  Matrix inverse;
  // HPolytope: row norms.
  Vector row_norms;
};

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw InvalidParameter(message);
}

std::optional<Ball> as_ball(const ConvexBody& body) {
  if (const auto* b = std::get_if<Ball>(&body.shape())) return *b;
  if (const auto* e = std::get_if<Ellipsoid>(&body.shape())) {
    const Matrix gram = e->shape * e->shape.transpose();
    const double scale = gram.trace() / static_cast<double>(gram.rows());
    const Matrix diff = gram - scale * Matrix::Identity(gram.rows(), gram.cols());
    if (diff.cwiseAbs().maxCoeff() <= 1e-12 * scale) return Ball{e->center, std::sqrt(scale)};
  }
  return std::nullopt;
}

void sample_unit_ball(Rng& rng, std::span<double> out) {
  double norm2 = 0.0;
  for (double& v : out) {
    v = rng.normal();
    norm2 += v * v;
  }
  const double n = static_cast<double>(out.size());
  const double radius = std::pow(rng.uniform_open(), 1.0 / n) / std::sqrt(norm2);
  for (double& v : out) v *= radius;
}

// Vertices of a bounded polytope by brute-force enumeration of n-subsets of
// constraints. Only used for dim <= 4.
std::vector<Vector> polytope_vertices(const HPolytope& p) {
  const auto rows = p.normals.rows();
  const auto n = p.normals.cols();
  std::vector<Vector> vertices;
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  if (rows < n) return vertices;
  const double tol = 1e-9 * std::max(1.0, p.offsets.cwiseAbs().maxCoeff());
  for (;;) {
    Matrix a(n, n);
    Vector b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      a.row(r) = p.normals.row(pick[static_cast<std::size_t>(r)]);
      b(r) = p.offsets(pick[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (lu.isInvertible()) {
      Vector v = lu.solve(b);
      if (((p.normals * v - p.offsets).array() <= tol).all()) vertices.push_back(std::move(v));
    }
    // next combination
    Eigen::Index k = n - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == rows - n + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Eigen::Index j = k + 1; j < n; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return vertices;
}

}  // namespace

ConvexBody::ConvexBody(Ball b) : shape_(std::move(b)) {
  const auto& ball = std::get<Ball>(shape_);
  require(ball.center.size() > 0, "ball: empty center");
  require(ball.radius > 0.0 && std::isfinite(ball.radius), "ball: radius must be positive");
  dim_ = static_cast<int>(ball.center.size());
}

ConvexBody::ConvexBody(Box b) : shape_(std::move(b)) {
  const auto& box = std::get<Box>(shape_);
  require(box.lower.size() > 0 && box.lower.size() == box.upper.size(), "box: bound sizes differ");
  require((box.upper.array() > box.lower.array()).all(), "box: upper must exceed lower");
  require(box.lower.allFinite() && box.upper.allFinite(), "box: bounds must be finite");
  dim_ = static_cast<int>(box.lower.size());
}

ConvexBody::ConvexBody(Simplex s) : shape_(std::move(s)) {
  const auto& v = std::get<Simplex>(shape_).vertices;
  require(v.rows() > 0 && v.cols() == v.rows() + 1, "simplex: need n+1 vertices in R^n");
  dim_ = static_cast<int>(v.rows());
  build_cache();
}

ConvexBody::ConvexBody(Ellipsoid e) : shape_(std::move(e)) {
  const auto& el = std::get<Ellipsoid>(shape_);
  require(el.center.size() > 0 && el.shape.rows() == el.center.size() && el.shape.cols() == el.center.size(),
          "ellipsoid: shape must be n x n");
  dim_ = static_cast<int>(el.center.size());
  build_cache();
}

ConvexBody::ConvexBody(HPolytope p) : shape_(std::move(p)) {
  const auto& poly = std::get<HPolytope>(shape_);
  require(poly.normals.rows() > 0 && poly.normals.cols() > 0, "polytope: empty constraint matrix");
  require(poly.normals.rows() == poly.offsets.size(), "polytope: normals/offsets size mismatch");
  dim_ = static_cast<int>(poly.normals.cols());
  build_cache();
}

void ConvexBody::build_cache() {
  auto cache = std::make_shared<Cache>();
  if (const auto* s = std::get_if<Simplex>(&shape_)) {
    const auto n = s->vertices.rows();
    cache->base = s->vertices.col(0);
    Matrix edges(n, n);
    for (Eigen::Index j = 0; j < n; ++j) edges.col(j) = s->vertices.col(j + 1) - cache->base;
    Eigen::FullPivLU<Matrix> lu(edges);
    require(lu.isInvertible(), "simplex: degenerate vertices");
    cache->inverse = lu.inverse();
  } else if (const auto* e = std::get_if<Ellipsoid>(&shape_)) {
    Eigen::FullPivLU<Matrix> lu(e->shape);
    require(lu.isInvertible(), "ellipsoid: singular shape matrix");
    cache->inverse = lu.inverse();
  } else if (const auto* p = std::get_if<HPolytope>(&shape_)) {
    cache->row_norms = p->normals.rowwise().norm();
    require((cache->row_norms.array() > 0.0).all(), "polytope: zero normal row");
  }
  cache_ = std::move(cache);
}

std::string ConvexBody::kind() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>)
          return "ball";
        else if constexpr (std::is_same_v<T, Box>)
          return "box";
        else if constexpr (std::is_same_v<T, Simplex>)
          return "simplex";
        else if constexpr (std::is_same_v<T, Ellipsoid>)
          return "ellipsoid";
        else
          return "hpolytope";
      },
      shape_);
}

bool ConvexBody::contains(std::span<const double> x, double tol) const {
  if (static_cast<int>(x.size()) != dim_) throw InvalidParameter("contains: dimension mismatch");
  const ConstPoint p = as_vector(x);
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return (p - s.center).norm() <= s.radius * (1.0 + tol);
        } else if constexpr (std::is_same_v<T, Box>) {
          const double slack = tol * std::max(1.0, (s.upper - s.lower).maxCoeff());
          return ((p.array() >= s.lower.array() - slack) && (p.array() <= s.upper.array() + slack)).all();
        } else if constexpr (std::is_same_v<T, Simplex>) {
          const Vector bary = cache_->inverse * (p - cache_->base);
          return (bary.array() >= -tol).all() && bary.sum() <= 1.0 + tol;
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return (cache_->inverse * (p - s.center)).norm() <= 1.0 + tol;
        } else {
          const Vector r = s.normals * p - s.offsets;
          return (r.array() <= tol * cache_->row_norms.array().max(1.0)).all();
        }
      },
      shape_);
}

double log_unit_ball_volume(int dim) {
  if (dim < 1) throw InvalidParameter("unit ball: dimension must be positive");
  const double n = dim;
  return 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
}

ConvexBody unit_volume_ball(int dim) {
  if (dim < 1) throw InvalidParameter("unit_volume_ball: dimension must be positive");
  const double radius = std::exp(-log_unit_ball_volume(dim) / dim);
  return ConvexBody(Ball{Vector::Zero(dim), radius});
}

double log_volume(const ConvexBody& body) {
  const double n = body.dim();
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return log_unit_ball_volume(body.dim()) + n * std::log(s.radius);
        } else if constexpr (std::is_same_v<T, Box>) {
          return (s.upper - s.lower).array().log().sum();
        } else if constexpr (std::is_same_v<T, Simplex>) {
          Matrix edges(s.vertices.rows(), s.vertices.rows());
          for (Eigen::Index j = 0; j < edges.cols(); ++j) edges.col(j) = s.vertices.col(j + 1) - s.vertices.col(0);
          Eigen::PartialPivLU<Matrix> lu(edges);
          double ld = 0.0;
          for (Eigen::Index i = 0; i < edges.rows(); ++i) ld += std::log(std::abs(lu.matrixLU()(i, i)));
          return ld - std::lgamma(n + 1.0);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          Eigen::PartialPivLU<Matrix> lu(s.shape);
          double ld = 0.0;
          for (Eigen::Index i = 0; i < s.shape.rows(); ++i) ld += std::log(std::abs(lu.matrixLU()(i, i)));
          return ld + log_unit_ball_volume(body.dim());
        } else {
          throw UnsupportedOperation("log_volume: polytope volume has no closed form");
        }
      },
      body.shape());
}

VolumeEstimate volume(const ConvexBody& body, const RandomStream& stream, std::size_t m) {
  const auto* poly = std::get_if<HPolytope>(&body.shape());
  if (poly == nullptr) return VolumeEstimate{std::exp(log_volume(body)), 0.0, true, 0};
  if (body.dim() > 4) throw UnsupportedOperation("volume: Monte Carlo polytope volume limited to dim <= 4");
  if (m < 2) throw InvalidParameter("volume: need at least two samples");

  const auto vertices = polytope_vertices(*poly);
  if (vertices.empty()) throw InfeasibleBody("volume: polytope has no vertices");
  Vector lo = vertices.front(), hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  if (((hi - lo).array() <= 0.0).any()) throw InfeasibleBody("volume: polytope has empty interior");
  const double box_volume = (hi - lo).prod();

  std::vector<double> inside(m);
  for_each_chunk(m, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = stream.engine(chunk);
    Vector x(body.dim());
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = rng.uniform(lo(j), hi(j));
      inside[i] = body.contains(x, 0.0) ? 1.0 : 0.0;
    }
  });
  const double p = pairwise_sum(inside) / static_cast<double>(m);
  return VolumeEstimate{box_volume * p, box_volume * std::sqrt(p * (1.0 - p) / static_cast<double>(m)), false, m};
}

void sample_uniform(const ConvexBody& body, Rng& rng, std::span<double> out) {
  if (static_cast<int>(out.size()) != body.dim()) throw InvalidParameter("sample_uniform: output size mismatch");
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          sample_unit_ball(rng, out);
          as_vector(out) = s.center + s.radius * as_vector(out);
        } else if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < out.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            out[i] = rng.uniform(s.lower(k), s.upper(k));
          }
        } else if constexpr (std::is_same_v<T, Simplex>) {
          const auto cols = s.vertices.cols();
          Vector w(cols);
          for (Eigen::Index j = 0; j < cols; ++j) w(j) = rng.exponential();
          w /= w.sum();
          as_vector(out) = s.vertices * w;
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          Vector u(s.center.size());
          sample_unit_ball(rng, as_span(u));
          as_vector(out) = s.center + s.shape * u;
        } else {
          HitAndRunSampler chain(body, Rng(rng(), rng()));
          as_vector(out) = chain.next();
        }
      },
      body.shape());
}

Vector sample_uniform(const ConvexBody& body, Rng& rng) {
  Vector x(body.dim());
  sample_uniform(body, rng, as_span(x));
  return x;
}

Vector polytope_interior_point(const HPolytope& polytope) {
  const auto rows = polytope.normals.rows();
  const auto n = polytope.normals.cols();
  const Vector norms = polytope.normals.rowwise().norm();
  if ((norms.array() <= 0.0).any()) throw InvalidParameter("polytope: zero normal row");
  const Matrix a = norms.cwiseInverse().asDiagonal() * polytope.normals;
  const Vector b = polytope.offsets.cwiseQuotient(norms);

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  Vector x = Vector::Zero(n);
  Vector best = x;
  double best_slack = -std::numeric_limits<double>::infinity();
  const int iterations = 4000 + 1000 * static_cast<int>(n);
  for (int k = 0; k < iterations; ++k) {
    const Vector slack = b - a * x;
    Eigen::Index worst = 0;
    const double g = slack.minCoeff(&worst);
    if (g > best_slack) {
      best_slack = g;
      best = x;
    }
    const double step = 0.5 * scale / std::sqrt(static_cast<double>(k) + 1.0);
    x -= step * a.row(worst).transpose();
  }
  if (!(best_slack > 1e-9 * scale) || rows == 0) throw InfeasibleBody("polytope: no interior point found");
  return best;
}

HitAndRunSampler::HitAndRunSampler(const ConvexBody& body, Rng rng, HitAndRunOptions options)
    : rng_(rng), options_(options) {
  const auto* poly = std::get_if<HPolytope>(&body.shape());
  if (poly == nullptr) throw InvalidParameter("hit-and-run: body must be an HPolytope");
  normals_ = poly->normals;
  offsets_ = poly->offsets;
  x_ = polytope_interior_point(*poly);
  slack_ = offsets_ - normals_ * x_;
  const std::size_t burn = options_.burn_in_per_dim * static_cast<std::size_t>(x_.size());
  for (std::size_t i = 0; i < burn; ++i) step();
}

void HitAndRunSampler::step() {
  const auto n = x_.size();
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = rng_.normal();
  d.normalize();
  const Vector ad = normals_ * d;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < ad.size(); ++r) {
    const double s = std::max(slack_(r), 0.0);
    if (ad(r) > 0.0)
      hi = std::min(hi, s / ad(r));
    else if (ad(r) < 0.0)
      lo = std::max(lo, s / ad(r));
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InfeasibleBody("hit-and-run: polytope is unbounded");
  const double t = rng_.uniform(lo, hi);
  x_ += t * d;
  if (++steps_ % 1024 == 0)
    slack_ = offsets_ - normals_ * x_;
  else
    slack_ -= t * ad;
}

Vector HitAndRunSampler::next() {
  for (std::size_t i = 0; i < options_.thinning; ++i) step();
  return x_;
}

ConvexBody minkowski_sum(const ConvexBody& a, const ConvexBody& b) {
  if (a.dim() != b.dim()) throw InvalidParameter("minkowski_sum: dimension mismatch");
  const auto* box_a = std::get_if<Box>(&a.shape());
  const auto* box_b = std::get_if<Box>(&b.shape());
  if (box_a != nullptr && box_b != nullptr)
    return ConvexBody(Box{box_a->lower + box_b->lower, box_a->upper + box_b->upper});
  const auto ball_a = as_ball(a);
  const auto ball_b = as_ball(b);
  if (ball_a && ball_b) return ConvexBody(Ball{ball_a->center + ball_b->center, ball_a->radius + ball_b->radius});
  throw UnsupportedOperation("minkowski_sum: no closed form for " + a.kind() + " + " + b.kind());
}

ConvexBody transform(const ConvexBody& body, const AffineMap& map) {
  if (map.dim() != body.dim()) throw InvalidParameter("transform: dimension mismatch");
  return std::visit(
      [&](const auto& s) -> ConvexBody {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return ConvexBody(Ellipsoid{map.apply(s.center), s.radius * map.linear()});
        } else if constexpr (std::is_same_v<T, Box>) {
          if (map.diagonal()) {
            const Vector p = map.apply(s.lower), q = map.apply(s.upper);
            return ConvexBody(Box{p.cwiseMin(q), p.cwiseMax(q)});
          }
          const auto n = s.lower.size();
          const Matrix& inv = map.linear_inverse();
          HPolytope poly{Matrix(2 * n, n), Vector(2 * n)};
          const Vector inv_shift = inv * map.shift();
          poly.normals.topRows(n) = inv;
          poly.normals.bottomRows(n) = -inv;
          poly.offsets.head(n) = s.upper + inv_shift;
          poly.offsets.tail(n) = -(s.lower + inv_shift);
          return ConvexBody(std::move(poly));
        } else if constexpr (std::is_same_v<T, Simplex>) {
          Matrix v = map.linear() * s.vertices;
          v.colwise() += map.shift();
          return ConvexBody(Simplex{std::move(v)});
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return ConvexBody(Ellipsoid{map.apply(s.center), map.linear() * s.shape});
        } else {
          const Matrix normals = s.normals * map.linear_inverse();
          return ConvexBody(HPolytope{normals, s.offsets + normals * map.shift()});
        }
      },
      body.shape());
}

}  // namespace entlab
