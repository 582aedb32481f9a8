#include "entlab/density_model.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "entlab/concavity.hpp"
#include "entlab/error.hpp"

namespace entlab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

DensityModel one_dim(std::string name, Family family) {
  DensityModel m;
  m.name = std::move(name);
  m.family = family;
  m.dim = 1;
  return m;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::gaussian:
      return "gaussian";
    case Family::exponential:
      return "exponential";
    case Family::laplace:
      return "laplace";
    case Family::gamma:
      return "gamma";
    case Family::uniform:
      return "uniform";
    case Family::product:
      return "product";
    case Family::convolution:
      return "convolution";
  }
  return "unknown";
}

double DensityModel::log_density_at(std::span<const double> x) const {
  if (!log_density) throw UnsupportedOperation("log_density: " + name + " has no closed-form density");
  if (static_cast<int>(x.size()) != dim) throw InvalidParameter("log_density: dimension mismatch");
  return log_density(x);
}

Vector DensityModel::sample(Rng& rng) const {
  Vector x(dim);
  sampler(rng, as_span(x));
  return x;
}

ConvolutionModel::ConvolutionModel(DensityModel sum) : model_(std::move(sum)) {
  if (!model_.factors) throw InvalidParameter("ConvolutionModel: model has no factors");
}

bool is_gaussian(const DensityModel& model) {
  if (model.factors) return is_gaussian(model.factors->left) && is_gaussian(model.factors->right);
  return model.family == Family::gaussian;
}

DensityModel make_gaussian(const Vector& mean, const Matrix& covariance) {
  const auto n = mean.size();
  if (n == 0 || covariance.rows() != n || covariance.cols() != n)
    throw InvalidParameter("gaussian: covariance must be n x n");
  if (!covariance.allFinite()) throw InvalidParameter("gaussian: non-finite covariance");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidParameter("gaussian: covariance must be symmetric");
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) throw InvalidParameter("gaussian: covariance must be positive definite");

  struct State {
    Vector mean;
    Matrix chol;
    bool diagonal;
    double log_norm;
  };
  auto state = std::make_shared<State>();
  state->mean = mean;
  state->chol = llt.matrixL();
  state->diagonal = is_diagonal(covariance);
  double half_log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = state->chol(i, i);
    if (!(d > 0.0)) throw InvalidParameter("gaussian: covariance must be positive definite");
    half_log_det += std::log(d);
  }
  state->log_norm = -0.5 * static_cast<double>(n) * kLog2Pi - half_log_det;

  DensityModel m;
  m.name = "gaussian(" + std::to_string(n) + ")";
  m.family = Family::gaussian;
  m.dim = static_cast<int>(n);
  m.log_density = [state](std::span<const double> x) {
    const auto k = static_cast<Eigen::Index>(x.size());
    if (state->diagonal) {
      double q = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double z = (x[static_cast<std::size_t>(i)] - state->mean(i)) / state->chol(i, i);
        q += z * z;
      }
      return state->log_norm - 0.5 * q;
    }
    Vector z = as_vector(x) - state->mean;
    state->chol.triangularView<Eigen::Lower>().solveInPlace(z);
    return state->log_norm - 0.5 * z.squaredNorm();
  };
  m.sampler = [state](Rng& rng, std::span<double> out) {
    const auto k = static_cast<Eigen::Index>(out.size());
    Vector z(k);
    for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
    if (state->diagonal) {
      for (Eigen::Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = state->mean(i) + state->chol(i, i) * z(i);
    } else {
      as_vector(out) = state->mean + state->chol.triangularView<Eigen::Lower>() * z;
    }
  };
  m.analytic_entropy = 0.5 * static_cast<double>(n) * (kLog2Pi + 1.0) + half_log_det;
  m.analytic_max_density = std::exp(state->log_norm);
  m.mean = mean;
  m.covariance = covariance;
  m.kappa = 0.0;
  if (n > 1 && state->diagonal) {
    for (Eigen::Index i = 0; i < n; ++i)
      m.components.push_back(make_gaussian(mean.segment(i, 1), covariance.block(i, i, 1, 1)));
  }
  return m;
}

DensityModel make_gaussian(int dim, const Matrix& covariance) {
  if (dim < 1) throw InvalidParameter("gaussian: dimension must be positive");
  return make_gaussian(Vector::Zero(dim), covariance);
}

DensityModel make_standard_gaussian(int dim) {
  if (dim < 1) throw InvalidParameter("gaussian: dimension must be positive");
  return make_gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

DensityModel make_exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidParameter("exponential: rate must be positive");
  auto m = one_dim("exponential(" + format_number(rate) + ")", Family::exponential);
  const double log_rate = std::log(rate);
  m.log_density = [rate, log_rate](std::span<const double> x) { return x[0] < 0.0 ? kNegInf : log_rate - rate * x[0]; };
  m.sampler = [rate](Rng& rng, std::span<double> out) { out[0] = rng.exponential() / rate; };
  m.analytic_entropy = 1.0 - log_rate;
  m.analytic_max_density = rate;
  m.mean = Vector::Constant(1, 1.0 / rate);
  m.covariance = Matrix::Constant(1, 1, 1.0 / (rate * rate));
  m.kappa = 0.0;
  return m;
}

DensityModel make_laplace(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidParameter("laplace: scale must be positive");
  auto m = one_dim("laplace(" + format_number(scale) + ")", Family::laplace);
  const double log_norm = -std::log(2.0 * scale);
  m.log_density = [scale, log_norm](std::span<const double> x) { return log_norm - std::abs(x[0]) / scale; };
  m.sampler = [scale](Rng& rng, std::span<double> out) {
    const double e = rng.exponential() * scale;
    out[0] = rng.uniform() < 0.5 ? -e : e;
  };
  m.analytic_entropy = 1.0 + std::log(2.0 * scale);
  m.analytic_max_density = 1.0 / (2.0 * scale);
  m.mean = Vector::Zero(1);
  m.covariance = Matrix::Constant(1, 1, 2.0 * scale * scale);
  m.kappa = 0.0;
  return m;
}

DensityModel make_gamma(double shape, double scale) {
  if (!(shape >= 1.0) || !std::isfinite(shape)) throw InvalidParameter("gamma: shape must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidParameter("gamma: scale must be positive");
  auto m = one_dim("gamma(" + format_number(shape) + "," + format_number(scale) + ")", Family::gamma);
  const double log_norm = -std::lgamma(shape) - shape * std::log(scale);
  auto log_f = [shape, scale, log_norm](double x) {
    if (x < 0.0) return kNegInf;
    if (x == 0.0) return shape == 1.0 ? log_norm : kNegInf;
    return (shape - 1.0) * std::log(x) - x / scale + log_norm;
  };
  m.log_density = [log_f](std::span<const double> x) { return log_f(x[0]); };
  m.sampler = [shape, scale](Rng& rng, std::span<double> out) { out[0] = scale * rng.gamma(shape); };
  m.analytic_entropy = shape + std::log(scale) + std::lgamma(shape) + (1.0 - shape) * boost::math::digamma(shape);
  m.analytic_max_density = std::exp(log_f((shape - 1.0) * scale));
  m.mean = Vector::Constant(1, shape * scale);
  m.covariance = Matrix::Constant(1, 1, shape * scale * scale);
  m.kappa = 0.0;
  return m;
}

DensityModel make_uniform_interval(double lower, double upper) {
  return uniform_body_model(ConvexBody(Box{Vector::Constant(1, lower), Vector::Constant(1, upper)}));
}

DensityModel uniform_body_model(const ConvexBody& body) {
  if (!body.has_analytic_volume())
    throw UnsupportedOperation("uniform_body_model: " + body.kind() + " volume is Monte Carlo only");
  const int n = body.dim();
  const double log_vol = log_volume(body);

  DensityModel m;
  m.name = "uniform(" + body.kind() + "," + std::to_string(n) + ")";
  m.family = Family::uniform;
  m.dim = n;
  m.log_density = [body, log_vol](std::span<const double> x) { return body.contains(x) ? -log_vol : kNegInf; };
  m.sampler = [body](Rng& rng, std::span<double> out) { sample_uniform(body, rng, out); };
  m.analytic_entropy = log_vol;
  m.analytic_max_density = std::exp(-log_vol);
  m.kappa = 1.0 / n;
  m.support = body;

  const double nd = n;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          m.mean = s.center;
          m.covariance = Matrix::Identity(n, n) * (s.radius * s.radius / (nd + 2.0));
        } else if constexpr (std::is_same_v<T, Box>) {
          m.mean = 0.5 * (s.lower + s.upper);
          const Vector width = s.upper - s.lower;
          m.covariance = Matrix(width.cwiseProduct(width).asDiagonal()) / 12.0;
          if (n > 1) {
            for (int i = 0; i < n; ++i) m.components.push_back(make_uniform_interval(s.lower(i), s.upper(i)));
          }
        } else if constexpr (std::is_same_v<T, Simplex>) {
          const Vector total = s.vertices.rowwise().sum();
          m.mean = total / (nd + 1.0);
          const Matrix second =
              (s.vertices * s.vertices.transpose() + total * total.transpose()) / ((nd + 1.0) * (nd + 2.0));
          m.covariance = second - *m.mean * m.mean->transpose();
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          m.mean = s.center;
          m.covariance = s.shape * s.shape.transpose() / (nd + 2.0);
        }
      },
      body.shape());
  return m;
}

DensityModel make_product(const std::vector<DensityModel>& factors) {
  if (factors.empty()) throw InvalidParameter("make_product: empty factor list");
  for (const auto& f : factors)
    if (f.dim != 1) throw InvalidParameter("make_product: every factor must be one-dimensional");
  const int n = static_cast<int>(factors.size());

  const bool all_gaussian = std::all_of(factors.begin(), factors.end(), [](const DensityModel& f) {
    return f.family == Family::gaussian && !f.factors && f.mean && f.covariance;
  });
  if (all_gaussian) {
    Vector mean(n), var(n);
    for (int i = 0; i < n; ++i) {
      mean(i) = (*factors[static_cast<std::size_t>(i)].mean)(0);
      var(i) = (*factors[static_cast<std::size_t>(i)].covariance)(0, 0);
    }
    return make_gaussian(mean, Matrix(var.asDiagonal()));
  }
  const bool all_box_uniform = std::all_of(factors.begin(), factors.end(), [](const DensityModel& f) {
    return f.family == Family::uniform && f.support && std::holds_alternative<Box>(f.support->shape());
  });
  if (all_box_uniform) {
    Vector lower(n), upper(n);
    for (int i = 0; i < n; ++i) {
      const auto& box = std::get<Box>(factors[static_cast<std::size_t>(i)].support->shape());
      lower(i) = box.lower(0);
      upper(i) = box.upper(0);
    }
    return uniform_body_model(ConvexBody(Box{lower, upper}));
  }
  if (n == 1) return factors.front();

  DensityModel m;
  const bool same_name = std::all_of(factors.begin(), factors.end(),
                                     [&](const DensityModel& f) { return f.name == factors.front().name; });
  if (same_name) {
    m.name = factors.front().name + "^" + std::to_string(n);
  } else {
    m.name = "product(";
    for (std::size_t i = 0; i < factors.size(); ++i) m.name += (i ? "," : "") + factors[i].name;
    m.name += ")";
  }
  m.family = Family::product;
  m.dim = n;
  m.components = factors;

  auto parts = std::make_shared<const std::vector<DensityModel>>(factors);
  const bool evaluable =
      std::all_of(factors.begin(), factors.end(), [](const DensityModel& f) { return f.evaluable(); });
  if (evaluable) {
    m.log_density = [parts](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < parts->size(); ++i) {
        s += (*parts)[i].log_density(x.subspan(i, 1));
        if (s == kNegInf) break;
      }
      return s;
    };
  }
  m.sampler = [parts](Rng& rng, std::span<double> out) {
    for (std::size_t i = 0; i < parts->size(); ++i) (*parts)[i].sampler(rng, out.subspan(i, 1));
  };

  auto all = [&](auto pred) { return std::all_of(factors.begin(), factors.end(), pred); };
  if (all([](const DensityModel& f) { return f.analytic_entropy.has_value(); })) {
    double h = 0.0;
    for (const auto& f : factors) h += *f.analytic_entropy;
    m.analytic_entropy = h;
  }
  if (all([](const DensityModel& f) { return f.analytic_max_density.has_value(); })) {
    double log_max = 0.0;
    for (const auto& f : factors) log_max += std::log(*f.analytic_max_density);
    m.analytic_max_density = std::exp(log_max);
  }
  if (all([](const DensityModel& f) { return f.mean && f.covariance; })) {
    Vector mean(n), var(n);
    for (int i = 0; i < n; ++i) {
      mean(i) = (*factors[static_cast<std::size_t>(i)].mean)(0);
      var(i) = (*factors[static_cast<std::size_t>(i)].covariance)(0, 0);
    }
    m.mean = mean;
    m.covariance = Matrix(var.asDiagonal());
  }
  if (all([](const DensityModel& f) { return f.kappa && *f.kappa >= 0.0; })) m.kappa = 0.0;
  if (all([](const DensityModel& f) { return f.support && std::holds_alternative<Box>(f.support->shape()); })) {
    Vector lower(n), upper(n);
    for (int i = 0; i < n; ++i) {
      const auto& box = std::get<Box>(factors[static_cast<std::size_t>(i)].support->shape());
      lower(i) = box.lower(0);
      upper(i) = box.upper(0);
    }
    m.support = ConvexBody(Box{lower, upper});
  }
  return m;
}

DensityModel make_power(const DensityModel& factor, int copies) {
  if (copies < 1) throw InvalidParameter("make_power: copies must be positive");
  return make_product(std::vector<DensityModel>(static_cast<std::size_t>(copies), factor));
}

DensityModel affine_image(const DensityModel& model, const AffineMap& map) {
  if (map.dim() != model.dim) throw InvalidParameter("affine_image: dimension mismatch");

  if (model.factors) {
    const AffineMap linear_only(map.linear(), Vector::Zero(map.dim()));
    DensityModel sum =
        convolve(affine_image(model.factors->left, map), affine_image(model.factors->right, linear_only)).model();
    sum.name = "affine(" + model.name + ")";
    return sum;
  }

  DensityModel m;
  m.name = "affine(" + model.name + ")";
  m.family = model.family;
  m.dim = model.dim;
  const double log_det = map.log_det();

  if (model.log_density) {
    auto base = model.log_density;
    m.log_density = [base, map, log_det](std::span<const double> y) {
      Vector x(static_cast<Eigen::Index>(y.size()));
      map.apply_inverse(y, as_span(x));
      return base(as_span(x)) - log_det;
    };
  }
  auto base_sampler = model.sampler;
  m.sampler = [base_sampler, map](Rng& rng, std::span<double> out) {
    Vector x(static_cast<Eigen::Index>(out.size()));
    base_sampler(rng, as_span(x));
    map.apply(as_span(x), out);
  };

  if (model.analytic_entropy) m.analytic_entropy = *model.analytic_entropy + log_det;
  if (model.analytic_max_density) m.analytic_max_density = *model.analytic_max_density * std::exp(-log_det);
  if (model.mean) m.mean = map.apply(*model.mean);
  if (model.covariance) {
    Matrix cov = map.linear() * *model.covariance * map.linear().transpose();
    m.covariance = 0.5 * (cov + cov.transpose());
  }
  m.kappa = model.kappa;
  if (model.support) m.support = transform(*model.support, map);

  if (map.diagonal() && model.is_product()) {
    for (int i = 0; i < model.dim; ++i) {
      const AffineMap axis(map.linear().block(i, i, 1, 1), map.shift().segment(i, 1));
      m.components.push_back(affine_image(model.components[static_cast<std::size_t>(i)], axis));
    }
  } else if (model.family == Family::gaussian && m.dim > 1 && m.mean && m.covariance && is_diagonal(*m.covariance)) {
    for (int i = 0; i < m.dim; ++i)
      m.components.push_back(make_gaussian(m.mean->segment(i, 1), m.covariance->block(i, i, 1, 1)));
  }
  return m;
}

ConvolutionModel convolve(const DensityModel& left, const DensityModel& right) {
  if (left.dim != right.dim) throw InvalidParameter("convolve: dimension mismatch");
  const int n = left.dim;

  DensityModel m;
  m.name = left.name + " * " + right.name;
  m.family = Family::convolution;
  m.dim = n;
  m.factors = std::make_shared<const ConvolutionFactors>(ConvolutionFactors{left, right});
  auto factors = m.factors;
  m.sampler = [factors](Rng& rng, std::span<double> out) {
    Vector y(static_cast<Eigen::Index>(out.size()));
    factors->left.sampler(rng, out);
    factors->right.sampler(rng, as_span(y));
    as_vector(out) += y;
  };

  if (left.kappa && right.kappa) {
    const double k1 = *left.kappa, k2 = *right.kappa;
    if (k1 > 0.0 && k2 > 0.0)
      m.kappa = kappa_convolution(k1, k2);
    else if (k1 >= 0.0 && k2 >= 0.0)
      m.kappa = 0.0;
  }
  if (left.mean && right.mean) m.mean = *left.mean + *right.mean;
  if (left.covariance && right.covariance) m.covariance = *left.covariance + *right.covariance;

  if (is_gaussian(left) && is_gaussian(right) && m.covariance) {
    Eigen::LLT<Matrix> llt(*m.covariance);
    if (llt.info() == Eigen::Success) {
      const Matrix l = llt.matrixL();
      const double half_log_det = l.diagonal().array().log().sum();
      m.analytic_entropy = 0.5 * n * (kLog2Pi + 1.0) + half_log_det;
      m.analytic_max_density = std::exp(-0.5 * n * kLog2Pi - half_log_det);
    }
  }

  if (left.support && right.support) {
    try {
      m.support = minkowski_sum(*left.support, *right.support);
    } catch (const UnsupportedOperation&) {
    }
  }

  if (n > 1 && left.is_product() && right.is_product()) {
    for (int i = 0; i < n; ++i)
      m.components.push_back(
          convolve(left.components[static_cast<std::size_t>(i)], right.components[static_cast<std::size_t>(i)])
              .model());
  }
  return ConvolutionModel(std::move(m));
}

MaxDensityResult max_density(const DensityModel& model, int opt_budget) {
  MaxDensityResult result;
  if (model.analytic_max_density) {
    result.value = *model.analytic_max_density;
    result.analytic = true;
    if (model.mean) result.argmax = *model.mean;
    return result;
  }
  if (!model.log_concave())
    throw UnsupportedOperation("max_density: numerical mode search requires a log-concave model");
  if (!model.evaluable()) throw UnsupportedOperation("max_density: " + model.name + " has no evaluable density");

  const int n = model.dim;
  Vector start;
  Vector step = Vector::Ones(n);
  if (model.mean) {
    start = *model.mean;
  } else {
    Rng rng = RandomStream(0x6d6f6465ull).engine();
    const int draws = 1000;
    Matrix xs(n, draws);
    for (int j = 0; j < draws; ++j) xs.col(j) = model.sample(rng);
    start = xs.rowwise().mean();
    step = ((xs.colwise() - start).cwiseAbs2().rowwise().mean()).cwiseSqrt();
  }
  if (model.covariance) step = model.covariance->diagonal().cwiseSqrt();
  step = step.cwiseMax(1e-6);

  auto objective = [&](const Vector& x) {
    const double v = model.log_density(as_span(x));
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };

  // Nelder-Mead on -log f; one restart around the best vertex guards
  // against a collapsed simplex.
  std::vector<Vector> simplex;
  std::vector<double> values;
  int evaluations = 0;
  bool converged = false;
  Vector best = start;
  double best_value = objective(start);
  for (int restart = 0; restart < 2; ++restart) {
    simplex.assign(1, best);
    values.assign(1, best_value);
    for (int i = 0; i < n; ++i) {
      Vector v = best;
      v(i) += step(i);
      simplex.push_back(v);
      values.push_back(objective(v));
    }
    evaluations += n + 1;
    converged = false;
    while (evaluations < opt_budget) {
      std::vector<std::size_t> order(simplex.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      std::vector<Vector> s2;
      std::vector<double> v2;
      for (auto i : order) {
        s2.push_back(simplex[i]);
        v2.push_back(values[i]);
      }
      simplex.swap(s2);
      values.swap(v2);

      const double lo = values.front(), hi = values.back();
      if (std::isfinite(hi) && std::abs(hi - lo) <= 1e-8 * std::max(1.0, std::abs(lo))) {
        converged = true;
        break;
      }
      Vector centroid = Vector::Zero(n);
      for (int i = 0; i < n; ++i) centroid += simplex[static_cast<std::size_t>(i)];
      centroid /= n;
      const Vector& worst = simplex.back();
      const Vector reflected = centroid + (centroid - worst);
      const double fr = objective(reflected);
      ++evaluations;
      if (fr < values.front()) {
        const Vector expanded = centroid + 2.0 * (centroid - worst);
        const double fe = objective(expanded);
        ++evaluations;
        if (fe < fr) {
          simplex.back() = expanded;
          values.back() = fe;
        } else {
          simplex.back() = reflected;
          values.back() = fr;
        }
      } else if (fr < values[values.size() - 2]) {
        simplex.back() = reflected;
        values.back() = fr;
      } else {
        const bool outside = fr < values.back();
        const Vector contracted =
            outside ? Vector(centroid + 0.5 * (reflected - centroid)) : Vector(centroid + 0.5 * (worst - centroid));
        const double fc = objective(contracted);
        ++evaluations;
        if (fc < std::min(fr, values.back())) {
          simplex.back() = contracted;
          values.back() = fc;
        } else {
          for (std::size_t i = 1; i < simplex.size(); ++i) {
            simplex[i] = simplex.front() + 0.5 * (simplex[i] - simplex.front());
            values[i] = objective(simplex[i]);
          }
          evaluations += n;
        }
      }
    }
    const auto it = std::min_element(values.begin(), values.end());
    if (*it <= best_value) {
      best_value = *it;
      best = simplex[static_cast<std::size_t>(it - values.begin())];
    }
    step *= 0.1;
  }

  result.value = std::exp(-best_value);
  result.converged = converged;
  result.iterations = evaluations;
  result.argmax = best;
  return result;
}

}  // namespace entlab
