#include "entlab/entropy.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "entlab/error.hpp"
#include "entlab/kd_tree.hpp"
#include "entlab/parallel.hpp"

namespace entlab {
namespace {

const double kLog2PiE = std::log(2.0 * std::numbers::pi) + 1.0;

constexpr std::uint64_t kJitterSeed = 0x6a697474ull;

struct KlResult {
  double value = 0.0;
  std::size_t zero_distances = 0;
};

KlResult kozachenko_leonenko(const Matrix& points, int k) {
  const auto m = static_cast<std::size_t>(points.cols());
  const int n = static_cast<int>(points.rows());
  const KdTree tree(points);
  std::vector<double> log_rho(m);
  std::atomic<std::size_t> zeros{0};
  for_each_chunk(m, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::size_t local_zeros = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const double rho = tree.kth_neighbor_distance(i, k);
      if (rho <= 0.0) {
        ++local_zeros;
        log_rho[i] = 0.0;
      } else {
        log_rho[i] = std::log(rho);
      }
    }
    zeros += local_zeros;
  });
  KlResult out;
  out.zero_distances = zeros.load();
  const double md = static_cast<double>(m);
  out.value = boost::math::digamma(md) - boost::math::digamma(static_cast<double>(k)) + log_unit_ball_volume(n) +
              static_cast<double>(n) * pairwise_sum(log_rho) / md;
  return out;
}

struct InnerPlan {
  const DensityModel* evaluated = nullptr;
  const DensityModel* sampled = nullptr;
};

InnerPlan plan_inner(const ConvolutionModel& conv) {
  // An indicator density gives the noisiest average; evaluate the other
  // factor when both are available.
  if (conv.left().evaluable() && conv.right().evaluable() && conv.left().family == Family::uniform &&
      conv.right().family != Family::uniform)
    return {&conv.right(), &conv.left()};
  if (conv.left().evaluable()) return {&conv.left(), &conv.right()};
  if (conv.right().evaluable()) return {&conv.right(), &conv.left()};
  throw UnsupportedOperation("convolution density: neither factor of " + conv.model().name + " is evaluable");
}

struct InnerSums {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  [[nodiscard]] DensityEstimate estimate() const {
    const double md = static_cast<double>(count);
    DensityEstimate out;
    out.value = sum / md;
    out.sample_size = count;
    if (count > 1) {
      const double var = std::max(0.0, (sum_sq - md * out.value * out.value) / (md - 1.0));
      out.std_error = std::sqrt(var / md);
    }
    return out;
  }
};

void accumulate_inner(const InnerPlan& plan, std::span<const double> x, Rng& rng, std::size_t draws, InnerSums& sums) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Vector y(n);
  for (std::size_t j = 0; j < draws; ++j) {
    plan.sampled->sampler(rng, as_span(y));
    for (Eigen::Index i = 0; i < n; ++i) y(i) = x[static_cast<std::size_t>(i)] - y(i);
    const double lf = plan.evaluated->log_density(as_span(y));
    const double v = lf == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(lf);
    sums.sum += v;
    sums.sum_sq += v * v;
  }
  sums.count += draws;
}

DensityEstimate density_at(const InnerPlan& plan, std::span<const double> x, Rng& rng, std::size_t m_inner) {
  InnerSums sums;
  accumulate_inner(plan, x, rng, m_inner, sums);
  return sums.estimate();
}

// Inner sample cap, as a multiple of m_inner, for points where the first
// m_inner draws all miss the support.
constexpr std::size_t kInnerGrowth = 1024;

EntropyEstimate knn_route(const DensityModel& model, const RandomStream& stream, const EntropyOptions& options) {
  return knn_entropy(draw_samples(model, stream, options.knn_m), options.k);
}

EntropyEstimate combine_components(const DensityModel& model, const RandomStream& stream,
                                   const EntropyOptions& options) {
  EntropyEstimate out;
  double var = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < model.components.size(); ++i) {
    const EntropyEstimate part = estimate_entropy(model.components[i], stream.child(i), options);
    out.value += part.value;
    var += part.std_error * part.std_error;
    if (first) {
      out.method = part.method;
      out.sample_size = part.sample_size;
      first = false;
    } else if (part.method != out.method && out.method == EntropyMethod::analytic) {
      out.method = part.method;
      out.sample_size = part.sample_size;
    }
  }
  out.std_error = std::sqrt(var);
  out.bias_note = "sum over " + std::to_string(model.components.size()) + " independent coordinates";
  return out;
}

}  // namespace

std::string to_string(EntropyMethod method) {
  switch (method) {
    case EntropyMethod::analytic:
      return "analytic";
    case EntropyMethod::plugin_mc:
      return "plugin_mc";
    case EntropyMethod::knn:
      return "knn";
    case EntropyMethod::convolution_mc:
      return "convolution_mc";
  }
  return "unknown";
}

nlohmann::ordered_json to_json(const EntropyEstimate& e) {
  nlohmann::ordered_json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["method"] = to_string(e.method);
  j["sample_size"] = e.sample_size;
  j["bias_note"] = e.bias_note;
  return j;
}

double information_content(const DensityModel& model, std::span<const double> x) {
  const double lf = model.log_density_at(x);
  if (lf == -std::numeric_limits<double>::infinity()) return std::numeric_limits<double>::infinity();
  return -lf;
}

Matrix draw_samples(const DensityModel& model, const RandomStream& stream, std::size_t m) {
  Matrix xs(model.dim, static_cast<Eigen::Index>(m));
  for_each_chunk(m, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = stream.engine(chunk);
    for (std::size_t i = begin; i < end; ++i) {
      double* col = xs.col(static_cast<Eigen::Index>(i)).data();
      model.sampler(rng, std::span<double>(col, static_cast<std::size_t>(model.dim)));
    }
  });
  return xs;
}

EntropyEstimate plugin_entropy(const DensityModel& model, const RandomStream& stream, std::size_t m) {
  if (m < 2) throw InvalidParameter("plugin_entropy: need m >= 2");
  if (!model.evaluable()) throw UnsupportedOperation("plugin_entropy: " + model.name + " has no evaluable density");
  std::vector<double> info(m);
  std::atomic<bool> outside{false};
  for_each_chunk(m, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = stream.engine(chunk);
    Vector x(model.dim);
    for (std::size_t i = begin; i < end; ++i) {
      model.sampler(rng, as_span(x));
      const double lf = model.log_density(as_span(x));
      if (!std::isfinite(lf)) {
        outside = true;
        info[i] = 0.0;
      } else {
        info[i] = -lf;
      }
    }
  });
  if (outside) throw InternalInconsistency("plugin_entropy: " + model.name + " sampled a point of zero density");
  const auto stats = mean_and_error(info);
  return EntropyEstimate{stats.mean, stats.std_error, EntropyMethod::plugin_mc, m, ""};
}

EntropyEstimate knn_entropy(const Matrix& samples, int k) {
  const auto m = static_cast<std::size_t>(samples.cols());
  if (k < 1) throw InvalidParameter("knn_entropy: k must be positive");
  if (m <= static_cast<std::size_t>(k)) throw InvalidParameter("knn_entropy: need more samples than k");

  EntropyEstimate out;
  out.method = EntropyMethod::knn;
  out.sample_size = m;

  Matrix points = samples;
  KlResult full = kozachenko_leonenko(points, k);
  if (full.zero_distances > 0) {
    const double range = (points.rowwise().maxCoeff() - points.rowwise().minCoeff()).maxCoeff();
    const double scale = range > 0.0 ? range : 1.0;
    Rng rng = RandomStream(kJitterSeed).engine();
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      for (Eigen::Index i = 0; i < points.rows(); ++i) points(i, j) += 1e-12 * scale * rng.uniform(-1.0, 1.0);
    out.bias_note = "warning: " + std::to_string(full.zero_distances) +
                    " zero neighbor distances; deterministic jitter of 1e-12*scale applied";
    full = kozachenko_leonenko(points, k);
  }
  out.value = full.value;

  constexpr std::size_t kSplits = 5;
  const std::size_t part = m / kSplits;
  if (part <= static_cast<std::size_t>(k)) {
    out.std_error = std::numeric_limits<double>::infinity();
    if (!out.bias_note.empty()) out.bias_note += "; ";
    out.bias_note += "too few samples for subsampling error";
    return out;
  }
  std::vector<double> split_values;
  for (std::size_t s = 0; s < kSplits; ++s) {
    const Matrix block = points.middleCols(static_cast<Eigen::Index>(s * part), static_cast<Eigen::Index>(part));
    split_values.push_back(kozachenko_leonenko(block, k).value);
  }
  out.std_error = mean_and_error(split_values).std_error;
  return out;
}

DensityEstimate estimate_convolution_density(const ConvolutionModel& conv, std::span<const double> x,
                                             const RandomStream& stream, std::size_t m_inner) {
  if (static_cast<int>(x.size()) != conv.dim()) throw InvalidParameter("convolution density: dimension mismatch");
  if (m_inner < 1) throw InvalidParameter("convolution density: m_inner must be positive");
  const InnerPlan plan = plan_inner(conv);
  Rng rng = stream.engine();
  return density_at(plan, x, rng, m_inner);
}

EntropyEstimate convolution_entropy(const ConvolutionModel& conv, const RandomStream& stream, std::size_t m_outer,
                                    std::size_t m_inner) {
  if (m_outer < 2) throw InvalidParameter("convolution_entropy: need m_outer >= 2");
  if (m_inner < 1) throw InvalidParameter("convolution_entropy: m_inner must be positive");
  const InnerPlan plan = plan_inner(conv);
  const RandomStream outer = stream.child(1);
  const RandomStream inner = stream.child(2);
  const DensityModel& sum = conv.model();

  std::vector<double> info(m_outer);
  std::atomic<std::size_t> vanished{0};
  std::atomic<std::size_t> extended{0};
  for_each_chunk(m_outer, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = outer.engine(chunk);
    Vector s(sum.dim);
    for (std::size_t i = begin; i < end; ++i) {
      sum.sampler(rng, as_span(s));
      Rng inner_rng = inner.engine(i);
      InnerSums sums;
      accumulate_inner(plan, as_span(s), inner_rng, m_inner, sums);
      while (sums.sum <= 0.0 && sums.count < kInnerGrowth * m_inner)
        accumulate_inner(plan, as_span(s), inner_rng, sums.count, sums);
      if (sums.sum > 0.0) extended += sums.count > m_inner ? 1 : 0;
      const DensityEstimate p = sums.estimate();
      if (p.value > 0.0) {
        info[i] = -std::log(p.value);
      } else {
        info[i] = 0.0;
        ++vanished;
      }
    }
  });
  if (vanished > 0)
    throw EstimationFailure("convolution_entropy: density estimate vanished at " + std::to_string(vanished.load()) +
                            " sampled points of " + sum.name + "; increase m_inner (currently " +
                            std::to_string(m_inner) + ")");
  const auto stats = mean_and_error(info);
  EntropyEstimate out{stats.mean, stats.std_error, EntropyMethod::convolution_mc, m_outer, ""};
  out.bias_note = "log of Monte Carlo density estimate, bias not corrected; m_inner=" + std::to_string(m_inner);
  if (extended > 0)
    out.bias_note += "; inner sample extended at " + std::to_string(extended.load()) + " points with no initial hit";
  return out;
}

double entropy_power(double h, int n) {
  if (n < 1) throw InvalidParameter("entropy_power: dimension must be positive");
  if (!std::isfinite(h)) throw InvalidParameter("entropy_power: entropy must be finite");
  return std::exp(2.0 * h / n);
}

EntropyEstimate estimate_entropy(const DensityModel& model, const RandomStream& stream, const EntropyOptions& options) {
  using Route = EntropyOptions::Route;
  if (options.route == Route::automatic && options.use_analytic && model.analytic_entropy)
    return EntropyEstimate{*model.analytic_entropy, 0.0, EntropyMethod::analytic, 0, ""};
  if (options.use_components && model.is_product()) return combine_components(model, stream, options);

  switch (options.route) {
    case Route::plugin:
      return plugin_entropy(model, stream, options.m);
    case Route::knn:
      return knn_route(model, stream, options);
    case Route::convolution:
      if (!model.factors) throw UnsupportedOperation("estimate_entropy: " + model.name + " is not a convolution");
      return convolution_entropy(ConvolutionModel(model), stream, options.m_outer, options.m_inner);
    case Route::automatic:
      break;
  }
  if (model.evaluable()) return plugin_entropy(model, stream, options.m);
  if (model.factors && model.dim <= options.plugin_max_dim &&
      (model.factors->left.evaluable() || model.factors->right.evaluable())) {
    try {
      return convolution_entropy(ConvolutionModel(model), stream, options.m_outer, options.m_inner);
    } catch (const EstimationFailure& e) {
      EntropyEstimate out = knn_route(model, stream.child(0x6b6e6e), options);
      out.bias_note = "kNN fallback: " + std::string(e.what()) + (out.bias_note.empty() ? "" : "; " + out.bias_note);
      return out;
    }
  }
  return knn_route(model, stream, options);
}

MomentEstimate moments(const DensityModel& model, const RandomStream& stream, std::size_t m) {
  MomentEstimate out;
  if (model.mean && model.covariance) {
    out.mean = *model.mean;
    out.covariance = *model.covariance;
    out.analytic = true;
    return out;
  }
  const auto n = static_cast<std::size_t>(model.dim);
  const std::size_t count = std::max({10 * n * n, std::size_t{1000}, m});
  const Matrix xs = draw_samples(model, stream, count);
  out.mean = xs.rowwise().mean();
  const Matrix centered = xs.colwise() - out.mean;
  out.covariance = centered * centered.transpose() / static_cast<double>(count - 1);
  out.covariance.diagonal().array() += 1e-9;
  out.sample_size = count;
  Eigen::LLT<Matrix> llt(out.covariance);
  if (llt.info() != Eigen::Success) {
    const double ridge = 1e-6 * std::max(out.covariance.trace() / static_cast<double>(n), 1e-12);
    out.covariance.diagonal().array() += ridge;
    out.regularized = true;
  }
  return out;
}

EntropyEstimate relative_entropy_to_gaussian(const DensityModel& model, const RandomStream& stream, std::size_t m,
                                             const EntropyOptions& options) {
  const MomentEstimate mom = moments(model, stream.child(1), m);
  Eigen::LLT<Matrix> llt(mom.covariance);
  if (llt.info() != Eigen::Success) throw InvalidParameter("relative_entropy_to_gaussian: singular covariance");
  const Matrix l = llt.matrixL();
  const double h_gauss = 0.5 * model.dim * kLog2PiE + l.diagonal().array().log().sum();

  EntropyEstimate h;
  if (model.evaluable()) {
    h = plugin_entropy(model, stream.child(2), m);
  } else {
    EntropyOptions opts = options;
    opts.m = m;
    h = estimate_entropy(model, stream.child(2), opts);
  }
  EntropyEstimate out = h;
  out.value = h_gauss - h.value;
  std::string note = h.bias_note;
  auto append = [&](const std::string& s) { note += (note.empty() ? "" : "; ") + s; };
  if (!mom.analytic) append("covariance estimated from " + std::to_string(mom.sample_size) + " draws");
  if (mom.regularized) append("covariance regularized");
  out.bias_note = note;
  return out;
}

EntropyEstimate relative_entropy_to_uniform(const DensityModel& model, const ConvexBody& body,
                                            const RandomStream& stream, const EntropyOptions& options) {
  if (body.dim() != model.dim) throw InvalidParameter("relative_entropy_to_uniform: dimension mismatch");
  const Matrix witnesses = draw_samples(model, stream.child(1), 2000);
  for (Eigen::Index j = 0; j < witnesses.cols(); ++j) {
    const Vector x = witnesses.col(j);
    if (!body.contains(x, 1e-9))
      throw InvalidParameter("relative_entropy_to_uniform: " + model.name + " has mass outside the " + body.kind());
  }
  const VolumeEstimate vol = volume(body, stream.child(3));
  const double log_vol = body.has_analytic_volume() ? log_volume(body) : std::log(vol.value);
  const double log_vol_se = vol.analytic ? 0.0 : vol.std_error / vol.value;

  const EntropyEstimate h = estimate_entropy(model, stream.child(2), options);
  EntropyEstimate out = h;
  out.value = log_vol - h.value;
  out.std_error = std::hypot(h.std_error, log_vol_se);
  return out;
}

}  // namespace entlab
