#include "entlab/inequality.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "entlab/concavity.hpp"
#include "entlab/error.hpp"
#include "entlab/parallel.hpp"

namespace entlab {
namespace {

const double kLog2PiE = std::log(2.0 * std::numbers::pi) + 1.0;

bool is_analytic(const EntropyEstimate& e) { return e.method == EntropyMethod::analytic && e.std_error == 0.0; }

void require_log_concave(const DensityModel& model, const char* what) {
  if (!model.log_concave())
    throw UnsupportedOperation(std::string(what) + ": " + model.name + " is not known to be log-concave");
}

void require_same_dim(const DensityModel& a, const DensityModel& b, const char* what) {
  if (a.dim != b.dim)
    throw InvalidParameter(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim) + " vs " +
                           std::to_string(b.dim) + ")");
}

// Standard error of N = exp(2h/n) from that of h.
double power_se(double power, const EntropyEstimate& h, int n) { return power * 2.0 / n * h.std_error; }

nlohmann::ordered_json entropy_params(const EntropyEstimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"method", to_string(e.method)}};
}

// |h~(X)/n - h/n| for m draws, sorted.
std::vector<double> sorted_deviations(const DensityModel& model, const RandomStream& stream, std::size_t m, double h) {
  const int n = model.dim;
  std::vector<double> dev(m);
  for_each_chunk(m, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = stream.engine(chunk);
    Vector x(n);
    for (std::size_t i = begin; i < end; ++i) {
      model.sampler(rng, as_span(x));
      dev[i] = std::abs(information_content(model, x) - h) / n;
    }
  });
  std::sort(dev.begin(), dev.end());
  return dev;
}

double tail_fraction(const std::vector<double>& sorted, double eps) {
  const auto first = std::lower_bound(sorted.begin(), sorted.end(), eps);
  return static_cast<double>(sorted.end() - first) / static_cast<double>(sorted.size());
}

double binomial_se(double p, std::size_t m) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(m)); }

// P{|chi2_n / n - 1| >= 2 eps}.
double chi_square_tail(int n, double eps) {
  const boost::math::chi_squared dist(static_cast<double>(n));
  const double lo = n * (1.0 - 2.0 * eps);
  const double hi = n * (1.0 + 2.0 * eps);
  const double below = lo > 0.0 ? boost::math::cdf(dist, lo) : 0.0;
  return below + boost::math::cdf(boost::math::complement(dist, hi));
}

}  // namespace

InequalityReport make_report(std::string name, double lhs, double rhs, double lhs_se, double rhs_se,
                             nlohmann::ordered_json params, bool analytic) {
  const double slack = analytic ? kAnalyticSlack : std::max(kSigmaSlack * std::hypot(lhs_se, rhs_se), kAnalyticSlack);
  InequalityReport r = make_report_with_slack(std::move(name), lhs, rhs, slack, std::move(params));
  r.lhs_se = lhs_se;
  r.rhs_se = rhs_se;
  return r;
}

InequalityReport make_report_with_slack(std::string name, double lhs, double rhs, double slack,
                                        nlohmann::ordered_json params) {
  InequalityReport r;
  r.name = std::move(name);
  // + 0.0 turns -0.0 into +0.0 so serialized records read naturally.
  r.lhs = lhs + 0.0;
  r.rhs = rhs + 0.0;
  r.margin = rhs - lhs + 0.0;
  r.slack = slack;
  r.params = std::move(params);
  r.satisfied = recompute_satisfied(r);
  return r;
}

InequalityReport agreement_report(std::string name, double a, double a_se, double b, double b_se,
                                  nlohmann::ordered_json params, double sigmas) {
  const double se = std::hypot(a_se, b_se);
  const double slack = std::max(sigmas * se, kAnalyticSlack);
  params["estimate"] = a;
  params["reference"] = b;
  InequalityReport r = make_report_with_slack(std::move(name), std::abs(a - b), 0.0, slack, std::move(params));
  r.lhs_se = se;
  return r;
}

bool recompute_satisfied(const InequalityReport& r) { return r.rhs - r.lhs >= -r.slack; }

nlohmann::ordered_json to_json(const InequalityReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["lhs_se"] = r.lhs_se;
  j["rhs_se"] = r.rhs_se;
  j["margin"] = r.margin;
  j["slack"] = r.slack;
  j["satisfied"] = r.satisfied;
  j["params"] = r.params;
  return j;
}

InequalityReport report_from_json(const nlohmann::ordered_json& j) {
  // Non-finite numbers are written as null.
  auto number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  InequalityReport r;
  r.name = j.at("name").get<std::string>();
  r.lhs = number("lhs", std::numeric_limits<double>::quiet_NaN());
  r.rhs = number("rhs", std::numeric_limits<double>::quiet_NaN());
  r.lhs_se = number("lhs_se", 0.0);
  r.rhs_se = number("rhs_se", 0.0);
  r.margin = number("margin", std::numeric_limits<double>::quiet_NaN());
  r.slack = number("slack", 0.0);
  r.satisfied = j.at("satisfied").get<bool>();
  if (j.contains("params")) r.params = j.at("params");
  return r;
}

TwoSidedReport check_entropy_sandwich(const DensityModel& model, const RandomStream& stream,
                                      const CheckOptions& options) {
  require_log_concave(model, "entropy sandwich");
  const int n = model.dim;
  const MaxDensityResult md = max_density(model);
  const EntropyEstimate h = estimate_entropy(model, stream, options.marginal);
  const double bound = -std::log(md.value) / n;
  const double hn = h.value / n;
  const double se = h.std_error / n;
  const bool analytic = md.analytic && is_analytic(h);

  nlohmann::ordered_json params{{"model", model.name},
                                {"n", n},
                                {"entropy", entropy_params(h)},
                                {"max_density", md.value},
                                {"max_density_analytic", md.analytic}};
  return {make_report("entropy-sandwich.lower", bound, hn, 0.0, se, params, analytic),
          make_report("entropy-sandwich.upper", hn, 1.0 + bound, se, 0.0, params, analytic)};
}

ConcentrationProfile concentration_profile(const DensityModel& model, const RandomStream& stream, std::size_t m,
                                           const std::vector<double>& eps_grid, const CheckOptions& options) {
  for (double eps : eps_grid)
    if (!(eps >= 0.0 && eps <= 2.0))
      throw InvalidParameter("concentration profile: eps = " + std::to_string(eps) + " outside [0, 2]");
  if (!model.evaluable())
    throw UnsupportedOperation("concentration profile: " + model.name + " has no evaluable density");
  if (m < 2) throw InvalidParameter("concentration profile: need m >= 2");

  const EntropyEstimate h = estimate_entropy(model, stream.child(1), options.marginal);
  const std::vector<double> dev = sorted_deviations(model, stream.child(2), m, h.value);

  ConcentrationProfile p;
  p.model = model.name;
  p.n = model.dim;
  p.m = m;
  p.entropy = h.value;
  p.entropy_se = h.std_error;
  p.eps_grid = eps_grid;
  const bool oracle = model.family == Family::gaussian && is_analytic(h);
  if (oracle) p.oracle_tail.emplace();
  for (double eps : eps_grid) {
    const double tail = tail_fraction(dev, eps);
    p.empirical_tail.push_back(tail);
    p.tail_se.push_back(binomial_se(tail, m));
    p.tail_bound.push_back(4.0 * std::exp(-eps * eps * p.n / 16.0));
    if (oracle) p.oracle_tail->push_back(chi_square_tail(p.n, eps));
  }
  return p;
}

std::vector<InequalityReport> concentration_reports(const ConcentrationProfile& p) {
  std::vector<InequalityReport> out;
  for (std::size_t i = 0; i < p.eps_grid.size(); ++i) {
    nlohmann::ordered_json params{{"model", p.model}, {"n", p.n}, {"m", p.m}, {"eps", p.eps_grid[i]}};
    if (p.oracle_tail) params["oracle_tail"] = (*p.oracle_tail)[i];
    out.push_back(make_report("concentration", p.empirical_tail[i], p.tail_bound[i], p.tail_se[i], 0.0, params));
  }
  return out;
}

MassEstimate typical_set_mass(const DensityModel& model, const RandomStream& stream, std::size_t m, double eps,
                              const CheckOptions& options) {
  const ConcentrationProfile p = concentration_profile(model, stream, m, {eps}, options);
  return {1.0 - p.empirical_tail[0], p.tail_se[0]};
}

InequalityReport check_submodularity(const DensityModel& mx, const DensityModel& my, const DensityModel& mz,
                                     const RandomStream& stream, const CheckOptions& options) {
  require_same_dim(mx, my, "submodularity");
  require_same_dim(mx, mz, "submodularity");
  const DensityModel xyz = convolve(convolve(mx, my).model(), mz).model();
  const DensityModel xz = convolve(mx, mz).model();
  const DensityModel yz = convolve(my, mz).model();

  const EntropyEstimate h_xyz = estimate_entropy(xyz, stream.child(1), options.sum);
  const EntropyEstimate h_z = estimate_entropy(mz, stream.child(2), options.marginal);
  const EntropyEstimate h_xz = estimate_entropy(xz, stream.child(3), options.sum);
  const EntropyEstimate h_yz = estimate_entropy(yz, stream.child(4), options.sum);
  const bool analytic = is_analytic(h_xyz) && is_analytic(h_z) && is_analytic(h_xz) && is_analytic(h_yz);

  nlohmann::ordered_json params{{"x", mx.name},
                                {"y", my.name},
                                {"z", mz.name},
                                {"n", mx.dim},
                                {"h_xyz", entropy_params(h_xyz)},
                                {"h_z", entropy_params(h_z)},
                                {"h_xz", entropy_params(h_xz)},
                                {"h_yz", entropy_params(h_yz)}};
  return make_report("submodularity", h_xyz.value + h_z.value, h_xz.value + h_yz.value,
                     std::hypot(h_xyz.std_error, h_z.std_error), std::hypot(h_xz.std_error, h_yz.std_error),
                     std::move(params), analytic);
}

InequalityReport check_epi(const DensityModel& mx, const DensityModel& my, const RandomStream& stream,
                           const CheckOptions& options) {
  require_same_dim(mx, my, "epi");
  const int n = mx.dim;
  const EntropyEstimate hx = estimate_entropy(mx, stream.child(1), options.marginal);
  const EntropyEstimate hy = estimate_entropy(my, stream.child(2), options.marginal);
  const EntropyEstimate hs = estimate_entropy(convolve(mx, my).model(), stream.child(3), options.sum);
  const double nx = entropy_power(hx.value, n);
  const double ny = entropy_power(hy.value, n);
  const double ns = entropy_power(hs.value, n);
  const double denom_se = std::hypot(power_se(nx, hx, n), power_se(ny, hy, n));
  const double sum_se = power_se(ns, hs, n);
  const double ratio = ns / (nx + ny);
  const double ratio_se = ratio * std::hypot(sum_se / ns, denom_se / (nx + ny));

  nlohmann::ordered_json params{{"x", mx.name},
                                {"y", my.name},
                                {"n", n},
                                {"ratio", ratio},
                                {"ratio_se", ratio_se},
                                {"h_x", entropy_params(hx)},
                                {"h_y", entropy_params(hy)},
                                {"h_sum", entropy_params(hs)}};
  return make_report("epi", nx + ny, ns, denom_se, sum_se, std::move(params),
                     is_analytic(hx) && is_analytic(hy) && is_analytic(hs));
}

nlohmann::ordered_json to_json(const StageRecord& s) {
  return {{"stage", s.name}, {"value", s.value}, {"std_error", s.std_error}, {"note", s.note}};
}

ReverseEpiResult reverse_epi_pipeline(const DensityModel& mx, const DensityModel& my, const RandomStream& stream,
                                      const CheckOptions& options) {
  require_log_concave(mx, "reverse epi");
  require_log_concave(my, "reverse epi");
  require_same_dim(mx, my, "reverse epi");
  const int n = mx.dim;
  ReverseEpiResult out;
  auto stage = [&](std::string name, double value, double se = 0.0, std::string note = {}) {
    out.stages.push_back({std::move(name), value, se, std::move(note)});
  };

  const PositionedModel nx = normalize_max_density(mx);
  const PositionedModel ny = normalize_max_density(my);
  stage("normalize.x.log_det", nx.map.log_det());
  stage("normalize.y.log_det", ny.map.log_det());

  const PositionedModel px = isotropic_det1_position(nx.model, stream.child(1), options.m_cov);
  const PositionedModel py = isotropic_det1_position(ny.model, stream.child(2), options.m_cov);
  stage("position.x.log_det", px.map.log_det(), 0.0, px.regularized ? "covariance regularized" : "");
  stage("position.y.log_det", py.map.log_det(), 0.0, py.regularized ? "covariance regularized" : "");
  const DensityModel& xt = px.model;
  const DensityModel& yt = py.model;

  const EntropyEstimate hx = estimate_entropy(xt, stream.child(3), options.marginal);
  const EntropyEstimate hy = estimate_entropy(yt, stream.child(4), options.marginal);
  const EntropyEstimate hs = estimate_entropy(convolve(xt, yt).model(), stream.child(5), options.sum);
  const double n_x = entropy_power(hx.value, n);
  const double n_y = entropy_power(hy.value, n);
  const double n_s = entropy_power(hs.value, n);
  const double n_x_se = power_se(n_x, hx, n);
  const double n_y_se = power_se(n_y, hy, n);
  const double n_s_se = power_se(n_s, hs, n);
  stage("N(X~)", n_x, n_x_se, to_string(hx.method));
  stage("N(Y~)", n_y, n_y_se, to_string(hy.method));
  stage("N(X~+Y~)", n_s, n_s_se, to_string(hs.method));

  const double denom = n_x + n_y;
  const double denom_se = std::hypot(n_x_se, n_y_se);
  out.c_hat = n_s / denom;
  out.c_hat_se = out.c_hat * std::hypot(n_s_se / n_s, denom_se / denom);
  stage("C_hat", out.c_hat, out.c_hat_se);

  // Bookkeeping with Z ~ Unif(D): S = X~ + Z has p(0) = mu(D) for the
  // centered X~, and N(S) <= e^2 ||p||^{-2/n} <= e^2 p(0)^{-2/n}.
  const DensityModel z = uniform_body_model(unit_volume_ball(n));
  const EntropyEstimate hxz = estimate_entropy(convolve(xt, z).model(), stream.child(6), options.intermediate);
  const EntropyEstimate hyz = estimate_entropy(convolve(yt, z).model(), stream.child(7), options.intermediate);
  const double n_xz = entropy_power(hxz.value, n);
  const double n_yz = entropy_power(hyz.value, n);
  stage("N(X~+Z)", n_xz, power_se(n_xz, hxz, n), to_string(hxz.method));
  stage("N(Y~+Z)", n_yz, power_se(n_yz, hyz, n), to_string(hyz.method));
  out.mass_x = ball_mass(xt, stream.child(8), options.m);
  out.mass_y = ball_mass(yt, stream.child(9), options.m);
  auto mass_note = [](const BallMass& b) { return to_string(b.method) + (b.censored ? ", censored at 1/m" : ""); };
  stage("mu_x(D)", out.mass_x.mass, out.mass_x.mass_se, mass_note(out.mass_x));
  stage("mu_y(D)", out.mass_y.mass, out.mass_y.mass_se, mass_note(out.mass_y));
  stage("mu_x(D)^(1/n)", out.mass_x.mass_root);
  stage("mu_y(D)^(1/n)", out.mass_y.mass_root);
  const double e2 = std::exp(2.0);
  stage("e^2 mu_x(D)^(-2/n)", e2 / (out.mass_x.mass_root * out.mass_x.mass_root), 0.0, "upper bound for N(X~+Z)");
  stage("e^2 mu_y(D)^(-2/n)", e2 / (out.mass_y.mass_root * out.mass_y.mass_root), 0.0, "upper bound for N(Y~+Z)");

  const bool analytic = is_analytic(hx) && is_analytic(hy) && is_analytic(hs);
  nlohmann::ordered_json params{{"x", mx.name},
                                {"y", my.name},
                                {"n", n},
                                {"c_hat", out.c_hat},
                                {"c_hat_se", out.c_hat_se},
                                {"ceiling", options.reverse_epi_ceiling}};
  out.report = make_report("reverse-epi", n_s, options.reverse_epi_ceiling * denom, n_s_se,
                           options.reverse_epi_ceiling * denom_se, params, analytic);
  out.epi_side = make_report("reverse-epi.epi-side", denom, n_s, denom_se, n_s_se, std::move(params), analytic);
  return out;
}

InequalityReport check_kappa_entropy_lower(const DensityModel& model, const ConvexBody& body, double kappa,
                                           const RandomStream& stream, const CheckOptions& options) {
  const int n = model.dim;
  if (body.dim() != n) throw InvalidParameter("kappa entropy bound: dimension mismatch");
  if (!(kappa > 0.0 && kappa <= 1.0 / n + 1e-15))
    throw InvalidParameter("kappa entropy bound: kappa = " + std::to_string(kappa) + " outside (0, 1/n]");
  if (!body.has_analytic_volume()) throw InvalidParameter("kappa entropy bound: body volume is not analytic");

  const Matrix witnesses = draw_samples(model, stream.child(1), 2000);
  for (Eigen::Index j = 0; j < witnesses.cols(); ++j) {
    const Vector x = witnesses.col(j);
    if (!body.contains(as_span(x), 1e-9))
      throw InvalidParameter("kappa entropy bound: " + model.name + " has mass outside the body");
  }
  const EntropyEstimate h = estimate_entropy(model, stream.child(2), options.marginal);
  const double log_vol = log_volume(body);
  nlohmann::ordered_json params{
      {"model", model.name}, {"n", n}, {"kappa", kappa}, {"log_volume", log_vol}, {"entropy", entropy_params(h)}};
  return make_report("kappa-entropy-lower", log_vol + n * std::log(kappa * n), h.value, 0.0, h.std_error,
                     std::move(params), is_analytic(h));
}

InequalityReport check_reverse_bm(const ConvexBody& body1, const ConvexBody& body2, const RandomStream& stream,
                                  const CheckOptions& options) {
  const int n = body1.dim();
  if (body2.dim() != n) throw InvalidParameter("reverse Brunn-Minkowski: dimension mismatch");
  const ConvexBody sum = minkowski_sum(body1, body2);
  if (!sum.has_analytic_volume()) throw UnsupportedOperation("reverse Brunn-Minkowski: sum volume is not analytic");
  const ConvolutionModel conv = convolve(uniform_body_model(body1), uniform_body_model(body2));
  const EntropyEstimate h = estimate_entropy(conv.model(), stream, options.sum);
  const double log_vol = log_volume(sum);
  nlohmann::ordered_json params{{"bodies", conv.model().name},
                                {"n", n},
                                {"log_volume_sum", log_vol},
                                {"kappa", kappa_convolution(1.0 / n, 1.0 / n)},
                                {"entropy", entropy_params(h)}};
  return make_report("reverse-bm", log_vol - n * std::log(2.0), h.value, 0.0, h.std_error, std::move(params),
                     is_analytic(h));
}

TwoSidedReport check_gaussian_sandwich(const DensityModel& model, const RandomStream& stream,
                                       const CheckOptions& options) {
  require_log_concave(model, "gaussian sandwich");
  const int n = model.dim;
  const MaxDensityResult md = max_density(model);
  // (2 pi s^2)^{-n/2} = ||f|| gives h(Z)/n = 1/2 log(2 pi e s^2) = 1/2 - log(||f||)/n.
  const double sigma2 = std::pow(md.value, -2.0 / n) / (2.0 * std::numbers::pi);
  const double hz = 0.5 * (kLog2PiE + std::log(sigma2));
  const EntropyEstimate h = estimate_entropy(model, stream, options.marginal);
  const double hn = h.value / n;
  const double se = h.std_error / n;
  const bool analytic = md.analytic && is_analytic(h);
  nlohmann::ordered_json params{
      {"model", model.name}, {"n", n}, {"sigma2", sigma2}, {"h_z_per_n", hz}, {"entropy", entropy_params(h)}};
  return {make_report("gaussian-sandwich.lower", hz - 0.5, hn, 0.0, se, params, analytic),
          make_report("gaussian-sandwich.upper", hn, hz + 0.5, se, 0.0, params, analytic)};
}

std::vector<HyperplaneRow> hyperplane_scan(const std::vector<DensityModel>& models, const RandomStream& stream,
                                           std::size_t m, const CheckOptions& options) {
  std::vector<HyperplaneRow> rows;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const DensityModel& model = models[i];
    const EntropyEstimate d = relative_entropy_to_gaussian(model, stream.child(i), m, options.marginal);
    HyperplaneRow row;
    row.name = model.name;
    row.n = model.dim;
    row.d_per_n = d.value / model.dim;
    row.d_per_n_se = d.std_error / model.dim;
    row.bound = 0.25 * std::log(static_cast<double>(model.dim)) + options.hyperplane_c;
    row.log_concave = model.log_concave();
    row.flagged = !to_report(row).satisfied;
    rows.push_back(std::move(row));
  }
  return rows;
}

InequalityReport to_report(const HyperplaneRow& row) {
  nlohmann::ordered_json params{{"model", row.name}, {"n", row.n}, {"log_concave", row.log_concave}};
  return make_report("hyperplane", row.d_per_n, row.bound, row.d_per_n_se, 0.0, std::move(params),
                     row.d_per_n_se == 0.0);
}

}  // namespace entlab
