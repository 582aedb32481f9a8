#include "entlab/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "entlab/concavity.hpp"
#include "entlab/error.hpp"
#include "entlab/positioning.hpp"

namespace entlab {
namespace {

using Json = nlohmann::ordered_json;
using Route = EntropyOptions::Route;

const double kLog2PiE = std::log(2.0 * std::numbers::pi) + 1.0;

const std::vector<int> kSandwichDims{1, 2, 4, 8, 16, 32};
const std::vector<int> kConcentrationDims{1, 2, 4, 8, 16, 32, 64};
const std::vector<int> kPipelineDims{1, 2, 4, 8, 16};
const std::vector<int> kSmallDims{1, 2, 4};
const std::vector<int> kEstimatorDims{1, 2, 4, 8};

std::vector<double> eps_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 8; ++i) grid.push_back(0.25 * i);
  return grid;
}

struct Suite {
  std::string name;
  int criterion;
  std::function<std::vector<InequalityReport>(const RandomStream&)> run;
};

std::vector<std::pair<std::string, std::string>> zoo_pairs() {
  const std::vector<std::string> zoo{"gaussian", "exponential", "laplace", "cube", "ball"};
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < zoo.size(); ++i)
    for (std::size_t j = i; j < zoo.size(); ++j) pairs.emplace_back(zoo[i], zoo[j]);
  return pairs;
}

// A Gaussian with a full, non-isotropic covariance.
DensityModel correlated_gaussian(int n) {
  Matrix cov = Matrix::Identity(n, n) + 0.5 * Matrix::Ones(n, n);
  for (int i = 0; i < n; ++i) cov(i, i) += 0.25 * i;
  return make_gaussian(n, cov);
}

std::vector<InequalityReport> sandwich_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  std::uint64_t tag = 0;
  for (int n : kSandwichDims) {
    for (const char* name : {"gaussian", "exponential", "laplace", "cube", "ball", "simplex"}) {
      const DensityModel model = zoo_model(name, n);
      const TwoSidedReport r = check_entropy_sandwich(model, stream.child(tag++));
      out.push_back(r.lower);
      out.push_back(r.upper);
      const std::string family = name;
      if (family == "exponential") {
        out.push_back(make_report_with_slack("entropy-sandwich.upper-equality", std::abs(r.upper.margin), 0.0, 1e-12,
                                             {{"model", model.name}, {"n", n}}));
      } else if (family == "cube" || family == "ball" || family == "simplex") {
        out.push_back(make_report_with_slack("entropy-sandwich.lower-equality", std::abs(r.lower.margin), 0.0, 1e-12,
                                             {{"model", model.name}, {"n", n}}));
      }
    }
  }
  return out;
}

std::vector<InequalityReport> concentration_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  constexpr std::size_t m = 100000;
  std::uint64_t tag = 0;
  for (int n : kConcentrationDims) {
    for (const char* name : {"gaussian", "exponential", "laplace", "cube"}) {
      const ConcentrationProfile p = concentration_profile(zoo_model(name, n), stream.child(tag++), m, eps_grid());
      for (auto& r : concentration_reports(p)) out.push_back(std::move(r));
      if (!p.oracle_tail) continue;
      for (std::size_t i = 0; i < p.eps_grid.size(); ++i) {
        const double q = (*p.oracle_tail)[i];
        const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(m));
        out.push_back(agreement_report("concentration.oracle", p.empirical_tail[i], 0.0, q, se,
                                       {{"model", p.model}, {"n", n}, {"m", m}, {"eps", p.eps_grid[i]}}));
      }
    }
  }
  return out;
}

std::vector<InequalityReport> submodularity_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  const std::vector<double> variances{0.25, 1.0, 4.0};
  for (double a : variances)
    for (double b : variances)
      for (double c : variances) {
        const DensityModel x = make_gaussian(1, Matrix::Constant(1, 1, a));
        const DensityModel y = make_gaussian(1, Matrix::Constant(1, 1, b));
        const DensityModel z = make_gaussian(1, Matrix::Constant(1, 1, c));
        InequalityReport r = check_submodularity(x, y, z, stream);
        const double exact = 0.5 * std::log((a + c) * (b + c) / ((a + b + c) * c));
        r.params["variances"] = {a, b, c};
        Json params{{"n", 1}, {"variances", {a, b, c}}};
        out.push_back(std::move(r));
        out.push_back(agreement_report("submodularity.gaussian-margin", out.back().margin, 0.0, exact, 0.0, params));
      }

  CheckOptions knn;
  knn.sum.route = Route::knn;
  knn.sum.knn_m = 20000;
  std::uint64_t tag = 1;
  for (int n : kSmallDims) {
    const DensityModel cube = zoo_model("cube", n);
    out.push_back(check_submodularity(cube, cube, zoo_model("ball", n), stream.child(tag++), knn));
  }
  return out;
}

std::vector<InequalityReport> epi_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  CheckOptions options;
  options.sum.m_outer = 4000;
  options.sum.m_inner = 256;
  options.sum.knn_m = 20000;
  std::uint64_t tag = 0;
  for (int n : kSmallDims) {
    for (const auto& [a, b] : zoo_pairs()) {
      InequalityReport r = check_epi(zoo_model(a, n), zoo_model(b, n), stream.child(tag++), options);
      if (a == "gaussian" && b == "gaussian") {
        const Json params{{"n", n}, {"pair", "gaussian+gaussian"}};
        const double ratio = r.params["ratio"].get<double>();
        const double ratio_se = r.params["ratio_se"].get<double>();
        out.push_back(std::move(r));
        out.push_back(agreement_report("epi.gaussian-equality", ratio, ratio_se, 1.0, 0.0, params));
      } else {
        out.push_back(std::move(r));
      }
    }
  }

  CheckOptions knn;
  knn.sum.route = Route::knn;
  knn.sum.knn_m = 20000;
  const DensityModel u = make_uniform_interval();
  InequalityReport r = check_epi(u, u, stream.child(tag++), knn);
  const double ratio = r.params["ratio"].get<double>();
  const double ratio_se = r.params["ratio_se"].get<double>();
  out.push_back(std::move(r));
  out.push_back(agreement_report("epi.uniform-ratio", ratio, ratio_se, std::exp(1.0) / 2.0, 0.0,
                                 {{"n", 1}, {"pair", "uniform+uniform"}, {"method", "knn"}}));
  return out;
}

CheckOptions pipeline_options() {
  CheckOptions options;
  options.sum.m_outer = 4000;
  options.sum.m_inner = 256;
  options.sum.knn_m = 10000;
  options.intermediate.m_outer = 1000;
  options.intermediate.m_inner = 128;
  options.intermediate.knn_m = 4000;
  options.intermediate.plugin_max_dim = 64;
  options.m = 20000;
  return options;
}

std::vector<InequalityReport> reverse_epi_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  const CheckOptions options = pipeline_options();
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"gaussian", "gaussian"},      {"exponential", "cube"}, {"cube", "cube"},
      {"gaussian", "exponential"},   {"laplace", "ball"},     {"ball", "ball"},
      {"exponential", "exponential"}};
  std::uint64_t tag = 0;
  for (int n : kPipelineDims) {
    for (const auto& [a, b] : pairs) {
      const bool gaussian = a == "gaussian" && b == "gaussian";
      const DensityModel x = gaussian ? correlated_gaussian(n) : zoo_model(a, n);
      const DensityModel y = gaussian ? make_gaussian(n, 2.0 * Matrix::Identity(n, n)) : zoo_model(b, n);
      ReverseEpiResult r = reverse_epi_pipeline(x, y, stream.child(tag++), options);
      out.push_back(r.report);
      out.push_back(r.epi_side);
      if (gaussian)
        out.push_back(agreement_report("reverse-epi.gaussian-equality", r.c_hat, r.c_hat_se, 1.0, 0.0,
                                       {{"n", n}, {"x", x.name}, {"y", y.name}}));
    }
  }
  return out;
}

std::vector<InequalityReport> positioning_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  constexpr std::size_t m = 100000;
  std::uint64_t tag = 0;
  for (int n : kPipelineDims) {
    for (const char* name : {"gaussian", "exponential", "laplace", "cube", "ball", "simplex"}) {
      const RandomStream s = stream.child(tag++);
      const PositionedModel normalized = normalize_max_density(zoo_model(name, n));
      const PositionedModel positioned = isotropic_det1_position(normalized.model, s.child(1));
      const BallMass mass = ball_mass(positioned.model, s.child(2), m);
      const double root_se = mass.mass > 0.0 ? mass.mass_root * mass.mass_se / (n * mass.mass) : 0.0;
      out.push_back(make_report("positioning.mass-root", 0.1, mass.mass_root, 0.0, root_se,
                                {{"model", positioned.model.name},
                                 {"n", n},
                                 {"m", m},
                                 {"mass", mass.mass},
                                 {"mass_se", mass.mass_se},
                                 {"method", to_string(mass.method)},
                                 {"censored", mass.censored}}));
    }
  }
  return out;
}

std::vector<InequalityReport> kappa_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  for (int n : kSandwichDims) {
    const double k = kappa_convolution(1.0 / n, 1.0 / n);
    out.push_back(
        make_report_with_slack("kappa.convolution", std::abs(k - 1.0 / (2 * n)), 0.0, 0.0, {{"n", n}, {"kappa", k}}));
  }

  CheckOptions plugin;
  plugin.marginal.route = Route::plugin;
  plugin.marginal.m = 20000;
  std::uint64_t tag = 0;
  for (int n : kSmallDims) {
    for (const ConvexBody& body : {unit_cube(n), unit_volume_ball(n), standard_simplex(n)}) {
      const DensityModel model = uniform_body_model(body);
      InequalityReport r = check_kappa_entropy_lower(model, body, 1.0 / n, stream.child(tag++), plugin);
      const double h = r.rhs;
      const double se = r.rhs_se;
      out.push_back(std::move(r));
      out.push_back(agreement_report("kappa.sharpness", h, se, log_volume(body), 0.0,
                                     {{"model", model.name}, {"n", n}, {"method", "plugin_mc"}}));
    }
  }

  CheckOptions sums;
  sums.marginal.m_outer = 10000;
  sums.marginal.m_inner = 512;
  sums.marginal.knn_m = 20000;
  for (int n : kSmallDims) {
    const DensityModel cube = zoo_model("cube", n);
    const DensityModel sum = convolve(cube, cube).model();
    const ConvexBody a(Box{Vector::Zero(n), Vector::Constant(n, 2.0)});
    out.push_back(check_kappa_entropy_lower(sum, a, 1.0 / (2 * n), stream.child(tag++), sums));
  }
  return out;
}

std::vector<InequalityReport> reverse_bm_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  CheckOptions options;
  options.sum.m_outer = 10000;
  options.sum.m_inner = 512;
  options.sum.knn_m = 20000;
  std::uint64_t tag = 0;
  for (int n : kSmallDims) {
    const ConvexBody box = unit_cube(n);
    InequalityReport r = check_reverse_bm(box, box, stream.child(tag++), options);
    if (n == 1) {
      const double margin = r.margin;
      const double se = r.rhs_se;
      out.push_back(std::move(r));
      out.push_back(agreement_report("reverse-bm.interval-margin", margin, se, 0.5, 0.0, {{"n", 1}}));
    } else {
      out.push_back(std::move(r));
    }
    const ConvexBody ball(Ball{Vector::Zero(n), 1.0});
    out.push_back(check_reverse_bm(ball, ball, stream.child(tag++), options));
  }
  return out;
}

std::vector<InequalityReport> hyperplane_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  std::uint64_t tag = 0;
  std::vector<DensityModel> scan;
  for (int n : kSandwichDims) {
    for (const char* name : {"gaussian", "exponential", "laplace", "cube", "ball", "simplex"}) {
      const DensityModel model = zoo_model(name, n);
      const TwoSidedReport r = check_gaussian_sandwich(model, stream.child(tag++));
      out.push_back(r.lower);
      out.push_back(r.upper);
      scan.push_back(model);
    }
  }
  const std::vector<HyperplaneRow> rows = hyperplane_scan(scan, stream.child(tag++), 100000);
  const double d_exp = 0.5 * kLog2PiE - 1.0;
  const double d_cube = 0.5 * (kLog2PiE - std::log(12.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const HyperplaneRow& row = rows[i];
    out.push_back(to_report(row));
    const bool is_exp = scan[i].name.rfind("exponential", 0) == 0;
    const bool is_cube = scan[i].name.rfind("uniform(box", 0) == 0;
    if (is_exp || is_cube)
      out.push_back(agreement_report("hyperplane.dimension-free", row.d_per_n, row.d_per_n_se, is_exp ? d_exp : d_cube,
                                     0.0, {{"model", row.name}, {"n", row.n}}));
  }
  return out;
}

std::vector<InequalityReport> estimators_suite(const RandomStream& stream) {
  std::vector<InequalityReport> out;
  const DensityModel g4 = make_standard_gaussian(4);
  const double h4 = 2.0 * kLog2PiE;
  for (std::uint64_t rep = 0; rep < 3; ++rep) {
    const EntropyEstimate e = knn_entropy(draw_samples(g4, stream.child(100 + rep), 20000), 5);
    out.push_back(make_report_with_slack("estimators.knn-gaussian", std::abs(e.value - h4), 0.1, 0.0,
                                         {{"n", 4}, {"m", 20000}, {"k", 5}, {"repeat", rep}, {"estimate", e.value}}));
  }

  const std::vector<std::pair<std::string, std::string>> pairs{{"gaussian", "exponential"},
                                                               {"exponential", "cube"},
                                                               {"cube", "cube"},
                                                               {"laplace", "ball"},
                                                               {"ball", "ball"},
                                                               {"gaussian", "ball"},
                                                               {"exponential", "exponential"},
                                                               {"gaussian", "gaussian"}};
  std::uint64_t tag = 0;
  for (int n : kEstimatorDims) {
    for (const auto& [a, b] : pairs) {
      const DensityModel sum = convolve(zoo_model(a, n), zoo_model(b, n)).model();
      EntropyOptions plug;
      plug.route = Route::convolution;
      plug.m_outer = 10000;
      plug.m_inner = 2048;
      EntropyOptions knn;
      knn.route = Route::knn;
      knn.knn_m = n <= 4 ? 100000 : 20000;
      const RandomStream s = stream.child(tag++);
      const EntropyEstimate hp = estimate_entropy(sum, s.child(1), plug);
      const EntropyEstimate hk = estimate_entropy(sum, s.child(2), knn);
      out.push_back(agreement_report("estimators.plugin-vs-knn", hp.value, hp.std_error, hk.value, hk.std_error,
                                     {{"model", sum.name},
                                      {"n", n},
                                      {"m_outer", plug.m_outer},
                                      {"m_inner", plug.m_inner},
                                      {"knn_m", knn.knn_m},
                                      {"plugin_note", hp.bias_note}}));
    }
  }
  return out;
}

const std::vector<Suite>& catalog() {
  static const std::vector<Suite> suites{
      {"sandwich", 1, sandwich_suite},
      {"concentration", 2, concentration_suite},
      {"submodularity", 3, submodularity_suite},
      {"epi", 4, epi_suite},
      {"reverse-epi", 5, reverse_epi_suite},
      {"positioning", 6, positioning_suite},
      {"kappa", 7, kappa_suite},
      {"reverse-bm", 7, reverse_bm_suite},
      {"hyperplane", 8, hyperplane_suite},
      {"estimators", 9, estimators_suite},
  };
  return suites;
}

}  // namespace

bool SuiteResult::passed() const { return failures() == 0; }

std::size_t SuiteResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(reports.begin(), reports.end(), [](const InequalityReport& r) { return !r.satisfied; }));
}

ConvexBody unit_cube(int n) { return ConvexBody(Box{Vector::Zero(n), Vector::Ones(n)}); }

ConvexBody standard_simplex(int n) {
  Matrix v = Matrix::Zero(n, n + 1);
  v.rightCols(n) = Matrix::Identity(n, n);
  return ConvexBody(Simplex{v});
}

DensityModel zoo_model(const std::string& name, int n) {
  if (name == "gaussian") return make_standard_gaussian(n);
  if (name == "exponential") return make_power(make_exponential(), n);
  if (name == "laplace") return make_power(make_laplace(), n);
  if (name == "cube") return uniform_body_model(unit_cube(n));
  if (name == "ball") return uniform_body_model(unit_volume_ball(n));
  if (name == "simplex") return uniform_body_model(standard_simplex(n));
  throw InvalidParameter("zoo_model: unknown member '" + name + "'");
}

std::vector<SuiteResult> run_acceptance(const AcceptanceOptions& options) {
  for (const auto& name : options.suites) {
    const auto& all = catalog();
    if (std::none_of(all.begin(), all.end(), [&](const Suite& s) { return s.name == name; }))
      throw InvalidParameter("unknown suite '" + name + "'");
  }
  std::vector<SuiteResult> results;
  const auto& all = catalog();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Suite& suite = all[i];
    if (!options.suites.empty() &&
        std::find(options.suites.begin(), options.suites.end(), suite.name) == options.suites.end())
      continue;
    SuiteResult result{suite.name, suite.criterion, suite.run(RandomStream(options.seed, i + 1))};
    for (auto& r : result.reports) {
      r.params["suite"] = suite.name;
      r.params["seed"] = options.seed;
    }
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<InequalityReport> flatten(const std::vector<SuiteResult>& results) {
  std::vector<InequalityReport> out;
  for (const auto& s : results) out.insert(out.end(), s.reports.begin(), s.reports.end());
  return out;
}

}  // namespace entlab
