// Acceptance battery: runs every built-in suite, cross-checks selected
// reports against the quadrature oracles, and prints one PASS/FAIL line per
// criterion. Exit status 0 iff every criterion passes.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "entlab/acceptance.hpp"
#include "entlab/parallel.hpp"
#include "entlab/report_io.hpp"
#include "oracles.hpp"

using namespace entlab;

namespace {

struct OracleCheck {
  int criterion = 0;
  std::string what;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  [[nodiscard]] bool ok() const { return std::isfinite(value) && std::abs(value - reference) <= tolerance; }
};

struct Criterion {
  int id;
  const char* title;
};

const std::vector<Criterion> kCriteria{
    {1, "entropy sandwich"},        {2, "concentration bound"},
    {3, "submodularity"},           {4, "entropy power inequality"},
    {5, "reverse EPI pipeline"},    {6, "positioned ball mass"},
    {7, "kappa bound, reverse BM"}, {8, "Gaussian sandwich, D/n"},
    {9, "estimator quality"},       {10, "determinism"},
};

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

double sigma3(const InequalityReport& r) { return 3.0 * std::hypot(r.lhs_se, r.rhs_se); }

double log_factorial(int n) {
  double s = 0.0;
  for (int i = 2; i <= n; ++i) s += std::log(static_cast<double>(i));
  return s;
}

// Per-coordinate entropy of a zoo model from quadrature, or NaN.
double oracle_entropy(const std::string& model, int n) {
  if (starts_with(model, "gaussian(")) return n * oracle::gaussian_entropy_1d(1.0);
  if (starts_with(model, "exponential(1)")) return n * oracle::exponential_entropy();
  if (starts_with(model, "laplace(1)")) return n * oracle::laplace_entropy();
  if (starts_with(model, "uniform(box,") || starts_with(model, "uniform(ball,")) return 0.0;
  if (starts_with(model, "uniform(simplex,")) return -log_factorial(n);
  return std::nan("");
}

std::vector<OracleCheck> oracle_checks(const std::vector<InequalityReport>& reports) {
  std::vector<OracleCheck> out;
  for (const auto& r : reports) {
    const auto& p = r.params;
    const int n = p.contains("n") ? p["n"].get<int>() : 0;
    const std::string model = p.contains("model") && p["model"].is_string() ? p["model"].get<std::string>() : "";
    const std::string tag = r.name + " " + model + " n=" + std::to_string(n);

    if (r.name == "entropy-sandwich.lower") {
      out.push_back({1, tag, p["entropy"]["value"].get<double>(), oracle_entropy(model, n), 1e-9 * std::max(1, n)});
    } else if (r.name == "concentration" && p.contains("oracle_tail")) {
      const double q = oracle::chi_square_two_sided_tail(n, p["eps"].get<double>());
      out.push_back({2, tag + " eps=" + format_double(p["eps"].get<double>()), p["oracle_tail"].get<double>(), q,
                     1e-12 + 1e-6 * q});
    } else if (r.name == "submodularity.gaussian-margin") {
      const auto v = p["variances"];
      out.push_back({3, tag, p["estimate"].get<double>(),
                     oracle::gaussian_submodularity_margin(v[0].get<double>(), v[1].get<double>(), v[2].get<double>()),
                     1e-9});
    } else if (r.name == "epi.uniform-ratio") {
      out.push_back({4, tag, p["estimate"].get<double>(), oracle::uniform_pair_epi_ratio(), sigma3(r)});
    } else if (r.name == "reverse-epi" && n == 1 && p["x"] == "uniform(box,1)" && p["y"] == "uniform(box,1)") {
      out.push_back({5, tag + " cube+cube", p["c_hat"].get<double>(), oracle::uniform_pair_epi_ratio(),
                     3.0 * p["c_hat_se"].get<double>()});
    } else if (r.name == "positioning.mass-root" && starts_with(model, "isotropic(normalized(gaussian(")) {
      // N(0, I) scaled to max density one is N(0, I / 2 pi).
      const double radius = n <= 4 ? oracle::unit_volume_radius(n) : std::nan("");
      if (std::isfinite(radius)) {
        const double mass = oracle::chi_square_cdf(2.0 * oracle::kPi * radius * radius, n);
        out.push_back({6, tag, p["mass"].get<double>(), mass, 3.0 * p["mass_se"].get<double>()});
      }
    } else if (r.name == "kappa.sharpness") {
      out.push_back({7, tag, p["reference"].get<double>(), oracle_entropy(model, n), 1e-12});
    } else if (r.name == "reverse-bm.interval-margin") {
      out.push_back({7, tag, p["estimate"].get<double>(), oracle::triangular_entropy(), 3.0 * r.lhs_se});
    } else if (r.name == "hyperplane.dimension-free") {
      const double ref =
          starts_with(model, "exponential") ? oracle::exponential_gaussian_gap() : oracle::cube_gaussian_gap();
      out.push_back({8, tag + " reference", p["reference"].get<double>(), ref, 1e-9});
      out.push_back({8, tag, p["estimate"].get<double>(), ref, 3.0 * r.lhs_se + 1e-9});
    } else if (r.name == "estimators.knn-gaussian") {
      out.push_back({9, tag, p["estimate"].get<double>(), 4.0 * oracle::gaussian_entropy_1d(1.0), 0.1});
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance battery with per-criterion verdicts"};
  std::uint64_t seed = 42;
  std::string out_dir = "acceptance-out";
  unsigned jobs = 3;
  app.add_option("--seed", seed, "Battery seed");
  app.add_option("--out", out_dir, "Directory for reports.jsonl and summary.csv");
  app.add_option("--jobs", jobs, "Worker count of the second (determinism) run");
  CLI11_PARSE(app, argc, argv);

  using Clock = std::chrono::steady_clock;
  auto timed = [&](unsigned workers) {
    set_worker_count(workers);
    const auto t0 = Clock::now();
    auto results = run_acceptance(AcceptanceOptions{seed, {}});
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("battery run with %u worker(s): %.1f s\n", workers, secs);
    std::fflush(stdout);
    return results;
  };

  const std::vector<SuiteResult> first = timed(1);
  const std::vector<SuiteResult> second = timed(jobs);
  const std::string jsonl = to_jsonl(flatten(first));
  const bool identical = jsonl == to_jsonl(flatten(second));

  write_text_file(std::filesystem::path(out_dir) / "reports.jsonl", jsonl);
  write_text_file(std::filesystem::path(out_dir) / "summary.csv", to_csv(flatten(first)));

  std::map<int, std::size_t> reports, failures;
  for (const auto& s : first) {
    reports[s.criterion] += s.reports.size();
    failures[s.criterion] += s.failures();
    for (const auto& r : s.reports)
      if (!r.satisfied)
        std::printf("  unsatisfied [%s] %s lhs=%s rhs=%s slack=%s params=%s\n", s.suite.c_str(), r.name.c_str(),
                    format_double(r.lhs).c_str(), format_double(r.rhs).c_str(), format_double(r.slack).c_str(),
                    r.params.dump().c_str());
  }

  const std::vector<OracleCheck> checks = oracle_checks(flatten(first));
  std::map<int, std::size_t> oracle_total, oracle_failed;
  for (const auto& c : checks) {
    ++oracle_total[c.criterion];
    if (!c.ok()) {
      ++oracle_failed[c.criterion];
      std::printf("  oracle mismatch [%d] %s: value=%s reference=%s tolerance=%s\n", c.criterion, c.what.c_str(),
                  format_double(c.value).c_str(), format_double(c.reference).c_str(),
                  format_double(c.tolerance).c_str());
    }
  }

  bool all = true;
  for (const auto& c : kCriteria) {
    bool pass = false;
    std::string detail;
    if (c.id == 10) {
      pass = identical && !jsonl.empty();
      detail = "reports.jsonl from 1 and " + std::to_string(jobs) + " workers " +
               (identical ? "byte-identical" : "differ") + " (" + std::to_string(jsonl.size()) + " bytes)";
    } else {
      // Every criterion except the determinism one must have reports and oracle checks.
      pass = reports[c.id] > 0 && failures[c.id] == 0 && oracle_total[c.id] > 0 && oracle_failed[c.id] == 0;
      detail = std::to_string(reports[c.id]) + " reports, " + std::to_string(failures[c.id]) + " unsatisfied; " +
               std::to_string(oracle_total[c.id] - oracle_failed[c.id]) + "/" + std::to_string(oracle_total[c.id]) +
               " oracle checks";
    }
    all = all && pass;
    std::printf("criterion %2d %s: %s (%s)\n", c.id, pass ? "PASS" : "FAIL", c.title, detail.c_str());
  }
  return all ? 0 : 1;
}
