#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "entlab/error.hpp"
#include "entlab/experiment.hpp"
#include "entlab/report_io.hpp"

using namespace entlab;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string config_error(const std::string& text) {
  try {
    (void)parse_config(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"(seed: 11
bodies:
  - {name: box, kind: cube, dim: 2}
models:
  - {name: cube2, family: uniform, body: box}
  - {name: g16, family: gaussian, dim: 16}
  - name: e2
    family: exponential
    power: 2
checks:
  - checker: entropy-sandwich
    models: [cube2]
  - checker: concentration
    model: g16
    m: 20000
  - checker: hyperplane
    models: [e2, cube2]
    m: 20000
)";

}  // namespace

TEST_CASE("bundled example config parses") {
  const ExperimentConfig c = load_config(std::filesystem::path(ENTLAB_SOURCE_DIR) / "configs" / "quick.yaml");
  CHECK(c.seed == 7);
  CHECK(c.models.size() == 7);
  CHECK(c.bodies.size() == 3);
  CHECK(c.checks.size() == 10);
  CHECK(c.models.at("tilted").dim == 2);
  CHECK(c.models.at("cube-sum").factors != nullptr);
  CHECK(c.checks[3].options.sum.m_outer == 4000);
}

TEST_CASE("config errors carry a location") {
  const std::string family = config_error("models:\n  - name: x\n    family: cauchy\n");
  CHECK(family.find("test.yaml:3:") != std::string::npos);
  CHECK(family.find("cauchy") != std::string::npos);

  const std::string checker =
      config_error("models:\n  - {name: g, family: gaussian, dim: 1}\nchecks:\n  - checker: nonsense\n    model: g\n");
  CHECK(checker.find("test.yaml:4:") != std::string::npos);

  const std::string ref =
      config_error("models:\n  - {name: g, family: gaussian, dim: 1}\nchecks:\n  - checker: epi\n    models: [g, h]\n");
  CHECK(ref.find("'h'") != std::string::npos);

  CHECK_FALSE(config_error("seed: 1\nbogus: 2\n").empty());
  CHECK_FALSE(config_error("models: [\n").empty());
  CHECK_FALSE(config_error("models:\n  - {name: a, convolve: [a, a]}\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/entlab.yaml"), IoError);
}

TEST_CASE("run writes outputs and is reproducible") {
  const ExperimentConfig c = parse_config(kSmall);
  const RunResult first = run_checks(c);
  const RunResult second = run_checks(c);
  CHECK(first.all_satisfied());
  CHECK(first.exit_status() == 0);
  CHECK(to_jsonl(first.reports) == to_jsonl(second.reports));
  REQUIRE(first.profiles.size() == 1);
  CHECK(first.profiles[0].tail_bound.back() == doctest::Approx(4.0 * std::exp(-4.0)));
  for (const auto& r : first.reports) CHECK(r.params["seed"].get<std::uint64_t>() == 11);

  const auto dir = std::filesystem::temp_directory_path() / "entlab-test-run";
  std::filesystem::remove_all(dir);
  write_outputs(first, dir, c.output);
  CHECK(read_file(dir / "reports.jsonl") == to_jsonl(first.reports));
  const std::string csv = read_file(dir / "summary.csv");
  CHECK(csv.find("entropy-sandwich.upper,2,0,1,1,") != std::string::npos);
  const std::string svg = read_file(dir / "profile-0.svg");
  CHECK(svg.find("n = 16") != std::string::npos);
  CHECK(svg.find("chi-square oracle") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("analytic verdicts do not depend on the seed") {
  ExperimentConfig c = parse_config(kSmall);
  const RunResult a = run_checks(c);
  c.seed = 12345;
  const RunResult b = run_checks(c);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    CHECK(a.reports[i].satisfied == b.reports[i].satisfied);
    if (a.reports[i].name.rfind("entropy-sandwich", 0) == 0) CHECK(a.reports[i].margin == b.reports[i].margin);
  }
}

TEST_CASE("unsatisfied checks set the exit status") {
  const ExperimentConfig c = parse_config(R"(seed: 3
models:
  - {name: u, family: uniform}
checks:
  - {checker: reverse-epi, models: [u, u], ceiling: 0.5, m_outer: 2000, m: 5000}
)");
  const RunResult r = run_checks(c);
  CHECK_FALSE(r.all_satisfied());
  CHECK(r.exit_status() == 1);
  CHECK(r.stages.count(0) == 1);
}

TEST_CASE("suite listing") {
  const std::string text = list_suites();
  for (const char* name :
       {"sandwich", "concentration", "submodularity", "epi", "reverse-epi", "kappa", "reverse-bm", "hyperplane"})
    CHECK(text.find(std::string(name) + ": ") != std::string::npos);
}
