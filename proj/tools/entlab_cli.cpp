// entlab: run experiment configs and the built-in acceptance battery.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "entlab/acceptance.hpp"
#include "entlab/error.hpp"
#include "entlab/experiment.hpp"
#include "entlab/parallel.hpp"
#include "entlab/report_io.hpp"

namespace {

constexpr int kExitUnsatisfied = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFailure = 4;

std::filesystem::path output_dir(const std::string& flag, const std::filesystem::path& configured) {
  if (!flag.empty()) return flag;
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("ENTLAB_OUT"); env && *env) return env;
  return "entlab-out";
}

void print_failures(const std::vector<entlab::InequalityReport>& reports) {
  for (const auto& r : reports)
    if (!r.satisfied)
      std::cout << "  unsatisfied: " << r.name << " lhs=" << entlab::format_double(r.lhs)
                << " rhs=" << entlab::format_double(r.rhs) << " slack=" << entlab::format_double(r.slack) << ' '
                << r.params.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy inequalities for log-concave laws: checks, estimators and experiments"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out;
  bool svg = true;
  unsigned jobs = 0;

  auto* run = app.add_subcommand("run", "Run the checks of a YAML experiment config");
  std::string config_path;
  run->add_option("config", config_path, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Output directory (default: config output.dir, then $ENTLAB_OUT)");
  run->add_flag("--svg,!--no-svg", svg, "Write one SVG per concentration profile");
  run->add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)");

  auto* list = app.add_subcommand("list-suites", "List the built-in acceptance suites");

  auto* accept = app.add_subcommand("accept", "Run the built-in acceptance battery");
  std::vector<std::string> suites;
  std::uint64_t accept_seed = 42;
  accept->add_option("--seed", accept_seed, "Battery seed")->capture_default_str();
  accept->add_option("--suite", suites, "Restrict to these suites (repeatable)");
  accept->add_option("--out", out, "Output directory (default: $ENTLAB_OUT, then entlab-out)");
  accept->add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (jobs > 0) entlab::set_worker_count(jobs);

    if (*list) {
      std::cout << entlab::list_suites();
      return 0;
    }

    if (*run) {
      entlab::ExperimentConfig config = entlab::load_config(config_path);
      if (seed) config.seed = *seed;
      if (!svg) config.output.svg = false;
      const auto dir = output_dir(out, config.output.dir);
      const entlab::RunResult result = entlab::run_checks(config);
      entlab::write_outputs(result, dir, config.output);
      std::size_t bad = 0;
      for (const auto& r : result.reports) bad += r.satisfied ? 0 : 1;
      std::cout << result.reports.size() << " reports, " << bad << " unsatisfied; wrote " << dir.string() << '\n';
      print_failures(result.reports);
      return result.exit_status() == 0 ? 0 : kExitUnsatisfied;
    }

    if (*accept) {
      const auto results = entlab::run_acceptance({accept_seed, suites});
      const auto reports = entlab::flatten(results);
      const auto dir = output_dir(out, {});
      entlab::OutputSpec spec;
      spec.svg = false;
      entlab::write_outputs(entlab::RunResult{reports, {}, {}}, dir, spec);
      bool ok = true;
      for (const auto& s : results) {
        std::cout << (s.passed() ? "PASS " : "FAIL ") << s.suite << " (criterion " << s.criterion
                  << "): " << s.reports.size() - s.failures() << '/' << s.reports.size() << " satisfied\n";
        print_failures(s.reports);
        ok = ok && s.passed();
      }
      std::cout << "wrote " << (dir / "reports.jsonl").string() << '\n';
      return ok ? 0 : kExitUnsatisfied;
    }
  } catch (const entlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const entlab::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  } catch (const entlab::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
