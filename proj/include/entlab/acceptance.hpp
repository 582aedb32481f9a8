#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entlab/inequality.hpp"

namespace entlab {

/// Reports of one built-in suite. `criterion` is the acceptance criterion
/// number the suite feeds (kappa and reverse-bm both feed 7).
struct SuiteResult {
  std::string suite;
  int criterion = 0;
  std::vector<InequalityReport> reports;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] std::size_t failures() const;
};

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  std::vector<std::string> suites;  // empty: all, in catalog order
};

/// The built-in battery. Every report carries params.suite and params.seed.
/// Throws InvalidParameter for an unknown suite name.
std::vector<SuiteResult> run_acceptance(const AcceptanceOptions& options = {});

std::vector<InequalityReport> flatten(const std::vector<SuiteResult>& results);

/// Zoo members used by the battery, by short name: gaussian, exponential,
/// laplace, cube, ball, simplex.
DensityModel zoo_model(const std::string& name, int n);
ConvexBody unit_cube(int n);
ConvexBody standard_simplex(int n);

}  // namespace entlab
