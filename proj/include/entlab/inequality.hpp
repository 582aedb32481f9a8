#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "entlab/convex_body.hpp"
#include "entlab/density_model.hpp"
#include "entlab/entropy.hpp"
#include "entlab/positioning.hpp"
#include "entlab/rng.hpp"

namespace entlab {

inline constexpr double kAnalyticSlack = 1e-9;
inline constexpr double kSigmaSlack = 3.0;

/// One verified inequality instance lhs <= rhs.
///
/// margin = rhs - lhs; slack = 3 combined standard errors for Monte Carlo
/// quantities and 1e-9 when both sides are analytic; satisfied iff
/// margin >= -slack.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double margin = 0.0;
  double slack = 0.0;
  bool satisfied = false;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

/// Builds a report and applies the decision rule. `analytic` forces the
/// 1e-9 slack; otherwise slack = max(3 * hypot(lhs_se, rhs_se), 1e-9).
InequalityReport make_report(std::string name, double lhs, double rhs, double lhs_se, double rhs_se,
                             nlohmann::ordered_json params = nlohmann::ordered_json::object(), bool analytic = false);

/// Report with an explicit slack (e.g. exactness checks at 1e-12).
InequalityReport make_report_with_slack(std::string name, double lhs, double rhs, double slack,
                                        nlohmann::ordered_json params = nlohmann::ordered_json::object());

/// |a - b| <= sigmas * hypot(se_a, se_b) expressed as a report.
InequalityReport agreement_report(std::string name, double a, double a_se, double b, double b_se,
                                  nlohmann::ordered_json params = nlohmann::ordered_json::object(),
                                  double sigmas = kSigmaSlack);

/// The decision rule applied to a (possibly deserialized) record.
bool recompute_satisfied(const InequalityReport& report);

nlohmann::ordered_json to_json(const InequalityReport& report);
InequalityReport report_from_json(const nlohmann::ordered_json& j);

/// Two-sided bound lower <= x <= upper as a pair of one-sided reports.
struct TwoSidedReport {
  InequalityReport lower;
  InequalityReport upper;
  [[nodiscard]] bool satisfied() const { return lower.satisfied && upper.satisfied; }
};

/// Which estimator options to use for the pieces of a check.
struct CheckOptions {
  EntropyOptions marginal;      // entropies of the operands
  EntropyOptions sum;           // entropies of sums
  EntropyOptions intermediate;  // reverse-EPI bookkeeping sums with Unif(D)
  std::size_t m = 100000;       // draws for profiles, masses, relative entropies
  std::size_t m_cov = 0;        // 0: analytic moments or the default count
  double reverse_epi_ceiling = 30.0;
  double hyperplane_c = 1.0;
};

/// log ||f||^{-1/n} <= h/n <= 1 + log ||f||^{-1/n} for log-concave f.
TwoSidedReport check_entropy_sandwich(const DensityModel& model, const RandomStream& stream = RandomStream{},
                                      const CheckOptions& options = {});

struct ConcentrationProfile {
  std::string model;
  int n = 0;
  std::size_t m = 0;
  double entropy = 0.0;
  double entropy_se = 0.0;
  std::vector<double> eps_grid;
  std::vector<double> empirical_tail;
  std::vector<double> tail_se;
  std::vector<double> tail_bound;  // 4 exp(-eps^2 n / 16)
  std::optional<std::vector<double>> oracle_tail;
};

/// Empirical P{|h~(X)/n - h/n| >= eps} from m draws, next to the bound
/// 4 exp(-eps^2 n/16). Gaussian models get the exact chi-square tail
/// P{|chi2_n/n - 1| >= 2 eps}. eps outside [0, 2] is rejected.
ConcentrationProfile concentration_profile(const DensityModel& model, const RandomStream& stream, std::size_t m,
                                           const std::vector<double>& eps_grid, const CheckOptions& options = {});

/// One report per grid point: empirical tail <= bound (+3 binomial SE).
std::vector<InequalityReport> concentration_reports(const ConcentrationProfile& profile);

struct MassEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Fraction of draws with exp(-h - n eps) < f(X) < exp(-h + n eps),
/// i.e. 1 - tail(eps).
MassEstimate typical_set_mass(const DensityModel& model, const RandomStream& stream, std::size_t m, double eps,
                              const CheckOptions& options = {});

/// h(X+Y+Z) + h(Z) <= h(X+Z) + h(Y+Z).
InequalityReport check_submodularity(const DensityModel& mx, const DensityModel& my, const DensityModel& mz,
                                     const RandomStream& stream, const CheckOptions& options = {});

/// N(X) + N(Y) <= N(X+Y); params carry the ratio N(X+Y)/(N(X)+N(Y)).
InequalityReport check_epi(const DensityModel& mx, const DensityModel& my, const RandomStream& stream,
                           const CheckOptions& options = {});

struct StageRecord {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
  std::string note;
};

nlohmann::ordered_json to_json(const StageRecord& stage);

struct ReverseEpiResult {
  /// N(X~+Y~) <= ceiling * (N(X~) + N(Y~)).
  InequalityReport report;
  /// N(X~) + N(Y~) <= N(X~+Y~).
  InequalityReport epi_side;
  std::vector<StageRecord> stages;
  double c_hat = 0.0;
  double c_hat_se = 0.0;
  BallMass mass_x;
  BallMass mass_y;
};

/// Max-density normalization, isotropic det-1 positioning, then the ratio
/// C = N(X~+Y~)/(N(X~)+N(Y~)) with the unit-volume-ball bookkeeping.
ReverseEpiResult reverse_epi_pipeline(const DensityModel& mx, const DensityModel& my, const RandomStream& stream,
                                      const CheckOptions& options = {});

/// log|A| + n log(kappa n) <= h(X) for a kappa-concave X supported in A.
InequalityReport check_kappa_entropy_lower(const DensityModel& model, const ConvexBody& body, double kappa,
                                           const RandomStream& stream, const CheckOptions& options = {});

/// log|A1 + A2| - n log 2 <= h(X1 + X2), X_i uniform on A_i.
InequalityReport check_reverse_bm(const ConvexBody& body1, const ConvexBody& body2, const RandomStream& stream,
                                  const CheckOptions& options = {});

/// h(Z)/n - 1/2 <= h(X)/n <= h(Z)/n + 1/2 with Z Gaussian, (2 pi s^2)^{-n/2} = ||f||.
TwoSidedReport check_gaussian_sandwich(const DensityModel& model, const RandomStream& stream = RandomStream{},
                                       const CheckOptions& options = {});

struct HyperplaneRow {
  std::string name;
  int n = 0;
  double d_per_n = 0.0;
  double d_per_n_se = 0.0;
  double bound = 0.0;  // log(n)/4 + c
  bool flagged = false;
  bool log_concave = true;
};

/// D(f)/n for each model next to log(n)/4 + c; rows above the bound are
/// flagged.
std::vector<HyperplaneRow> hyperplane_scan(const std::vector<DensityModel>& models, const RandomStream& stream,
                                           std::size_t m, const CheckOptions& options = {});
InequalityReport to_report(const HyperplaneRow& row);

}  // namespace entlab
