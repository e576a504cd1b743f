#pragma once

// Oracle-equivalence suite behind `aoiijam verify`. Each check compares a
// closed form against an independent numeric route over a parameter grid and
// reports its worst error together with the parameters that produced it.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoiijam/params.hpp"

namespace aoiijam::verify {

/// Deliberate corruption of one closed form, for negative-control runs.
enum class Fault { none, avg_eaoii, avg_aat, lambda_seq, stationary_pmf, whittle_closed };

struct VerifyConfig {
    std::vector<SubsystemParams> grid;
    std::vector<std::uint64_t> thresholds{0, 1, 2, 5, 10};
    std::size_t lambda_points = 20;        // per grid point, threshold optimality check
    std::uint64_t brute_force_cap = 120;   // n_max of the exhaustive search
    std::vector<SubsystemParams> value_iteration;
    std::vector<SubsystemParams> whittle;
    std::uint64_t whittle_k_max = 200;
    std::uint64_t slope_n_max = 200;
    Fault fault = Fault::none;

    /// Default grid and parameter lists.
    static VerifyConfig defaults();

    /// Starts from defaults() and overrides the keys present in `doc`:
    /// grid, thresholds, lambda_points, brute_force_cap, value_iteration,
    /// whittle, whittle_k_max, slope_n_max (triples as [p, q, r]) and
    /// fault. Throws std::invalid_argument on malformed input.
    static VerifyConfig from_json(const nlohmann::json& doc);

    nlohmann::json to_json() const;
};

struct CheckResult {
    std::string name;
    std::vector<std::string> covers;  // closed forms exercised
    bool passed = true;
    double tolerance = 0.0;
    double worst_error = 0.0;
    std::string witness;  // case with the worst error, or the first failure
    std::uint64_t cases = 0;
    double seconds = 0.0;
};

struct VerifyReport {
    bool passed = true;
    std::vector<CheckResult> checks;
    std::vector<std::string> uncovered;  // manifest entries no check touched

    nlohmann::json to_json() const;
};

/// Every closed form of the single-source and Whittle layers.
const std::vector<std::string>& closed_form_manifest();

/// p in {0.1, 0.3, 0.5, 0.7, 0.9, 1}, q in {0, 0.3, 0.6, 0.9},
/// r in {0.05, 0.2, 0.35, 0.5}: 96 triples.
std::vector<SubsystemParams> default_grid();

/// Midpoints of consecutive λ(s_n) for p = q = 0.9, r = 0.1 and small n,
/// plus points below λ(s_0) and above λ_∞: twenty costs whose optimal
/// thresholds a double-precision value iteration can resolve.
std::vector<double> value_iteration_lambdas(const SubsystemParams& params, std::size_t count = 20);

CheckResult check_eaoii_identities(const VerifyConfig& cfg);
CheckResult check_kernel(const VerifyConfig& cfg);
CheckResult check_stationary_power_iteration(const VerifyConfig& cfg);
CheckResult check_stationary_balance(const VerifyConfig& cfg);
CheckResult check_avg_eaoii(const VerifyConfig& cfg);
CheckResult check_avg_aat(const VerifyConfig& cfg);
CheckResult check_lambda_closed_vs_ratio(const VerifyConfig& cfg);
CheckResult check_lambda_monotone_and_limit(const VerifyConfig& cfg);
CheckResult check_exchange_conditions(const VerifyConfig& cfg);
CheckResult check_threshold_vs_brute_force(const VerifyConfig& cfg);
CheckResult check_value_iteration(const VerifyConfig& cfg);
CheckResult check_whittle_equivalence(const VerifyConfig& cfg);
CheckResult check_indexability(const VerifyConfig& cfg);
CheckResult check_slope_dominance(const VerifyConfig& cfg);

VerifyReport run(const VerifyConfig& cfg);

}  // namespace aoiijam::verify
