#pragma once

// Numeric ground truth for the closed forms: relative value iteration on the
// truncated age chain, power iteration for its stationary law, truncated
// sums for the steady-state averages and an exhaustive threshold search.

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "aoiijam/params.hpp"

namespace aoiijam::oracle {

struct OracleConfig {
    std::uint64_t state_cap = 1000;  // K: ages 0..K, age K self-loops on failure
    double tolerance = 1e-9;
    std::uint64_t max_iterations = 1'000'000;

    /// Throws std::invalid_argument unless K >= 10 and tolerance > 0.
    void validate() const;
};

struct ValueIterationResult {
    double theta = 0.0;                // optimal average reward
    std::vector<double> values;        // differential values, values[0] == 0
    std::vector<double> jam_advantage; // V¹(s_i) - V⁰(s_i)
    std::vector<bool> policy;          // jam decision per age
    std::uint64_t iterations = 0;
    double span = 0.0;                 // last span(T h - h)
    bool converged = false;
};

/// Relative value iteration for max{s - λd + E V(s')} on ages 0..K, with
/// state 0 as reference. Stops when the span of successive differences
/// drops below cfg.tolerance; throws ConvergenceError otherwise.
/// Ties jam only on strict improvement.
ValueIterationResult relative_value_iteration(const SubsystemParams& params, double lambda,
                                              const OracleConfig& cfg);

/// First jamming age of a monotone policy; infinite if it never jams.
/// Throws StructureError on a non-monotone policy and std::invalid_argument
/// on an unconverged result.
ThresholdPolicy extract_threshold(const ValueIterationResult& result);
ThresholdPolicy extract_threshold(const std::vector<bool>& policy);

/// Smallest truncation K > n whose geometric tail mass beyond K is below
/// `tail_bound`.
std::uint64_t recommended_state_cap(const SubsystemParams& params, std::uint64_t n,
                                    double tail_bound = 1e-13);

/// Power iteration of the threshold-n kernel on ages 0..K (K from cfg),
/// started from the point mass at 0 and renormalized on exit. Stops once the
/// geometric error bound falls under cfg.tolerance.
std::vector<double> stationary_pmf_numeric(const SubsystemParams& params, std::uint64_t n,
                                           const OracleConfig& cfg);

struct NumericAverages {
    double avg_eaoii = 0.0;
    double avg_aat = 0.0;
    std::uint64_t truncation = 0;  // last age summed term by term
};

/// Σ_k s_k u_n(s_k) and Σ_{k>=n} u_n(s_k), summed term by term up to
/// max(cfg.state_cap, recommended_state_cap) plus the exact geometric tail.
NumericAverages avg_numeric(const SubsystemParams& params, std::uint64_t n,
                            const OracleConfig& cfg = {});

/// Exhaustive argmax of s̄_n - λ d̄_n over n in [0, n_max], evaluated in
/// multiprecision. Returns infinite when λ >= λ_∞. Throws
/// AmbiguousRegimeError when λ < λ_∞ but the argmax sits at n_max.
ThresholdPolicy brute_force_threshold(const SubsystemParams& params, double lambda,
                                      std::uint64_t n_max);

/// Reusable form of the above: the s̄/d̄ ladder is built once per params.
class BruteForceSearch {
public:
    BruteForceSearch(const SubsystemParams& params, std::uint64_t n_max);
    ~BruteForceSearch();
    BruteForceSearch(BruteForceSearch&&) noexcept;
    BruteForceSearch& operator=(BruteForceSearch&&) noexcept;

    ThresholdPolicy operator()(double lambda) const;

    /// Sign of R_k - R_{k+1} at cost λ (+1, 0, -1), exact to the ladder's precision.
    int reward_step_sign(std::uint64_t k, double lambda) const;

    std::uint64_t n_max() const noexcept;

private:
    struct Ladder;
    SubsystemParams params_;
    double limit_;
    std::unique_ptr<const Ladder> ladder_;
};

}  // namespace aoiijam::oracle
