#pragma once

// Exact quantities of the single-source jamming model: EAoII values, the
// age-chain kernel, the stationary law under a threshold policy, steady-state
// averages, the λ-sequence and the optimal-threshold map.

#include <array>
#include <cstdint>

#include "aoiijam/params.hpp"

namespace aoiijam {

/// Expected AoII after k slots without a delivery. Strictly increasing in k
/// and bounded by 1/(2r).
double eaoii_value(const SubsystemParams& params, AgeIndex k);

/// Per-slot delivery probability: p when idle, p(1-q) when jammed.
double delivery_probability(const SubsystemParams& params, bool jammed);

struct AgeTransition {
    AgeIndex next;
    double probability;
};

/// The two successors of age k: reset to 0 on delivery, k+1 otherwise.
std::array<AgeTransition, 2> transition_distribution(const SubsystemParams& params, AgeIndex k,
                                                     bool jammed);

/// Stationary probability of age i under a finite threshold policy.
/// Throws std::invalid_argument for the infinite threshold; use
/// no_jam_pmf for that case.
double stationary_pmf(const SubsystemParams& params, ThresholdPolicy threshold, AgeIndex i);

/// Geometric law p(1-p)^i of the never-jam chain.
double no_jam_pmf(const SubsystemParams& params, AgeIndex i);

/// Long-run mean EAoII under threshold n.
double avg_eaoii_closed(const SubsystemParams& params, std::uint64_t n);

/// Long-run mean EAoII of the never-jam policy (limit n -> infinity).
double avg_eaoii_no_jam(const SubsystemParams& params);

/// Long-run fraction of jammed slots under threshold n.
double avg_aat_closed(const SubsystemParams& params, std::uint64_t n);

/// λ(s_n) from its explicit expression.
double lambda_seq(const SubsystemParams& params, std::uint64_t n);

/// λ(s_{n+1}) - λ(s_n), evaluated without cancellation. Positive whenever q > 0.
double lambda_increment(const SubsystemParams& params, std::uint64_t n);

/// sup_n λ(s_n): jamming cost at and above which never jamming is optimal.
double lambda_limit(const SubsystemParams& params);

SteadyStateSummary steady_state(const SubsystemParams& params, std::uint64_t n);

/// s̄_n - λ d̄_n.
double steady_reward(const SubsystemParams& params, std::uint64_t n, double lambda);

/// Same, with the infinite threshold mapped to the never-jam average.
double steady_reward(const SubsystemParams& params, ThresholdPolicy threshold, double lambda);

/// Optimal threshold for jamming cost λ >= 0:
///   λ <= λ(s_0)                -> 0
///   λ(s_n) < λ <= λ(s_{n+1})   -> n+1
///   λ >= λ_∞                   -> infinite
/// The infinite regime is tested first, so q = 0 (λ_∞ = 0) always yields
/// infinite. If λ lies closer to λ_∞ than double precision resolves the
/// sequence, the scan stagnates and infinite is returned.
ThresholdPolicy optimal_threshold(const SubsystemParams& params, double lambda);

}  // namespace aoiijam
