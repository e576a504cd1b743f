#include "aoiijam/core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aoiijam/closed_forms.hpp"

namespace aoiijam {

namespace {

// Hard stop for the λ-sequence scan; stagnation ends it far earlier for any
// r above ~1e-5.
constexpr std::uint64_t kMaxThresholdScan = 50'000'000;

}  // namespace

double eaoii_value(const SubsystemParams& params, AgeIndex k)
{
    // Same formula with both powers shifted by -1 through expm1, so small r
    // does not cancel against the leading 1.
    const double m = static_cast<double>(k) + 1.0;
    const double r = params.r();
    return (std::expm1(m * std::log1p(-2.0 * r)) - 2.0 * std::expm1(m * std::log1p(-r))) / (2.0 * r);
}

double delivery_probability(const SubsystemParams& params, bool jammed)
{
    return jammed ? params.p() * (1.0 - params.q()) : params.p();
}

std::array<AgeTransition, 2> transition_distribution(const SubsystemParams& params, AgeIndex k,
                                                     bool jammed)
{
    const double delivered = delivery_probability(params, jammed);
    return {AgeTransition{0, delivered}, AgeTransition{k + 1, 1.0 - delivered}};
}

double stationary_pmf(const SubsystemParams& params, ThresholdPolicy threshold, AgeIndex i)
{
    if (threshold.is_infinite()) {
        throw std::invalid_argument("stationary_pmf needs a finite threshold; use no_jam_pmf");
    }
    return closed::stationary_pmf<double>(params, threshold.index(), i);
}

double no_jam_pmf(const SubsystemParams& params, AgeIndex i)
{
    return params.p() * std::pow(1.0 - params.p(), static_cast<double>(i));
}

double avg_eaoii_closed(const SubsystemParams& params, std::uint64_t n)
{
    return closed::avg_eaoii<double>(params, n);
}

double avg_eaoii_no_jam(const SubsystemParams& params)
{
    return closed::avg_eaoii_no_jam<double>(params);
}

double avg_aat_closed(const SubsystemParams& params, std::uint64_t n)
{
    return closed::avg_aat<double>(params, n);
}

double lambda_seq(const SubsystemParams& params, std::uint64_t n)
{
    return closed::lambda_seq<double>(params, n);
}

double lambda_increment(const SubsystemParams& params, std::uint64_t n)
{
    return closed::lambda_increment<double>(params, n);
}

double lambda_limit(const SubsystemParams& params)
{
    return closed::lambda_limit<double>(params);
}

SteadyStateSummary steady_state(const SubsystemParams& params, std::uint64_t n)
{
    return {avg_eaoii_closed(params, n), avg_aat_closed(params, n), lambda_seq(params, n)};
}

double steady_reward(const SubsystemParams& params, std::uint64_t n, double lambda)
{
    return avg_eaoii_closed(params, n) - lambda * avg_aat_closed(params, n);
}

double steady_reward(const SubsystemParams& params, ThresholdPolicy threshold, double lambda)
{
    if (threshold.is_infinite()) {
        return avg_eaoii_no_jam(params);
    }
    return steady_reward(params, threshold.index(), lambda);
}

ThresholdPolicy optimal_threshold(const SubsystemParams& params, double lambda)
{
    if (!(lambda >= 0.0) || std::isinf(lambda)) {
        throw std::invalid_argument("jamming cost must be finite and non-negative");
    }
    if (lambda >= lambda_limit(params)) {
        return ThresholdPolicy::infinite();
    }
    double previous = -std::numeric_limits<double>::infinity();
    for (std::uint64_t n = 0; n < kMaxThresholdScan; ++n) {
        const double level = lambda_seq(params, n);
        if (lambda <= level) {
            return ThresholdPolicy::at(n);
        }
        if (level <= previous) {
            break;  // sequence no longer resolvable in double
        }
        previous = level;
    }
    return ThresholdPolicy::infinite();
}

}  // namespace aoiijam
