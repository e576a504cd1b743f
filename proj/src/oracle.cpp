#include "aoiijam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aoiijam/closed_forms.hpp"
#include "aoiijam/core.hpp"
#include "aoiijam/errors.hpp"
#include "aoiijam/multiprecision.hpp"

namespace aoiijam {

unsigned digits_for_horizon(const SubsystemParams& params, std::uint64_t n_max)
{
    constexpr unsigned kMargin = 40;
    const double idle = 1.0 - params.p();
    // p = 1 leaves nothing to resolve past n = 0.
    double per_step = -std::log10(1.0 - params.r());
    if (idle > 0.0) {
        per_step -= std::log10(idle);
    }
    return kMargin + static_cast<unsigned>(std::ceil(static_cast<double>(n_max) * per_step));
}

namespace oracle {

void OracleConfig::validate() const
{
    if (state_cap < 10) {
        throw std::invalid_argument("oracle state cap must be at least 10");
    }
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("oracle tolerance must be positive");
    }
    if (max_iterations == 0) {
        throw std::invalid_argument("oracle needs at least one iteration");
    }
}

ValueIterationResult relative_value_iteration(const SubsystemParams& params, double lambda,
                                              const OracleConfig& cfg)
{
    cfg.validate();
    if (!(lambda >= 0.0) || std::isinf(lambda)) {
        throw std::invalid_argument("jamming cost must be finite and non-negative");
    }

    const std::size_t top = cfg.state_cap;
    const double p = params.p();
    const double p_jammed = delivery_probability(params, true);

    std::vector<double> eaoii(top + 1);
    for (std::size_t i = 0; i <= top; ++i) {
        eaoii[i] = eaoii_value(params, i);
    }

    std::vector<double> h(top + 1, 0.0);
    std::vector<double> next(top + 1, 0.0);
    ValueIterationResult result;

    for (std::uint64_t it = 1; it <= cfg.max_iterations; ++it) {
        const double h0 = h[0];
        double lo = INFINITY;
        double hi = -INFINITY;
        for (std::size_t i = 0; i <= top; ++i) {
            const double ahead = h[std::min(i + 1, top)];
            const double idle = eaoii[i] + p * h0 + (1.0 - p) * ahead;
            const double jam = eaoii[i] - lambda + p_jammed * h0 + (1.0 - p_jammed) * ahead;
            next[i] = std::max(idle, jam);
            const double delta = next[i] - h[i];
            lo = std::min(lo, delta);
            hi = std::max(hi, delta);
        }
        const double ref = next[0];
        for (std::size_t i = 0; i <= top; ++i) {
            h[i] = next[i] - ref;
        }
        result.iterations = it;
        result.span = hi - lo;
        if (result.span < cfg.tolerance) {
            result.converged = true;
            result.theta = 0.5 * (hi + lo);
            break;
        }
    }
    if (!result.converged) {
        throw ConvergenceError("relative value iteration did not converge (span "
                                   + std::to_string(result.span) + ")",
                               result.span, result.iterations);
    }

    const double pq = p * params.q();
    result.jam_advantage.resize(top + 1);
    result.policy.resize(top + 1);
    for (std::size_t i = 0; i <= top; ++i) {
        const double adv = -lambda + pq * (h[std::min(i + 1, top)] - h[0]);
        result.jam_advantage[i] = adv;
        result.policy[i] = adv > 0.0;
    }
    result.values = std::move(h);
    return result;
}

ThresholdPolicy extract_threshold(const std::vector<bool>& policy)
{
    const auto first = std::find(policy.begin(), policy.end(), true);
    if (first == policy.end()) {
        return ThresholdPolicy::infinite();
    }
    const auto gap = std::find(first, policy.end(), false);
    if (gap != policy.end()) {
        throw StructureError("policy is not a threshold policy: jams at age "
                             + std::to_string(first - policy.begin()) + " but idles at age "
                             + std::to_string(gap - policy.begin()));
    }
    return ThresholdPolicy::at(static_cast<std::uint64_t>(first - policy.begin()));
}

ThresholdPolicy extract_threshold(const ValueIterationResult& result)
{
    if (!result.converged) {
        throw std::invalid_argument("cannot extract a threshold from an unconverged result");
    }
    return extract_threshold(result.policy);
}

std::uint64_t recommended_state_cap(const SubsystemParams& params, std::uint64_t n,
                                    double tail_bound)
{
    if (!(tail_bound > 0.0 && tail_bound < 1.0)) {
        throw std::invalid_argument("tail bound must lie in (0, 1)");
    }
    // Above the threshold the pmf decays by 1-p(1-q) per age, the slower of
    // the two ratios.
    const double ratio = 1.0 - delivery_probability(params, true);
    std::uint64_t extra = 1;
    if (ratio > 0.0) {
        const double needed = std::log(tail_bound * (1.0 - ratio)) / std::log(ratio);
        extra = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(needed)));
    }
    return std::max<std::uint64_t>(10, n + extra);
}

std::vector<double> stationary_pmf_numeric(const SubsystemParams& params, std::uint64_t n,
                                           const OracleConfig& cfg)
{
    cfg.validate();
    const std::size_t top = cfg.state_cap;

    std::vector<double> deliver(top + 1);
    double slowest = 1.0;
    for (std::size_t j = 0; j <= top; ++j) {
        deliver[j] = delivery_probability(params, j >= n);
        slowest = std::min(slowest, deliver[j]);
    }
    // Every row puts at least `slowest` on age 0, so the kernel contracts
    // total variation by 1 - slowest per step.
    const double contraction = 1.0 - slowest;
    const double to_fixed_point = contraction > 0.0 ? contraction / (1.0 - contraction) : 0.0;

    std::vector<double> pmf(top + 1, 0.0);
    std::vector<double> next(top + 1, 0.0);
    pmf[0] = 1.0;
    double change = INFINITY;
    for (std::uint64_t it = 1; it <= cfg.max_iterations; ++it) {
        double reset = 0.0;
        for (std::size_t j = 0; j <= top; ++j) {
            reset += deliver[j] * pmf[j];
        }
        next[0] = reset;
        for (std::size_t k = 1; k < top; ++k) {
            next[k] = (1.0 - deliver[k - 1]) * pmf[k - 1];
        }
        next[top] = (1.0 - deliver[top - 1]) * pmf[top - 1] + (1.0 - deliver[top]) * pmf[top];

        change = 0.0;
        for (std::size_t k = 0; k <= top; ++k) {
            change += std::abs(next[k] - pmf[k]);
        }
        pmf.swap(next);
        if (change * to_fixed_point < cfg.tolerance) {
            double total = 0.0;
            for (double v : pmf) {
                total += v;
            }
            for (double& v : pmf) {
                v /= total;
            }
            return pmf;
        }
    }
    throw ConvergenceError("power iteration did not converge", change, cfg.max_iterations);
}

NumericAverages avg_numeric(const SubsystemParams& params, std::uint64_t n, const OracleConfig& cfg)
{
    const std::uint64_t top = std::max(cfg.state_cap, recommended_state_cap(params, n));
    const auto threshold = ThresholdPolicy::at(n);

    NumericAverages out;
    out.truncation = top;
    double mass_top = 0.0;
    for (std::uint64_t k = 0; k <= top; ++k) {
        const double mass = stationary_pmf(params, threshold, k);
        out.avg_eaoii += eaoii_value(params, k) * mass;
        if (k >= n) {
            out.avg_aat += mass;
        }
        mass_top = mass;
    }

    // Beyond the truncation u(s_{top+j}) = u(s_top) e^j with e = 1-p(1-q),
    // and s_k splits into three geometric sequences.
    const double e = 1.0 - delivery_probability(params, true);
    if (e > 0.0) {
        const double r = params.r();
        const double a = 1.0 - 2.0 * r;
        const double b = 1.0 - r;
        const double flat = e / (1.0 - e);
        const double agree = std::pow(a, static_cast<double>(top + 1)) * a * e / (1.0 - a * e);
        const double keep = std::pow(b, static_cast<double>(top + 1)) * b * e / (1.0 - b * e);
        out.avg_eaoii += mass_top * (flat + agree - 2.0 * keep) / (2.0 * r);
        out.avg_aat += mass_top * flat;
    }
    return out;
}

struct BruteForceSearch::Ladder {
    unsigned digits;
    std::vector<BigFloat> eaoii;  // s̄_n
    std::vector<BigFloat> aat;    // d̄_n
};

BruteForceSearch::BruteForceSearch(const SubsystemParams& params, std::uint64_t n_max)
    : params_(params), limit_(lambda_limit(params))
{
    if (n_max < 1) {
        throw std::invalid_argument("brute-force search needs n_max >= 1");
    }
    auto ladder = std::make_unique<Ladder>();
    ladder->digits = digits_for_horizon(params, n_max);
    const ScopedPrecision precision(ladder->digits);
    ladder->eaoii.reserve(n_max + 1);
    ladder->aat.reserve(n_max + 1);
    for (std::uint64_t n = 0; n <= n_max; ++n) {
        ladder->eaoii.push_back(closed::avg_eaoii<BigFloat>(params, n));
        ladder->aat.push_back(closed::avg_aat<BigFloat>(params, n));
    }
    ladder_ = std::move(ladder);
}

BruteForceSearch::~BruteForceSearch() = default;
BruteForceSearch::BruteForceSearch(BruteForceSearch&&) noexcept = default;
BruteForceSearch& BruteForceSearch::operator=(BruteForceSearch&&) noexcept = default;

std::uint64_t BruteForceSearch::n_max() const noexcept
{
    return ladder_->eaoii.size() - 1;
}

ThresholdPolicy BruteForceSearch::operator()(double lambda) const
{
    if (!(lambda >= 0.0) || std::isinf(lambda)) {
        throw std::invalid_argument("jamming cost must be finite and non-negative");
    }
    if (lambda >= limit_) {
        return ThresholdPolicy::infinite();
    }
    const ScopedPrecision precision(ladder_->digits);
    const BigFloat cost(lambda);
    std::uint64_t best = 0;
    BigFloat best_reward = ladder_->eaoii[0] - cost * ladder_->aat[0];
    for (std::uint64_t n = 1; n < ladder_->eaoii.size(); ++n) {
        BigFloat reward = ladder_->eaoii[n] - cost * ladder_->aat[n];
        if (reward > best_reward) {
            best_reward = std::move(reward);
            best = n;
        }
    }
    if (best == n_max()) {
        throw AmbiguousRegimeError("reward still increasing at n_max = " + std::to_string(best)
                                   + " for lambda below the no-jam limit; raise n_max");
    }
    return ThresholdPolicy::at(best);
}

int BruteForceSearch::reward_step_sign(std::uint64_t k, double lambda) const
{
    if (k + 1 > n_max()) {
        throw std::out_of_range("reward step beyond the ladder");
    }
    const ScopedPrecision precision(ladder_->digits);
    const BigFloat cost(lambda);
    const BigFloat diff = (ladder_->eaoii[k] - cost * ladder_->aat[k])
                          - (ladder_->eaoii[k + 1] - cost * ladder_->aat[k + 1]);
    return diff > 0 ? 1 : (diff < 0 ? -1 : 0);
}

ThresholdPolicy brute_force_threshold(const SubsystemParams& params, double lambda,
                                      std::uint64_t n_max)
{
    if (lambda >= lambda_limit(params)) {
        return ThresholdPolicy::infinite();
    }
    return BruteForceSearch(params, n_max)(lambda);
}

}  // namespace oracle
}  // namespace aoiijam
