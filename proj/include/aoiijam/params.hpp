#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace aoiijam {

/// Slots elapsed since the last successful delivery (t - g(t)).
using AgeIndex = std::uint64_t;

/// One source / channel / adversary subsystem.
///
/// p is the per-slot decoding probability, q the probability that a jamming
/// attempt succeeds and r the flip probability of the binary Markov source.
/// Construction enforces 0 < p <= 1, 0 <= q < 1 and 0 < r <= 1/2; every
/// closed form in the library assumes those ranges.
class SubsystemParams {
public:
    SubsystemParams(double p, double q, double r);

    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    double r() const noexcept { return r_; }

    /// "p,q,r" with full round-trip precision.
    std::string to_string() const;

    friend bool operator==(const SubsystemParams&, const SubsystemParams&) = default;

private:
    double p_;
    double q_;
    double r_;
};

/// Jam iff the age index is at least the threshold. The infinite threshold
/// never jams; it is a distinct state, not a large number.
class ThresholdPolicy {
public:
    static constexpr ThresholdPolicy at(std::uint64_t n) noexcept { return ThresholdPolicy(n); }
    static constexpr ThresholdPolicy infinite() noexcept { return ThresholdPolicy(); }

    constexpr bool is_infinite() const noexcept { return !index_.has_value(); }

    /// Throws std::logic_error on the infinite threshold.
    std::uint64_t index() const
    {
        if (!index_) {
            throw std::logic_error("infinite threshold has no index");
        }
        return *index_;
    }

    constexpr bool jams(AgeIndex k) const noexcept { return index_ && k >= *index_; }

    /// Decimal index, or "INF".
    std::string to_string() const;

    friend constexpr bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;

    // Finite thresholds order by index; infinite sorts last.
    friend constexpr std::strong_ordering operator<=>(const ThresholdPolicy& a,
                                                      const ThresholdPolicy& b) noexcept
    {
        if (a.is_infinite() != b.is_infinite()) {
            return a.is_infinite() ? std::strong_ordering::greater : std::strong_ordering::less;
        }
        if (a.is_infinite()) {
            return std::strong_ordering::equal;
        }
        return *a.index_ <=> *b.index_;
    }

private:
    constexpr ThresholdPolicy() noexcept = default;
    constexpr explicit ThresholdPolicy(std::uint64_t n) noexcept : index_(n) {}

    std::optional<std::uint64_t> index_;
};

/// Closed-form steady state of a finite threshold policy.
struct SteadyStateSummary {
    double avg_eaoii = 0.0;  // long-run mean of s(t)
    double avg_aat = 0.0;    // long-run fraction of jammed slots
    double lambda_n = 0.0;   // cost at which thresholds n and n+1 tie
};

}  // namespace aoiijam
