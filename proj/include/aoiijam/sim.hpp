#pragma once

// Seeded slot-by-slot simulation of binary Markov sources, unreliable
// channels, the adversary and the monitor estimate.
//
// Slot order, identical for every policy:
//   1. the adversary sees each age index (from ACK/NACK) and commits d(t);
//   2. statistics of slot t are recorded: s(t), ground-truth AoII, d(t);
//   3. each source flips with probability r;
//   4. each packet is delivered with probability p (idle) or p(1-q) (jammed);
//   5. estimate, age index and last-agreement time are updated.
// All runs start from X(0) = X̂(0) with age index 0.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aoiijam/params.hpp"
#include "aoiijam/whittle.hpp"

namespace aoiijam::sim {

using whittle::FleetConfig;
using whittle::SubsystemId;

struct GroundTruthState {
    std::int64_t slot = 0;
    bool source = false;    // X(t)
    bool estimate = false;  // X̂(t) = X(g(t))
    std::int64_t last_delivery_slot = 0;   // g(t)
    std::int64_t last_agreement_slot = 0;  // latest τ <= t with X(τ) = X̂(t)
    AgeIndex age = 0;                      // t - g(t)

    std::int64_t true_aoii() const noexcept { return slot - last_agreement_slot; }
};

/// Uniform [0,1) draws for one slot of one subsystem.
struct SlotDraws {
    double flip;     // source flips iff flip < r
    double channel;  // delivered iff channel < delivery probability
};

GroundTruthState step_subsystem(const GroundTruthState& state, const SubsystemParams& params,
                                bool jammed, SlotDraws draws);

class PolicySpec {
public:
    struct Threshold {
        ThresholdPolicy threshold;
    };
    struct Always {};
    struct Never {};
    struct Random {
        double jam_prob;
    };
    struct Whittle {
        std::size_t budget;
    };
    struct RandomMulti {
        std::size_t budget;
    };
    using Kind = std::variant<Threshold, Always, Never, Random, Whittle, RandomMulti>;

    static PolicySpec threshold(ThresholdPolicy t) { return PolicySpec(Threshold{t}); }
    static PolicySpec always() { return PolicySpec(Always{}); }
    static PolicySpec never() { return PolicySpec(Never{}); }
    /// Throws std::invalid_argument unless jam_prob lies in [0, 1].
    static PolicySpec random(double jam_prob);
    static PolicySpec whittle(std::size_t budget) { return PolicySpec(Whittle{budget}); }
    static PolicySpec random_multi(std::size_t budget) { return PolicySpec(RandomMulti{budget}); }

    /// "threshold:<n|inf>", "always", "never", "random:<prob>", "whittle:<M>",
    /// "random-multi:<M>".
    static PolicySpec parse(std::string_view text);

    const Kind& kind() const noexcept { return kind_; }
    bool is_multi_source() const noexcept;
    std::string to_string() const;

private:
    explicit PolicySpec(Kind kind) : kind_(kind) {}
    Kind kind_;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;  // batch-means standard error
};

struct SubsystemStats {
    SubsystemId id = 0;
    Estimate eaoii;
    Estimate true_aoii;
    Estimate aat;
};

struct SimStats {
    std::uint64_t slots = 0;
    std::uint64_t seed = 0;
    std::uint64_t batches = 0;
    // Single source: s(t) - λd(t). Multi source: fleet-mean EAoII.
    Estimate reward;
    // Multi-source averages are per-slot fleet totals divided by N.
    Estimate eaoii;
    Estimate true_aoii;
    Estimate aat;
    std::vector<SubsystemStats> per_subsystem;
    /// Single source only: number of slots spent at each age index.
    std::vector<std::uint64_t> age_histogram;
    /// Per-batch means of s(t) and d(t) (fleet means when multi-source).
    std::vector<double> batch_eaoii;
    std::vector<double> batch_aat;

    /// Mean and batch-means error of s(t) - λd(t) for another cost λ. The
    /// trajectory of a policy that ignores λ is unchanged, so this equals
    /// rerunning with the same seed.
    Estimate reward_at(double lambda) const;
};

struct TraceRow {
    std::int64_t slot;
    SubsystemId subsystem_id;
    AgeIndex age_index;
    std::int64_t true_aoii;
    bool jammed;
    bool delivered;
};

using TraceSink = std::function<void(const TraceRow&)>;

/// Number of batches used for standard errors.
inline constexpr std::uint64_t kBatchCount = 100;

/// Independent generator per (seed, stream); subsystem i draws from stream
/// i, the policy from a separate tagged stream, so results do not depend on
/// evaluation order.
class RandomStream {
public:
    enum class Tag : std::uint32_t { subsystem = 0, policy = 1 };

    RandomStream(std::uint64_t seed, Tag tag, std::uint64_t stream);

    /// 53-bit uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }
    /// Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

/// Single-source run. Throws std::invalid_argument for multi-source policies
/// or a zero horizon.
SimStats simulate_single(const SubsystemParams& params, const PolicySpec& policy, double lambda,
                         std::uint64_t horizon, std::uint64_t seed, const TraceSink& trace = {});

/// Fleet run under whittle(M) or random_multi(M). Throws
/// std::invalid_argument for single-source policies or M above the fleet
/// budget.
SimStats simulate_multi(const FleetConfig& fleet, const PolicySpec& policy, std::uint64_t horizon,
                        std::uint64_t seed, const TraceSink& trace = {});

}  // namespace aoiijam::sim
