#include "aoiijam/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "aoiijam/core.hpp"

namespace aoiijam::sim {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

class BatchMeans {
public:
    explicit BatchMeans(std::uint64_t horizon)
        : horizon_(horizon), sums_(std::min(kBatchCount, horizon), 0.0), counts_(sums_.size(), 0)
    {
    }

    void add(std::uint64_t slot, double value)
    {
        const std::size_t b = static_cast<std::size_t>(slot * sums_.size() / horizon_);
        sums_[b] += value;
        ++counts_[b];
        total_ += value;
    }

    std::vector<double> batch_means() const
    {
        std::vector<double> means(sums_.size());
        for (std::size_t b = 0; b < sums_.size(); ++b) {
            means[b] = counts_[b] ? sums_[b] / static_cast<double>(counts_[b]) : 0.0;
        }
        return means;
    }

    Estimate finish() const
    {
        Estimate e;
        e.mean = total_ / static_cast<double>(horizon_);
        e.se = standard_error(batch_means());
        return e;
    }

    static double standard_error(const std::vector<double>& means)
    {
        const std::size_t n = means.size();
        if (n < 2) {
            return 0.0;
        }
        double avg = 0.0;
        for (double m : means) {
            avg += m;
        }
        avg /= static_cast<double>(n);
        double ss = 0.0;
        for (double m : means) {
            ss += (m - avg) * (m - avg);
        }
        return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }

private:
    std::uint64_t horizon_;
    std::vector<double> sums_;
    std::vector<std::uint64_t> counts_;
    double total_ = 0.0;
};

/// Grows on demand; ages are visited in increasing order from 0.
class EaoiiCache {
public:
    explicit EaoiiCache(const SubsystemParams& params) : params_(params) {}

    double operator()(AgeIndex k)
    {
        while (values_.size() <= k) {
            values_.push_back(eaoii_value(params_, values_.size()));
        }
        return values_[k];
    }

private:
    SubsystemParams params_;
    std::vector<double> values_;
};

class IndexCache {
public:
    explicit IndexCache(const SubsystemParams& params) : params_(params) {}

    double operator()(AgeIndex k)
    {
        while (values_.size() <= k) {
            values_.push_back(whittle::whittle_index_closed(params_, values_.size()));
        }
        return values_[k];
    }

private:
    SubsystemParams params_;
    std::vector<double> values_;
};

std::uint64_t parse_count(std::string_view text, std::string_view what)
{
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

GroundTruthState step_subsystem(const GroundTruthState& state, const SubsystemParams& params,
                                bool jammed, SlotDraws draws)
{
    GroundTruthState next = state;
    next.slot = state.slot + 1;
    if (draws.flip < params.r()) {
        next.source = !state.source;
    }
    if (draws.channel < delivery_probability(params, jammed)) {
        next.estimate = next.source;
        next.last_delivery_slot = next.slot;
        next.age = 0;
    } else {
        next.age = state.age + 1;
    }
    if (next.source == next.estimate) {
        next.last_agreement_slot = next.slot;
    }
    return next;
}

PolicySpec PolicySpec::random(double jam_prob)
{
    if (!(jam_prob >= 0.0 && jam_prob <= 1.0)) {
        throw std::invalid_argument("random jamming probability must lie in [0, 1]");
    }
    return PolicySpec(Random{jam_prob});
}

PolicySpec PolicySpec::parse(std::string_view text)
{
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    const bool has_arg = colon != std::string_view::npos;

    if (name == "always" && !has_arg) {
        return always();
    }
    if (name == "never" && !has_arg) {
        return never();
    }
    if (name == "threshold" && has_arg) {
        if (arg == "inf" || arg == "INF") {
            return threshold(ThresholdPolicy::infinite());
        }
        return threshold(ThresholdPolicy::at(parse_count(arg, "threshold")));
    }
    if (name == "random" && has_arg) {
        const std::string s(arg);
        std::size_t used = 0;
        double prob = 0.0;
        try {
            prob = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) {
            throw std::invalid_argument("bad jamming probability '" + s + "'");
        }
        return random(prob);
    }
    if (name == "whittle" && has_arg) {
        return whittle(parse_count(arg, "budget"));
    }
    if (name == "random-multi" && has_arg) {
        return random_multi(parse_count(arg, "budget"));
    }
    throw std::invalid_argument("unknown policy '" + std::string(text)
                                + "' (expected threshold:<n|inf>, always, never, random:<p>, "
                                  "whittle:<M> or random-multi:<M>)");
}

bool PolicySpec::is_multi_source() const noexcept
{
    return std::holds_alternative<Whittle>(kind_) || std::holds_alternative<RandomMulti>(kind_);
}

std::string PolicySpec::to_string() const
{
    return std::visit(Overloaded{
                          [](const Threshold& t) { return "threshold:" + t.threshold.to_string(); },
                          [](const Always&) { return std::string("always"); },
                          [](const Never&) { return std::string("never"); },
                          [](const Random& r) {
                              char buf[40];
                              std::snprintf(buf, sizeof buf, "random:%.17g", r.jam_prob);
                              return std::string(buf);
                          },
                          [](const Whittle& w) { return "whittle:" + std::to_string(w.budget); },
                          [](const RandomMulti& r) { return "random-multi:" + std::to_string(r.budget); },
                      },
                      kind_);
}

Estimate SimStats::reward_at(double lambda) const
{
    Estimate e;
    e.mean = eaoii.mean - lambda * aat.mean;
    std::vector<double> rewards(batch_eaoii.size());
    for (std::size_t b = 0; b < rewards.size(); ++b) {
        rewards[b] = batch_eaoii[b] - lambda * batch_aat[b];
    }
    e.se = BatchMeans::standard_error(rewards);
    return e;
}

RandomStream::RandomStream(std::uint64_t seed, Tag tag, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32U)};
    engine_.seed(seq);
}

std::uint64_t RandomStream::below(std::uint64_t n)
{
    if (n == 0) {
        throw std::invalid_argument("empty range");
    }
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) {
        v = engine_();
    }
    return v % n;
}

SimStats simulate_single(const SubsystemParams& params, const PolicySpec& policy, double lambda,
                         std::uint64_t horizon, std::uint64_t seed, const TraceSink& trace)
{
    if (policy.is_multi_source()) {
        throw std::invalid_argument("policy " + policy.to_string() + " needs a fleet");
    }
    if (horizon == 0) {
        throw std::invalid_argument("horizon must be positive");
    }
    if (!std::isfinite(lambda)) {
        throw std::invalid_argument("jamming cost must be finite");
    }

    RandomStream channel(seed, RandomStream::Tag::subsystem, 0);
    RandomStream decisions(seed, RandomStream::Tag::policy, 0);
    EaoiiCache eaoii(params);

    const auto decide = [&](AgeIndex age) {
        return std::visit(Overloaded{
                              [&](const PolicySpec::Threshold& t) { return t.threshold.jams(age); },
                              [](const PolicySpec::Always&) { return true; },
                              [](const PolicySpec::Never&) { return false; },
                              [&](const PolicySpec::Random& r) { return decisions.uniform() < r.jam_prob; },
                              [](const auto&) { return false; },
                          },
                          policy.kind());
    };

    BatchMeans eaoii_acc(horizon), aoii_acc(horizon), aat_acc(horizon);
    SimStats stats;
    stats.slots = horizon;
    stats.seed = seed;
    stats.batches = std::min(kBatchCount, horizon);

    GroundTruthState state;
    for (std::uint64_t t = 0; t < horizon; ++t) {
        const bool jammed = decide(state.age);
        const double s = eaoii(state.age);
        const std::int64_t aoii = state.true_aoii();
        eaoii_acc.add(t, s);
        aoii_acc.add(t, static_cast<double>(aoii));
        aat_acc.add(t, jammed ? 1.0 : 0.0);
        if (stats.age_histogram.size() <= state.age) {
            stats.age_histogram.resize(state.age + 1, 0);
        }
        ++stats.age_histogram[state.age];

        const SlotDraws draws{channel.uniform(), channel.uniform()};
        const GroundTruthState next = step_subsystem(state, params, jammed, draws);
        if (trace) {
            trace(TraceRow{state.slot, 0, state.age, aoii, jammed, next.age == 0});
        }
        state = next;
    }

    stats.eaoii = eaoii_acc.finish();
    stats.true_aoii = aoii_acc.finish();
    stats.aat = aat_acc.finish();
    stats.batch_eaoii = eaoii_acc.batch_means();
    stats.batch_aat = aat_acc.batch_means();
    stats.reward = stats.reward_at(lambda);
    stats.per_subsystem.push_back(SubsystemStats{0, stats.eaoii, stats.true_aoii, stats.aat});
    return stats;
}

SimStats simulate_multi(const FleetConfig& fleet, const PolicySpec& policy, std::uint64_t horizon,
                        std::uint64_t seed, const TraceSink& trace)
{
    if (!policy.is_multi_source()) {
        throw std::invalid_argument("policy " + policy.to_string() + " is single-source");
    }
    if (horizon == 0) {
        throw std::invalid_argument("horizon must be positive");
    }
    const bool by_index = std::holds_alternative<PolicySpec::Whittle>(policy.kind());
    const std::size_t budget = by_index ? std::get<PolicySpec::Whittle>(policy.kind()).budget
                                        : std::get<PolicySpec::RandomMulti>(policy.kind()).budget;
    if (budget > fleet.budget()) {
        throw std::invalid_argument("policy budget " + std::to_string(budget)
                                    + " exceeds the fleet budget " + std::to_string(fleet.budget()));
    }

    const auto& specs = fleet.subsystems();
    const std::size_t n = specs.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<GroundTruthState> states(n);
    std::vector<RandomStream> streams;
    std::vector<EaoiiCache> eaoii;
    std::vector<IndexCache> index;
    std::vector<SubsystemId> ids;
    streams.reserve(n);
    eaoii.reserve(n);
    index.reserve(n);
    ids.reserve(n);
    for (const auto& s : specs) {
        streams.emplace_back(seed, RandomStream::Tag::subsystem, static_cast<std::uint64_t>(s.id));
        eaoii.emplace_back(s.params);
        index.emplace_back(s.params);
        ids.push_back(s.id);
    }
    RandomStream decisions(seed, RandomStream::Tag::policy, 0);

    std::vector<BatchMeans> sub_eaoii(n, BatchMeans(horizon));
    std::vector<BatchMeans> sub_aoii(n, BatchMeans(horizon));
    std::vector<BatchMeans> sub_aat(n, BatchMeans(horizon));
    BatchMeans fleet_eaoii(horizon), fleet_aoii(horizon), fleet_aat(horizon);

    std::vector<double> indices(n);
    std::vector<std::size_t> positions(n);
    std::vector<char> jammed(n);

    for (std::uint64_t t = 0; t < horizon; ++t) {
        std::fill(jammed.begin(), jammed.end(), 0);
        if (by_index) {
            for (std::size_t i = 0; i < n; ++i) {
                indices[i] = index[i](states[i].age);
            }
            const auto chosen = whittle::select_by_index(ids, indices, budget);
            for (std::size_t i = 0; i < n; ++i) {
                jammed[i] = std::binary_search(chosen.begin(), chosen.end(), ids[i]);
            }
        } else {
            // Partial Fisher-Yates: the first `budget` positions form a
            // uniform subset.
            for (std::size_t i = 0; i < n; ++i) {
                positions[i] = i;
            }
            for (std::size_t i = 0; i < budget; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(decisions.below(n - i));
                std::swap(positions[i], positions[j]);
                jammed[positions[i]] = 1;
            }
        }

        std::size_t jam_count = 0;
        double total_s = 0.0;
        double total_aoii = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = eaoii[i](states[i].age);
            const auto aoii = states[i].true_aoii();
            sub_eaoii[i].add(t, s);
            sub_aoii[i].add(t, static_cast<double>(aoii));
            sub_aat[i].add(t, jammed[i] ? 1.0 : 0.0);
            total_s += s;
            total_aoii += static_cast<double>(aoii);
            jam_count += jammed[i] ? 1U : 0U;
        }
        if (jam_count > budget) {
            throw std::logic_error("slot " + std::to_string(t) + " jams " + std::to_string(jam_count)
                                   + " channels, budget " + std::to_string(budget));
        }
        fleet_eaoii.add(t, total_s * inv_n);
        fleet_aoii.add(t, total_aoii * inv_n);
        fleet_aat.add(t, static_cast<double>(jam_count) * inv_n);

        for (std::size_t i = 0; i < n; ++i) {
            const SlotDraws draws{streams[i].uniform(), streams[i].uniform()};
            const GroundTruthState next = step_subsystem(states[i], specs[i].params, jammed[i] != 0, draws);
            if (trace) {
                trace(TraceRow{states[i].slot, ids[i], states[i].age, states[i].true_aoii(),
                               jammed[i] != 0, next.age == 0});
            }
            states[i] = next;
        }
    }

    SimStats stats;
    stats.slots = horizon;
    stats.seed = seed;
    stats.batches = std::min(kBatchCount, horizon);
    stats.eaoii = fleet_eaoii.finish();
    stats.true_aoii = fleet_aoii.finish();
    stats.aat = fleet_aat.finish();
    stats.reward = stats.eaoii;
    stats.batch_eaoii = fleet_eaoii.batch_means();
    stats.batch_aat = fleet_aat.batch_means();
    stats.per_subsystem.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        stats.per_subsystem.push_back(
            SubsystemStats{ids[i], sub_eaoii[i].finish(), sub_aoii[i].finish(), sub_aat[i].finish()});
    }
    return stats;
}

}  // namespace aoiijam::sim
