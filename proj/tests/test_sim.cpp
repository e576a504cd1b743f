#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "aoiijam/core.hpp"
#include "aoiijam/sim.hpp"

using namespace aoiijam;
using namespace aoiijam::sim;

namespace {

const SubsystemParams kFig{0.9, 0.9, 0.1};

bool within(double value, const Estimate& e, double k = 3.0)
{
    return std::abs(e.mean - value) <= k * e.se;
}

}  // namespace

TEST_CASE("one slot of the true system")
{
    GroundTruthState mismatch;
    mismatch.slot = 5;
    mismatch.source = true;
    mismatch.estimate = false;
    mismatch.last_delivery_slot = 2;
    mismatch.last_agreement_slot = 3;
    mismatch.age = 3;

    SUBCASE("delivery resets the age and the error")
    {
        const auto next = step_subsystem(mismatch, kFig, false, {0.99, 0.0});
        CHECK(next.age == 0);
        CHECK(next.estimate == next.source);
        CHECK(next.true_aoii() == 0);
        CHECK(next.last_delivery_slot == 6);
    }
    SUBCASE("failure without a flip extends the error")
    {
        const auto next = step_subsystem(mismatch, kFig, true, {0.99, 0.99});
        CHECK(next.age == 4);
        CHECK(next.true_aoii() == mismatch.true_aoii() + 1);
    }
    SUBCASE("the source can flip back to the stale estimate")
    {
        const auto next = step_subsystem(mismatch, kFig, false, {0.0, 0.99});
        CHECK(next.source == next.estimate);
        CHECK(next.true_aoii() == 0);
        CHECK(next.age == 4);
    }
    SUBCASE("jamming lowers the delivery probability")
    {
        // 0.5 delivers when idle (p = 0.9) but not when jammed (0.09)
        CHECK(step_subsystem(mismatch, kFig, false, {0.99, 0.5}).age == 0);
        CHECK(step_subsystem(mismatch, kFig, true, {0.99, 0.5}).age == 4);
    }
}

TEST_CASE("policy specs")
{
    CHECK(PolicySpec::parse("threshold:3").to_string() == "threshold:3");
    CHECK(PolicySpec::parse("threshold:inf").to_string() == "threshold:INF");
    CHECK(PolicySpec::parse("always").to_string() == "always");
    CHECK(PolicySpec::parse("never").to_string() == "never");
    CHECK(PolicySpec::parse("random:0.5").to_string() == "random:0.5");
    CHECK(PolicySpec::parse("whittle:4").is_multi_source());
    CHECK(PolicySpec::parse("random-multi:2").is_multi_source());
    CHECK_FALSE(PolicySpec::parse("threshold:0").is_multi_source());
    for (const char* bad : {"", "threshold", "threshold:-1", "threshold:x", "random:1.5", "random:", "whittle:a",
                            "sometimes"}) {
        CHECK_THROWS_AS(PolicySpec::parse(bad), std::invalid_argument);
    }
    CHECK_THROWS_AS(PolicySpec::random(-0.1), std::invalid_argument);
}

TEST_CASE("random streams")
{
    RandomStream a(42, RandomStream::Tag::subsystem, 0);
    RandomStream b(42, RandomStream::Tag::subsystem, 0);
    RandomStream c(42, RandomStream::Tag::subsystem, 1);
    RandomStream d(42, RandomStream::Tag::policy, 0);
    bool differs_c = false;
    bool differs_d = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        differs_c |= x != c.uniform();
        differs_d |= x != d.uniform();
        CHECK(a.below(7) < 7);
        b.below(7);
    }
    CHECK(differs_c);
    CHECK(differs_d);
}

TEST_CASE("single-source runs")
{
    SUBCASE("never jamming")
    {
        const auto stats = simulate_single(kFig, PolicySpec::never(), 1.0, 1'000'000, 11);
        CHECK(stats.aat.mean == 0.0);
        CHECK(stats.slots == 1'000'000);
        CHECK(stats.batches == kBatchCount);
        CHECK(within(avg_eaoii_no_jam(kFig), stats.true_aoii));
        CHECK(within(avg_eaoii_no_jam(kFig), stats.eaoii));
    }
    SUBCASE("threshold 2 against the closed forms")
    {
        const auto stats = simulate_single(kFig, PolicySpec::threshold(ThresholdPolicy::at(2)), 1.0, 1'000'000, 12);
        CHECK(within(avg_eaoii_closed(kFig, 2), stats.eaoii));
        CHECK(within(avg_aat_closed(kFig, 2), stats.aat));
        CHECK(within(avg_eaoii_closed(kFig, 2), stats.true_aoii));
        CHECK(stats.reward.mean == doctest::Approx(stats.eaoii.mean - stats.aat.mean).epsilon(1e-12));
        const auto other = stats.reward_at(3.0);
        CHECK(other.mean == doctest::Approx(stats.eaoii.mean - 3.0 * stats.aat.mean).epsilon(1e-12));
    }
    SUBCASE("always jamming")
    {
        const auto stats = simulate_single(kFig, PolicySpec::always(), 0.0, 10'000, 3);
        CHECK(stats.aat.mean == 1.0);
    }
    SUBCASE("reproducible and seed dependent")
    {
        const auto policy = PolicySpec::random(0.5);
        const auto a = simulate_single(kFig, policy, 1.0, 50'000, 5);
        const auto b = simulate_single(kFig, policy, 1.0, 50'000, 5);
        const auto c = simulate_single(kFig, policy, 1.0, 50'000, 6);
        CHECK(a.reward.mean == b.reward.mean);
        CHECK(a.true_aoii.mean == b.true_aoii.mean);
        CHECK(a.batch_eaoii == b.batch_eaoii);
        CHECK(a.age_histogram == b.age_histogram);
        CHECK(a.reward.mean != c.reward.mean);
    }
    SUBCASE("trace rows")
    {
        std::uint64_t rows = 0;
        std::uint64_t jammed = 0;
        simulate_single(kFig, PolicySpec::threshold(ThresholdPolicy::at(1)), 1.0, 1000, 9, [&](const TraceRow& r) {
            CHECK(r.slot == static_cast<std::int64_t>(rows));
            CHECK(r.jammed == (r.age_index >= 1));
            CHECK(r.true_aoii >= 0);
            jammed += r.jammed;
            ++rows;
        });
        CHECK(rows == 1000);
        CHECK(jammed > 0);
    }
    CHECK_THROWS_AS(simulate_single(kFig, PolicySpec::whittle(1), 1.0, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_single(kFig, PolicySpec::never(), 1.0, 0, 1), std::invalid_argument);
}

TEST_CASE("fleet runs")
{
    SUBCASE("no budget behaves like never jamming")
    {
        const FleetConfig fleet({{0, kFig}, {1, kFig}}, 1);
        const auto stats = simulate_multi(fleet, PolicySpec::whittle(0), 1'000'000, 21);
        REQUIRE(stats.per_subsystem.size() == 2);
        for (const auto& s : stats.per_subsystem) {
            CHECK(s.aat.mean == 0.0);
            CHECK(within(avg_eaoii_no_jam(kFig), s.eaoii));
            CHECK(within(avg_eaoii_no_jam(kFig), s.true_aoii));
        }
    }
    SUBCASE("Whittle jams the oldest identical subsystems")
    {
        const FleetConfig fleet({{0, kFig}, {1, kFig}, {2, kFig}, {3, kFig}}, 3);
        std::map<std::int64_t, std::vector<TraceRow>> slots;
        simulate_multi(fleet, PolicySpec::whittle(3), 2000, 4, [&](const TraceRow& r) { slots[r.slot].push_back(r); });
        REQUIRE(slots.size() == 2000);
        for (const auto& [slot, rows] : slots) {
            REQUIRE(rows.size() == 4);
            auto order = rows;
            std::sort(order.begin(), order.end(), [](const TraceRow& a, const TraceRow& b) {
                return a.age_index != b.age_index ? a.age_index > b.age_index : a.subsystem_id < b.subsystem_id;
            });
            for (std::size_t i = 0; i < order.size(); ++i) {
                CHECK(order[i].jammed == (i < 3));
            }
        }
    }
    SUBCASE("random selection jams exactly M channels")
    {
        const FleetConfig fleet({{0, kFig}, {1, kFig}, {2, kFig}, {3, kFig}, {4, kFig}}, 2);
        std::map<std::int64_t, int> jammed;
        simulate_multi(fleet, PolicySpec::random_multi(2), 3000, 8, [&](const TraceRow& r) { jammed[r.slot] += r.jammed; });
        for (const auto& [slot, count] : jammed) {
            CHECK(count == 2);
        }
    }
    SUBCASE("two classes: index policy beats random selection")
    {
        std::vector<whittle::SubsystemSpec> specs;
        for (int i = 0; i < 20; ++i) {
            specs.push_back({i, i < 10 ? SubsystemParams(0.2, 0.2, 0.4) : SubsystemParams(0.8, 0.8, 0.2)});
        }
        const FleetConfig fleet(specs, 10);
        const auto w = simulate_multi(fleet, PolicySpec::whittle(10), 100'000, 1);
        const auto r = simulate_multi(fleet, PolicySpec::random_multi(10), 100'000, 1);
        CHECK(w.true_aoii.mean >= r.true_aoii.mean);
        CHECK(w.aat.mean == doctest::Approx(0.5));
    }
    SUBCASE("reproducible")
    {
        const FleetConfig fleet({{0, kFig}, {5, SubsystemParams(0.3, 0.5, 0.2)}, {9, kFig}}, 2);
        const auto a = simulate_multi(fleet, PolicySpec::random_multi(1), 20'000, 77);
        const auto b = simulate_multi(fleet, PolicySpec::random_multi(1), 20'000, 77);
        CHECK(a.true_aoii.mean == b.true_aoii.mean);
        CHECK(a.batch_eaoii == b.batch_eaoii);
    }
    const FleetConfig small({{0, kFig}, {1, kFig}}, 1);
    CHECK_THROWS_AS(simulate_multi(small, PolicySpec::never(), 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_multi(small, PolicySpec::whittle(2), 100, 1), std::invalid_argument);
}
