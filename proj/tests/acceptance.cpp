// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "aoiijam/core.hpp"
#include "aoiijam/errors.hpp"
#include "aoiijam/oracle.hpp"
#include "aoiijam/sim.hpp"
#include "aoiijam/verify.hpp"
#include "aoiijam/whittle.hpp"
#include "cli_runner.hpp"

using namespace aoiijam;
using nlohmann::json;

namespace {

const SubsystemParams kFig{0.9, 0.9, 0.1};
constexpr double kPlateau = 0.011944577161968466;

// Collects the first few failure messages of a criterion.
class Outcome {
public:
    void expect(bool ok, const std::function<std::string()>& what)
    {
        if (!ok) {
            ++failures_;
            if (messages_.size() < 5) {
                messages_.push_back(what());
            }
        }
    }
    void note(std::string text) { notes_.push_back(std::move(text)); }

    bool passed() const { return failures_ == 0; }
    std::size_t failures() const { return failures_; }
    const std::vector<std::string>& messages() const { return messages_; }
    const std::vector<std::string>& notes() const { return notes_; }

private:
    std::size_t failures_ = 0;
    std::vector<std::string> messages_;
    std::vector<std::string> notes_;
};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string triple(const SubsystemParams& p)
{
    return "(" + num(p.p()) + "," + num(p.q()) + "," + num(p.r()) + ")";
}

json cli_json(const std::string& args)
{
    const auto result = testing::run_cli(args + " --format json");
    if (result.exit_code != 0) {
        throw std::runtime_error("aoiijam " + args + " exited with " + std::to_string(result.exit_code));
    }
    return json::parse(result.out);
}

// 1
void identities(Outcome& o)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double r = 0.5 * (1.0 - unit(rng));  // (0, 0.5]
        const SubsystemParams prm(0.5, 0.5, r);
        const double s0 = eaoii_value(prm, 0);
        const double s1 = eaoii_value(prm, 1);
        o.expect(std::abs(s0) <= 1e-14, [&] { return "s_0 = " + num(s0) + " at r=" + num(r); });
        o.expect(std::abs(s1 - r) <= 1e-14, [&] { return "s_1 = " + num(s1) + " at r=" + num(r); });
    }
}

// 2
void stationary(Outcome& o)
{
    const auto grid = verify::default_grid();
    double worst_tv = 0.0;
    double worst_norm = 0.0;
    for (const auto& prm : grid) {
        for (std::uint64_t n : {0, 1, 2, 5, 10}) {
            oracle::OracleConfig cfg;
            cfg.state_cap = oracle::recommended_state_cap(prm, n, 1e-13);
            cfg.tolerance = 1e-13;
            const auto numeric = oracle::stationary_pmf_numeric(prm, n, cfg);
            double tv = 0.0;
            double mass = 0.0;
            for (std::size_t k = 0; k < numeric.size(); ++k) {
                const double closed = stationary_pmf(prm, ThresholdPolicy::at(n), k);
                tv += std::abs(numeric[k] - closed);
                mass += closed;
            }
            // tail of the closed form past the truncation
            for (std::size_t k = numeric.size(); k < numeric.size() + 100000; ++k) {
                const double closed = stationary_pmf(prm, ThresholdPolicy::at(n), k);
                tv += closed;
                mass += closed;
                if (closed < 1e-300) {
                    break;
                }
            }
            tv *= 0.5;
            worst_tv = std::max(worst_tv, tv);
            worst_norm = std::max(worst_norm, std::abs(mass - 1.0));
            o.expect(tv < 1e-8, [&] { return "TV " + num(tv) + " at " + triple(prm) + " n=" + std::to_string(n); });
            o.expect(std::abs(mass - 1.0) <= 1e-12,
                     [&] { return "mass " + num(mass) + " at " + triple(prm) + " n=" + std::to_string(n); });
        }
    }
    o.note(std::to_string(grid.size()) + " triples, worst TV " + num(worst_tv) + ", worst |sum-1| " +
           num(worst_norm));
}

// 3
void averages(Outcome& o)
{
    double worst = 0.0;
    for (const auto& prm : verify::default_grid()) {
        for (std::uint64_t n : {0, 1, 2, 5, 10}) {
            const auto numeric = oracle::avg_numeric(prm, n);
            const double s = avg_eaoii_closed(prm, n);
            const double d = avg_aat_closed(prm, n);
            const auto rel = [](double a, double b) {
                return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b);
            };
            const double es = rel(s, numeric.avg_eaoii);
            const double ed = rel(d, numeric.avg_aat);
            worst = std::max({worst, es, ed});
            o.expect(es < 1e-8, [&] {
                return "avg EAoII " + num(s) + " vs " + num(numeric.avg_eaoii) + " at " + triple(prm) +
                       " n=" + std::to_string(n);
            });
            o.expect(ed < 1e-8, [&] {
                return "avg AAT " + num(d) + " vs " + num(numeric.avg_aat) + " at " + triple(prm) +
                       " n=" + std::to_string(n);
            });
        }
    }
    o.note("worst relative error " + num(worst));
}

// 4
void value_iteration(Outcome& o)
{
    oracle::OracleConfig cfg;
    cfg.state_cap = static_cast<std::uint64_t>(std::ceil(60.0 / delivery_probability(kFig, true))) + 100;
    cfg.tolerance = 1e-9;
    const auto lambdas = verify::value_iteration_lambdas(kFig, 20);
    o.expect(lambdas.size() == 20, [&] { return std::to_string(lambdas.size()) + " costs"; });
    double worst = 0.0;
    for (double lambda : lambdas) {
        const auto vi = oracle::relative_value_iteration(kFig, lambda, cfg);
        ThresholdPolicy found = ThresholdPolicy::infinite();
        try {
            found = oracle::extract_threshold(vi);
        } catch (const StructureError& e) {
            o.expect(false, [&] { return "lambda=" + num(lambda) + ": " + e.what(); });
            continue;
        }
        const auto expected = optimal_threshold(kFig, lambda);
        o.expect(found == expected, [&] {
            return "lambda=" + num(lambda) + ": " + found.to_string() + " vs " + expected.to_string();
        });
        const double gap = std::abs(vi.theta - steady_reward(kFig, expected, lambda));
        worst = std::max(worst, gap);
        o.expect(gap < 1e-6, [&] { return "lambda=" + num(lambda) + ": theta off by " + num(gap); });
    }
    o.note("worst |theta - reward| " + num(worst));
}

// 5
void regimes(Outcome& o)
{
    const double limit = lambda_limit(kFig);
    o.expect(std::abs(limit - 4.4892) <= 0.0005, [&] { return "lambda_inf = " + num(limit); });
    o.expect(optimal_threshold(kFig, limit).is_infinite(), [] { return "threshold at lambda_inf is finite"; });

    std::vector<double> lambdas;
    const double first = lambda_seq(kFig, 0);
    for (int i = 0; i < 40; ++i) {
        lambdas.push_back(first * i / 40.0);  // below λ(s_0): jam always
    }
    for (int i = 0; i < 120; ++i) {
        lambdas.push_back(first + (limit - first) * i / 120.0);
    }
    lambdas.push_back(limit * (1 - 1e-6));
    lambdas.push_back(limit * (1 - 1e-9));
    while (lambdas.size() < 200) {
        lambdas.push_back(limit + (10.0 - limit) * static_cast<double>(lambdas.size() - 162) / 37.0);
    }
    const oracle::BruteForceSearch search(kFig, 400);
    int zero = 0, finite = 0, infinite = 0;
    for (double lambda : lambdas) {
        ThresholdPolicy brute = ThresholdPolicy::infinite();
        try {
            brute = search(lambda);
        } catch (const AmbiguousRegimeError& e) {
            o.expect(false, [&] { return "lambda=" + num(lambda) + ": " + e.what(); });
            continue;
        }
        const auto closed = optimal_threshold(kFig, lambda);
        o.expect(brute == closed, [&] {
            return "lambda=" + num(lambda) + ": brute force " + brute.to_string() + ", closed " + closed.to_string();
        });
        o.expect(closed.is_infinite() == (lambda >= limit),
                 [&] { return "lambda=" + num(lambda) + ": infinite iff lambda >= lambda_inf violated"; });
        (closed.is_infinite() ? infinite : closed.index() == 0 ? zero : finite)++;
    }
    o.expect(zero > 0 && finite > 0 && infinite > 0, [] { return "a regime was not exercised"; });
    o.note(std::to_string(lambdas.size()) + " costs (" + std::to_string(zero) + " n=0, " + std::to_string(finite) +
           " finite, " + std::to_string(infinite) + " INF), lambda_inf " + num(limit));
}

// 6
void whittle_tables(Outcome& o)
{
    double worst = 0.0;
    for (const SubsystemParams& prm : {SubsystemParams(0.2, 0.2, 0.4), SubsystemParams(0.8, 0.8, 0.2)}) {
        const auto closed = whittle::whittle_table_closed(prm, 200);
        const auto iterative = whittle::whittle_index_iterative(prm, 200);
        o.expect(iterative.strictly_increasing, [&] { return triple(prm) + " not strictly increasing"; });
        for (AgeIndex k = 0; k <= 200; ++k) {
            const double err = std::abs(closed[k] - iterative.table[k]) / std::abs(closed[k]);
            worst = std::max(worst, err);
            o.expect(err <= 1e-8, [&] { return triple(prm) + " k=" + std::to_string(k) + " error " + num(err); });
            if (k > 0) {
                // the table saturates at λ_∞ in double; the increment form resolves each step
                o.expect(closed[k] >= closed[k - 1] && lambda_increment(prm, k - 1) > 0.0,
                         [&] { return triple(prm) + " closed not increasing at k=" + std::to_string(k); });
            }
        }
    }
    for (const SubsystemParams& prm : {SubsystemParams(0.2, 0.0, 0.4), SubsystemParams(0.8, 0.0, 0.2)}) {
        const auto closed = whittle::whittle_table_closed(prm, 200);
        const auto iterative = whittle::whittle_index_iterative(prm, 200);
        for (AgeIndex k = 0; k <= 200; ++k) {
            o.expect(closed[k] == 0.0 && iterative.table[k] == 0.0,
                     [&] { return triple(prm) + " nonzero index at k=" + std::to_string(k); });
        }
    }
    o.note("worst relative error " + num(worst));
}

// 7
void sweep(Outcome& o)
{
    const json doc = cli_json("sweep-lambda --full");
    const auto& rows = doc.at("rows");
    const double limit = lambda_limit(kFig);
    double previous = INFINITY;
    std::size_t plateau_rows = 0;
    double plateau_z = 0.0;
    for (const auto& row : rows) {
        const double lambda = row.at("lambda");
        const double closed = row.at("optimal_reward_closed");
        const double random = row.at("random_reward_sim");
        const double random_se = row.at("random_reward_sim_se");
        o.expect(closed <= previous + 1e-12, [&] { return "reward increases at lambda=" + num(lambda); });
        o.expect(closed >= random - 3 * random_se, [&] {
            return "lambda=" + num(lambda) + ": optimal " + num(closed) + " below random " + num(random);
        });
        previous = closed;
        if (lambda > limit) {
            ++plateau_rows;
            const double sim = row.at("optimal_reward_sim");
            const double se = row.at("optimal_reward_sim_se");
            plateau_z = std::abs(sim - kPlateau) / se;
            o.expect(std::abs(closed - kPlateau) <= 1e-12,
                     [&] { return "lambda=" + num(lambda) + ": closed plateau " + num(closed); });
            o.expect(plateau_z <= 3.0, [&] { return "lambda=" + num(lambda) + ": simulated plateau " + num(sim); });
        }
    }
    o.expect(rows.size() == 10001, [&] { return std::to_string(rows.size()) + " rows"; });
    o.expect(plateau_rows > 0, [] { return "no rows above lambda_inf"; });
    o.note(std::to_string(rows.size()) + " costs, plateau simulation off by " + num(plateau_z) + " se");
}

// 8
void ergodic(Outcome& o)
{
    constexpr std::uint64_t kSeed = 2024;
    for (std::uint64_t n : {0, 2, 5}) {
        const auto stats = sim::simulate_single(kFig, sim::PolicySpec::threshold(ThresholdPolicy::at(n)), 1.0,
                                                1'000'000, kSeed);
        double tv = 0.0;
        double covered = 0.0;
        for (std::size_t k = 0; k < stats.age_histogram.size(); ++k) {
            const double closed = stationary_pmf(kFig, ThresholdPolicy::at(n), k);
            tv += std::abs(static_cast<double>(stats.age_histogram[k]) / static_cast<double>(stats.slots) - closed);
            covered += closed;
        }
        tv = 0.5 * (tv + (1.0 - covered));
        const std::string tag = "n=" + std::to_string(n);
        o.expect(tv < 0.01, [&] { return tag + ": occupancy TV " + num(tv); });
        const double s = avg_eaoii_closed(kFig, n);
        const double d = avg_aat_closed(kFig, n);
        // a zero standard error (AAT of always-jam) demands an exact match
        const auto z = [](const sim::Estimate& e, double target) {
            const double gap = std::abs(e.mean - target);
            return e.se > 0.0 ? gap / e.se : (gap == 0.0 ? 0.0 : INFINITY);
        };
        o.expect(z(stats.eaoii, s) <= 3, [&] { return tag + ": EAoII " + num(stats.eaoii.mean) + " vs " + num(s); });
        o.expect(z(stats.aat, d) <= 3, [&] { return tag + ": AAT " + num(stats.aat.mean) + " vs " + num(d); });
        o.expect(z(stats.true_aoii, s) <= 3,
                 [&] { return tag + ": true AoII " + num(stats.true_aoii.mean) + " vs " + num(s); });
        o.note(tag + " TV " + num(tv) + ", z(EAoII) " + num(z(stats.eaoii, s)) + ", z(AAT) " +
               num(z(stats.aat, d)) + ", z(AoII) " + num(z(stats.true_aoii, s)));
    }
}

// 9
void fleet(Outcome& o)
{
    const json doc = cli_json("multi-sim");
    const auto& rows = doc.at("rows");
    o.expect(rows.size() == 6, [&] { return std::to_string(rows.size()) + " fleet sizes"; });
    double previous_total = -INFINITY;
    double previous_se = 0.0;
    std::ostringstream trend;
    for (const auto& row : rows) {
        const double n = row.at("N");
        const double w = row.at("whittle_avg_aoii");
        const double w_se = row.at("whittle_avg_aoii_se");
        const double r = row.at("random_avg_aoii");
        const double r_se = row.at("random_avg_aoii_se");
        o.expect(w >= r - 3 * std::hypot(w_se, r_se),
                 [&] { return "N=" + num(n) + ": Whittle " + num(w) + " below random " + num(r); });
        // total AoII over the fleet grows with N
        const double total = n * w;
        o.expect(total >= previous_total - 3 * std::hypot(n * w_se, previous_se),
                 [&] { return "N=" + num(n) + ": total AoII " + num(total) + " fell"; });
        previous_total = total;
        previous_se = n * w_se;
        trend << " N=" << n << ":" << num(w) << "/" << num(r);
    }
    o.note("per-subsystem AoII whittle/random" + trend.str());
}

// 10
void determinism(Outcome& o)
{
    const std::string dir = "/tmp/aoiijam_acceptance_" + std::to_string(::getpid());
    if (std::system(("mkdir -p " + dir).c_str()) != 0) {
        throw std::runtime_error("cannot create " + dir);
    }
    const std::vector<std::string> commands{
        "verify --format csv",
        "sweep-lambda --lambda-max 5 --horizon 100000",
        "threshold-curve --full",
        "multi-sim --n-list 4,8 --horizon 20000 --seeds 1-3",
        "whittle-table --params 0.2,0.2,0.4 --params 0.8,0.8,0.2 --iterative",
        "sim --params 0.2,0.2,0.4 --params 0.8,0.8,0.2 --policy whittle:1 --horizon 100000 --seed 5",
        "sim --policy random:0.5 --horizon 200000 --seed 3 --format json",
    };
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const std::string a = dir + "/a" + std::to_string(i);
        const std::string b = dir + "/b" + std::to_string(i);
        const auto first = testing::run_cli(commands[i] + " --out " + a);
        const auto second = testing::run_cli(commands[i] + " --out " + b);
        o.expect(first.exit_code == 0 && second.exit_code == 0, [&] { return commands[i] + " failed"; });
        const std::string text = testing::read_file(a);
        o.expect(!text.empty() && text == testing::read_file(b), [&] { return commands[i] + ": outputs differ"; });
    }
    static_cast<void>(!std::system(("rm -rf " + dir).c_str()));
    o.note(std::to_string(commands.size()) + " commands compared byte for byte");
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    void (*run)(Outcome&);
};

}  // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "EAoII identities", 1, identities},
        {2, "stationary pmf vs power iteration", 30, stationary},
        {3, "average closed forms vs truncated sums", 30, averages},
        {4, "value iteration threshold structure", 120, value_iteration},
        {5, "cost regimes vs brute force", 10, regimes},
        {6, "Whittle closed vs iterative", 10, whittle_tables},
        {7, "reward sweep and plateau", 600, sweep},
        {8, "ergodic simulation consistency", 300, ergodic},
        {9, "Whittle vs random fleets", 600, fleet},
        {10, "byte-identical reruns", 60, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome outcome;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(outcome);
        } catch (const std::exception& e) {
            outcome.expect(false, [&] { return std::string("exception: ") + e.what(); });
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        outcome.expect(seconds < c.budget_seconds, [&] {
            return "took " + num(seconds) + " s, budget " + num(c.budget_seconds) + " s";
        });
        const bool ok = outcome.passed();
        failed += ok ? 0 : 1;
        std::printf("%s %2d %-40s %8.2f s (limit %g s)\n", ok ? "PASS" : "FAIL", c.id, c.name, seconds,
                    c.budget_seconds);
        for (const auto& note : outcome.notes()) {
            std::printf("        %s\n", note.c_str());
        }
        for (const auto& message : outcome.messages()) {
            std::printf("        ! %s\n", message.c_str());
        }
        if (outcome.failures() > outcome.messages().size()) {
            std::printf("        ! ... %zu failures in total\n", outcome.failures());
        }
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
