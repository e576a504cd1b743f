#include "aoiijam/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "aoiijam/closed_forms.hpp"
#include "aoiijam/core.hpp"
#include "aoiijam/errors.hpp"
#include "aoiijam/multiprecision.hpp"
#include "aoiijam/oracle.hpp"
#include "aoiijam/whittle.hpp"

namespace aoiijam::verify {

namespace {

using nlohmann::json;

constexpr double kCorruption = 1.0 + 1e-6;

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string where(const SubsystemParams& params)
{
    return "p=" + fmt(params.p()) + " q=" + fmt(params.q()) + " r=" + fmt(params.r());
}

/// |a - b| relative to the larger magnitude, floored at `floor`.
double rel_error(double a, double b, double floor = 1e-12)
{
    if (a == b) {
        return 0.0;
    }
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Closed forms as seen by the checks, with the configured fault applied.
struct Forms {
    Fault fault = Fault::none;

    double avg_eaoii(const SubsystemParams& prm, std::uint64_t n) const
    {
        const double v = avg_eaoii_closed(prm, n);
        return fault == Fault::avg_eaoii ? v * kCorruption : v;
    }
    double avg_aat(const SubsystemParams& prm, std::uint64_t n) const
    {
        const double v = avg_aat_closed(prm, n);
        return fault == Fault::avg_aat ? v * kCorruption : v;
    }
    double lambda(const SubsystemParams& prm, std::uint64_t n) const
    {
        const double v = lambda_seq(prm, n);
        return fault == Fault::lambda_seq ? v * kCorruption : v;
    }
    double pmf(const SubsystemParams& prm, std::uint64_t n, AgeIndex i) const
    {
        const double v = stationary_pmf(prm, ThresholdPolicy::at(n), i);
        return fault == Fault::stationary_pmf ? v * kCorruption : v;
    }
    double whittle(const SubsystemParams& prm, AgeIndex k) const
    {
        const double v = whittle::whittle_index_closed(prm, k);
        return fault == Fault::whittle_closed ? v * kCorruption : v;
    }
};

class Tracker {
public:
    Tracker(std::string name, std::vector<std::string> covers, double tolerance)
        : start_(std::chrono::steady_clock::now())
    {
        result_.name = std::move(name);
        result_.covers = std::move(covers);
        result_.tolerance = tolerance;
    }

    /// Numeric comparison against the check tolerance. NaN fails.
    void error(double err, const std::function<std::string()>& witness)
    {
        ++result_.cases;
        const bool ok = err <= result_.tolerance;
        if (!ok && result_.passed) {
            result_.passed = false;
            result_.witness = witness();
        }
        if (std::isnan(err) || err > result_.worst_error) {
            result_.worst_error = std::isnan(err) ? INFINITY : err;
            if (result_.passed) {
                result_.witness = witness();
            }
        }
    }

    /// Boolean property; does not touch the worst error.
    void require(bool ok, const std::function<std::string()>& witness)
    {
        ++result_.cases;
        if (!ok && result_.passed) {
            result_.passed = false;
            result_.witness = witness();
        }
    }

    CheckResult finish()
    {
        result_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        return std::move(result_);
    }

private:
    CheckResult result_;
    std::chrono::steady_clock::time_point start_;
};

/// Mass beyond age `top` for threshold n <= top: u(s_top)·e/(1-e).
double tail_mass(const SubsystemParams& params, double mass_top)
{
    const double e = 1.0 - delivery_probability(params, true);
    return e > 0.0 ? mass_top * e / (1.0 - e) : 0.0;
}

json triple_json(const SubsystemParams& p)
{
    return json::array({p.p(), p.q(), p.r()});
}

std::vector<SubsystemParams> triples_from(const json& arr, const char* key)
{
    if (!arr.is_array()) {
        throw std::invalid_argument(std::string(key) + " must be an array of [p, q, r]");
    }
    std::vector<SubsystemParams> out;
    for (const auto& t : arr) {
        if (!t.is_array() || t.size() != 3) {
            throw std::invalid_argument(std::string(key) + " entries must be [p, q, r]");
        }
        out.emplace_back(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
    }
    return out;
}

const std::map<std::string, Fault>& fault_names()
{
    static const std::map<std::string, Fault> names{
        {"none", Fault::none},
        {"avg_eaoii", Fault::avg_eaoii},
        {"avg_aat", Fault::avg_aat},
        {"lambda_seq", Fault::lambda_seq},
        {"stationary_pmf", Fault::stationary_pmf},
        {"whittle_closed", Fault::whittle_closed},
    };
    return names;
}

}  // namespace

const std::vector<std::string>& closed_form_manifest()
{
    static const std::vector<std::string> manifest{
        "eaoii_value",      "delivery_probability", "transition_distribution", "stationary_pmf",
        "no_jam_pmf",       "avg_eaoii_closed",     "avg_eaoii_no_jam",        "avg_aat_closed",
        "lambda_seq",       "lambda_increment",     "lambda_limit",            "steady_reward",
        "optimal_threshold", "whittle_index_closed", "whittle_index_iterative", "indexability_check",
    };
    return manifest;
}

std::vector<SubsystemParams> default_grid()
{
    std::vector<SubsystemParams> grid;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        for (double q : {0.0, 0.3, 0.6, 0.9}) {
            for (double r : {0.05, 0.2, 0.35, 0.5}) {
                grid.emplace_back(p, q, r);
            }
        }
    }
    return grid;
}

VerifyConfig VerifyConfig::defaults()
{
    VerifyConfig cfg;
    cfg.grid = default_grid();
    cfg.value_iteration = {SubsystemParams(0.9, 0.9, 0.1)};
    cfg.whittle = {SubsystemParams(0.2, 0.2, 0.4), SubsystemParams(0.8, 0.8, 0.2),
                   SubsystemParams(0.9, 0.9, 0.1), SubsystemParams(0.5, 0.3, 0.25),
                   SubsystemParams(0.7, 0.0, 0.3)};
    return cfg;
}

VerifyConfig VerifyConfig::from_json(const json& doc)
{
    if (!doc.is_object()) {
        throw std::invalid_argument("verify config must be a JSON object");
    }
    VerifyConfig cfg = defaults();
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "grid") {
                cfg.grid = triples_from(value, "grid");
            } else if (key == "thresholds") {
                cfg.thresholds = value.get<std::vector<std::uint64_t>>();
            } else if (key == "lambda_points") {
                cfg.lambda_points = value.get<std::size_t>();
            } else if (key == "brute_force_cap") {
                cfg.brute_force_cap = value.get<std::uint64_t>();
            } else if (key == "value_iteration") {
                cfg.value_iteration = triples_from(value, "value_iteration");
            } else if (key == "whittle") {
                cfg.whittle = triples_from(value, "whittle");
            } else if (key == "whittle_k_max") {
                cfg.whittle_k_max = value.get<std::uint64_t>();
            } else if (key == "slope_n_max") {
                cfg.slope_n_max = value.get<std::uint64_t>();
            } else if (key == "fault") {
                const auto it = fault_names().find(value.get<std::string>());
                if (it == fault_names().end()) {
                    throw std::invalid_argument("unknown fault '" + value.get<std::string>() + "'");
                }
                cfg.fault = it->second;
            } else {
                throw std::invalid_argument("unknown verify config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed verify config: ") + e.what());
    }
    if (cfg.brute_force_cap < 20) {
        throw std::invalid_argument("brute_force_cap must be at least 20");
    }
    return cfg;
}

json VerifyConfig::to_json() const
{
    json doc;
    doc["grid"] = json::array();
    for (const auto& p : grid) {
        doc["grid"].push_back(triple_json(p));
    }
    doc["thresholds"] = thresholds;
    doc["lambda_points"] = lambda_points;
    doc["brute_force_cap"] = brute_force_cap;
    doc["value_iteration"] = json::array();
    for (const auto& p : value_iteration) {
        doc["value_iteration"].push_back(triple_json(p));
    }
    doc["whittle"] = json::array();
    for (const auto& p : whittle) {
        doc["whittle"].push_back(triple_json(p));
    }
    doc["whittle_k_max"] = whittle_k_max;
    doc["slope_n_max"] = slope_n_max;
    for (const auto& [name, f] : fault_names()) {
        if (f == fault) {
            doc["fault"] = name;
        }
    }
    return doc;
}

json VerifyReport::to_json() const
{
    json doc;
    doc["passed"] = passed;
    doc["checks"] = json::array();
    for (const auto& c : checks) {
        doc["checks"].push_back({{"name", c.name},
                                 {"covers", c.covers},
                                 {"passed", c.passed},
                                 {"cases", c.cases},
                                 {"tolerance", c.tolerance},
                                 {"worst_error", c.worst_error},
                                 {"witness", c.witness}});
    }
    doc["manifest"] = closed_form_manifest();
    doc["uncovered"] = uncovered;
    return doc;
}

std::vector<double> value_iteration_lambdas(const SubsystemParams& params, std::size_t count)
{
    if (count < 4) {
        throw std::invalid_argument("need at least four value-iteration costs");
    }
    std::vector<double> out{0.0, 0.5 * lambda_seq(params, 0)};
    for (std::uint64_t n = 0; out.size() < count - 2; ++n) {
        out.push_back(0.5 * (lambda_seq(params, n) + lambda_seq(params, n + 1)));
    }
    const double limit = lambda_limit(params);
    out.push_back(limit + 0.5);
    out.push_back(2.0 * limit + 1.0);
    return out;
}

CheckResult check_eaoii_identities(const VerifyConfig& cfg)
{
    Tracker t("eaoii_identities", {"eaoii_value"}, 1e-12);
    for (const auto& prm : cfg.grid) {
        const double r = prm.r();
        t.error(std::abs(eaoii_value(prm, 0)), [&] { return where(prm) + " k=0"; });
        t.error(std::abs(eaoii_value(prm, 1) - r), [&] { return where(prm) + " k=1"; });
        double previous = eaoii_value(prm, 0);
        for (AgeIndex k = 0; k < 200; ++k) {
            const double next = eaoii_value(prm, k + 1);
            const double increment = std::pow(1.0 - r, k + 1.0) - std::pow(1.0 - 2.0 * r, k + 1.0);
            t.error(std::abs((next - previous) - increment),
                    [&] { return where(prm) + " k=" + std::to_string(k); });
            if (increment > 1e-14) {
                t.require(next > previous, [&] { return where(prm) + " not increasing at k=" + std::to_string(k); });
            }
            // strict only while the gap to 1/(2r) is above rounding
            const bool resolvable = std::pow(1.0 - r, k + 2.0) > 1e-14;
            t.require(resolvable ? next < 0.5 / r : next <= 0.5 / r,
                      [&] { return where(prm) + " exceeds 1/(2r) at k=" + std::to_string(k + 1); });
            previous = next;
        }
    }
    return t.finish();
}

CheckResult check_kernel(const VerifyConfig& cfg)
{
    Tracker t("kernel_stochastic", {"delivery_probability", "transition_distribution"}, 0x1.0p-52);
    for (const auto& prm : cfg.grid) {
        t.error(std::abs(delivery_probability(prm, false) - prm.p()), [&] { return where(prm) + " idle"; });
        t.error(std::abs(delivery_probability(prm, true) - prm.p() * (1.0 - prm.q())),
                [&] { return where(prm) + " jammed"; });
        for (AgeIndex k : {0, 1, 7, 100}) {
            for (bool jammed : {false, true}) {
                const auto outcomes = transition_distribution(prm, k, jammed);
                t.require(outcomes[0].next == 0 && outcomes[1].next == k + 1,
                          [&] { return where(prm) + " wrong successors at k=" + std::to_string(k); });
                t.error(std::abs(outcomes[0].probability + outcomes[1].probability - 1.0),
                        [&] { return where(prm) + " k=" + std::to_string(k); });
            }
        }
    }
    return t.finish();
}

CheckResult check_stationary_power_iteration(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("stationary_power_iteration", {"stationary_pmf", "no_jam_pmf"}, 1e-8);
    for (const auto& prm : cfg.grid) {
        for (std::uint64_t n : cfg.thresholds) {
            oracle::OracleConfig oc;
            oc.state_cap = oracle::recommended_state_cap(prm, n, 1e-12);
            oc.tolerance = 1e-13;
            const auto numeric = oracle::stationary_pmf_numeric(prm, n, oc);
            double tv = 0.0;
            for (std::size_t k = 0; k < numeric.size(); ++k) {
                tv += std::abs(numeric[k] - forms.pmf(prm, n, k));
            }
            tv += tail_mass(prm, forms.pmf(prm, n, oc.state_cap));
            t.error(0.5 * tv, [&] { return where(prm) + " n=" + std::to_string(n); });
        }
        // Threshold beyond the truncation: the chain never jams.
        oracle::OracleConfig oc;
        oc.state_cap = std::max<std::uint64_t>(
            10, static_cast<std::uint64_t>(std::ceil(std::log(1e-13) / std::log(std::max(1e-300, 1.0 - prm.p())))));
        oc.tolerance = 1e-13;
        const auto numeric = oracle::stationary_pmf_numeric(prm, oc.state_cap + 1, oc);
        double tv = 0.0;
        for (std::size_t k = 0; k < numeric.size(); ++k) {
            tv += std::abs(numeric[k] - no_jam_pmf(prm, k));
        }
        t.error(0.5 * tv, [&] { return where(prm) + " never jam"; });
    }
    return t.finish();
}

CheckResult check_stationary_balance(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("stationary_balance", {"stationary_pmf"}, 1e-10);
    for (const auto& prm : cfg.grid) {
        for (std::uint64_t n : cfg.thresholds) {
            const std::uint64_t top = oracle::recommended_state_cap(prm, n, 1e-14);
            std::vector<double> u(top + 1);
            for (std::uint64_t k = 0; k <= top; ++k) {
                u[k] = forms.pmf(prm, n, k);
            }
            const double beyond = tail_mass(prm, u[top]);
            double total = beyond;
            double inflow0 = delivery_probability(prm, true) * beyond;
            for (std::uint64_t j = 0; j <= top; ++j) {
                total += u[j];
                inflow0 += delivery_probability(prm, j >= n) * u[j];
            }
            t.error(std::abs(total - 1.0), [&] { return where(prm) + " n=" + std::to_string(n) + " normalization"; });
            t.error(std::abs(u[0] - inflow0), [&] { return where(prm) + " n=" + std::to_string(n) + " k=0"; });
            const std::uint64_t k_test = std::min<std::uint64_t>(top, 200);
            for (std::uint64_t k = 1; k <= k_test; ++k) {
                const double inflow = (1.0 - delivery_probability(prm, k - 1 >= n)) * u[k - 1];
                t.error(std::abs(u[k] - inflow),
                        [&] { return where(prm) + " n=" + std::to_string(n) + " k=" + std::to_string(k); });
            }
        }
    }
    return t.finish();
}

CheckResult check_avg_eaoii(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("avg_eaoii_oracle", {"avg_eaoii_closed", "avg_eaoii_no_jam"}, 1e-8);
    for (const auto& prm : cfg.grid) {
        for (std::uint64_t n : cfg.thresholds) {
            const auto numeric = oracle::avg_numeric(prm, n);
            t.error(rel_error(forms.avg_eaoii(prm, n), numeric.avg_eaoii),
                    [&] { return where(prm) + " n=" + std::to_string(n); });
        }
        // Never-jam mean against Σ s_k p(1-p)^k.
        double sum = 0.0;
        for (AgeIndex k = 0;; ++k) {
            const double mass = no_jam_pmf(prm, k);
            sum += eaoii_value(prm, k) * mass;
            if (mass < 1e-18 || k > 100000) {
                break;
            }
        }
        t.error(rel_error(avg_eaoii_no_jam(prm), sum), [&] { return where(prm) + " never jam"; });

        // s̄_n strictly decreasing wherever jamming matters (q > 0, p < 1).
        if (prm.q() > 0.0 && prm.p() < 1.0 && !cfg.thresholds.empty()) {
            const std::uint64_t top = *std::max_element(cfg.thresholds.begin(), cfg.thresholds.end()) + 1;
            const ScopedPrecision precision(digits_for_horizon(prm, top));
            BigFloat previous = closed::avg_eaoii<BigFloat>(prm, 0);
            for (std::uint64_t n = 1; n <= top; ++n) {
                BigFloat current = closed::avg_eaoii<BigFloat>(prm, n);
                t.require(current < previous,
                          [&] { return where(prm) + " mean EAoII not decreasing at n=" + std::to_string(n); });
                previous = std::move(current);
            }
        }
    }
    return t.finish();
}

CheckResult check_avg_aat(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("avg_aat_oracle", {"avg_aat_closed"}, 1e-8);
    for (const auto& prm : cfg.grid) {
        for (std::uint64_t n : cfg.thresholds) {
            const auto numeric = oracle::avg_numeric(prm, n);
            t.error(rel_error(forms.avg_aat(prm, n), numeric.avg_aat),
                    [&] { return where(prm) + " n=" + std::to_string(n); });
        }
    }
    return t.finish();
}

CheckResult check_lambda_closed_vs_ratio(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("lambda_closed_vs_ratio", {"lambda_seq", "steady_reward"}, 1e-8);
    std::set<std::uint64_t> ns(cfg.thresholds.begin(), cfg.thresholds.end());
    ns.insert({20, 50});
    for (const auto& prm : cfg.grid) {
        if (prm.p() == 1.0) {
            continue;  // d̄_{n+1} = d̄_n: the ratio is 0/0
        }
        for (std::uint64_t n : ns) {
            double ratio = 0.0;
            {
                const ScopedPrecision precision(digits_for_horizon(prm, n + 1));
                ratio = closed::lambda_ratio<BigFloat>(prm, n).convert_to<double>();
            }
            const double level = forms.lambda(prm, n);
            t.error(rel_error(level, ratio), [&] { return where(prm) + " n=" + std::to_string(n); });
            if (n <= 10) {
                // both reward lines meet at λ(s_n)
                const double gap = steady_reward(prm, n, level) - steady_reward(prm, n + 1, level);
                t.error(std::abs(gap) * 1e-2,
                        [&] { return where(prm) + " reward tie at n=" + std::to_string(n); });
            }
        }
    }
    return t.finish();
}

CheckResult check_lambda_monotone_and_limit(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("lambda_monotone_and_limit", {"lambda_seq", "lambda_increment", "lambda_limit"}, 1e-8);
    for (const auto& prm : cfg.grid) {
        const double limit = lambda_limit(prm);
        if (prm.q() == 0.0) {
            t.require(limit == 0.0, [&] { return where(prm) + " nonzero limit with q=0"; });
            t.require(forms.lambda(prm, 3) == 0.0, [&] { return where(prm) + " nonzero lambda with q=0"; });
            continue;
        }
        constexpr std::uint64_t kTop = 200;
        const ScopedPrecision precision(digits_for_horizon(prm, kTop + 1));
        const BigFloat big_limit = closed::lambda_limit<BigFloat>(prm);
        BigFloat previous = closed::lambda_seq<BigFloat>(prm, 0);
        for (std::uint64_t n = 0; n < kTop; ++n) {
            BigFloat current = closed::lambda_seq<BigFloat>(prm, n + 1);
            const double exact_step = BigFloat(current - previous).convert_to<double>();
            const double formula = lambda_increment(prm, n);
            t.error(rel_error(formula, exact_step, 1e-300), [&] { return where(prm) + " increment n=" + std::to_string(n); });
            t.require(formula > 0.0, [&] { return where(prm) + " non-positive increment at n=" + std::to_string(n); });
            t.require(current < big_limit, [&] { return where(prm) + " lambda reaches the limit at n=" + std::to_string(n + 1); });
            previous = std::move(current);
        }
        double sup = 0.0;
        for (std::uint64_t n = 0; n <= 10000; ++n) {
            sup = std::max(sup, forms.lambda(prm, n));
        }
        // absolute 1e-6, scaled into the 1e-8 budget
        t.error(std::abs(sup - limit) * 1e-2, [&] { return where(prm) + " sup vs limit"; });
    }
    return t.finish();
}

CheckResult check_exchange_conditions(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("exchange_conditions", {"steady_reward", "lambda_seq"}, 0.0);
    for (const auto& prm : cfg.grid) {
        if (prm.q() == 0.0) {
            continue;
        }
        constexpr std::uint64_t kTop = 10;
        const oracle::BruteForceSearch ladder(prm, kTop + 1);
        const std::uint64_t last = prm.p() == 1.0 ? 0 : kTop;
        for (std::uint64_t k = 0; k <= last; ++k) {
            const double level = forms.lambda(prm, k);
            t.require(ladder.reward_step_sign(k, level * (1.0 - 1e-6)) > 0,
                      [&] { return where(prm) + " k=" + std::to_string(k) + " below lambda(s_k)"; });
            t.require(ladder.reward_step_sign(k, level * (1.0 + 1e-6)) < 0,
                      [&] { return where(prm) + " k=" + std::to_string(k) + " above lambda(s_k)"; });
        }
    }
    return t.finish();
}

CheckResult check_threshold_vs_brute_force(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("threshold_vs_brute_force", {"optimal_threshold", "lambda_limit"}, 0.0);
    std::mt19937_64 rng(20240611);
    for (const auto& prm : cfg.grid) {
        if (prm.q() == 0.0) {
            // λ_∞ = 0: every cost is in the never-jam regime.
            for (double lambda : {0.0, 0.5, 3.0}) {
                t.require(optimal_threshold(prm, lambda).is_infinite(),
                          [&] { return where(prm) + " lambda=" + fmt(lambda); });
            }
            continue;
        }
        const std::uint64_t cap = cfg.brute_force_cap;
        const oracle::BruteForceSearch search(prm, cap);
        const double limit = lambda_limit(prm);
        const double ceiling = forms.lambda(prm, cap / 2);

        std::vector<double> costs{0.0, 0.5 * forms.lambda(prm, 0), limit, 1.25 * limit + 0.1};
        const std::size_t budget = std::max<std::size_t>(cfg.lambda_points, costs.size());
        for (std::uint64_t n = 0; costs.size() < (budget + costs.size()) / 2 && n + 1 < cap / 2; ++n) {
            costs.push_back(0.5 * (forms.lambda(prm, n) + forms.lambda(prm, n + 1)));
        }
        std::uniform_real_distribution<double> uniform(0.0, ceiling);
        while (costs.size() < budget) {
            costs.push_back(uniform(rng));
        }

        for (double lambda : costs) {
            ThresholdPolicy expected = ThresholdPolicy::infinite();
            try {
                expected = search(lambda);
            } catch (const AmbiguousRegimeError& e) {
                t.require(false, [&] { return where(prm) + " lambda=" + fmt(lambda) + ": " + e.what(); });
                continue;
            }
            const ThresholdPolicy got = optimal_threshold(prm, lambda);
            if (prm.p() == 1.0) {
                // Every n >= 1 has d̄_n = s̄_n = 0; compare rewards, not indices.
                const double gap = steady_reward(prm, got, lambda) - steady_reward(prm, expected, lambda);
                t.require(std::abs(gap) <= 1e-12,
                          [&] { return where(prm) + " lambda=" + fmt(lambda) + " reward gap " + fmt(gap); });
            } else {
                t.require(got == expected, [&] {
                    return where(prm) + " lambda=" + fmt(lambda) + " closed " + got.to_string()
                           + " vs brute force " + expected.to_string();
                });
            }
        }
    }
    return t.finish();
}

CheckResult check_value_iteration(const VerifyConfig& cfg)
{
    Tracker t("value_iteration_threshold", {"optimal_threshold", "steady_reward"}, 1e-6);
    for (const auto& prm : cfg.value_iteration) {
        oracle::OracleConfig oc;
        oc.state_cap = static_cast<std::uint64_t>(std::ceil(60.0 / delivery_probability(prm, true))) + 100;
        oc.tolerance = 1e-9;
        for (double lambda : value_iteration_lambdas(prm, std::max<std::size_t>(cfg.lambda_points, 4))) {
            const auto tag = [&] { return where(prm) + " lambda=" + fmt(lambda); };
            oracle::ValueIterationResult vi;
            try {
                vi = oracle::relative_value_iteration(prm, lambda, oc);
            } catch (const ConvergenceError& e) {
                t.require(false, [&] { return tag() + ": " + e.what(); });
                continue;
            }
            ThresholdPolicy found = ThresholdPolicy::infinite();
            try {
                found = oracle::extract_threshold(vi);
            } catch (const StructureError& e) {
                t.require(false, [&] { return tag() + ": " + e.what(); });
                continue;
            }
            const ThresholdPolicy expected = optimal_threshold(prm, lambda);
            t.require(found == expected, [&] {
                return tag() + " value iteration " + found.to_string() + " vs closed " + expected.to_string();
            });
            t.error(std::abs(vi.theta - steady_reward(prm, expected, lambda)), [&] { return tag() + " theta"; });
            for (std::size_t i = 1; i < vi.values.size(); ++i) {
                t.require(vi.values[i] >= vi.values[i - 1] - 1e-9,
                          [&] { return tag() + " values decrease at " + std::to_string(i); });
                t.require(vi.jam_advantage[i] >= vi.jam_advantage[i - 1] - 1e-9,
                          [&] { return tag() + " jam advantage decreases at " + std::to_string(i); });
            }
        }
    }
    return t.finish();
}

CheckResult check_whittle_equivalence(const VerifyConfig& cfg)
{
    const Forms forms{cfg.fault};
    Tracker t("whittle_closed_vs_iterative", {"whittle_index_closed", "whittle_index_iterative"}, 1e-8);
    for (const auto& prm : cfg.whittle) {
        if (prm.p() == 1.0) {
            continue;
        }
        const auto iterative = whittle::whittle_index_iterative(prm, cfg.whittle_k_max);
        const double limit = lambda_limit(prm);
        for (AgeIndex k = 0; k <= cfg.whittle_k_max; ++k) {
            const double closed = forms.whittle(prm, k);
            t.error(rel_error(closed, iterative.table[k]), [&] { return where(prm) + " k=" + std::to_string(k); });
            t.require(closed <= limit, [&] { return where(prm) + " index above the limit at k=" + std::to_string(k); });
        }
        if (prm.q() == 0.0) {
            t.require(std::all_of(iterative.table.values.begin(), iterative.table.values.end(),
                                  [](double v) { return v == 0.0; }),
                      [&] { return where(prm) + " nonzero iterative table with q=0"; });
            continue;
        }
        t.require(iterative.strictly_increasing, [&] { return where(prm) + " table not strictly increasing"; });
        t.require(iterative.skipped_anchors.empty(), [&] {
            return where(prm) + " minimizer skipped past anchor "
                   + std::to_string(iterative.skipped_anchors.front());
        });
        for (std::size_t j = 0; j < iterative.minimizers.size(); ++j) {
            t.require(iterative.minimizers[j] == j + 1,
                      [&] { return where(prm) + " step " + std::to_string(j) + " minimizer " + std::to_string(iterative.minimizers[j]); });
        }
    }
    return t.finish();
}

CheckResult check_indexability(const VerifyConfig& cfg)
{
    Tracker t("indexability", {"indexability_check", "optimal_threshold"}, 0.0);
    for (const auto& prm : cfg.grid) {
        const auto result = whittle::indexability_check(prm, 200);
        t.require(result.indexable, [&] { return where(prm) + " not indexable"; });
        if (prm.p() < 1.0) {
            t.require(result.strictly_decreasing, [&] { return where(prm) + " d̄ not strictly decreasing"; });
        }
        // Passive sets grow with the cost: thresholds never decrease.
        const double top = 1.2 * lambda_limit(prm) + 0.1;
        ThresholdPolicy previous = ThresholdPolicy::at(0);
        for (int i = 0; i <= 200; ++i) {
            const double lambda = top * i / 200.0;
            const ThresholdPolicy current = optimal_threshold(prm, lambda);
            t.require(current >= previous, [&] { return where(prm) + " threshold drops at lambda=" + fmt(lambda); });
            previous = current;
        }
    }
    return t.finish();
}

CheckResult check_slope_dominance(const VerifyConfig& cfg)
{
    Tracker t("slope_dominance", {"whittle_index_iterative"}, 1e-30);
    for (const auto& prm : cfg.whittle) {
        if (prm.q() == 0.0 || prm.p() == 1.0) {
            continue;
        }
        const std::uint64_t top = cfg.slope_n_max;
        const ScopedPrecision precision(digits_for_horizon(prm, top));
        std::vector<BigFloat> eaoii, aat;
        for (std::uint64_t n = 0; n <= top; ++n) {
            eaoii.push_back(closed::avg_eaoii<BigFloat>(prm, n));
            aat.push_back(closed::avg_aat<BigFloat>(prm, n));
        }
        BigFloat base, ratio;
        for (std::uint64_t k = 0; k < top; ++k) {
            base = (eaoii[k + 1] - eaoii[k]) / (aat[k + 1] - aat[k]);
            for (std::uint64_t n = k + 2; n <= top; ++n) {
                ratio = (eaoii[n] - eaoii[k]) / (aat[n] - aat[k]);
                const double shortfall = BigFloat((base - ratio) / base).convert_to<double>();
                t.error(std::max(0.0, shortfall),
                        [&] { return where(prm) + " k=" + std::to_string(k) + " n=" + std::to_string(n); });
            }
        }
    }
    return t.finish();
}

VerifyReport run(const VerifyConfig& cfg)
{
    VerifyReport report;
    const std::vector<CheckResult (*)(const VerifyConfig&)> checks{
        check_eaoii_identities,         check_kernel,
        check_stationary_power_iteration, check_stationary_balance,
        check_avg_eaoii,                check_avg_aat,
        check_lambda_closed_vs_ratio,   check_lambda_monotone_and_limit,
        check_exchange_conditions,      check_threshold_vs_brute_force,
        check_value_iteration,          check_whittle_equivalence,
        check_indexability,             check_slope_dominance,
    };
    std::set<std::string> covered;
    for (auto* check : checks) {
        CheckResult result = check(cfg);
        if (result.cases > 0) {
            covered.insert(result.covers.begin(), result.covers.end());
        }
        report.passed = report.passed && result.passed;
        report.checks.push_back(std::move(result));
    }
    for (const auto& name : closed_form_manifest()) {
        if (!covered.contains(name)) {
            report.uncovered.push_back(name);
        }
    }
    if (!report.uncovered.empty()) {
        report.passed = false;
    }
    return report;
}

}  // namespace aoiijam::verify
