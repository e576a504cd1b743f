// aoiijam: verification suite, figure-reproduction sweeps and ad-hoc
// simulations on top of the C interface.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoiijam/aoiijam.h"
#include "handles.hpp"
#include "table.hpp"

namespace {

using nlohmann::json;
using cli::check;
using cli::Failure;

constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalid = 2;

Failure invalid(const std::string& what)
{
    return Failure(kExitInvalid, what);
}

// ---- config values ---------------------------------------------------------

const json& field(const json& doc, const std::string& key)
{
    const auto it = doc.find(key);
    if (it == doc.end()) {
        throw invalid("missing config key '" + key + "'");
    }
    return *it;
}

double get_real(const json& doc, const std::string& key)
{
    const json& v = field(doc, key);
    if (!v.is_number()) {
        throw invalid("config key '" + key + "' must be a number");
    }
    return v.get<double>();
}

/// Nonnegative integer; accepts integral floats such as 1e6.
std::uint64_t count_value(const json& v, const std::string& key)
{
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
            return static_cast<std::uint64_t>(d);
        }
    }
    throw invalid("config key '" + key + "' must be a nonnegative integer");
}

std::uint64_t get_count(const json& doc, const char* key)
{
    return count_value(field(doc, key), key);
}

bool get_flag(const json& doc, const std::string& key)
{
    const json& v = field(doc, key);
    if (!v.is_boolean()) {
        throw invalid("config key '" + key + "' must be true or false");
    }
    return v.get<bool>();
}

std::string get_text(const json& doc, const std::string& key)
{
    const json& v = field(doc, key);
    if (!v.is_string()) {
        throw invalid("config key '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

aoiijam_params to_params(const json& triple, const std::string& key)
{
    if (!triple.is_array() || triple.size() != 3 || !triple[0].is_number() || !triple[1].is_number()
        || !triple[2].is_number()) {
        throw invalid("config key '" + key + "' must be [p, q, r]");
    }
    const aoiijam_params params{triple[0].get<double>(), triple[1].get<double>(), triple[2].get<double>()};
    check(aoiijam_params_validate(&params));
    return params;
}

std::vector<double> split_numbers(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw invalid("bad number '" + item + "' in " + what);
        }
    }
    return out;
}

json parse_triple(const std::string& text)
{
    const auto values = split_numbers(text, "--params");
    if (values.size() != 3) {
        throw invalid("--params expects p,q,r");
    }
    return json::array({values[0], values[1], values[2]});
}

/// "1-10" or "1,4,9".
json parse_seeds(const std::string& text)
{
    json out = json::array();
    const auto dash = text.find('-');
    if (dash != std::string::npos) {
        const auto ends = split_numbers(text.substr(0, dash) + "," + text.substr(dash + 1), "--seeds");
        const auto lo = count_value(json(ends[0]), "seeds");
        const auto hi = count_value(json(ends[1]), "seeds");
        if (hi < lo) {
            throw invalid("empty seed range " + text);
        }
        for (auto s = lo; s <= hi; ++s) {
            out.push_back(s);
        }
        return out;
    }
    for (double s : split_numbers(text, "--seeds")) {
        out.push_back(count_value(json(s), "seeds"));
    }
    return out;
}

std::vector<double> lambda_grid(const json& doc)
{
    const double lo = get_real(doc, "lambda_min");
    const double hi = get_real(doc, "lambda_max");
    const double step = get_real(doc, "lambda_step");
    if (!(step > 0.0)) {
        throw invalid("lambda_step must be positive");
    }
    if (!(lo >= 0.0) || hi < lo) {
        throw invalid("need 0 <= lambda_min <= lambda_max");
    }
    const auto count = static_cast<std::uint64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    const bool full = get_flag(doc, "full");
    std::vector<double> grid;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (full || i % 10 == 0) {
            grid.push_back(lo + static_cast<double>(i) * step);
        }
    }
    return grid;
}

cli::Cell threshold_cell(const aoiijam_threshold& t)
{
    if (t.infinite) {
        return std::string("INF");
    }
    return t.index;
}

std::string policy_for(const aoiijam_threshold& t)
{
    return t.infinite ? "threshold:inf" : "threshold:" + std::to_string(t.index);
}

// ---- commands --------------------------------------------------------------

cli::ResultTable sweep_lambda(const json& doc)
{
    const aoiijam_params params = to_params(field(doc, "params"), "params");
    const auto grid = lambda_grid(doc);
    const auto horizon = get_count(doc, "horizon");
    const auto seed = get_count(doc, "seed");
    const double jam_prob = get_real(doc, "random_jam_prob");

    double limit = 0.0;
    double plateau = 0.0;
    check(aoiijam_lambda_limit(&params, &limit));
    check(aoiijam_avg_eaoii_no_jam(&params, &plateau));

    cli::ResultTable table;
    table.command = "sweep-lambda";
    table.config = doc;
    table.notes = {"lambda_limit: " + cli::format_number(limit),
                   "no_jam_avg_eaoii: " + cli::format_number(plateau),
                   "simulated rewards: one run per distinct threshold and one random run, "
                   "all with the configured seed; se from 100 batch means"};
    table.columns = {"lambda",           "optimal_reward_closed",  "optimal_reward_sim",
                     "random_reward_sim", "threshold_n",           "optimal_reward_sim_se",
                     "random_reward_sim_se"};

    // The random policy ignores λ, so one trajectory serves every cost.
    char random_text[64];
    std::snprintf(random_text, sizeof random_text, "random:%.17g", jam_prob);
    const auto random_policy = cli::parse_policy(random_text);
    aoiijam_stats* raw = nullptr;
    check(aoiijam_simulate_single(&params, random_policy.get(), 0.0, horizon, seed, nullptr, nullptr, &raw));
    const cli::Stats random_run(raw);

    std::map<std::string, cli::Stats> optimal_runs;
    for (double lambda : grid) {
        aoiijam_threshold t{};
        check(aoiijam_optimal_threshold(&params, lambda, &t));
        double closed = 0.0;
        check(aoiijam_steady_reward(&params, t, lambda, &closed));

        const std::string text = policy_for(t);
        auto it = optimal_runs.find(text);
        if (it == optimal_runs.end()) {
            const auto policy = cli::parse_policy(text);
            raw = nullptr;
            check(aoiijam_simulate_single(&params, policy.get(), lambda, horizon, seed, nullptr, nullptr, &raw));
            it = optimal_runs.emplace(text, cli::Stats(raw)).first;
        }
        aoiijam_estimate optimal_sim{};
        aoiijam_estimate random_sim{};
        check(aoiijam_stats_reward_at(it->second.get(), lambda, &optimal_sim));
        check(aoiijam_stats_reward_at(random_run.get(), lambda, &random_sim));
        table.add({lambda, closed, optimal_sim.mean, random_sim.mean, threshold_cell(t), optimal_sim.se,
                   random_sim.se});
    }
    return table;
}

cli::ResultTable threshold_curve(const json& doc)
{
    const aoiijam_params params = to_params(field(doc, "params"), "params");
    double limit = 0.0;
    check(aoiijam_lambda_limit(&params, &limit));

    cli::ResultTable table;
    table.command = "threshold-curve";
    table.config = doc;
    table.notes = {"lambda_limit: " + cli::format_number(limit)};
    table.columns = {"lambda", "threshold_n"};
    for (double lambda : lambda_grid(doc)) {
        aoiijam_threshold t{};
        check(aoiijam_optimal_threshold(&params, lambda, &t));
        table.add({lambda, threshold_cell(t)});
    }
    return table;
}

cli::ResultTable whittle_table(const json& doc)
{
    const json& subsystems = field(doc, "subsystems");
    if (!subsystems.is_array() || subsystems.empty()) {
        throw invalid("subsystems must be a non-empty list of [p, q, r]");
    }
    const auto k_max = get_count(doc, "k_max");
    const bool iterative = get_flag(doc, "iterative");

    cli::ResultTable table;
    table.command = "whittle-table";
    table.config = doc;
    table.notes = {std::string("method: ") + (iterative ? "infimum-of-ratios scan" : "closed form")};
    table.columns = {"subsystem_id", "k", "s_k", "W"};
    for (std::size_t id = 0; id < subsystems.size(); ++id) {
        const aoiijam_params params = to_params(subsystems[id], "subsystems");
        aoiijam_whittle_table* raw = nullptr;
        check(iterative ? aoiijam_whittle_table_iterative(&params, k_max, &raw)
                        : aoiijam_whittle_table_closed(&params, k_max, &raw));
        const cli::Table values_handle(raw);
        std::vector<double> values(aoiijam_whittle_table_size(raw));
        check(aoiijam_whittle_table_values(raw, values.data(), values.size()));
        double limit = 0.0;
        check(aoiijam_lambda_limit(&params, &limit));
        table.notes.push_back("subsystem " + std::to_string(id) + " lambda_limit: " + cli::format_number(limit));
        for (std::uint64_t k = 0; k < values.size(); ++k) {
            double s = 0.0;
            check(aoiijam_eaoii_value(&params, k, &s));
            table.add({static_cast<std::int64_t>(id), k, s, values[k]});
        }
    }
    return table;
}

struct FleetClass {
    aoiijam_params params;
    double fraction;
};

std::vector<std::uint64_t> class_counts(const std::vector<FleetClass>& classes, std::uint64_t n,
                                        const std::string& rounding)
{
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& c : classes) {
        const double exact = c.fraction * static_cast<double>(n);
        const double nearest = std::round(exact);
        if (std::abs(exact - nearest) > 1e-9 && rounding != "nearest") {
            throw invalid("class size " + cli::format_number(exact) + " at N=" + std::to_string(n)
                          + " is not integral; set rounding to \"nearest\"");
        }
        counts.push_back(static_cast<std::uint64_t>(nearest));
        total += counts.back();
    }
    if (total != n) {
        throw invalid("class sizes sum to " + std::to_string(total) + ", not N=" + std::to_string(n));
    }
    return counts;
}

cli::ResultTable multi_sim(const json& doc)
{
    std::vector<FleetClass> classes;
    const json& class_list = field(doc, "classes");
    if (!class_list.is_array() || class_list.empty()) {
        throw invalid("classes must be a non-empty list");
    }
    double fraction_sum = 0.0;
    for (const auto& c : class_list) {
        if (!c.is_object()) {
            throw invalid("each class needs p, q, r and fraction");
        }
        const json triple = json::array({field(c, "p"), field(c, "q"), field(c, "r")});
        classes.push_back({to_params(triple, "classes"), get_real(c, "fraction")});
        if (!(classes.back().fraction >= 0.0)) {
            throw invalid("class fractions must be nonnegative");
        }
        fraction_sum += classes.back().fraction;
    }
    if (std::abs(fraction_sum - 1.0) > 1e-9) {
        throw invalid("class fractions must sum to 1");
    }
    const json& n_list = field(doc, "n_list");
    const json& seeds = field(doc, "seeds");
    if (!n_list.is_array() || n_list.empty() || !seeds.is_array() || seeds.empty()) {
        throw invalid("n_list and seeds must be non-empty lists");
    }
    const auto horizon = get_count(doc, "horizon");
    const double alpha = get_real(doc, "budget_fraction");
    const std::string rounding = get_text(doc, "rounding");
    if (rounding != "none" && rounding != "nearest") {
        throw invalid("rounding must be \"none\" or \"nearest\"");
    }

    cli::ResultTable table;
    table.command = "multi-sim";
    table.config = doc;
    table.notes = {"normalization: per-slot fleet totals divided by N",
                   "M = floor(budget_fraction * N); se across seeds"};
    table.columns = {"N",
                     "M",
                     "whittle_avg_aoii",
                     "whittle_avg_aoii_se",
                     "random_avg_aoii",
                     "random_avg_aoii_se",
                     "whittle_avg_eaoii",
                     "random_avg_eaoii"};

    for (const auto& n_value : n_list) {
        const auto n = count_value(n_value, "n_list");
        const auto m = static_cast<std::uint64_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
        if (n == 0 || m >= n) {
            throw invalid("need 0 <= M < N; got M=" + std::to_string(m) + " at N=" + std::to_string(n));
        }
        const auto counts = class_counts(classes, n, rounding);

        aoiijam_fleet* raw_fleet = nullptr;
        check(aoiijam_fleet_create(m, &raw_fleet));
        const cli::Fleet fleet(raw_fleet);
        std::int64_t id = 0;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            for (std::uint64_t i = 0; i < counts[c]; ++i) {
                check(aoiijam_fleet_add(raw_fleet, id++, &classes[c].params));
            }
        }

        struct Sample {
            std::vector<double> aoii;
            std::vector<double> eaoii;
            double batch_se = 0.0;
        };
        const auto run = [&](const std::string& text) {
            const auto policy = cli::parse_policy(text);
            Sample sample;
            for (const auto& s : seeds) {
                aoiijam_stats* raw = nullptr;
                check(aoiijam_simulate_multi(raw_fleet, policy.get(), horizon, count_value(s, "seeds"), nullptr,
                                             nullptr, &raw));
                const cli::Stats stats(raw);
                const auto sum = cli::summary(stats);
                sample.aoii.push_back(sum.true_aoii.mean);
                sample.eaoii.push_back(sum.eaoii.mean);
                sample.batch_se = sum.true_aoii.se;
            }
            return sample;
        };
        const auto mean = [](const std::vector<double>& xs) {
            double total = 0.0;
            for (double x : xs) {
                total += x;
            }
            return total / static_cast<double>(xs.size());
        };
        const auto stderr_of = [&](const Sample& s) {
            if (s.aoii.size() < 2) {
                return s.batch_se;
            }
            const double mu = mean(s.aoii);
            double ss = 0.0;
            for (double x : s.aoii) {
                ss += (x - mu) * (x - mu);
            }
            return std::sqrt(ss / static_cast<double>(s.aoii.size() - 1) / static_cast<double>(s.aoii.size()));
        };

        const Sample whittle = run("whittle:" + std::to_string(m));
        const Sample random = run("random-multi:" + std::to_string(m));
        table.add({n, m, mean(whittle.aoii), stderr_of(whittle), mean(random.aoii), stderr_of(random),
                   mean(whittle.eaoii), mean(random.eaoii)});
    }
    return table;
}

struct TraceFile {
    std::FILE* file = nullptr;

    static void write(const aoiijam_trace_row* row, void* user)
    {
        auto* self = static_cast<TraceFile*>(user);
        std::fprintf(self->file, "%lld,%lld,%llu,%lld,%d,%d\n", static_cast<long long>(row->slot),
                     static_cast<long long>(row->subsystem_id), static_cast<unsigned long long>(row->age_index),
                     static_cast<long long>(row->true_aoii), row->jammed, row->delivered);
    }
};

cli::ResultTable simulate(const json& doc)
{
    const json& subsystems = field(doc, "subsystems");
    if (!subsystems.is_array() || subsystems.empty()) {
        throw invalid("subsystems must be a non-empty list of [p, q, r]");
    }
    const auto policy = cli::parse_policy(get_text(doc, "policy"));
    const double lambda = get_real(doc, "lambda");
    const auto horizon = get_count(doc, "horizon");
    const auto seed = get_count(doc, "seed");
    const std::string trace_path = get_text(doc, "trace");

    std::unique_ptr<std::FILE, int (*)(std::FILE*)> trace_file(nullptr, std::fclose);
    TraceFile trace;
    if (!trace_path.empty()) {
        trace_file.reset(std::fopen(trace_path.c_str(), "wb"));
        if (!trace_file) {
            throw invalid("cannot open trace file " + trace_path);
        }
        trace.file = trace_file.get();
        std::fputs("slot,subsystem_id,age_index,true_aoii,jammed,delivered\n", trace.file);
    }
    const aoiijam_trace_fn sink = trace.file ? &TraceFile::write : nullptr;

    aoiijam_stats* raw = nullptr;
    if (aoiijam_policy_is_multi(policy.get())) {
        if (subsystems.size() < 2) {
            throw invalid("multi-source policies need at least two subsystems");
        }
        aoiijam_fleet* raw_fleet = nullptr;
        check(aoiijam_fleet_create(subsystems.size() - 1, &raw_fleet));
        const cli::Fleet fleet(raw_fleet);
        for (std::size_t i = 0; i < subsystems.size(); ++i) {
            const aoiijam_params params = to_params(subsystems[i], "subsystems");
            check(aoiijam_fleet_add(raw_fleet, static_cast<std::int64_t>(i), &params));
        }
        check(aoiijam_simulate_multi(raw_fleet, policy.get(), horizon, seed, sink, &trace, &raw));
    } else {
        if (subsystems.size() != 1) {
            throw invalid("single-source policies take exactly one subsystem");
        }
        const aoiijam_params params = to_params(subsystems[0], "subsystems");
        check(aoiijam_simulate_single(&params, policy.get(), lambda, horizon, seed, sink, &trace, &raw));
    }
    const cli::Stats stats(raw);
    const auto sum = cli::summary(stats);

    cli::ResultTable table;
    table.command = "sim";
    table.config = doc;
    table.notes = {"reward: s(t) - lambda d(t) for one source, fleet-mean EAoII for a fleet"};
    table.columns = {"scope",         "avg_reward",   "reward_se", "avg_eaoii", "eaoii_se",
                     "avg_true_aoii", "true_aoii_se", "avg_aat",   "aat_se"};
    table.add({std::string("all"), sum.reward.mean, sum.reward.se, sum.eaoii.mean, sum.eaoii.se,
               sum.true_aoii.mean, sum.true_aoii.se, sum.aat.mean, sum.aat.se});
    const std::size_t count = aoiijam_stats_subsystem_count(raw);
    for (std::size_t i = 0; i < count && count > 1; ++i) {
        aoiijam_subsystem_stats s{};
        check(aoiijam_stats_subsystem(raw, i, &s));
        table.add({std::to_string(s.id), std::monostate{}, std::monostate{}, s.eaoii.mean, s.eaoii.se,
                   s.true_aoii.mean, s.true_aoii.se, s.aat.mean, s.aat.se});
    }
    return table;
}

// ---- plumbing --------------------------------------------------------------

json read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw invalid("cannot read config file " + path);
    }
    try {
        json doc = json::parse(in);
        if (!doc.is_object()) {
            throw invalid("config file " + path + " must hold a JSON object");
        }
        return doc;
    } catch (const json::parse_error& e) {
        throw invalid("config file " + path + ": " + e.what());
    }
}

/// Defaults, then the config file (known keys only), then explicit flags.
json merge(json defaults, const std::string& config_path, const json& flags)
{
    if (!config_path.empty()) {
        const json file = read_config(config_path);
        for (const auto& [key, value] : file.items()) {
            if (!defaults.contains(key)) {
                throw invalid("unknown config key '" + key + "'");
            }
            defaults[key] = value;
        }
    }
    for (const auto& [key, value] : flags.items()) {
        defaults[key] = value;
    }
    return defaults;
}

void emit(const std::string& out_path, const std::function<void(std::ostream&)>& body)
{
    if (out_path.empty() || out_path == "-") {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw invalid("cannot open output file " + out_path);
    }
    body(out);
    if (!out) {
        throw Failure(kExitCheckFailed, "write to " + out_path + " failed");
    }
}

struct Common {
    std::string config;
    std::string out;
    std::string format;
};

void add_common(CLI::App* cmd, Common& common)
{
    cmd->add_option("--config", common.config, "JSON config; flags override its values");
    cmd->add_option("--out", common.out, "output file (default stdout)");
    cmd->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void write_table(const cli::ResultTable& table, const Common& common)
{
    emit(common.out, [&](std::ostream& out) {
        if (common.format == "json") {
            table.write_json(out);
        } else {
            table.write_csv(out);
        }
    });
}

int run_verify(const Common& common, const json& flags)
{
    json doc = common.config.empty() ? json::object() : read_config(common.config);
    for (const auto& [key, value] : flags.items()) {
        doc[key] = value;
    }
    char* report_text = nullptr;
    int passed = 0;
    check(aoiijam_verify_run(doc.dump().c_str(), &report_text, &passed));
    const std::unique_ptr<char, void (*)(char*)> owned(report_text, aoiijam_string_free);
    const json report = json::parse(report_text);

    for (const auto& c : report.at("checks")) {
        std::fprintf(stderr, "%s %-30s cases=%-7llu worst=%-10.3g tol=%-8.3g %s\n",
                     c.at("passed").get<bool>() ? "PASS" : "FAIL", c.at("name").get<std::string>().c_str(),
                     static_cast<unsigned long long>(c.at("cases").get<std::uint64_t>()),
                     c.at("worst_error").get<double>(), c.at("tolerance").get<double>(),
                     c.at("witness").get<std::string>().c_str());
    }
    for (const auto& name : report.at("uncovered")) {
        std::fprintf(stderr, "UNCOVERED %s\n", name.get<std::string>().c_str());
    }

    if (common.format == "csv") {
        cli::ResultTable table;
        table.command = "verify";
        table.config = report.at("config");
        table.notes = {std::string("passed: ") + (passed ? "true" : "false")};
        table.columns = {"check", "passed", "cases", "tolerance", "worst_error", "witness"};
        for (const auto& c : report.at("checks")) {
            table.add({c.at("name").get<std::string>(), std::string(c.at("passed").get<bool>() ? "true" : "false"),
                       c.at("cases").get<std::uint64_t>(), c.at("tolerance").get<double>(),
                       c.at("worst_error").get<double>(), c.at("witness").get<std::string>()});
        }
        write_table(table, common);
    } else {
        emit(common.out, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
    }
    return passed ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app("Optimal jamming policies against AoII-based monitoring");
    app.require_subcommand(1);
    app.set_version_flag("--version", aoiijam_version());

    Common common;
    json flags = json::object();
    std::map<CLI::App*, json> defaults;

    // Typed flag storage; only flags actually given are copied into `flags`.
    std::string params_text, seeds_text, policy_text, trace_text, rounding_text, n_list_text, fault_text;
    std::vector<std::string> params_list;
    double lambda_min = 0, lambda_max = 0, lambda_step = 0, lambda = 0, horizon = 0, random_prob = 0,
           budget_fraction = 0;
    std::uint64_t seed = 0, k_max = 0, lambda_points = 0, brute_force_cap = 0;
    bool full = false, iterative = false;

    const json single_defaults = {{"params", {0.9, 0.9, 0.1}}, {"lambda_min", 0.0}, {"lambda_max", 10.0},
                                  {"lambda_step", 0.001},       {"full", false}};

    auto* verify = app.add_subcommand("verify", "run every closed-form versus oracle check");
    add_common(verify, common);
    verify->add_option("--fault", fault_text, "corrupt one closed form (negative control)");
    verify->add_option("--lambda-points", lambda_points, "costs per grid triple in the threshold check");
    verify->add_option("--brute-force-cap", brute_force_cap, "largest threshold of the exhaustive search");

    auto* sweep = app.add_subcommand("sweep-lambda", "optimal versus random average reward over λ");
    add_common(sweep, common);
    defaults[sweep] = single_defaults;
    defaults[sweep].update({{"horizon", 1000000}, {"seed", 1}, {"random_jam_prob", 0.5}});

    auto* curve = app.add_subcommand("threshold-curve", "optimal threshold over λ");
    add_common(curve, common);
    defaults[curve] = single_defaults;

    auto* multi = app.add_subcommand("multi-sim", "Whittle versus random jamming on growing fleets");
    add_common(multi, common);
    defaults[multi] = {{"classes",
                        {{{"p", 0.2}, {"q", 0.2}, {"r", 0.4}, {"fraction", 0.5}},
                         {{"p", 0.8}, {"q", 0.8}, {"r", 0.2}, {"fraction", 0.5}}}},
                       {"n_list", {4, 8, 16, 24, 32, 40}},
                       {"budget_fraction", 0.5},
                       {"horizon", 100000},
                       {"seeds", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}},
                       {"rounding", "none"}};

    auto* table = app.add_subcommand("whittle-table", "per-subsystem Whittle index tables");
    add_common(table, common);
    defaults[table] = {{"subsystems", {{0.9, 0.9, 0.1}}}, {"k_max", 200}, {"iterative", false}};

    auto* sim = app.add_subcommand("sim", "simulate one policy");
    add_common(sim, common);
    defaults[sim] = {{"subsystems", {{0.9, 0.9, 0.1}}},
                     {"policy", "threshold:2"},
                     {"lambda", 1.0},
                     {"horizon", 1000000},
                     {"seed", 1},
                     {"trace", ""}};

    for (auto* cmd : {sweep, curve}) {
        cmd->add_option("--params", params_text, "p,q,r");
        cmd->add_option("--lambda-min", lambda_min);
        cmd->add_option("--lambda-max", lambda_max);
        cmd->add_option("--lambda-step", lambda_step);
        cmd->add_flag("--full", full, "keep every grid point (default: every 10th)");
    }
    for (auto* cmd : {sweep, multi, sim}) {
        cmd->add_option("--horizon", horizon, "slots per run");
    }
    for (auto* cmd : {sweep, sim}) {
        cmd->add_option("--seed", seed);
    }
    sweep->add_option("--random-prob", random_prob, "jam probability of the baseline");
    multi->add_option("--seeds", seeds_text, "range a-b or list a,b,c");
    multi->add_option("--n-list", n_list_text, "fleet sizes, comma separated");
    multi->add_option("--budget-fraction", budget_fraction, "M = floor(fraction * N)");
    multi->add_option("--rounding", rounding_text, "none or nearest")->check(CLI::IsMember({"none", "nearest"}));
    for (auto* cmd : {table, sim}) {
        cmd->add_option("--params", params_list, "p,q,r (repeat for several subsystems)");
    }
    table->add_option("--k-max", k_max);
    table->add_flag("--iterative", iterative, "use the infimum-of-ratios scan");
    sim->add_option("--policy", policy_text,
                    "threshold:<n|inf>, always, never, random:<p>, whittle:<M>, random-multi:<M>");
    sim->add_option("--lambda", lambda);
    sim->add_option("--trace", trace_text, "per-slot CSV trace file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        const auto given = [&](const char* name) {
            const CLI::Option* opt = cmd->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        if (given("--params")) {
            if (cmd == table || cmd == sim) {
                json list = json::array();
                for (const auto& text : params_list) {
                    list.push_back(parse_triple(text));
                }
                flags["subsystems"] = list;
            } else {
                flags["params"] = parse_triple(params_text);
            }
        }
        if (given("--lambda-min")) flags["lambda_min"] = lambda_min;
        if (given("--lambda-max")) flags["lambda_max"] = lambda_max;
        if (given("--lambda-step")) flags["lambda_step"] = lambda_step;
        if (given("--full")) flags["full"] = full;
        if (given("--horizon")) flags["horizon"] = count_value(json(horizon), "horizon");
        if (given("--seed")) flags["seed"] = seed;
        if (given("--random-prob")) flags["random_jam_prob"] = random_prob;
        if (given("--seeds")) flags["seeds"] = parse_seeds(seeds_text);
        if (given("--n-list")) {
            json list = json::array();
            for (double n : split_numbers(n_list_text, "--n-list")) {
                list.push_back(count_value(json(n), "n_list"));
            }
            flags["n_list"] = list;
        }
        if (given("--budget-fraction")) flags["budget_fraction"] = budget_fraction;
        if (given("--rounding")) flags["rounding"] = rounding_text;
        if (given("--k-max")) flags["k_max"] = k_max;
        if (given("--iterative")) flags["iterative"] = iterative;
        if (given("--policy")) flags["policy"] = policy_text;
        if (given("--lambda")) flags["lambda"] = lambda;
        if (given("--trace")) flags["trace"] = trace_text;
        if (given("--fault")) flags["fault"] = fault_text;
        if (given("--lambda-points")) flags["lambda_points"] = lambda_points;
        if (given("--brute-force-cap")) flags["brute_force_cap"] = brute_force_cap;

        if (cmd == verify) {
            if (common.format.empty()) {
                common.format = "json";
            }
            return run_verify(common, flags);
        }
        if (common.format.empty()) {
            common.format = "csv";
        }
        const json doc = merge(defaults.at(cmd), common.config, flags);
        cli::ResultTable result;
        if (cmd == sweep) {
            result = sweep_lambda(doc);
        } else if (cmd == curve) {
            result = threshold_curve(doc);
        } else if (cmd == multi) {
            result = multi_sim(doc);
        } else if (cmd == table) {
            result = whittle_table(doc);
        } else {
            result = simulate(doc);
        }
        write_table(result, common);
        return 0;
    } catch (const Failure& e) {
        std::fprintf(stderr, "aoiijam: %s\n", e.what());
        return e.code();
    } catch (const json::exception& e) {
        std::fprintf(stderr, "aoiijam: invalid config: %s\n", e.what());
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "aoiijam: %s\n", e.what());
        return kExitCheckFailed;
    }
}
