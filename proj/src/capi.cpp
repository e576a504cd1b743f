#include "aoiijam/aoiijam.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoiijam/core.hpp"
#include "aoiijam/errors.hpp"
#include "aoiijam/oracle.hpp"
#include "aoiijam/sim.hpp"
#include "aoiijam/verify.hpp"
#include "aoiijam/whittle.hpp"

struct aoiijam_vi_result {
    aoiijam::oracle::ValueIterationResult result;
};

struct aoiijam_whittle_table {
    std::vector<double> values;
};

struct aoiijam_fleet {
    std::size_t budget;
    std::vector<aoiijam::whittle::SubsystemSpec> subsystems;
};

struct aoiijam_policy {
    aoiijam::sim::PolicySpec spec;
};

struct aoiijam_stats {
    aoiijam::sim::SimStats stats;
};

namespace {

using namespace aoiijam;

thread_local std::string last_error;

aoiijam_status fail(aoiijam_status status, const char* what)
{
    last_error = what;
    return status;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
aoiijam_status guarded(F&& body)
{
    try {
        body();
        last_error.clear();
        return AOIIJAM_OK;
    } catch (const std::invalid_argument& e) {
        return fail(AOIIJAM_INVALID_ARGUMENT, e.what());
    } catch (const ConvergenceError& e) {
        return fail(AOIIJAM_NOT_CONVERGED, e.what());
    } catch (const StructureError& e) {
        return fail(AOIIJAM_STRUCTURE, e.what());
    } catch (const AmbiguousRegimeError& e) {
        return fail(AOIIJAM_AMBIGUOUS, e.what());
    } catch (const ScanBoundError& e) {
        return fail(AOIIJAM_SCAN_BOUND, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(AOIIJAM_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(AOIIJAM_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(AOIIJAM_INTERNAL, e.what());
    } catch (...) {
        return fail(AOIIJAM_INTERNAL, "unknown error");
    }
}

template <class... Ptrs>
void require_non_null(const Ptrs*... ptrs)
{
    if (((ptrs == nullptr) || ...)) {
        throw std::invalid_argument("null pointer argument");
    }
}

SubsystemParams to_params(const aoiijam_params* p)
{
    require_non_null(p);
    return SubsystemParams(p->p, p->q, p->r);
}

aoiijam_threshold from_threshold(ThresholdPolicy t)
{
    return t.is_infinite() ? aoiijam_threshold{1, 0} : aoiijam_threshold{0, t.index()};
}

ThresholdPolicy to_threshold(aoiijam_threshold t)
{
    return t.infinite ? ThresholdPolicy::infinite() : ThresholdPolicy::at(t.index);
}

aoiijam_estimate from_estimate(const sim::Estimate& e)
{
    return {e.mean, e.se};
}

template <class T>
void copy_out(const std::vector<T>& src, T* out, std::size_t len)
{
    require_non_null(out);
    if (len < src.size()) {
        throw std::invalid_argument("output buffer holds " + std::to_string(len) + " entries, "
                                    + std::to_string(src.size()) + " needed");
    }
    std::copy(src.begin(), src.end(), out);
}

template <class F>
aoiijam_status scalar(const aoiijam_params* params, double* out, F&& f)
{
    return guarded([&] {
        require_non_null(out);
        *out = f(to_params(params));
    });
}

sim::TraceSink make_sink(aoiijam_trace_fn trace, void* user)
{
    if (trace == nullptr) {
        return {};
    }
    return [trace, user](const sim::TraceRow& row) {
        const aoiijam_trace_row c{row.slot,       row.subsystem_id,     row.age_index,
                                  row.true_aoii,  row.jammed ? 1 : 0,   row.delivered ? 1 : 0};
        trace(&c, user);
    };
}

}  // namespace

extern "C" {

const char* aoiijam_last_error(void)
{
    return last_error.c_str();
}

const char* aoiijam_version(void)
{
    return "1.0.0";
}

aoiijam_status aoiijam_params_validate(const aoiijam_params* params)
{
    return guarded([&] { (void)to_params(params); });
}

aoiijam_status aoiijam_eaoii_value(const aoiijam_params* params, uint64_t k, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return eaoii_value(p, k); });
}

aoiijam_status aoiijam_delivery_probability(const aoiijam_params* params, int jammed, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return delivery_probability(p, jammed != 0); });
}

aoiijam_status aoiijam_stationary_pmf(const aoiijam_params* params, uint64_t n, uint64_t i, double* out)
{
    return scalar(params, out,
                  [&](const SubsystemParams& p) { return stationary_pmf(p, ThresholdPolicy::at(n), i); });
}

aoiijam_status aoiijam_no_jam_pmf(const aoiijam_params* params, uint64_t i, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return no_jam_pmf(p, i); });
}

aoiijam_status aoiijam_avg_eaoii(const aoiijam_params* params, uint64_t n, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return avg_eaoii_closed(p, n); });
}

aoiijam_status aoiijam_avg_eaoii_no_jam(const aoiijam_params* params, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return avg_eaoii_no_jam(p); });
}

aoiijam_status aoiijam_avg_aat(const aoiijam_params* params, uint64_t n, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return avg_aat_closed(p, n); });
}

aoiijam_status aoiijam_lambda_seq(const aoiijam_params* params, uint64_t n, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return lambda_seq(p, n); });
}

aoiijam_status aoiijam_lambda_increment(const aoiijam_params* params, uint64_t n, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return lambda_increment(p, n); });
}

aoiijam_status aoiijam_lambda_limit(const aoiijam_params* params, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return lambda_limit(p); });
}

aoiijam_status aoiijam_steady_state_get(const aoiijam_params* params, uint64_t n, aoiijam_steady_state* out)
{
    return guarded([&] {
        require_non_null(out);
        const auto s = steady_state(to_params(params), n);
        *out = {s.avg_eaoii, s.avg_aat, s.lambda_n};
    });
}

aoiijam_status aoiijam_steady_reward(const aoiijam_params* params, aoiijam_threshold threshold, double lambda,
                                     double* out)
{
    return scalar(params, out,
                  [&](const SubsystemParams& p) { return steady_reward(p, to_threshold(threshold), lambda); });
}

aoiijam_status aoiijam_optimal_threshold(const aoiijam_params* params, double lambda, aoiijam_threshold* out)
{
    return guarded([&] {
        require_non_null(out);
        if (!(lambda >= 0.0)) {
            throw std::invalid_argument("lambda must be nonnegative");
        }
        *out = from_threshold(optimal_threshold(to_params(params), lambda));
    });
}

aoiijam_oracle_config aoiijam_oracle_config_default(void)
{
    const oracle::OracleConfig d;
    return {d.state_cap, d.tolerance, d.max_iterations};
}

aoiijam_status aoiijam_brute_force_threshold(const aoiijam_params* params, double lambda, uint64_t n_max,
                                             aoiijam_threshold* out)
{
    return guarded([&] {
        require_non_null(out);
        *out = from_threshold(oracle::brute_force_threshold(to_params(params), lambda, n_max));
    });
}

aoiijam_status aoiijam_value_iteration(const aoiijam_params* params, double lambda, const aoiijam_oracle_config* cfg,
                                       aoiijam_vi_result** out)
{
    return guarded([&] {
        require_non_null(cfg, out);
        *out = nullptr;
        const oracle::OracleConfig oc{cfg->state_cap, cfg->tolerance, cfg->max_iterations};
        *out = new aoiijam_vi_result{oracle::relative_value_iteration(to_params(params), lambda, oc)};
    });
}

void aoiijam_vi_destroy(aoiijam_vi_result* result)
{
    delete result;
}

double aoiijam_vi_theta(const aoiijam_vi_result* result)
{
    return result ? result->result.theta : 0.0;
}

uint64_t aoiijam_vi_iterations(const aoiijam_vi_result* result)
{
    return result ? result->result.iterations : 0;
}

size_t aoiijam_vi_size(const aoiijam_vi_result* result)
{
    return result ? result->result.values.size() : 0;
}

aoiijam_status aoiijam_vi_values(const aoiijam_vi_result* result, double* out, size_t len)
{
    return guarded([&] {
        require_non_null(result);
        copy_out(result->result.values, out, len);
    });
}

aoiijam_status aoiijam_vi_policy(const aoiijam_vi_result* result, unsigned char* out, size_t len)
{
    return guarded([&] {
        require_non_null(result);
        const auto& policy = result->result.policy;
        std::vector<unsigned char> flags(policy.begin(), policy.end());
        copy_out(flags, out, len);
    });
}

aoiijam_status aoiijam_vi_threshold(const aoiijam_vi_result* result, aoiijam_threshold* out)
{
    return guarded([&] {
        require_non_null(result, out);
        *out = from_threshold(oracle::extract_threshold(result->result));
    });
}

aoiijam_status aoiijam_whittle_index(const aoiijam_params* params, uint64_t k, double* out)
{
    return scalar(params, out, [&](const SubsystemParams& p) { return whittle::whittle_index_closed(p, k); });
}

aoiijam_status aoiijam_whittle_table_closed(const aoiijam_params* params, uint64_t k_max,
                                            aoiijam_whittle_table** out)
{
    return guarded([&] {
        require_non_null(out);
        *out = nullptr;
        *out = new aoiijam_whittle_table{whittle::whittle_table_closed(to_params(params), k_max).values};
    });
}

aoiijam_status aoiijam_whittle_table_iterative(const aoiijam_params* params, uint64_t k_max,
                                               aoiijam_whittle_table** out)
{
    return guarded([&] {
        require_non_null(out);
        *out = nullptr;
        auto result = whittle::whittle_index_iterative(to_params(params), k_max);
        *out = new aoiijam_whittle_table{std::move(result.table.values)};
    });
}

void aoiijam_whittle_table_destroy(aoiijam_whittle_table* table)
{
    delete table;
}

size_t aoiijam_whittle_table_size(const aoiijam_whittle_table* table)
{
    return table ? table->values.size() : 0;
}

aoiijam_status aoiijam_whittle_table_values(const aoiijam_whittle_table* table, double* out, size_t len)
{
    return guarded([&] {
        require_non_null(table);
        copy_out(table->values, out, len);
    });
}

aoiijam_status aoiijam_indexability(const aoiijam_params* params, uint64_t n_max, int* indexable,
                                    int* strictly_decreasing)
{
    return guarded([&] {
        require_non_null(indexable, strictly_decreasing);
        const auto result = whittle::indexability_check(to_params(params), n_max);
        *indexable = result.indexable ? 1 : 0;
        *strictly_decreasing = result.strictly_decreasing ? 1 : 0;
    });
}

aoiijam_status aoiijam_select_jam_set(const int64_t* ids, const aoiijam_params* params, const uint64_t* ages,
                                      size_t count, size_t budget, int64_t* out_ids, size_t* out_count)
{
    return guarded([&] {
        require_non_null(out_count);
        *out_count = 0;
        if (count > 0) {
            require_non_null(ids, params, ages, out_ids);
        }
        std::vector<whittle::SubsystemState> fleet;
        fleet.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            fleet.push_back({ids[i], to_params(&params[i]), ages[i]});
        }
        const auto chosen = whittle::select_jam_set(fleet, budget);
        std::copy(chosen.begin(), chosen.end(), out_ids);
        *out_count = chosen.size();
    });
}

aoiijam_status aoiijam_fleet_create(size_t budget, aoiijam_fleet** out)
{
    return guarded([&] {
        require_non_null(out);
        *out = new aoiijam_fleet{budget, {}};
    });
}

aoiijam_status aoiijam_fleet_add(aoiijam_fleet* fleet, int64_t id, const aoiijam_params* params)
{
    return guarded([&] {
        require_non_null(fleet);
        for (const auto& existing : fleet->subsystems) {
            if (existing.id == id) {
                throw std::invalid_argument("duplicate subsystem id " + std::to_string(id));
            }
        }
        fleet->subsystems.push_back({id, to_params(params)});
    });
}

void aoiijam_fleet_destroy(aoiijam_fleet* fleet)
{
    delete fleet;
}

aoiijam_status aoiijam_policy_parse(const char* text, aoiijam_policy** out)
{
    return guarded([&] {
        require_non_null(text, out);
        *out = nullptr;
        *out = new aoiijam_policy{sim::PolicySpec::parse(text)};
    });
}

int aoiijam_policy_is_multi(const aoiijam_policy* policy)
{
    return policy && policy->spec.is_multi_source() ? 1 : 0;
}

void aoiijam_policy_destroy(aoiijam_policy* policy)
{
    delete policy;
}

aoiijam_status aoiijam_simulate_single(const aoiijam_params* params, const aoiijam_policy* policy, double lambda,
                                       uint64_t horizon, uint64_t seed, aoiijam_trace_fn trace, void* user,
                                       aoiijam_stats** out)
{
    return guarded([&] {
        require_non_null(policy, out);
        *out = nullptr;
        auto stats = sim::simulate_single(to_params(params), policy->spec, lambda, horizon, seed,
                                          make_sink(trace, user));
        *out = new aoiijam_stats{std::move(stats)};
    });
}

aoiijam_status aoiijam_simulate_multi(const aoiijam_fleet* fleet, const aoiijam_policy* policy, uint64_t horizon,
                                      uint64_t seed, aoiijam_trace_fn trace, void* user, aoiijam_stats** out)
{
    return guarded([&] {
        require_non_null(fleet, policy, out);
        *out = nullptr;
        const whittle::FleetConfig config(fleet->subsystems, fleet->budget);
        auto stats = sim::simulate_multi(config, policy->spec, horizon, seed, make_sink(trace, user));
        *out = new aoiijam_stats{std::move(stats)};
    });
}

void aoiijam_stats_destroy(aoiijam_stats* stats)
{
    delete stats;
}

aoiijam_status aoiijam_stats_summary_get(const aoiijam_stats* stats, aoiijam_stats_summary* out)
{
    return guarded([&] {
        require_non_null(stats, out);
        const auto& s = stats->stats;
        *out = {s.slots,
                s.seed,
                s.batches,
                from_estimate(s.reward),
                from_estimate(s.eaoii),
                from_estimate(s.true_aoii),
                from_estimate(s.aat)};
    });
}

aoiijam_status aoiijam_stats_reward_at(const aoiijam_stats* stats, double lambda, aoiijam_estimate* out)
{
    return guarded([&] {
        require_non_null(stats, out);
        *out = from_estimate(stats->stats.reward_at(lambda));
    });
}

size_t aoiijam_stats_subsystem_count(const aoiijam_stats* stats)
{
    return stats ? stats->stats.per_subsystem.size() : 0;
}

aoiijam_status aoiijam_stats_subsystem(const aoiijam_stats* stats, size_t i, aoiijam_subsystem_stats* out)
{
    return guarded([&] {
        require_non_null(stats, out);
        const auto& all = stats->stats.per_subsystem;
        if (i >= all.size()) {
            throw std::invalid_argument("subsystem position out of range");
        }
        const auto& s = all[i];
        *out = {s.id, from_estimate(s.eaoii), from_estimate(s.true_aoii), from_estimate(s.aat)};
    });
}

size_t aoiijam_stats_age_histogram_size(const aoiijam_stats* stats)
{
    return stats ? stats->stats.age_histogram.size() : 0;
}

aoiijam_status aoiijam_stats_age_histogram(const aoiijam_stats* stats, uint64_t* out, size_t len)
{
    return guarded([&] {
        require_non_null(stats);
        std::vector<uint64_t> counts(stats->stats.age_histogram.begin(), stats->stats.age_histogram.end());
        copy_out(counts, out, len);
    });
}

aoiijam_status aoiijam_verify_run(const char* config_json, char** report_json, int* passed)
{
    return guarded([&] {
        require_non_null(report_json, passed);
        *report_json = nullptr;
        const auto cfg = config_json ? verify::VerifyConfig::from_json(nlohmann::json::parse(config_json))
                                     : verify::VerifyConfig::defaults();
        const auto report = verify::run(cfg);
        nlohmann::json doc = report.to_json();
        doc["config"] = cfg.to_json();
        const std::string text = doc.dump(2);
        char* buffer = new char[text.size() + 1];
        std::memcpy(buffer, text.c_str(), text.size() + 1);
        *report_json = buffer;
        *passed = report.passed ? 1 : 0;
    });
}

void aoiijam_string_free(char* text)
{
    delete[] text;
}

}  // extern "C"
