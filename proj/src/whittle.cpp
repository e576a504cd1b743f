#include "aoiijam/whittle.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "aoiijam/closed_forms.hpp"
#include "aoiijam/core.hpp"
#include "aoiijam/errors.hpp"
#include "aoiijam/multiprecision.hpp"

namespace aoiijam::whittle {

FleetConfig::FleetConfig(std::vector<SubsystemSpec> subsystems, std::size_t budget)
    : subsystems_(std::move(subsystems)), budget_(budget)
{
    if (subsystems_.empty()) {
        throw std::invalid_argument("fleet must contain at least one subsystem");
    }
    if (budget_ >= subsystems_.size()) {
        throw std::invalid_argument("jam budget M = " + std::to_string(budget_)
                                    + " must be below the fleet size N = "
                                    + std::to_string(subsystems_.size()));
    }
    std::set<SubsystemId> seen;
    for (const auto& s : subsystems_) {
        if (!seen.insert(s.id).second) {
            throw std::invalid_argument("duplicate subsystem id " + std::to_string(s.id));
        }
    }
}

double whittle_index_closed(const SubsystemParams& params, AgeIndex n)
{
    return lambda_seq(params, n);
}

WhittleTable whittle_table_closed(const SubsystemParams& params, AgeIndex k_max)
{
    WhittleTable table;
    table.values.reserve(k_max + 1);
    for (AgeIndex k = 0; k <= k_max; ++k) {
        table.values.push_back(whittle_index_closed(params, k));
    }
    return table;
}

IterativeWhittle whittle_index_iterative(const SubsystemParams& params, AgeIndex k_max,
                                         std::uint64_t scan_extra)
{
    IterativeWhittle out;
    if (params.q() == 0.0) {
        out.table.values.assign(k_max + 1, 0.0);
        return out;
    }
    if (params.p() == 1.0) {
        throw std::invalid_argument("iterative Whittle index undefined for p = 1 (0/0 ratios)");
    }
    if (scan_extra < 1) {
        throw std::invalid_argument("scan must extend past k_max");
    }

    const std::uint64_t bound = k_max + scan_extra;
    const ScopedPrecision precision(digits_for_horizon(params, k_max + 1));

    std::vector<BigFloat> eaoii;
    std::vector<BigFloat> aat;
    eaoii.reserve(bound + 1);
    aat.reserve(bound + 1);
    for (std::uint64_t n = 0; n <= bound; ++n) {
        eaoii.push_back(closed::avg_eaoii<BigFloat>(params, n));
        aat.push_back(closed::avg_aat<BigFloat>(params, n));
    }

    std::vector<BigFloat> exact(k_max + 1);
    std::uint64_t anchor = 0;
    BigFloat ratio;
    while (anchor <= k_max) {
        BigFloat best;
        std::uint64_t argmin = 0;
        for (std::uint64_t n = anchor + 1; n <= bound; ++n) {
            ratio = (eaoii[n] - eaoii[anchor]) / (aat[n] - aat[anchor]);
            // <= keeps the largest minimizer
            if (argmin == 0 || ratio <= best) {
                best = ratio;
                argmin = n;
            }
        }
        if (argmin == bound) {
            throw ScanBoundError("infimum from anchor " + std::to_string(anchor)
                                 + " reached the scan bound " + std::to_string(bound));
        }
        for (std::uint64_t k = anchor; k < argmin && k <= k_max; ++k) {
            exact[k] = best;
        }
        out.minimizers.push_back(argmin);
        if (argmin > anchor + 1) {
            out.skipped_anchors.push_back(anchor);
        }
        anchor = argmin;
    }

    out.strictly_increasing = true;
    out.table.values.reserve(k_max + 1);
    for (std::uint64_t k = 0; k <= k_max; ++k) {
        out.table.values.push_back(exact[k].convert_to<double>());
        if (k > 0 && !(exact[k] > exact[k - 1])) {
            out.strictly_increasing = false;
        }
    }
    return out;
}

Indexability indexability_check(const SubsystemParams& params, std::uint64_t n_max)
{
    const ScopedPrecision precision(50);
    Indexability out{true, true};
    BigFloat previous = closed::avg_aat<BigFloat>(params, 0);
    for (std::uint64_t n = 1; n <= n_max + 1; ++n) {
        BigFloat current = closed::avg_aat<BigFloat>(params, n);
        const BigFloat step = current - previous;
        if (step > 0) {
            out.indexable = false;
        }
        if (!(step < 0)) {
            out.strictly_decreasing = false;
        }
        previous = std::move(current);
    }
    return out;
}

std::vector<SubsystemId> select_by_index(std::span<const SubsystemId> ids,
                                         std::span<const double> indices, std::size_t budget)
{
    if (ids.size() != indices.size()) {
        throw std::invalid_argument("one index value per subsystem required");
    }
    const std::size_t take = std::min(budget, ids.size());
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto ranks_before = [&](std::size_t a, std::size_t b) {
        if (indices[a] != indices[b]) {
            return indices[a] > indices[b];
        }
        return ids[a] < ids[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      ranks_before);

    std::vector<SubsystemId> chosen;
    chosen.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        chosen.push_back(ids[order[i]]);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<SubsystemId> select_jam_set(std::span<const SubsystemState> fleet, std::size_t budget)
{
    std::vector<SubsystemId> ids;
    std::vector<double> indices;
    ids.reserve(fleet.size());
    indices.reserve(fleet.size());
    for (const auto& s : fleet) {
        ids.push_back(s.id);
        indices.push_back(whittle_index_closed(s.params, s.age));
    }
    return select_by_index(ids, indices, budget);
}

}  // namespace aoiijam::whittle
