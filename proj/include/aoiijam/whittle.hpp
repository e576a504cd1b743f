#pragma once

// Multi-source layer: Whittle indices of the per-subsystem relaxed problem
// and the index policy that jams the M channels with the largest indices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aoiijam/params.hpp"

namespace aoiijam::whittle {

using SubsystemId = std::int64_t;

struct SubsystemState {
    SubsystemId id;
    SubsystemParams params;
    AgeIndex age;
};

struct SubsystemSpec {
    SubsystemId id;
    SubsystemParams params;
};

/// Fleet of N subsystems and a per-slot budget of M < N jammed channels.
class FleetConfig {
public:
    /// Throws std::invalid_argument on duplicate ids, an empty fleet or M >= N.
    FleetConfig(std::vector<SubsystemSpec> subsystems, std::size_t budget);

    const std::vector<SubsystemSpec>& subsystems() const noexcept { return subsystems_; }
    std::size_t size() const noexcept { return subsystems_.size(); }
    std::size_t budget() const noexcept { return budget_; }
    double alpha() const noexcept
    {
        return static_cast<double>(budget_) / static_cast<double>(subsystems_.size());
    }

private:
    std::vector<SubsystemSpec> subsystems_;
    std::size_t budget_;
};

/// Index values W(s_k) for k = 0..size()-1 of one subsystem.
struct WhittleTable {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](AgeIndex k) const { return values.at(k); }
};

/// W(s_n) from the explicit λ-sequence.
double whittle_index_closed(const SubsystemParams& params, AgeIndex n);

/// Closed-form table for ages 0..k_max.
WhittleTable whittle_table_closed(const SubsystemParams& params, AgeIndex k_max);

struct IterativeWhittle {
    WhittleTable table;
    /// n_1, n_2, ...: the largest minimizer found at each step.
    std::vector<std::uint64_t> minimizers;
    /// Steps whose largest minimizer exceeded anchor + 1 (expected empty).
    std::vector<std::uint64_t> skipped_anchors;
    /// Strict increase of the table, judged at full working precision.
    bool strictly_increasing = false;
};

/// Infimum-of-ratios construction of the index: starting from anchor 0, each
/// step takes inf over n > anchor of (s̄_n - s̄_anchor)/(d̄_n - d̄_anchor),
/// assigns that value to ages anchor..minimizer-1 and moves the anchor to the
/// largest minimizer. Candidates run up to k_max + scan_extra. Evaluated in
/// MPFR. q = 0 short-circuits to the all-zero table (every threshold has the
/// same averages). Throws ScanBoundError if a minimizer lands on the scan
/// bound and std::invalid_argument for p = 1, where d̄_n = d̄_m for n, m >= 1
/// and the ratios are 0/0.
IterativeWhittle whittle_index_iterative(const SubsystemParams& params, AgeIndex k_max,
                                         std::uint64_t scan_extra = 1000);

struct Indexability {
    bool indexable = false;
    /// d̄_{n+1} - d̄_n < 0 on the whole range; false only for p = 1, where
    /// d̄_n = 0 for every n >= 1.
    bool strictly_decreasing = false;
};

/// Checks the sign of d̄_{n+1} - d̄_n for n in [0, n_max] (in MPFR so that
/// (1-p)^n never underflows). Indexable iff the differences are <= 0.
Indexability indexability_check(const SubsystemParams& params, std::uint64_t n_max);

/// Ids of the min(M, N) subsystems with the largest indices, ties going to
/// the lower id; returned in ascending id order.
std::vector<SubsystemId> select_jam_set(std::span<const SubsystemState> fleet, std::size_t budget);

/// Same selection with caller-supplied index values (one per fleet entry).
std::vector<SubsystemId> select_by_index(std::span<const SubsystemId> ids,
                                         std::span<const double> indices, std::size_t budget);

}  // namespace aoiijam::whittle
