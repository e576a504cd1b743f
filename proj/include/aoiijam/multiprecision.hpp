#pragma once

#include <cstdint>

#include <boost/multiprecision/mpfr.hpp>

#include "aoiijam/params.hpp"

namespace aoiijam {

using BigFloat = boost::multiprecision::mpfr_float;

/// Sets the default MPFR precision (decimal digits) for the current scope.
class ScopedPrecision {
public:
    explicit ScopedPrecision(unsigned digits) : saved_(BigFloat::default_precision())
    {
        BigFloat::default_precision(digits);
    }
    ~ScopedPrecision() { BigFloat::default_precision(saved_); }

    ScopedPrecision(const ScopedPrecision&) = delete;
    ScopedPrecision& operator=(const ScopedPrecision&) = delete;

private:
    unsigned saved_;
};

/// Decimal digits needed to resolve reward or index comparisons up to
/// threshold n_max. Averages differ by O((1-p)^n) between neighbouring
/// thresholds and the λ-sequence moves by O((1-r)^n), so the budget is
/// n_max·(log10(1/(1-p)) + log10(1/(1-r))) plus a fixed margin.
unsigned digits_for_horizon(const SubsystemParams& params, std::uint64_t n_max);

}  // namespace aoiijam
