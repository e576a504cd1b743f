#pragma once

// Scalar-generic closed forms of the single-source model. Instantiated with
// double by the public API and with an MPFR type by the oracles that need to
// resolve differences of order (1-p)^n.

#include <cmath>
#include <cstdint>
#include <type_traits>

#include "aoiijam/params.hpp"

namespace aoiijam::closed {

template <class Real>
Real power(const Real& base, std::uint64_t e)
{
    if constexpr (std::is_floating_point_v<Real>) {
        using std::pow;
        return pow(base, static_cast<Real>(e));
    } else {
        Real result = 1;
        Real b = base;
        while (e != 0) {
            if (e & 1U) {
                result *= b;
            }
            e >>= 1U;
            if (e != 0) {
                b *= b;
            }
        }
        return result;
    }
}

/// Model constants lifted to Real once per evaluation.
template <class Real>
struct Coefficients {
    explicit Coefficients(const SubsystemParams& params)
        : p(params.p()), q(params.q()), r(params.r())
    {
        stay_idle = Real(1) - p;                 // 1-p: no delivery, not jammed
        stay_jammed = Real(1) - p + p * q;       // 1-p(1-q): no delivery, jammed
        keep = Real(1) - r;                      // 1-r
        agree = Real(1) - Real(2) * r;           // 1-2r
    }

    Real p, q, r;
    Real stay_idle, stay_jammed, keep, agree;
};

/// s_k = (1/2r)[1 + (1-2r)^{k+1} - 2(1-r)^{k+1}]
template <class Real>
Real eaoii_value(const SubsystemParams& params, AgeIndex k)
{
    const Coefficients<Real> c(params);
    return (Real(1) + power(c.agree, k + 1) - Real(2) * power(c.keep, k + 1)) / (Real(2) * c.r);
}

/// Stationary mass of age 0 under threshold n.
template <class Real>
Real reset_mass(const Coefficients<Real>& c, std::uint64_t n)
{
    const Real one_minus_q = Real(1) - c.q;
    return one_minus_q * c.p / (one_minus_q + c.q * power(c.stay_idle, n));
}

/// Stationary pmf of the age chain under threshold n (three branches).
template <class Real>
Real stationary_pmf(const SubsystemParams& params, std::uint64_t n, AgeIndex i)
{
    const Coefficients<Real> c(params);
    const Real u0 = reset_mass(c, n);
    if (i <= n) {
        return power(c.stay_idle, i) * u0;
    }
    return power(c.stay_idle, n) * power(c.stay_jammed, i - n) * u0;
}

/// d̄_n = (1-p)^n / (1 - q + q(1-p)^n)
template <class Real>
Real avg_aat(const SubsystemParams& params, std::uint64_t n)
{
    const Coefficients<Real> c(params);
    const Real tail = power(c.stay_idle, n);
    return tail / (Real(1) - c.q + c.q * tail);
}

/// Generating function Σ_k u_n(s_k) x^k of the threshold-n stationary pmf,
/// summed as a finite geometric series below the threshold plus a geometric
/// tail above it.
template <class Real>
Real pmf_generating(const Coefficients<Real>& c, std::uint64_t n, const Real& x)
{
    const Real u0 = reset_mass(c, n);
    const Real below_ratio = c.stay_idle * x;
    const Real below = (Real(1) - power(below_ratio, n + 1)) / (Real(1) - below_ratio);
    const Real above_ratio = c.stay_jammed * x;
    const Real above = power(c.stay_idle, n) * power(x, n) * above_ratio / (Real(1) - above_ratio);
    return u0 * (below + above);
}

/// s̄_n = Σ_k s_k u_n(s_k). Since s_k is affine in (1-2r)^{k+1} and
/// (1-r)^{k+1}, the mean reduces to the pmf generating function at those two
/// ratios: s̄_n = (1/2r)[1 + a G(a) - 2 b G(b)], a = 1-2r, b = 1-r.
template <class Real>
Real avg_eaoii(const SubsystemParams& params, std::uint64_t n)
{
    const Coefficients<Real> c(params);
    const Real ga = pmf_generating(c, n, c.agree);
    const Real gb = pmf_generating(c, n, c.keep);
    return (Real(1) + c.agree * ga - Real(2) * c.keep * gb) / (Real(2) * c.r);
}

/// Mean EAoII when the adversary never jams (threshold -> infinity); the pmf
/// is geometric, p(1-p)^k.
template <class Real>
Real avg_eaoii_no_jam(const SubsystemParams& params)
{
    const Coefficients<Real> c(params);
    const Real ga = c.p / (Real(1) - c.stay_idle * c.agree);
    const Real gb = c.p / (Real(1) - c.stay_idle * c.keep);
    return (Real(1) + c.agree * ga - Real(2) * c.keep * gb) / (Real(2) * c.r);
}

/// λ(s_∞) = pq(1-r)/(r(1-z)) - pq(1-2r)/(2r(1-y)), z = (1-r)(1-p), y = (1-2r)(1-p).
template <class Real>
Real lambda_limit(const SubsystemParams& params)
{
    const Coefficients<Real> c(params);
    const Real pq = c.p * c.q;
    const Real z = c.keep * c.stay_idle;
    const Real y = c.agree * c.stay_idle;
    return pq * c.keep / (c.r * (Real(1) - z)) - pq * c.agree / (Real(2) * c.r * (Real(1) - y));
}

/// Explicit λ(s_n), i.e. the Whittle index of age n. The limit above minus
/// four geometric corrections in (1-r)^{n+2} and (1-2r)^{n+2}; common
/// factors of the printed expression are cancelled.
template <class Real>
Real lambda_seq(const SubsystemParams& params, std::uint64_t n)
{
    const Coefficients<Real> c(params);
    const Real pq = c.p * c.q;
    const Real one_minus_q = Real(1) - c.q;
    const Real z = c.keep * c.stay_idle;
    const Real y = c.agree * c.stay_idle;
    const Real w = c.keep * c.stay_jammed;
    const Real x = c.agree * c.stay_jammed;
    const Real idle_pow = power(c.stay_idle, n + 1);
    const Real keep_pow = power(c.keep, n + 2);
    const Real agree_pow = power(c.agree, n + 2);

    const Real keep_terms = pq * one_minus_q * keep_pow / (c.r * (Real(1) - w))
                            + pq * c.q * idle_pow * keep_pow / ((Real(1) - w) * (Real(1) - z));
    const Real agree_terms = pq * one_minus_q * agree_pow / (Real(2) * c.r * (Real(1) - x))
                             + pq * c.q * idle_pow * agree_pow / ((Real(1) - x) * (Real(1) - y));
    return lambda_limit<Real>(params) - keep_terms + agree_terms;
}

/// λ(s_{n+1}) - λ(s_n) without cancellation:
/// (1 - q + q(1-p)^{n+1}) pq [(1-r)^{n+2}/(1-w) - (1-2r)^{n+2}/(1-x)].
template <class Real>
Real lambda_increment(const SubsystemParams& params, std::uint64_t n)
{
    const Coefficients<Real> c(params);
    const Real w = c.keep * c.stay_jammed;
    const Real x = c.agree * c.stay_jammed;
    const Real lead = Real(1) - c.q + power(c.stay_idle, n + 1) * c.q;
    return lead * c.p * c.q
           * (power(c.keep, n + 2) / (Real(1) - w) - power(c.agree, n + 2) / (Real(1) - x));
}

/// Intersection of the reward lines of thresholds n and n+1, from the two
/// averages. Undefined (0/0) when d̄_{n+1} = d̄_n, which only happens for p = 1.
template <class Real>
Real lambda_ratio(const SubsystemParams& params, std::uint64_t n)
{
    return (avg_eaoii<Real>(params, n + 1) - avg_eaoii<Real>(params, n))
           / (avg_aat<Real>(params, n + 1) - avg_aat<Real>(params, n));
}

}  // namespace aoiijam::closed
