#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aoiijam {

// Invalid parameters and preconditions surface as std::invalid_argument.
// The types below cover the numeric failure modes of the solvers.

/// An iterative solver ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_span, std::uint64_t iterations)
        : std::runtime_error(what), last_span_(last_span), iterations_(iterations)
    {
    }

    double last_span() const noexcept { return last_span_; }
    std::uint64_t iterations() const noexcept { return iterations_; }

private:
    double last_span_;
    std::uint64_t iterations_;
};

/// A computed policy violates the threshold structure (non-monotone).
class StructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Brute-force search hit its cap below the no-jam regime.
class AmbiguousRegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An infimum scan found its minimizer on the scan boundary.
class ScanBoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace aoiijam
