#include "aoiijam/params.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace aoiijam {

namespace {

std::string format_exact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SubsystemParams::SubsystemParams(double p, double q, double r) : p_(p), q_(q), r_(r)
{
    // NaN fails every comparison below.
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("decoding probability p must lie in (0, 1], got " + format_exact(p));
    }
    if (!(q >= 0.0 && q < 1.0)) {
        throw std::invalid_argument("jamming success probability q must lie in [0, 1), got "
                                    + format_exact(q));
    }
    if (!(r > 0.0 && r <= 0.5)) {
        throw std::invalid_argument("source flip probability r must lie in (0, 1/2], got "
                                    + format_exact(r));
    }
}

std::string SubsystemParams::to_string() const
{
    return format_exact(p_) + "," + format_exact(q_) + "," + format_exact(r_);
}

std::string ThresholdPolicy::to_string() const
{
    return index_ ? std::to_string(*index_) : std::string("INF");
}

}  // namespace aoiijam
