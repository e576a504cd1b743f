#pragma once

// Thin RAII layer over the C interface for the command-line tool.

#include <memory>
#include <stdexcept>
#include <string>

#include "aoiijam/aoiijam.h"

namespace cli {

/// Exit code 2 for bad input, 1 for everything else.
class Failure : public std::runtime_error {
public:
    Failure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

inline void check(aoiijam_status status)
{
    if (status != AOIIJAM_OK) {
        throw Failure(status == AOIIJAM_INVALID_ARGUMENT ? 2 : 1, aoiijam_last_error());
    }
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
    void operator()(T* p) const noexcept { Destroy(p); }
};

using Stats = std::unique_ptr<aoiijam_stats, Deleter<aoiijam_stats, aoiijam_stats_destroy>>;
using Policy = std::unique_ptr<aoiijam_policy, Deleter<aoiijam_policy, aoiijam_policy_destroy>>;
using Fleet = std::unique_ptr<aoiijam_fleet, Deleter<aoiijam_fleet, aoiijam_fleet_destroy>>;
using Table = std::unique_ptr<aoiijam_whittle_table, Deleter<aoiijam_whittle_table, aoiijam_whittle_table_destroy>>;

inline Policy parse_policy(const std::string& text)
{
    aoiijam_policy* raw = nullptr;
    check(aoiijam_policy_parse(text.c_str(), &raw));
    return Policy(raw);
}

inline aoiijam_stats_summary summary(const Stats& stats)
{
    aoiijam_stats_summary out{};
    check(aoiijam_stats_summary_get(stats.get(), &out));
    return out;
}

}  // namespace cli
