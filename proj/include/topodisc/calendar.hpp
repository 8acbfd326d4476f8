#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "topodisc/resolution.hpp"

namespace topodisc {

// Time steps are half-open UTC intervals aligned to calendar boundaries.
// Weeks start on Monday; months are calendar months.

/// Absolute bucket number of epoch-second `t` at resolution `res`
/// (hours since epoch, days since epoch, Monday-weeks since 1970-01-05,
/// months since 1970-01).
std::int64_t bucket_index(TemporalRes res, std::int64_t t);
/// Epoch second at which bucket `index` begins.
std::int64_t bucket_start(TemporalRes res, std::int64_t index);
/// Nominal step length in seconds; months are recorded as 30 days.
std::int64_t nominal_delta(TemporalRes res);

/// Parses epoch seconds ("1325376000") or ISO-8601 UTC
/// ("2012-01-01T00:00:00", "2012-01-01 00:00:00Z", "2012-01-01").
std::optional<std::int64_t> parse_timestamp(std::string_view text);

struct TemporalDomain {
    TemporalRes resolution = TemporalRes::hour;
    std::int64_t t0 = 0;     // start of step 0
    std::int64_t delta = 0;  // nominal seconds per step
    std::uint64_t steps = 1;

    /// Steps covering [t_start, t_end). Requires t_start < t_end.
    static TemporalDomain covering(TemporalRes res, std::int64_t t_start, std::int64_t t_end);

    std::int64_t first_bucket() const { return bucket_index(resolution, t0); }
    std::int64_t step_start(std::uint64_t z) const {
        return bucket_start(resolution, first_bucket() + static_cast<std::int64_t>(z));
    }
    /// Step containing `t`, or nullopt if outside the domain.
    std::optional<std::uint64_t> step_of(std::int64_t t) const;

    friend bool operator==(const TemporalDomain&, const TemporalDomain&) = default;
};

/// Calendar month (1..12) and year of an epoch second.
struct CivilMonth {
    int year;
    unsigned month;
};
CivilMonth civil_month(std::int64_t t);

}  // namespace topodisc
