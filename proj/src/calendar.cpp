#include "topodisc/calendar.hpp"

#include <charconv>
#include <chrono>

#include "topodisc/error.hpp"

namespace topodisc {

namespace {

using namespace std::chrono;

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr std::int64_t kDay = 86400;
// 1970-01-01 was a Thursday; the first Monday is day 4.
constexpr std::int64_t kFirstMonday = 4;

bool parse_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::int64_t bucket_index(TemporalRes res, std::int64_t t) {
    switch (res) {
        case TemporalRes::second: return t;
        case TemporalRes::hour: return floor_div(t, 3600);
        case TemporalRes::day: return floor_div(t, kDay);
        case TemporalRes::week: return floor_div(floor_div(t, kDay) - kFirstMonday, 7);
        case TemporalRes::month: {
            const CivilMonth cm = civil_month(t);
            return (static_cast<std::int64_t>(cm.year) - 1970) * 12 + (cm.month - 1);
        }
    }
    return 0;
}

std::int64_t bucket_start(TemporalRes res, std::int64_t index) {
    switch (res) {
        case TemporalRes::second: return index;
        case TemporalRes::hour: return index * 3600;
        case TemporalRes::day: return index * kDay;
        case TemporalRes::week: return (index * 7 + kFirstMonday) * kDay;
        case TemporalRes::month: {
            const std::int64_t y = 1970 + floor_div(index, 12);
            const auto m = static_cast<unsigned>(index - floor_div(index, 12) * 12 + 1);
            const sys_days d = year{static_cast<int>(y)} / month{m} / 1;
            return static_cast<std::int64_t>(d.time_since_epoch().count()) * kDay;
        }
    }
    return 0;
}

std::int64_t nominal_delta(TemporalRes res) {
    switch (res) {
        case TemporalRes::second: return 1;
        case TemporalRes::hour: return 3600;
        case TemporalRes::day: return kDay;
        case TemporalRes::week: return 7 * kDay;
        case TemporalRes::month: return 30 * kDay;
    }
    return 1;
}

CivilMonth civil_month(std::int64_t t) {
    const year_month_day ymd{sys_days{days{floor_div(t, kDay)}}};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;

    if (text.find('-', 1) == std::string_view::npos) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec == std::errc{} && p == text.data() + text.size()) return v;
        return std::nullopt;
    }

    if (text.back() == 'Z') text.remove_suffix(1);
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d))
        return std::nullopt;
    if (text.size() > 10) {
        if ((text[10] != 'T' && text[10] != ' ') || text.size() < 19 || text[13] != ':' || text[16] != ':')
            return std::nullopt;
        if (!parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi) ||
            !parse_int(text.substr(17, 2), s))
            return std::nullopt;
        if (text.size() != 19) return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
    const auto days_since = static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count());
    return days_since * kDay + h * 3600 + mi * 60 + s;
}

TemporalDomain TemporalDomain::covering(TemporalRes res, std::int64_t t_start, std::int64_t t_end) {
    if (t_start >= t_end) throw Error(ErrorCode::invalid_argument, "time range must satisfy t_start < t_end");
    const std::int64_t first = bucket_index(res, t_start);
    const std::int64_t last = bucket_index(res, t_end - 1);
    return {res, bucket_start(res, first), nominal_delta(res), static_cast<std::uint64_t>(last - first + 1)};
}

std::optional<std::uint64_t> TemporalDomain::step_of(std::int64_t t) const {
    const std::int64_t z = bucket_index(resolution, t) - first_bucket();
    if (z < 0 || static_cast<std::uint64_t>(z) >= steps) return std::nullopt;
    return static_cast<std::uint64_t>(z);
}

}  // namespace topodisc
