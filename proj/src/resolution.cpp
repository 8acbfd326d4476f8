#include "topodisc/resolution.hpp"

#include <algorithm>
#include <cctype>

#include "topodisc/error.hpp"

namespace topodisc {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

template <std::size_t N, class E>
void close_transitively(std::array<std::array<bool, N>, N>& reach, const std::vector<std::pair<E, E>>& edges) {
    for (std::size_t i = 0; i < N; ++i) reach[i][i] = true;
    for (auto [a, b] : edges) reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            if (i != j && reach[i][j] && reach[j][i])
                throw Error(ErrorCode::invalid_argument, "resolution dag contains a cycle");
}

}  // namespace

std::string_view to_string(SpatialRes r) {
    switch (r) {
        case SpatialRes::gps: return "gps";
        case SpatialRes::zip: return "zip";
        case SpatialRes::neighborhood: return "neighborhood";
        case SpatialRes::city: return "city";
    }
    return "?";
}

std::string_view to_string(TemporalRes r) {
    switch (r) {
        case TemporalRes::second: return "second";
        case TemporalRes::hour: return "hour";
        case TemporalRes::day: return "day";
        case TemporalRes::week: return "week";
        case TemporalRes::month: return "month";
    }
    return "?";
}

std::string to_string(Resolution r) {
    std::string s(to_string(r.spatial));
    s += '-';
    s += to_string(r.temporal);
    return s;
}

SpatialRes parse_spatial(std::string_view name) {
    const std::string n = lower(name);
    for (SpatialRes r : kSpatialResolutions)
        if (n == to_string(r)) return r;
    throw Error(ErrorCode::unknown_resolution, "unknown spatial resolution: " + std::string(name));
}

TemporalRes parse_temporal(std::string_view name) {
    const std::string n = lower(name);
    for (TemporalRes r : kTemporalResolutions)
        if (n == to_string(r)) return r;
    throw Error(ErrorCode::unknown_resolution, "unknown temporal resolution: " + std::string(name));
}

Resolution parse_resolution(std::string_view name) {
    const auto dash = name.find('-');
    if (dash == std::string_view::npos)
        throw Error(ErrorCode::unknown_resolution, "expected <spatial>-<temporal>: " + std::string(name));
    return {parse_spatial(name.substr(0, dash)), parse_temporal(name.substr(dash + 1))};
}

ResolutionDag::ResolutionDag(std::vector<SpatialEdge> spatial, std::vector<TemporalEdge> temporal)
    : spatial_(std::move(spatial)), temporal_(std::move(temporal)) {
    close_transitively(spatial_reach_, spatial_);
    close_transitively(temporal_reach_, temporal_);
}

const ResolutionDag& ResolutionDag::standard() {
    static const ResolutionDag dag(
        {{SpatialRes::gps, SpatialRes::zip},
         {SpatialRes::gps, SpatialRes::neighborhood},
         {SpatialRes::zip, SpatialRes::city},
         {SpatialRes::neighborhood, SpatialRes::city}},
        {{TemporalRes::second, TemporalRes::hour},
         {TemporalRes::hour, TemporalRes::day},
         {TemporalRes::day, TemporalRes::week},
         {TemporalRes::day, TemporalRes::month}});
    return dag;
}

bool ResolutionDag::reaches(SpatialRes from, SpatialRes to) const {
    return spatial_reach_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
}

bool ResolutionDag::reaches(TemporalRes from, TemporalRes to) const {
    return temporal_reach_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
}

std::vector<Resolution> compatible_resolutions(Resolution native, const ResolutionDag& dag) {
    std::vector<Resolution> out;
    for (SpatialRes s : kSpatialResolutions) {
        if (s == SpatialRes::gps || !dag.reaches(native.spatial, s)) continue;
        for (TemporalRes t : kTemporalResolutions) {
            if (t == TemporalRes::second || !dag.reaches(native.temporal, t)) continue;
            out.push_back({s, t});
        }
    }
    return out;
}

std::vector<Resolution> common_resolutions(const std::vector<Resolution>& a, const std::vector<Resolution>& b) {
    std::vector<Resolution> out;
    for (const Resolution& r : a)
        if (std::find(b.begin(), b.end(), r) != b.end()) out.push_back(r);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace topodisc
