#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace topodisc {

// Enumerators are ordered from finest to coarsest; the order is used as the
// "highest resolution first" ranking when several resolutions are compatible.
enum class SpatialRes : std::uint8_t { gps, zip, neighborhood, city };
enum class TemporalRes : std::uint8_t { second, hour, day, week, month };

inline constexpr std::array kSpatialResolutions{SpatialRes::gps, SpatialRes::zip, SpatialRes::neighborhood,
                                                SpatialRes::city};
inline constexpr std::array kTemporalResolutions{TemporalRes::second, TemporalRes::hour, TemporalRes::day,
                                                 TemporalRes::week, TemporalRes::month};

struct Resolution {
    SpatialRes spatial = SpatialRes::city;
    TemporalRes temporal = TemporalRes::hour;

    friend auto operator<=>(const Resolution&, const Resolution&) = default;

    /// Evaluation resolutions exclude the raw GPS and per-second granularities.
    bool is_evaluation_resolution() const {
        return spatial != SpatialRes::gps && temporal != TemporalRes::second;
    }
};

std::string_view to_string(SpatialRes r);
std::string_view to_string(TemporalRes r);
std::string to_string(Resolution r);  // "city-hour"

/// Case-insensitive; throws Error(unknown_resolution).
SpatialRes parse_spatial(std::string_view name);
TemporalRes parse_temporal(std::string_view name);
/// Parses "<spatial>-<temporal>", e.g. "neighborhood-day".
Resolution parse_resolution(std::string_view name);

/// Compatibility lattice: edges point from a finer resolution to a coarser one
/// it can be aggregated into.
class ResolutionDag {
public:
    using SpatialEdge = std::pair<SpatialRes, SpatialRes>;
    using TemporalEdge = std::pair<TemporalRes, TemporalRes>;

    ResolutionDag(std::vector<SpatialEdge> spatial, std::vector<TemporalEdge> temporal);

    /// GPS -> {Zip, Neighborhood} -> City; Second -> Hour -> Day -> {Week, Month}.
    static const ResolutionDag& standard();

    /// Reflexive-transitive reachability.
    bool reaches(SpatialRes from, SpatialRes to) const;
    bool reaches(TemporalRes from, TemporalRes to) const;
    bool reaches(Resolution from, Resolution to) const {
        return reaches(from.spatial, to.spatial) && reaches(from.temporal, to.temporal);
    }

    const std::vector<SpatialEdge>& spatial_edges() const { return spatial_; }
    const std::vector<TemporalEdge>& temporal_edges() const { return temporal_; }

private:
    std::vector<SpatialEdge> spatial_;
    std::vector<TemporalEdge> temporal_;
    std::array<std::array<bool, 4>, 4> spatial_reach_{};
    std::array<std::array<bool, 5>, 5> temporal_reach_{};
};

/// All evaluation resolutions reachable from `native`, spatial-major, finest first.
std::vector<Resolution> compatible_resolutions(Resolution native,
                                               const ResolutionDag& dag = ResolutionDag::standard());

/// Resolutions present in both lists, ordered finest first.
std::vector<Resolution> common_resolutions(const std::vector<Resolution>& a, const std::vector<Resolution>& b);

}  // namespace topodisc
