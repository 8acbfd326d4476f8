#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace topodisc {

using RegionId = std::int64_t;

/// Regions and their undirected adjacency. Regions are addressed by their
/// position in the sorted id list ("region index").
class SpatialDomain {
public:
    SpatialDomain() : SpatialDomain(city()) {}
    /// Throws if adjacency references an unlisted region or is a self-loop.
    SpatialDomain(std::vector<RegionId> regions, const std::vector<std::pair<RegionId, RegionId>>& adjacency);

    /// One implicit region, no adjacency.
    static SpatialDomain city();

    std::size_t size() const { return ids_.size(); }
    const std::vector<RegionId>& region_ids() const { return ids_; }
    std::optional<std::uint32_t> index_of(RegionId id) const;

    std::span<const std::uint32_t> neighbors(std::uint32_t x) const {
        return {adj_.data() + offsets_[x], adj_.data() + offsets_[x + 1]};
    }
    bool adjacent(std::uint32_t x, std::uint32_t y) const;
    /// Undirected adjacency count.
    std::size_t edge_count() const { return adj_.size() / 2; }

private:
    std::vector<RegionId> ids_;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> adj_;  // sorted within each region
};

struct LonLat {
    double lon;
    double lat;
};

struct Polygon {
    RegionId id;
    std::vector<LonLat> ring;  // closed implicitly
    double min_lon, min_lat, max_lon, max_lat;
};

/// Boundary counts as inside.
bool point_in_polygon(const Polygon& poly, LonLat p);

/// Polygon lookup for GPS -> region assignment. Ties on shared boundaries go to
/// the lowest region id.
class RegionMap {
public:
    explicit RegionMap(std::vector<Polygon> polygons);
    std::optional<RegionId> locate(LonLat p) const;
    const std::vector<Polygon>& polygons() const { return polys_; }

private:
    std::vector<Polygon> polys_;  // sorted by id
};

/// Polygon file: one region per line, `<id> <lon> <lat> <lon> <lat> ...`;
/// blank lines and `#` comments ignored.
std::vector<Polygon> load_polygons(const std::filesystem::path& path);
/// Adjacency file: one `<id> <id>` pair per line.
std::vector<std::pair<RegionId, RegionId>> load_adjacency(const std::filesystem::path& path);

}  // namespace topodisc
