#include "topodisc/spatial.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "topodisc/error.hpp"

namespace topodisc {

SpatialDomain::SpatialDomain(std::vector<RegionId> regions,
                             const std::vector<std::pair<RegionId, RegionId>>& adjacency)
    : ids_(std::move(regions)) {
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
        throw Error(ErrorCode::invalid_argument, "duplicate region id");
    if (ids_.empty()) throw Error(ErrorCode::invalid_argument, "spatial domain has no regions");

    std::vector<std::pair<std::uint32_t, std::uint32_t>> directed;
    directed.reserve(adjacency.size() * 2);
    for (auto [a, b] : adjacency) {
        auto ia = index_of(a);
        auto ib = index_of(b);
        if (!ia || !ib)
            throw Error(ErrorCode::invalid_argument,
                        "adjacency references unknown region " + std::to_string(!ia ? a : b));
        if (*ia == *ib) throw Error(ErrorCode::invalid_argument, "self-loop on region " + std::to_string(a));
        directed.emplace_back(*ia, *ib);
        directed.emplace_back(*ib, *ia);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    offsets_.assign(ids_.size() + 1, 0);
    for (auto [a, b] : directed) ++offsets_[a + 1];
    for (std::size_t i = 0; i < ids_.size(); ++i) offsets_[i + 1] += offsets_[i];
    adj_.reserve(directed.size());
    for (auto [a, b] : directed) adj_.push_back(b);
}

SpatialDomain SpatialDomain::city() {
    SpatialDomain d(std::vector<RegionId>{0}, {});
    return d;
}

std::optional<std::uint32_t> SpatialDomain::index_of(RegionId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - ids_.begin());
}

bool SpatialDomain::adjacent(std::uint32_t x, std::uint32_t y) const {
    auto n = neighbors(x);
    return std::binary_search(n.begin(), n.end(), y);
}

bool point_in_polygon(const Polygon& poly, LonLat p) {
    if (p.lon < poly.min_lon || p.lon > poly.max_lon || p.lat < poly.min_lat || p.lat > poly.max_lat) return false;
    const auto& r = poly.ring;
    bool inside = false;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        const LonLat a = r[j];
        const LonLat b = r[i];
        // On-segment test: collinear and within the bounding box of the edge.
        const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
        if (cross == 0.0 && p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
            p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat))
            return true;
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if (p.lon < x) inside = !inside;
        }
    }
    return inside;
}

RegionMap::RegionMap(std::vector<Polygon> polygons) : polys_(std::move(polygons)) {
    std::sort(polys_.begin(), polys_.end(), [](const Polygon& a, const Polygon& b) { return a.id < b.id; });
}

std::optional<RegionId> RegionMap::locate(LonLat p) const {
    for (const Polygon& poly : polys_)
        if (point_in_polygon(poly, p)) return poly.id;
    return std::nullopt;
}

namespace {

template <class Fn>
void for_each_data_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open: " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        fn(ss, lineno);
    }
}

}  // namespace

std::vector<Polygon> load_polygons(const std::filesystem::path& path) {
    std::vector<Polygon> out;
    for_each_data_line(path, [&](std::istringstream& ss, std::size_t lineno) {
        Polygon poly{};
        if (!(ss >> poly.id)) throw Error(ErrorCode::malformed, path.string() + ":" + std::to_string(lineno) + ": bad id");
        double lon, lat;
        while (ss >> lon >> lat) poly.ring.push_back({lon, lat});
        if (!ss.eof()) throw Error(ErrorCode::malformed, path.string() + ":" + std::to_string(lineno) + ": bad vertex");
        if (poly.ring.size() > 1 && poly.ring.front().lon == poly.ring.back().lon &&
            poly.ring.front().lat == poly.ring.back().lat)
            poly.ring.pop_back();
        if (poly.ring.size() < 3)
            throw Error(ErrorCode::malformed, path.string() + ":" + std::to_string(lineno) + ": polygon needs 3 vertices");
        poly.min_lon = poly.max_lon = poly.ring[0].lon;
        poly.min_lat = poly.max_lat = poly.ring[0].lat;
        for (const LonLat& v : poly.ring) {
            poly.min_lon = std::min(poly.min_lon, v.lon);
            poly.max_lon = std::max(poly.max_lon, v.lon);
            poly.min_lat = std::min(poly.min_lat, v.lat);
            poly.max_lat = std::max(poly.max_lat, v.lat);
        }
        out.push_back(std::move(poly));
    });
    return out;
}

std::vector<std::pair<RegionId, RegionId>> load_adjacency(const std::filesystem::path& path) {
    std::vector<std::pair<RegionId, RegionId>> out;
    for_each_data_line(path, [&](std::istringstream& ss, std::size_t lineno) {
        RegionId a, b;
        std::string rest;
        if (!(ss >> a >> b) || (ss >> rest))
            throw Error(ErrorCode::malformed, path.string() + ":" + std::to_string(lineno) + ": expected `<id> <id>`");
        out.emplace_back(a, b);
    });
    return out;
}

}  // namespace topodisc
