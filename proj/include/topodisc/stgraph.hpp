#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "topodisc/calendar.hpp"
#include "topodisc/scalar_function.hpp"
#include "topodisc/spatial.hpp"

namespace topodisc {

using Vertex = std::uint32_t;
inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

/// Spatio-temporal graph: vertex v(x, z) = x + z * n. Spatial edges join
/// adjacent regions within a step, temporal edges join a region to itself in
/// the next step. Inactive vertices and their edges are absent.
/// Neighbors are enumerated from the region CSR, not stored per vertex.
class STGraph {
public:
    STGraph(std::shared_ptr<const SpatialDomain> space, std::uint64_t steps, std::vector<std::uint8_t> active);
    /// All vertices active.
    STGraph(std::shared_ptr<const SpatialDomain> space, std::uint64_t steps);

    /// Graph for a function's domain; NaN vertices are inactive.
    static STGraph for_function(std::shared_ptr<const SpatialDomain> space, const ScalarFunction& f);

    std::uint64_t n_regions() const { return n_; }
    std::uint64_t steps() const { return m_; }
    std::uint64_t vertex_count() const { return n_ * m_; }
    std::uint64_t active_count() const { return active_count_; }
    bool empty() const { return active_count_ == 0; }
    bool active(Vertex v) const { return active_[v] != 0; }
    const std::vector<std::uint8_t>& active_mask() const { return active_; }
    const SpatialDomain& space() const { return *space_; }

    Vertex vertex(std::uint32_t x, std::uint64_t z) const { return static_cast<Vertex>(x + z * n_); }
    std::uint32_t region_of(Vertex v) const { return static_cast<std::uint32_t>(v % n_); }
    std::uint64_t step_of(Vertex v) const { return v / n_; }

    std::uint64_t spatial_edge_count() const { return spatial_edges_; }
    std::uint64_t temporal_edge_count() const { return temporal_edges_; }

    /// Calls fn(u) for every active neighbor u of v.
    template <class Fn>
    void for_each_neighbor(Vertex v, Fn&& fn) const {
        const auto x = static_cast<std::uint32_t>(v % n_);
        const std::uint64_t base = v - x;
        for (std::uint32_t y : space_->neighbors(x)) {
            const auto u = static_cast<Vertex>(base + y);
            if (active_[u]) fn(u);
        }
        if (v >= n_ && active_[v - n_]) fn(static_cast<Vertex>(v - n_));
        if (v + n_ < n_ * m_ && active_[v + n_]) fn(static_cast<Vertex>(v + n_));
    }

    /// Edge test between two active vertices.
    bool adjacent(Vertex a, Vertex b) const;

private:
    std::shared_ptr<const SpatialDomain> space_;
    std::uint64_t n_;
    std::uint64_t m_;
    std::vector<std::uint8_t> active_;
    std::uint64_t active_count_ = 0;
    std::uint64_t spatial_edges_ = 0;
    std::uint64_t temporal_edges_ = 0;
};

/// Active vertices sorted by value descending; ties go to the lower index.
/// rank[v] is the position of v in `order` (kNoVertex if inactive), so a
/// smaller rank means "higher".
struct TotalOrder {
    std::vector<Vertex> order;
    std::vector<Vertex> rank;

    bool higher(Vertex a, Vertex b) const { return rank[a] < rank[b]; }
};

TotalOrder total_order(std::span<const double> values);

enum class VertexKind : std::uint8_t { isolated, maximum, minimum, regular, saddle };

struct VertexClass {
    VertexKind kind;
    std::uint32_t k = 0;  // link components, saddles only

    friend bool operator==(const VertexClass&, const VertexClass&) = default;
};

/// Classifies v by the connected components of its upper and lower links.
VertexClass classify_vertex(const STGraph& g, const TotalOrder& ord, Vertex v);

}  // namespace topodisc
