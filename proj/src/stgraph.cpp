#include "topodisc/stgraph.hpp"

#include <algorithm>
#include <numeric>

#include "topodisc/error.hpp"

namespace topodisc {

STGraph::STGraph(std::shared_ptr<const SpatialDomain> space, std::uint64_t steps, std::vector<std::uint8_t> active)
    : space_(std::move(space)), n_(space_->size()), m_(steps), active_(std::move(active)) {
    if (m_ == 0) throw Error(ErrorCode::invalid_argument, "graph needs at least one time step");
    if (active_.size() != n_ * m_) throw Error(ErrorCode::invalid_argument, "active mask size does not match n * m");
    if (n_ * m_ >= kNoVertex) throw Error(ErrorCode::invalid_argument, "graph too large for 32-bit vertex ids");

    for (std::uint64_t v = 0; v < n_ * m_; ++v) {
        if (!active_[v]) continue;
        ++active_count_;
        const auto x = static_cast<std::uint32_t>(v % n_);
        for (std::uint32_t y : space_->neighbors(x))
            if (y > x && active_[v - x + y]) ++spatial_edges_;
        if (v + n_ < n_ * m_ && active_[v + n_]) ++temporal_edges_;
    }
}

STGraph::STGraph(std::shared_ptr<const SpatialDomain> space, std::uint64_t steps)
    : STGraph(space, steps, std::vector<std::uint8_t>(space->size() * steps, 1)) {}

STGraph STGraph::for_function(std::shared_ptr<const SpatialDomain> space, const ScalarFunction& f) {
    if (space->size() != f.n_regions)
        throw Error(ErrorCode::resolution_mismatch, "function has " + std::to_string(f.n_regions) +
                                                        " regions, domain has " + std::to_string(space->size()));
    std::vector<std::uint8_t> active(f.values.size());
    for (std::size_t v = 0; v < active.size(); ++v) active[v] = is_no_data(f.values[v]) ? 0 : 1;
    return STGraph(std::move(space), f.time.steps, std::move(active));
}

bool STGraph::adjacent(Vertex a, Vertex b) const {
    if (!active_[a] || !active_[b] || a == b) return false;
    const auto xa = region_of(a), xb = region_of(b);
    const auto za = step_of(a), zb = step_of(b);
    if (za == zb) return space_->adjacent(xa, xb);
    return xa == xb && (za + 1 == zb || zb + 1 == za);
}

TotalOrder total_order(std::span<const double> values) {
    // Sorting (value, vertex) pairs keeps the comparisons in contiguous memory.
    std::vector<std::pair<double, Vertex>> keyed;
    keyed.reserve(values.size());
    for (std::size_t v = 0; v < values.size(); ++v)
        if (!is_no_data(values[v])) keyed.emplace_back(values[v], static_cast<Vertex>(v));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    TotalOrder t;
    t.order.resize(keyed.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) t.order[i] = keyed[i].second;
    t.rank.assign(values.size(), kNoVertex);
    for (std::size_t i = 0; i < t.order.size(); ++i) t.rank[t.order[i]] = static_cast<Vertex>(i);
    return t;
}

namespace {

// Components of the subgraph induced on `link` (at most a few dozen vertices).
std::uint32_t link_components(const STGraph& g, const std::vector<Vertex>& link) {
    std::vector<std::uint32_t> parent(link.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    auto comps = static_cast<std::uint32_t>(link.size());
    for (std::size_t i = 0; i < link.size(); ++i)
        for (std::size_t j = i + 1; j < link.size(); ++j)
            if (g.adjacent(link[i], link[j])) {
                const auto a = find(static_cast<std::uint32_t>(i)), b = find(static_cast<std::uint32_t>(j));
                if (a != b) {
                    parent[a] = b;
                    --comps;
                }
            }
    return comps;
}

}  // namespace

VertexClass classify_vertex(const STGraph& g, const TotalOrder& ord, Vertex v) {
    std::vector<Vertex> upper, lower;
    g.for_each_neighbor(v, [&](Vertex u) { (ord.higher(u, v) ? upper : lower).push_back(u); });
    if (upper.empty() && lower.empty()) return {VertexKind::isolated};
    if (upper.empty()) return {VertexKind::maximum};
    if (lower.empty()) return {VertexKind::minimum};
    const auto cu = link_components(g, upper);
    const auto cl = link_components(g, lower);
    if (cu == 1 && cl == 1) return {VertexKind::regular};
    return {VertexKind::saddle, std::max(cu, cl)};
}

}  // namespace topodisc
