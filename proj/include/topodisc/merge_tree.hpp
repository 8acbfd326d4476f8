#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "topodisc/stgraph.hpp"

namespace topodisc {

enum class TreeKind : std::uint8_t { join, split };

inline constexpr std::uint32_t kNoNode = 0xFFFFFFFFu;

/// A creator paired with the vertex where its component merges into an elder
/// one. destroyer == kNoVertex marks the pair of the last surviving creator of
/// a connected component; its persistence is the component's value range.
struct PersistencePair {
    Vertex creator = kNoVertex;
    Vertex destroyer = kNoVertex;
    double persistence = 0.0;

    bool essential() const { return destroyer == kNoVertex; }
    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

/// Join tree (super-level sets) or split tree (sub-level sets).
/// Nodes are the leaves (extrema), merge vertices and per-component roots,
/// in sweep order. Every active vertex lies on exactly one arc, identified by
/// the node at its upper end (arc_of); inactive vertices map to kNoNode.
struct MergeTree {
    TreeKind kind = TreeKind::join;
    std::uint64_t vertex_count = 0;
    std::vector<Vertex> node_vertex;
    std::vector<std::uint32_t> node_parent;  // kNoNode for roots
    std::vector<std::uint32_t> arc_of;       // per vertex
    std::vector<std::uint32_t> leaves;       // node indices, sweep order
    std::vector<std::uint32_t> roots;        // node indices, one per component
    std::vector<PersistencePair> pairs;

    std::size_t node_count() const { return node_vertex.size(); }
    bool is_root(std::uint32_t node) const { return node_parent[node] == kNoNode; }
};

/// Sweeps `ord` from highest to lowest, tracking super-level components with
/// union-find. Merges of k >= 2 components keep the creator ranked highest
/// and pair every other creator with the merge vertex.
MergeTree join_tree(const STGraph& g, std::span<const double> values, const TotalOrder& ord);
MergeTree join_tree(const STGraph& g, std::span<const double> values);

/// The join tree of -f; values and persistences are reported for f.
MergeTree split_tree(const STGraph& g, std::span<const double> values);

/// Ordering the split sweep uses: total_order of -f.
TotalOrder split_order(std::span<const double> values);

struct DiagramPoint {
    Vertex extremum;
    double birth;
    double death;
    double persistence;
};

/// Diagram tuples for the tree's extrema; essential pairs die at the
/// component's opposite extreme.
std::vector<DiagramPoint> persistence_values(const MergeTree& tree, std::span<const double> values);

void save_tree(const MergeTree& t, const std::filesystem::path& path);
MergeTree load_tree(const std::filesystem::path& path);

}  // namespace topodisc
