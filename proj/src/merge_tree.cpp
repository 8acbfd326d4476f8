#include "topodisc/merge_tree.hpp"

#include <algorithm>
#include <numeric>

#include "topodisc/binary_io.hpp"
#include "topodisc/error.hpp"

namespace topodisc {

namespace {

constexpr std::string_view kMagic = "TDMT";
constexpr std::uint32_t kVersion = 1;

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    std::uint32_t add() {
        parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
        rank_.push_back(0);
        return parent_.back();
    }
    // Returns the new root.
    std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return a;
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
};

struct Component {
    Vertex creator = kNoVertex;
    std::uint32_t head = kNoNode;  // node at the upper end of the current arc
    Vertex last = kNoVertex;       // most recently swept vertex
    std::uint32_t born = 0;        // id the creator's component was given; ids follow sweep order
};

// `values` are the sweep values (already negated for split trees).
MergeTree sweep(const STGraph& g, std::span<const double> values, const TotalOrder& ord, TreeKind kind) {
    const std::uint64_t nv = g.vertex_count();
    if (values.size() != nv || ord.rank.size() != nv)
        throw Error(ErrorCode::invalid_argument, "function size does not match graph");

    MergeTree t;
    t.kind = kind;
    t.vertex_count = nv;
    t.arc_of.assign(nv, kNoNode);

    // Union-find runs over components, one per leaf; each swept vertex keeps
    // the label of the component it joined.
    std::vector<std::uint32_t> label(nv, kNoNode);
    std::vector<Component> comp;
    UnionFind uf(0);
    std::vector<std::uint32_t> uppers;
    uppers.reserve(16);

    auto add_node = [&](Vertex v) {
        t.node_vertex.push_back(v);
        t.node_parent.push_back(kNoNode);
        return static_cast<std::uint32_t>(t.node_vertex.size() - 1);
    };

    // Inactive vertices are never labelled, so the label test alone filters
    // the neighbors; arcs are recorded in sweep order and scattered at the end.
    const SpatialDomain& space = g.space();
    const std::uint64_t n = g.n_regions();
    std::vector<std::uint32_t> arc(ord.order.size());
    auto upper = [&](Vertex u) {
        if (label[u] == kNoNode) return;
        const auto r = uf.find(label[u]);
        if (std::find(uppers.begin(), uppers.end(), r) == uppers.end()) uppers.push_back(r);
    };

    for (std::size_t i = 0; i < ord.order.size(); ++i) {
        const Vertex v = ord.order[i];
        if (i + 16 < ord.order.size()) {
            const Vertex w = ord.order[i + 16];
            __builtin_prefetch(&label[w]);
            if (w >= n) __builtin_prefetch(&label[w - n]);
            if (w + n < nv) __builtin_prefetch(&label[w + n]);
        }
        uppers.clear();
        const auto x = static_cast<std::uint32_t>(v % n);
        for (std::uint32_t y : space.neighbors(x)) upper(static_cast<Vertex>(v - x + y));
        if (v >= n) upper(static_cast<Vertex>(v - n));
        if (v + n < nv) upper(static_cast<Vertex>(v + n));

        if (uppers.empty()) {
            const auto node = add_node(v);
            t.leaves.push_back(node);
            label[v] = uf.add();
            comp.push_back({v, node, v, label[v]});
            arc[i] = node;
            continue;
        }
        if (uppers.size() == 1) {
            const auto r = uppers[0];
            label[v] = r;
            comp[r].last = v;
            arc[i] = comp[r].head;
            continue;
        }

        // Merge: the elder creator survives, the others die here.
        const auto node = add_node(v);
        std::uint32_t survivor = uppers[0];
        for (auto r : uppers)
            if (comp[r].born < comp[survivor].born) survivor = r;
        const Vertex elder = comp[survivor].creator;
        for (auto r : uppers) {
            t.node_parent[comp[r].head] = node;
            if (r != survivor) {
                const Vertex c = comp[r].creator;
                t.pairs.push_back({c, v, values[c] - values[v]});
            }
        }
        std::uint32_t root = uppers[0];
        for (auto r : uppers) root = uf.unite(uf.find(root), r);
        comp[root] = {elder, node, v, comp[survivor].born};
        label[v] = root;
        arc[i] = node;
    }

    for (std::size_t k = 0; k < arc.size(); ++k) t.arc_of[ord.order[k]] = arc[k];

    // Close each connected component at its lowest vertex, in order of creation.
    for (std::uint32_t r = 0; r < comp.size(); ++r) {
        if (uf.find(r) != r) continue;
        const Component c = comp[r];
        std::uint32_t root_node = c.head;
        if (t.node_vertex[c.head] != c.last) {
            root_node = add_node(c.last);
            t.node_parent[c.head] = root_node;
            t.arc_of[c.last] = root_node;
        }
        t.roots.push_back(root_node);
        t.pairs.push_back({c.creator, kNoVertex, values[c.creator] - values[c.last]});
    }
    return t;
}

std::vector<double> negated(std::span<const double> values) {
    std::vector<double> neg(values.size());
    std::transform(values.begin(), values.end(), neg.begin(), [](double x) { return -x; });
    return neg;
}

}  // namespace

MergeTree join_tree(const STGraph& g, std::span<const double> values, const TotalOrder& ord) {
    return sweep(g, values, ord, TreeKind::join);
}

MergeTree join_tree(const STGraph& g, std::span<const double> values) {
    return join_tree(g, values, total_order(values));
}

TotalOrder split_order(std::span<const double> values) {
    const auto neg = negated(values);
    return total_order(neg);
}

MergeTree split_tree(const STGraph& g, std::span<const double> values) {
    const auto neg = negated(values);
    return sweep(g, neg, total_order(neg), TreeKind::split);
}

std::vector<DiagramPoint> persistence_values(const MergeTree& tree, std::span<const double> values) {
    std::vector<DiagramPoint> out;
    out.reserve(tree.pairs.size());
    const double sign = tree.kind == TreeKind::join ? -1.0 : 1.0;
    for (const auto& p : tree.pairs) {
        const double birth = values[p.creator];
        const double death = p.essential() ? birth + sign * p.persistence : values[p.destroyer];
        out.push_back({p.creator, birth, death, p.persistence});
    }
    return out;
}

void save_tree(const MergeTree& t, const std::filesystem::path& path) {
    auto widen = [](const auto& v) { return std::vector<std::uint64_t>(v.begin(), v.end()); };
    BinaryWriter w;
    w.magic(kMagic);
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(t.kind));
    w.u64(t.vertex_count);
    w.u64(t.node_vertex.size());
    w.array<std::uint64_t>(widen(t.node_vertex));
    w.array<std::uint64_t>(widen(t.node_parent));
    w.u64(t.leaves.size());
    w.array<std::uint64_t>(widen(t.leaves));
    w.u64(t.roots.size());
    w.array<std::uint64_t>(widen(t.roots));
    w.u64(t.pairs.size());
    for (const auto& p : t.pairs) {
        w.u64(p.creator);
        w.u64(p.destroyer);
        w.f64(p.persistence);
    }
    w.array<std::uint64_t>(widen(t.arc_of));
    w.save(path);
}

MergeTree load_tree(const std::filesystem::path& path) {
    BinaryReader r = BinaryReader::load(path);
    r.expect_magic(kMagic);
    if (r.u32() != kVersion) throw Error(ErrorCode::malformed, "unsupported tree version: " + path.string());
    MergeTree t;
    const auto kind = r.u8();
    if (kind > 1) throw Error(ErrorCode::malformed, "bad tree kind in " + path.string());
    t.kind = static_cast<TreeKind>(kind);
    t.vertex_count = r.u64();
    if (t.vertex_count >= kNoVertex) throw Error(ErrorCode::malformed, "bad vertex count in " + path.string());

    auto narrow = [&](const std::vector<std::uint64_t>& v, std::uint64_t limit, bool allow_none) {
        std::vector<std::uint32_t> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] >= limit && !(allow_none && v[i] == kNoNode))
                throw Error(ErrorCode::malformed, "index out of range in " + path.string());
            out[i] = static_cast<std::uint32_t>(v[i]);
        }
        return out;
    };
    const auto nodes = r.u64();
    t.node_vertex = narrow(r.array<std::uint64_t>(nodes), t.vertex_count, false);
    t.node_parent = narrow(r.array<std::uint64_t>(nodes), nodes, true);
    t.leaves = narrow(r.array<std::uint64_t>(r.u64()), nodes, false);
    t.roots = narrow(r.array<std::uint64_t>(r.u64()), nodes, false);
    const auto npairs = r.u64();
    if (npairs > t.vertex_count) throw Error(ErrorCode::malformed, "bad pair count in " + path.string());
    t.pairs.resize(npairs);
    for (auto& p : t.pairs) {
        const auto c = r.u64(), d = r.u64();
        if (c >= t.vertex_count || (d >= t.vertex_count && d != kNoVertex))
            throw Error(ErrorCode::malformed, "pair vertex out of range in " + path.string());
        p.creator = static_cast<Vertex>(c);
        p.destroyer = static_cast<Vertex>(d);
        p.persistence = r.f64();
    }
    t.arc_of = narrow(r.array<std::uint64_t>(t.vertex_count), nodes, true);
    if (!r.at_end()) throw Error(ErrorCode::malformed, "trailing bytes in " + path.string());
    return t;
}

}  // namespace topodisc
