#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "synth.hpp"
#include "topodisc/error.hpp"
#include "topodisc/merge_tree.hpp"

using namespace topodisc;

namespace {

const std::vector<double> kPath{1, 5, 2, 6, 0};

STGraph path_graph(std::uint32_t n) { return STGraph(synth::path_domain(n), 1); }

std::vector<std::uint8_t> prefix_members(const TotalOrder& ord, std::size_t k, std::size_t n) {
    std::vector<std::uint8_t> in(n, 0);
    for (std::size_t i = 0; i < k; ++i) in[ord.order[i]] = 1;
    return in;
}

// Tree arcs whose upper node lies in the first k vertices and whose lower node
// does not; a root's arc runs to minus infinity.
std::size_t crossings(const MergeTree& t, const TotalOrder& ord, std::size_t k) {
    std::size_t c = 0;
    for (std::uint32_t node = 0; node < t.node_count(); ++node) {
        if (ord.rank[t.node_vertex[node]] >= k) continue;
        if (t.is_root(node) || ord.rank[t.node_vertex[t.node_parent[node]]] >= k) ++c;
    }
    return c;
}

}  // namespace

TEST(JoinTree, PathExample) {
    const auto g = path_graph(5);
    const auto t = join_tree(g, kPath);
    ASSERT_EQ(t.pairs.size(), 2u);
    EXPECT_EQ(t.pairs[0], (PersistencePair{1, 2, 3.0}));
    EXPECT_EQ(t.pairs[1], (PersistencePair{3, kNoVertex, 6.0}));
    ASSERT_EQ(t.leaves.size(), 2u);
    EXPECT_EQ(t.node_vertex[t.leaves[0]], 3u);
    EXPECT_EQ(t.node_vertex[t.leaves[1]], 1u);
    ASSERT_EQ(t.roots.size(), 1u);
    EXPECT_EQ(t.node_vertex[t.roots[0]], 4u);

    const auto diagram = persistence_values(t, kPath);
    ASSERT_EQ(diagram.size(), 2u);
    EXPECT_EQ(diagram[0].extremum, 1u);
    EXPECT_EQ(diagram[0].birth, 5);
    EXPECT_EQ(diagram[0].death, 2);
    EXPECT_EQ(diagram[0].persistence, 3);
    EXPECT_EQ(diagram[1].extremum, 3u);
    EXPECT_EQ(diagram[1].death, 0);
    EXPECT_EQ(diagram[1].persistence, 6);
}

TEST(JoinTree, MonotonePathHasOneGlobalPair) {
    const auto t = join_tree(path_graph(3), std::vector<double>{1, 2, 3});
    ASSERT_EQ(t.pairs.size(), 1u);
    EXPECT_EQ(t.pairs[0], (PersistencePair{2, kNoVertex, 2.0}));
}

TEST(JoinTree, SingleVertex) {
    const auto g = path_graph(1);
    const std::vector<double> f{4};
    const auto t = join_tree(g, f);
    ASSERT_EQ(t.pairs.size(), 1u);
    EXPECT_EQ(t.pairs[0].persistence, 0.0);
    EXPECT_EQ(persistence_values(t, f)[0].persistence, 0.0);
}

TEST(SplitTree, PathExample) {
    const auto t = split_tree(path_graph(5), kPath);
    std::map<Vertex, PersistencePair> by_creator;
    for (const auto& p : t.pairs) by_creator[p.creator] = p;
    ASSERT_EQ(by_creator.size(), 3u);  // minima v0, v2, v4
    EXPECT_EQ(by_creator[2], (PersistencePair{2, 1, 3.0}));
    EXPECT_EQ(by_creator[0], (PersistencePair{0, 3, 5.0}));
    EXPECT_EQ(by_creator[4], (PersistencePair{4, kNoVertex, 6.0}));
    const auto diagram = persistence_values(t, kPath);
    for (const auto& d : diagram) EXPECT_GE(d.death, d.birth);
}

TEST(SplitTree, ConstantFunctionHasOneMinimum) {
    const auto t = split_tree(path_graph(3), std::vector<double>{2, 2, 2});
    EXPECT_EQ(t.leaves.size(), 1u);
    ASSERT_EQ(t.pairs.size(), 1u);
    EXPECT_TRUE(t.pairs[0].essential());
    EXPECT_EQ(t.pairs[0].persistence, 0.0);
}

TEST(SplitTree, EqualsJoinTreeOfNegation) {
    CounterRng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const auto sg = synth::random_small_graph(rng);
        const STGraph g(sg.space, sg.steps);
        const auto f = synth::random_values(rng, g.vertex_count(), trial % 2 == 0);
        std::vector<double> neg(f.size());
        std::transform(f.begin(), f.end(), neg.begin(), [](double x) { return -x; });
        EXPECT_EQ(split_tree(g, f).pairs, join_tree(g, neg).pairs);
    }
}

TEST(MergeTree, LevelSetComponentOracle) {
    CounterRng rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        const auto sg = synth::random_small_graph(rng);
        std::vector<std::uint8_t> active(sg.space->size() * sg.steps, 1);
        if (trial % 3 == 0)
            for (auto& a : active) a = rng.below(6) != 0;
        const STGraph g(sg.space, sg.steps, active);
        auto f = synth::random_values(rng, g.vertex_count(), trial % 2 == 0);
        for (std::size_t v = 0; v < f.size(); ++v)
            if (!active[v]) f[v] = NAN;

        for (const bool split : {false, true}) {
            std::vector<double> sweep = f;
            if (split)
                for (auto& x : sweep) x = -x;
            const auto ord = total_order(sweep);
            const auto t = split ? split_tree(g, f) : join_tree(g, f);
            for (std::size_t k = 0; k <= ord.order.size(); ++k)
                ASSERT_EQ(crossings(t, ord, k), synth::component_count(g, prefix_members(ord, k, f.size())))
                    << sg.kind << " trial " << trial << " k " << k;

            // One pair per leaf, one essential pair per connected component.
            EXPECT_EQ(t.pairs.size(), t.leaves.size());
            const auto components = synth::component_count(g, active);
            EXPECT_EQ(static_cast<std::size_t>(std::count_if(t.pairs.begin(), t.pairs.end(),
                                                             [](const auto& p) { return p.essential(); })),
                      components);
            EXPECT_EQ(t.roots.size(), components);
            for (const auto& p : t.pairs) EXPECT_GE(p.persistence, 0.0);

            // Every active vertex sits on the arc below a node ranked no lower than itself.
            for (Vertex v = 0; v < g.vertex_count(); ++v) {
                if (!active[v]) {
                    EXPECT_EQ(t.arc_of[v], kNoNode);
                    continue;
                }
                const auto node = t.arc_of[v];
                ASSERT_NE(node, kNoNode);
                EXPECT_LE(ord.rank[t.node_vertex[node]], ord.rank[v]);
                if (!t.is_root(node)) EXPECT_GE(ord.rank[t.node_vertex[t.node_parent[node]]], ord.rank[v]);
            }
        }
    }
}

TEST(MergeTree, EssentialPersistenceIsComponentRange) {
    // Two path components separated by a no-data vertex.
    const std::vector<double> f{3, 8, 1, NAN, 4, 2, 9};
    std::vector<std::uint8_t> active(7, 1);
    active[3] = 0;
    const STGraph g(synth::path_domain(7), 1, active);
    for (const auto& t : {join_tree(g, f), split_tree(g, f)}) {
        std::vector<double> essential;
        for (const auto& p : t.pairs)
            if (p.essential()) essential.push_back(p.persistence);
        std::sort(essential.begin(), essential.end());
        EXPECT_EQ(essential, (std::vector<double>{7, 7}));
    }
}

TEST(MergeTree, KWayMergePairsAllButElder) {
    // Star in a 3x3 grid: four arms of different heights meet at the centre.
    const STGraph g(synth::grid_domain(3, 3), 1);
    const std::vector<double> f{0, 9, 0, 7, 1, 8, 0, 6, 0};
    const auto t = join_tree(g, f);
    std::map<Vertex, PersistencePair> by_creator;
    for (const auto& p : t.pairs) by_creator[p.creator] = p;
    EXPECT_EQ(by_creator[5], (PersistencePair{5, 4, 7.0}));
    EXPECT_EQ(by_creator[3], (PersistencePair{3, 4, 6.0}));
    EXPECT_EQ(by_creator[7], (PersistencePair{7, 4, 5.0}));
    EXPECT_TRUE(by_creator[1].essential());
}

TEST(MergeTree, PersistenceStableUnderSmallPerturbation) {
    CounterRng rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        const auto sg = synth::random_small_graph(rng);
        const STGraph g(sg.space, sg.steps);
        auto f = synth::random_values(rng, g.vertex_count(), false);
        auto sorted = f;
        std::sort(sorted.begin(), sorted.end());
        double gap = 1.0;
        for (std::size_t i = 1; i < sorted.size(); ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
        const double eps = gap / 4;
        auto h = f;
        for (auto& x : h) x += (rng.uniform() * 2 - 1) * eps;
        const auto a = join_tree(g, f), b = join_tree(g, h);
        ASSERT_EQ(a.pairs.size(), b.pairs.size());
        for (std::size_t i = 0; i < a.pairs.size(); ++i) {
            EXPECT_EQ(a.pairs[i].creator, b.pairs[i].creator);
            EXPECT_LE(std::abs(a.pairs[i].persistence - b.pairs[i].persistence), 2 * eps + 1e-12);
        }
    }
}

TEST(MergeTree, FileRoundTrip) {
    synth::TempDir dir("mt");
    CounterRng rng(34);
    const STGraph g(synth::grid_domain(6, 5), 4);
    const auto f = synth::random_values(rng, g.vertex_count(), true);
    const auto t = split_tree(g, f);
    save_tree(t, dir.path() / "t.st");
    const auto u = load_tree(dir.path() / "t.st");
    EXPECT_EQ(u.kind, t.kind);
    EXPECT_EQ(u.node_vertex, t.node_vertex);
    EXPECT_EQ(u.node_parent, t.node_parent);
    EXPECT_EQ(u.leaves, t.leaves);
    EXPECT_EQ(u.roots, t.roots);
    EXPECT_EQ(u.pairs, t.pairs);
    EXPECT_EQ(u.arc_of, t.arc_of);
    std::filesystem::resize_file(dir.path() / "t.st", 40);
    EXPECT_THROW(load_tree(dir.path() / "t.st"), Error);
}
