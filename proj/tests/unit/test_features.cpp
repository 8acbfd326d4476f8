#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "synth.hpp"
#include "topodisc/calendar.hpp"
#include "topodisc/error.hpp"
#include "topodisc/features.hpp"

using namespace topodisc;

namespace {

auto city_space() { return std::make_shared<const SpatialDomain>(SpatialDomain::city()); }

ScalarFunction city_series(std::vector<double> values, TemporalRes res, std::int64_t t0) {
    ScalarFunction f;
    f.dataset = "synthetic";
    f.resolution = {SpatialRes::city, res};
    f.n_regions = 1;
    f.time = TemporalDomain::covering(res, t0, t0 + 1);
    f.time.steps = values.size();
    f.values = std::move(values);
    return f;
}

struct Built {
    STGraph g;
    MergeTree join, split;
};

Built build(std::shared_ptr<const SpatialDomain> space, const ScalarFunction& f) {
    STGraph g = STGraph::for_function(std::move(space), f);
    auto j = join_tree(g, f.values);
    auto s = split_tree(g, f.values);
    return {std::move(g), std::move(j), std::move(s)};
}

std::vector<Vertex> members(const Bitset& b) {
    std::vector<Vertex> out;
    b.for_each([&](std::size_t i) { out.push_back(static_cast<Vertex>(i)); });
    return out;
}

Bitset window_mask(std::uint64_t n, std::uint64_t m, StepInterval w) {
    Bitset b(n * m);
    for (std::uint64_t z = w.z0; z < w.z1; ++z)
        for (std::uint64_t x = 0; x < n; ++x) b.set(x + z * n);
    return b;
}

}  // namespace

TEST(TwoMeans, SeparatesBimodalPersistence) {
    std::vector<Extremum> minima{{0, 9, 0.1}, {1, 9, 0.12}, {2, 9, 0.09}, {3, 2, 5.0}, {4, 3, 5.2}};
    const auto salient = salient_extrema(minima);
    ASSERT_EQ(salient.size(), 2u);
    double theta_minus = -INFINITY;
    for (const auto& e : salient) theta_minus = std::max(theta_minus, e.value);
    EXPECT_EQ(theta_minus, 3.0);

    EXPECT_EQ(salient_extrema({{7, 4.5, 1.0}}).size(), 1u);
    EXPECT_EQ(salient_extrema({{0, 1, 2.0}, {1, 3, 2.0}, {2, 2, 2.0}}).size(), 3u);
    const std::vector<double> ties{1, 1, 1, 8, 8};
    EXPECT_EQ(two_means_split(ties), 3u);
}

TEST(TwoMeans, MatchesExhaustiveSearch) {
    CounterRng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(2 + rng.below(30));
        for (auto& x : v) x = trial % 2 ? static_cast<double>(rng.below(6)) : rng.uniform() * 10;
        std::sort(v.begin(), v.end());
        if (v.front() == v.back()) continue;
        auto sse = [&](std::size_t a, std::size_t b) {
            double mean = 0;
            for (std::size_t i = a; i < b; ++i) mean += v[i];
            mean /= static_cast<double>(b - a);
            double s = 0;
            for (std::size_t i = a; i < b; ++i) s += (v[i] - mean) * (v[i] - mean);
            return s;
        };
        double best = INFINITY;
        for (std::size_t s = 1; s < v.size(); ++s)
            if (v[s - 1] < v[s]) best = std::min(best, sse(0, s) + sse(s, v.size()));
        const auto cut = two_means_split(v);
        ASSERT_GT(cut, 0u);
        EXPECT_LT(v[cut - 1], v[cut]);
        EXPECT_NEAR(sse(0, cut) + sse(cut, v.size()), best, 1e-9 * (1 + best));
    }
}

TEST(ExtremeThreshold, BoxPlotFences) {
    EXPECT_DOUBLE_EQ(*extreme_threshold({2, 4, 6, 8}, Polarity::minima), -1.0);
    // Q1 at h = 0.75 is 1.75, Q3 at h = 2.25 is 3 + 0.25 * 97 = 27.25.
    const auto fence = extreme_threshold({100, 1, 3, 2}, Polarity::maxima);
    EXPECT_DOUBLE_EQ(*fence, 27.25 + 1.5 * 25.5);
    EXPECT_GT(100.0, *fence);
    EXPECT_EQ(*extreme_threshold({4, 4, 4, 4, 4}, Polarity::maxima), 4.0);
    EXPECT_FALSE(extreme_threshold({1, 2, 3}, Polarity::minima));
    const std::vector<double> s{1, 2, 3, 4, 5};
    EXPECT_DOUBLE_EQ(quantile_linear(s, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(quantile_linear(s, 0.1), 1.4);
}

TEST(Query, PathExamples) {
    const STGraph g(synth::path_domain(5), 1);
    const std::vector<double> f{1, 5, 2, 6, 0};
    const auto join = join_tree(g, f);
    const auto split = split_tree(g, f);
    EXPECT_EQ(members(query_superlevel(g, join, f, 4)), (std::vector<Vertex>{1, 3}));
    EXPECT_EQ(members(query_sublevel(g, split, f, 1)), (std::vector<Vertex>{0, 4}));
    EXPECT_EQ(query_superlevel(g, join, f, 0).count(), 5u);
    EXPECT_TRUE(query_superlevel(g, join, f, 6.5).none());
    EXPECT_EQ(query_sublevel(g, split, f, 6).count(), 5u);
    EXPECT_TRUE(query_sublevel(g, split, f, -1).none());
}

TEST(Query, MatchesBruteForceFilter) {
    CounterRng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const auto sg = synth::random_small_graph(rng);
        std::vector<std::uint8_t> active(sg.space->size() * sg.steps, 1);
        if (trial % 4 == 0)
            for (auto& a : active) a = rng.below(5) != 0;
        const STGraph g(sg.space, sg.steps, active);
        auto f = synth::random_values(rng, g.vertex_count(), trial % 2 == 0);
        for (std::size_t v = 0; v < f.size(); ++v)
            if (!active[v]) f[v] = NAN;
        const auto join = join_tree(g, f);
        const auto split = split_tree(g, f);
        const std::uint64_t n = g.n_regions(), m = g.steps();
        const auto z0 = rng.below(m);
        const StepInterval w{z0, z0 + 1 + rng.below(m - z0)};
        const auto mask = window_mask(n, m, w);

        Bitset previous(g.vertex_count());
        for (int k = 0; k < 50; ++k) {
            const double theta = -5 + 110.0 * k / 49.0;
            const double rtheta = 110 - 115.0 * k / 49.0;
            const auto up = query_superlevel(g, join, f, rtheta);
            ASSERT_EQ(up, synth::filter_at_least(f, rtheta)) << sg.kind << " trial " << trial;
            EXPECT_TRUE(previous.subset_of(up));
            previous = up;
            ASSERT_EQ(query_sublevel(g, split, f, theta), synth::filter_at_most(f, theta)) << sg.kind;
            ASSERT_EQ(query_superlevel(g, join, f, theta, w), synth::filter_at_least(f, theta) & mask)
                << sg.kind << " window " << w.z0 << ".." << w.z1;
            ASSERT_EQ(query_sublevel(g, split, f, theta, w), synth::filter_at_most(f, theta) & mask) << sg.kind;
        }
    }
}

TEST(Seasonal, IntervalsFollowCalendar) {
    const auto t0 = *parse_timestamp("2012-01-01"), t1 = *parse_timestamp("2013-01-01");
    const auto hours = seasonal_intervals(TemporalDomain::covering(TemporalRes::hour, t0, t1));
    ASSERT_EQ(hours.size(), 12u);
    EXPECT_EQ(hours[0], (StepInterval{0, 744}));
    EXPECT_EQ(hours[1], (StepInterval{744, 744 + 696}));
    EXPECT_EQ(hours.back().z1, 366u * 24);
    const auto days = seasonal_intervals(TemporalDomain::covering(TemporalRes::day, t0, t1));
    ASSERT_EQ(days.size(), 4u);
    EXPECT_EQ(days[0], (StepInterval{0, 91}));
    EXPECT_EQ(days[1], (StepInterval{91, 182}));
    EXPECT_EQ(seasonal_intervals(TemporalDomain::covering(TemporalRes::week, t0, t1)).size(), 1u);
    // A range starting mid-month keeps the partial month as its own interval.
    const auto mid = seasonal_intervals(
        TemporalDomain::covering(TemporalRes::hour, *parse_timestamp("2012-01-31"), *parse_timestamp("2012-02-02")));
    EXPECT_EQ(mid, (std::vector<StepInterval>{{0, 24}, {24, 48}}));
}

TEST(Features, SalientOnPath) {
    const auto f = city_series({1, 5, 2, 6, 0}, TemporalRes::week, 0);
    const auto b = build(city_space(), f);
    const auto fs = salient_features(b.g, f, b.join, b.split);
    ASSERT_EQ(fs.thresholds.size(), 1u);
    EXPECT_EQ(fs.thresholds[0].theta_plus, 6.0);
    EXPECT_EQ(fs.thresholds[0].theta_minus, 1.0);
    EXPECT_EQ(members(fs.plus), (std::vector<Vertex>{3}));
    EXPECT_EQ(members(fs.minus), (std::vector<Vertex>{0, 4}));
}

TEST(Features, ThresholdsDifferBetweenSeasons) {
    // January hovers around 10 with dips down to 2..3, February around 20 with
    // dips down to 12..13: a value of 13 is a negative feature only in February.
    // Several dips per month keep the essential pair from forming a cluster alone.
    const auto t0 = *parse_timestamp("2012-01-01");
    std::vector<double> v(744 + 696);
    for (std::size_t z = 0; z < v.size(); ++z) {
        const double base = z < 744 ? 10 : 20;
        v[z] = base + 0.2 * std::sin(2 * M_PI * static_cast<double>(z) / 6.0);
    }
    const std::vector<std::size_t> at{100, 200, 300, 400, 500};
    const double depth[5] = {2, 3, 2.5, 2.8, 2.2};
    std::vector<Vertex> dips;
    for (std::size_t k = 0; k < at.size(); ++k) {
        v[at[k]] = depth[k];
        v[744 + at[k]] = depth[k] + 10;
        dips.push_back(static_cast<Vertex>(at[k]));
    }
    for (std::size_t k = 0; k < at.size(); ++k) dips.push_back(static_cast<Vertex>(744 + at[k]));
    v[600] = 13;  // inside January, not a feature there
    const auto f = city_series(v, TemporalRes::hour, t0);
    const auto b = build(city_space(), f);
    const auto fs = salient_features(b.g, f, b.join, b.split);
    ASSERT_EQ(fs.thresholds.size(), 2u);
    EXPECT_EQ(fs.thresholds[0].theta_minus, 3.0);
    EXPECT_EQ(fs.thresholds[1].theta_minus, 13.0);
    EXPECT_EQ(members(fs.minus), dips);
    EXPECT_FALSE(fs.minus.test(600));
}

TEST(Features, PositiveAndNegativeSetsAreDisjoint) {
    CounterRng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const auto space = synth::random_planar_domain(4, 4, rng);
        const auto t0 = *parse_timestamp("2012-01-20");
        ScalarFunction f;
        f.resolution = {SpatialRes::neighborhood, TemporalRes::hour};
        f.n_regions = space->size();
        f.time = TemporalDomain::covering(TemporalRes::hour, t0, t0 + 30 * 86400);
        f.values = synth::random_values(rng, f.n_regions * f.time.steps, trial % 2 == 0);
        const auto b = build(space, f);
        const auto fs = salient_features(b.g, f, b.join, b.split);
        ASSERT_EQ(fs.thresholds.size(), 2u);
        EXPECT_TRUE((fs.plus & fs.minus).none());
        // Each slice of Σ+ is the superlevel filter minus points that also pass the sublevel filter.
        for (const auto& t : fs.thresholds) {
            const auto mask = window_mask(f.n_regions, f.time.steps, t.interval);
            Bitset up(f.values.size()), down(f.values.size());
            if (t.theta_plus) up = synth::filter_at_least(f.values, *t.theta_plus);
            if (t.theta_minus) down = synth::filter_at_most(f.values, *t.theta_minus);
            const Bitset both = up & down;
            EXPECT_EQ(fs.plus & mask, Bitset(up).subtract(both) & mask);
            EXPECT_EQ(fs.minus & mask, Bitset(down).subtract(both) & mask);
        }
    }
}

TEST(Features, InvertedThresholdsLeaveTheOverlapOut) {
    const auto space = synth::path_domain(5);
    ScalarFunction f;
    f.resolution = {SpatialRes::neighborhood, TemporalRes::hour};
    f.n_regions = 5;
    f.time = TemporalDomain::covering(TemporalRes::hour, 0, 3600);
    f.values = {1, 5, 2, 6, 0};
    const auto b = build(space, f);
    // theta+ = 2 and theta- = 5: values 2 and 5 pass both tests.
    const auto fs = user_features(b.g, f, b.join, b.split, 2.0, 5.0);
    EXPECT_EQ(members(fs.plus), (std::vector<Vertex>{3}));
    EXPECT_EQ(members(fs.minus), (std::vector<Vertex>{0, 4}));
}

TEST(Features, ExtremeMarksOnlyOutlyingPeaks) {
    // One bump per month of 2012 over a low wiggle; December's bump is far
    // taller than the rest and is the only extreme feature.
    const auto t0 = *parse_timestamp("2012-01-01");
    const auto time = TemporalDomain::covering(TemporalRes::hour, t0, *parse_timestamp("2013-01-01"));
    std::vector<double> v(time.steps);
    for (std::size_t z = 0; z < v.size(); ++z) v[z] = 0.1 * std::sin(2 * M_PI * static_cast<double>(z) / 6.0);
    const auto months = seasonal_intervals(time);
    const double heights[12] = {10, 11, 12, 10, 11, 12, 10, 11, 12, 10, 11, 40};
    std::vector<std::size_t> peaks;
    for (std::size_t k = 0; k < 12; ++k) {
        const std::size_t c = (months[k].z0 + months[k].z1) / 2;
        peaks.push_back(c);
        synth::add_bumps(v, {{c, 1.0}}, heights[k], 5.0);
    }
    const auto f = city_series(v, TemporalRes::hour, t0);
    const auto b = build(city_space(), f);
    const auto fs = extreme_features(b.g, f, b.join, b.split);
    ASSERT_EQ(fs.thresholds.size(), 1u);
    ASSERT_TRUE(fs.thresholds[0].theta_plus);
    const double fence = *fs.thresholds[0].theta_plus;
    EXPECT_GT(fence, 12.5);
    EXPECT_LT(fence, 40.0);
    for (std::size_t k = 0; k < 11; ++k) EXPECT_FALSE(fs.plus.test(peaks[k]));
    EXPECT_TRUE(fs.plus.test(peaks[11]));
    // Strictly beyond the fence.
    Bitset expected(v.size());
    for (std::size_t z = 0; z < v.size(); ++z)
        if (v[z] > fence) expected.set(z);
    EXPECT_EQ(fs.plus, expected);
}

TEST(Features, ExtremeEmptyWithoutOutliers) {
    // Triangle wave: every peak is 12 and every trough 0, so the fences sit on
    // the extrema themselves and nothing lies strictly beyond them.
    std::vector<double> v(240);
    for (std::size_t z = 0; z < v.size(); ++z) v[z] = std::abs(static_cast<double>(z % 24) - 12.0);
    const auto f = city_series(v, TemporalRes::week, 0);
    const auto b = build(city_space(), f);
    const auto fs = extreme_features(b.g, f, b.join, b.split);
    EXPECT_EQ(fs.thresholds[0].theta_plus, 12.0);
    EXPECT_EQ(fs.thresholds[0].theta_minus, 0.0);
    EXPECT_TRUE(fs.plus.none());
    EXPECT_TRUE(fs.minus.none());

    const auto few = city_series({1, 5, 2, 6, 0}, TemporalRes::week, 0);
    const auto c = build(city_space(), few);
    const auto none = extreme_features(c.g, few, c.join, c.split);
    EXPECT_FALSE(none.thresholds[0].theta_plus);
    EXPECT_TRUE(none.plus.none());
}

TEST(Features, SalientMaximaSurviveSmallNoise) {
    CounterRng rng(44);
    const auto t0 = *parse_timestamp("2012-03-01");
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t m = 744;
        // A short ripple supplies the low-persistence cluster.
        auto clean = synth::smooth_background(rng, m, 1.0);
        for (std::size_t z = 0; z < m; ++z) clean[z] += 0.3 * std::sin(2 * M_PI * static_cast<double>(z) / 12.0);
        auto bumps = synth::random_bumps(rng, m, 6, 60);
        for (auto& x : bumps) x.sign = 1.0;
        synth::add_bumps(clean, bumps, 20.0, 4.0);
        auto noisy = clean;
        synth::add_bounded_noise(noisy, rng, 0.02 * synth::iqr(clean));

        auto salient_maxima = [&](const std::vector<double>& v) {
            const auto f = city_series(v, TemporalRes::hour, t0);
            const auto b = build(city_space(), f);
            std::vector<Vertex> out;
            for (const auto& e : salient_extrema(extrema_in(b.join, f.values, 1, {0, m}))) out.push_back(e.vertex);
            std::sort(out.begin(), out.end());
            return out;
        };
        const auto a = salient_maxima(clean), c = salient_maxima(noisy);
        ASSERT_EQ(a.size(), bumps.size());
        ASSERT_EQ(c.size(), bumps.size());
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(int(a[i]) - int(c[i])), 8);
    }
}

TEST(Features, FileRoundTrip) {
    synth::TempDir dir("fs");
    CounterRng rng(45);
    auto fs = synth::random_feature_set(rng, 7, 100, 0.3);
    fs.thresholds.push_back({{0, 100}, 2.5, std::nullopt});
    save_features(fs, dir.path() / "x.fs");
    const auto back = load_features(dir.path() / "x.fs");
    EXPECT_EQ(back.dataset, fs.dataset);
    EXPECT_EQ(back.function, fs.function);
    EXPECT_EQ(back.resolution, fs.resolution);
    EXPECT_EQ(back.n_regions, fs.n_regions);
    EXPECT_EQ(back.time, fs.time);
    ASSERT_EQ(back.thresholds.size(), 1u);
    EXPECT_EQ(back.thresholds[0].theta_plus, 2.5);
    EXPECT_FALSE(back.thresholds[0].theta_minus);
    EXPECT_EQ(back.plus, fs.plus);
    EXPECT_EQ(back.minus, fs.minus);
    EXPECT_THROW(parse_mode("loud"), Error);
}
