#include "topodisc/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topodisc/binary_io.hpp"
#include "topodisc/error.hpp"

namespace topodisc {

namespace {
constexpr std::string_view kMagic = "TDFS";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string_view to_string(FeatureMode m) {
    switch (m) {
        case FeatureMode::salient: return "salient";
        case FeatureMode::extreme: return "extreme";
        case FeatureMode::user: return "user";
    }
    return "?";
}

FeatureMode parse_mode(std::string_view s) {
    if (s == "salient") return FeatureMode::salient;
    if (s == "extreme") return FeatureMode::extreme;
    if (s == "user") return FeatureMode::user;
    throw Error(ErrorCode::invalid_argument, "unknown feature mode: " + std::string(s));
}

std::vector<StepInterval> seasonal_intervals(const TemporalDomain& time) {
    const std::uint64_t m = time.steps;
    if (time.resolution != TemporalRes::hour && time.resolution != TemporalRes::day) return {{0, m}};
    const unsigned months_per_interval = time.resolution == TemporalRes::hour ? 1 : 3;
    auto key = [&](std::uint64_t z) {
        const auto cm = civil_month(time.step_start(z));
        return cm.year * 12 + static_cast<int>((cm.month - 1) / months_per_interval);
    };
    std::vector<StepInterval> out;
    std::uint64_t start = 0;
    int current = key(0);
    for (std::uint64_t z = 1; z < m; ++z) {
        const int k = key(z);
        if (k != current) {
            out.push_back({start, z});
            start = z;
            current = k;
        }
    }
    out.push_back({start, m});
    return out;
}

std::size_t two_means_split(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    if (n < 2 || sorted.front() == sorted.back()) return 0;
    // Prefix sums of values centered on the overall mean keep the SSE well conditioned.
    double mean = 0;
    for (double x : sorted) mean += x;
    mean /= static_cast<double>(n);
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sorted[i] - mean;
        s1[i + 1] = s1[i] + d;
        s2[i + 1] = s2[i] + d * d;
    }
    auto sse = [&](std::size_t a, std::size_t b) {
        const double k = static_cast<double>(b - a);
        const double s = s1[b] - s1[a];
        return (s2[b] - s2[a]) - s * s / k;
    };
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t s = 1; s < n; ++s) {
        if (!(sorted[s - 1] < sorted[s])) continue;
        const double cost = sse(0, s) + sse(s, n);
        if (cost < best_cost) {
            best_cost = cost;
            best = s;
        }
    }
    return best;
}

double quantile_linear(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorCode::invalid_argument, "quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<Extremum> extrema_in(const MergeTree& tree, std::span<const double> values, std::uint64_t n_regions,
                                 StepInterval window) {
    std::vector<Extremum> out;
    for (const auto& p : tree.pairs)
        if (window.contains(p.creator / n_regions)) out.push_back({p.creator, values[p.creator], p.persistence});
    return out;
}

std::vector<Extremum> salient_extrema(std::vector<Extremum> extrema) {
    std::sort(extrema.begin(), extrema.end(), [](const Extremum& a, const Extremum& b) {
        return a.persistence < b.persistence || (a.persistence == b.persistence && a.vertex < b.vertex);
    });
    std::vector<double> pers(extrema.size());
    std::transform(extrema.begin(), extrema.end(), pers.begin(), [](const Extremum& e) { return e.persistence; });
    const std::size_t cut = two_means_split(pers);
    extrema.erase(extrema.begin(), extrema.begin() + static_cast<std::ptrdiff_t>(cut));
    return extrema;
}

Thresholds salient_thresholds(const MergeTree& join, const MergeTree& split, std::span<const double> values,
                              std::uint64_t n_regions, StepInterval interval) {
    Thresholds t{interval, std::nullopt, std::nullopt};
    const auto maxima = salient_extrema(extrema_in(join, values, n_regions, interval));
    for (const auto& e : maxima) t.theta_plus = t.theta_plus ? std::min(*t.theta_plus, e.value) : e.value;
    const auto minima = salient_extrema(extrema_in(split, values, n_regions, interval));
    for (const auto& e : minima) t.theta_minus = t.theta_minus ? std::max(*t.theta_minus, e.value) : e.value;
    return t;
}

std::optional<double> extreme_threshold(std::vector<double> values, Polarity side) {
    if (values.size() < 4) return std::nullopt;
    std::sort(values.begin(), values.end());
    const double q1 = quantile_linear(values, 0.25);
    const double q3 = quantile_linear(values, 0.75);
    const double iqr = q3 - q1;
    return side == Polarity::maxima ? q3 + 1.5 * iqr : q1 - 1.5 * iqr;
}

namespace {

template <class Admits>
Bitset traverse(const STGraph& g, const MergeTree& tree, std::span<const double> values,
                std::optional<StepInterval> window, Admits admits) {
    const std::uint64_t n = g.n_regions();
    const StepInterval w = window.value_or(StepInterval{0, g.steps()});
    Bitset out(g.vertex_count());
    std::vector<Vertex> stack;
    auto seed = [&](Vertex v) {
        if (!out.test(v) && admits(values[v])) {
            out.set(v);
            stack.push_back(v);
        }
    };
    for (auto leaf : tree.leaves) {
        const Vertex v = tree.node_vertex[leaf];
        if (w.contains(v / n)) seed(v);
    }
    auto seed_step = [&](std::uint64_t z) {
        for (std::uint32_t x = 0; x < n; ++x) {
            const Vertex v = g.vertex(x, z);
            if (g.active(v)) seed(v);
        }
    };
    if (w.z0 > 0 && w.z0 < w.z1) seed_step(w.z0);
    if (w.z1 < g.steps() && w.z1 > w.z0) seed_step(w.z1 - 1);

    // Join trees walk downwards from maxima, split trees upwards from minima.
    const bool descending = tree.kind == TreeKind::join;
    while (!stack.empty()) {
        const Vertex v = stack.back();
        stack.pop_back();
        const double fv = values[v];
        g.for_each_neighbor(v, [&](Vertex u) {
            if (out.test(u) || !w.contains(u / n)) return;
            const double fu = values[u];
            if (!admits(fu) || (descending ? fu > fv : fu < fv)) return;
            out.set(u);
            stack.push_back(u);
        });
    }
    return out;
}

}  // namespace

Bitset query_superlevel(const STGraph& g, const MergeTree& join, std::span<const double> values, double theta,
                        std::optional<StepInterval> window) {
    return traverse(g, join, values, window, [theta](double x) { return x >= theta; });
}

Bitset query_sublevel(const STGraph& g, const MergeTree& split, std::span<const double> values, double theta,
                      std::optional<StepInterval> window) {
    return traverse(g, split, values, window, [theta](double x) { return x <= theta; });
}

namespace {

FeatureSet empty_features(const ScalarFunction& f, FeatureMode mode) {
    FeatureSet fs;
    fs.dataset = f.dataset;
    fs.function = f.spec.name();
    fs.resolution = f.resolution;
    fs.mode = mode;
    fs.n_regions = f.n_regions;
    fs.steps = f.time.steps;
    fs.time = f.time;
    fs.plus = Bitset(f.values.size());
    fs.minus = Bitset(f.values.size());
    return fs;
}

void apply(FeatureSet& fs, const STGraph& g, const ScalarFunction& f, const MergeTree& join, const MergeTree& split,
           const Thresholds& t, std::optional<StepInterval> window) {
    Bitset plus(f.values.size()), minus(f.values.size());
    if (t.theta_plus) plus = query_superlevel(g, join, f.values, *t.theta_plus, window);
    if (t.theta_minus) minus = query_sublevel(g, split, f.values, *t.theta_minus, window);
    // With theta- >= theta+ a point can pass both tests; it deviates in no
    // definite direction and belongs to neither set.
    const Bitset both = plus & minus;
    fs.plus |= plus.subtract(both);
    fs.minus |= minus.subtract(both);
}

}  // namespace

FeatureSet salient_features(const STGraph& g, const ScalarFunction& f, const MergeTree& join, const MergeTree& split) {
    FeatureSet fs = empty_features(f, FeatureMode::salient);
    const auto intervals = seasonal_intervals(f.time);
    for (const auto& iv : intervals) {
        const auto t = salient_thresholds(join, split, f.values, f.n_regions, iv);
        fs.thresholds.push_back(t);
        apply(fs, g, f, join, split, t, intervals.size() == 1 ? std::nullopt : std::optional(iv));
    }
    return fs;
}

FeatureSet extreme_features(const STGraph& g, const ScalarFunction& f, const MergeTree& join, const MergeTree& split) {
    FeatureSet fs = empty_features(f, FeatureMode::extreme);
    std::vector<double> max_values, min_values;
    for (const auto& iv : seasonal_intervals(f.time)) {
        for (const auto& e : salient_extrema(extrema_in(join, f.values, f.n_regions, iv))) max_values.push_back(e.value);
        for (const auto& e : salient_extrema(extrema_in(split, f.values, f.n_regions, iv))) min_values.push_back(e.value);
    }
    Thresholds t{{0, f.time.steps}, extreme_threshold(max_values, Polarity::maxima),
                 extreme_threshold(min_values, Polarity::minima)};
    fs.thresholds.push_back(t);
    // Values strictly beyond a fence are extreme.
    Thresholds strict = t;
    if (strict.theta_plus) strict.theta_plus = std::nextafter(*t.theta_plus, std::numeric_limits<double>::infinity());
    if (strict.theta_minus)
        strict.theta_minus = std::nextafter(*t.theta_minus, -std::numeric_limits<double>::infinity());
    apply(fs, g, f, join, split, strict, std::nullopt);
    return fs;
}

FeatureSet user_features(const STGraph& g, const ScalarFunction& f, const MergeTree& join, const MergeTree& split,
                         std::optional<double> theta_plus, std::optional<double> theta_minus) {
    FeatureSet fs = empty_features(f, FeatureMode::user);
    Thresholds t{{0, f.time.steps}, theta_plus, theta_minus};
    fs.thresholds.push_back(t);
    apply(fs, g, f, join, split, t, std::nullopt);
    return fs;
}

void save_features(const FeatureSet& fs, const std::filesystem::path& path) {
    BinaryWriter w;
    w.magic(kMagic);
    w.u32(kVersion);
    w.str(fs.dataset);
    w.str(fs.function);
    w.u8(static_cast<std::uint8_t>(fs.resolution.spatial));
    w.u8(static_cast<std::uint8_t>(fs.resolution.temporal));
    w.u8(static_cast<std::uint8_t>(fs.mode));
    w.u64(fs.n_regions);
    w.u64(fs.steps);
    w.i64(fs.time.t0);
    w.i64(fs.time.delta);
    w.u64(fs.thresholds.size());
    for (const auto& t : fs.thresholds) {
        w.u64(t.interval.z0);
        w.u64(t.interval.z1);
        w.u8(t.theta_plus ? 1 : 0);
        w.f64(t.theta_plus.value_or(0.0));
        w.u8(t.theta_minus ? 1 : 0);
        w.f64(t.theta_minus.value_or(0.0));
    }
    w.array<std::uint64_t>(fs.plus.words());
    w.array<std::uint64_t>(fs.minus.words());
    w.save(path);
}

FeatureSet load_features(const std::filesystem::path& path) {
    BinaryReader r = BinaryReader::load(path);
    r.expect_magic(kMagic);
    if (r.u32() != kVersion) throw Error(ErrorCode::malformed, "unsupported feature-set version: " + path.string());
    FeatureSet fs;
    fs.dataset = r.str();
    fs.function = r.str();
    const auto sres = r.u8(), tres = r.u8(), mode = r.u8();
    if (sres > 3 || tres > 4 || mode > 2) throw Error(ErrorCode::malformed, "bad enum in " + path.string());
    fs.resolution = {static_cast<SpatialRes>(sres), static_cast<TemporalRes>(tres)};
    fs.mode = static_cast<FeatureMode>(mode);
    fs.n_regions = r.u64();
    fs.steps = r.u64();
    if (fs.n_regions == 0 || fs.steps == 0 || fs.n_regions > (std::uint64_t{1} << 32) / fs.steps)
        throw Error(ErrorCode::malformed, "bad domain size in " + path.string());
    fs.time.resolution = fs.resolution.temporal;
    fs.time.t0 = r.i64();
    fs.time.delta = r.i64();
    fs.time.steps = fs.steps;
    const auto nt = r.u64();
    if (nt > fs.steps) throw Error(ErrorCode::malformed, "bad interval count in " + path.string());
    for (std::uint64_t i = 0; i < nt; ++i) {
        Thresholds t;
        t.interval.z0 = r.u64();
        t.interval.z1 = r.u64();
        const bool hp = r.u8() != 0;
        const double tp = r.f64();
        const bool hm = r.u8() != 0;
        const double tm = r.f64();
        if (hp) t.theta_plus = tp;
        if (hm) t.theta_minus = tm;
        fs.thresholds.push_back(t);
    }
    const std::uint64_t nv = fs.vertex_count();
    fs.plus = Bitset(nv);
    fs.minus = Bitset(nv);
    auto read_bits = [&](Bitset& b) {
        const auto words = r.array<std::uint64_t>(b.word_count());
        std::copy(words.begin(), words.end(), b.words().begin());
        if (nv % 64 && b.word_count() && (words.back() >> (nv % 64)))
            throw Error(ErrorCode::malformed, "bits set past the vertex count in " + path.string());
    };
    read_bits(fs.plus);
    read_bits(fs.minus);
    if (!r.at_end()) throw Error(ErrorCode::malformed, "trailing bytes in " + path.string());
    return fs;
}

}  // namespace topodisc
