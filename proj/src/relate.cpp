#include "topodisc/relate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

#include "topodisc/binary_io.hpp"
#include "topodisc/error.hpp"
#include "topodisc/simd/kernels.hpp"

namespace topodisc {

namespace {

void require_same_domain(const FeatureSet& a, const FeatureSet& b) {
    if (a.resolution != b.resolution || a.n_regions != b.n_regions || a.steps != b.steps)
        throw Error(ErrorCode::resolution_mismatch, a.dataset + "/" + a.function + " at " + to_string(a.resolution) +
                                                        " vs " + b.dataset + "/" + b.function + " at " +
                                                        to_string(b.resolution));
}

Relatedness counts(const FeatureSet& fs1, const Bitset& p2, const Bitset& n2) {
    const auto c = simd::bit_kernels().relation_counts(fs1.plus.data(), fs1.minus.data(), p2.data(), n2.data(),
                                                       fs1.plus.word_count());
    return {c.pp + c.nn, c.pn + c.np, c.sigma, 0, 0};
}

std::uint64_t union_size(const FeatureSet& fs) { return (fs.plus | fs.minus).count(); }

}  // namespace

Relatedness relatedness(const FeatureSet& fs1, const FeatureSet& fs2) {
    require_same_domain(fs1, fs2);
    Relatedness r = counts(fs1, fs2.plus, fs2.minus);
    r.size1 = union_size(fs1);
    r.size2 = union_size(fs2);
    return r;
}

std::optional<double> score(const Relatedness& r) {
    if (r.n_sigma == 0) return std::nullopt;
    return (static_cast<double>(r.n_pos) - static_cast<double>(r.n_neg)) / static_cast<double>(r.n_sigma);
}

std::optional<double> strength(const Relatedness& r) {
    if (r.size1 == 0 && r.size2 == 0) return std::nullopt;
    if (r.n_sigma == 0) return 0.0;
    const double precision = static_cast<double>(r.n_sigma) / static_cast<double>(r.size1);
    const double recall = static_cast<double>(r.n_sigma) / static_cast<double>(r.size2);
    return 2.0 * precision * recall / (precision + recall);
}

ToroidalMap toroidal_map(const SpatialDomain& space, CounterRng& rng) {
    const auto n = static_cast<std::uint32_t>(space.size());
    const auto start = static_cast<std::uint32_t>(rng.below(n));
    const auto target = static_cast<std::uint32_t>(rng.below(n));
    return toroidal_map(space, start, target, rng);
}

ToroidalMap toroidal_map(const SpatialDomain& space, std::uint32_t start, std::uint32_t target, CounterRng& rng) {
    const auto n = static_cast<std::uint32_t>(space.size());
    if (start >= n || target >= n) throw Error(ErrorCode::invalid_argument, "toroidal map seed out of range");
    constexpr std::uint32_t kUnset = 0xFFFFFFFFu;
    ToroidalMap m{std::vector<std::uint32_t>(n, kUnset)};
    std::vector<std::uint8_t> taken(n, 0);
    // Unassigned regions on both sides, kept as swap-remove pools for O(1) random picks.
    std::vector<std::uint32_t> free_src(n), free_dst(n), pos_src(n), pos_dst(n);
    for (std::uint32_t i = 0; i < n; ++i) free_src[i] = free_dst[i] = pos_src[i] = pos_dst[i] = i;
    auto drop = [](std::vector<std::uint32_t>& pool, std::vector<std::uint32_t>& pos, std::uint32_t x) {
        const std::uint32_t last = pool.back();
        pool[pos[x]] = last;
        pos[last] = pos[x];
        pool.pop_back();
    };
    auto assign = [&](std::uint32_t x, std::uint32_t y) {
        m.image[x] = y;
        taken[y] = 1;
        drop(free_src, pos_src, x);
        drop(free_dst, pos_dst, y);
    };

    std::deque<std::uint32_t> queue;
    assign(start, target);
    queue.push_back(start);
    std::vector<std::uint32_t> candidates;
    while (!free_src.empty()) {
        if (queue.empty()) {
            // Next connected component: restart from a random pair.
            const auto u = free_src[rng.below(free_src.size())];
            const auto v = free_dst[rng.below(free_dst.size())];
            assign(u, v);
            queue.push_back(u);
        }
        const std::uint32_t u = queue.front();
        queue.pop_front();
        for (std::uint32_t w : space.neighbors(u)) {
            if (m.image[w] != kUnset) continue;
            candidates.clear();
            for (std::uint32_t y : space.neighbors(m.image[u]))
                if (!taken[y]) candidates.push_back(y);
            const std::uint32_t y = candidates.empty() ? free_dst[rng.below(free_dst.size())]
                                                       : candidates[rng.below(candidates.size())];
            assign(w, y);
            queue.push_back(w);
        }
    }
    return m;
}

double adjacency_preservation(const SpatialDomain& space, const ToroidalMap& map) {
    std::uint64_t total = 0, kept = 0;
    for (std::uint32_t x = 0; x < space.size(); ++x)
        for (std::uint32_t y : space.neighbors(x)) {
            if (y < x) continue;
            ++total;
            if (space.adjacent(map.image[x], map.image[y])) ++kept;
        }
    return total == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(total);
}

namespace {

void scatter(const Bitset& src, Bitset& dst, const ToroidalMap& map, std::uint64_t n) {
    dst.clear();
    src.for_each([&](std::size_t v) {
        const std::size_t x = v % n;
        dst.set(v - x + map.image[x]);
    });
}

}  // namespace

FeatureSet apply_map(const FeatureSet& fs, const ToroidalMap& map) {
    if (map.image.size() != fs.n_regions) throw Error(ErrorCode::invalid_argument, "map size does not match regions");
    FeatureSet out = fs;
    scatter(fs.plus, out.plus, map, fs.n_regions);
    scatter(fs.minus, out.minus, map, fs.n_regions);
    return out;
}

FeatureSet temporal_shift(const FeatureSet& fs, std::uint64_t k) {
    if (k >= fs.steps) throw Error(ErrorCode::invalid_argument, "shift must be below the step count");
    FeatureSet out = fs;
    out.plus = fs.plus.rotated(k * fs.n_regions);
    out.minus = fs.minus.rotated(k * fs.n_regions);
    return out;
}

Significance significance(const FeatureSet& fs1, const FeatureSet& fs2, const SpatialDomain& space,
                          const SignificanceConfig& cfg) {
    require_same_domain(fs1, fs2);
    if (cfg.shifts < 1) throw Error(ErrorCode::invalid_argument, "at least one randomization is required");
    if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    if (space.size() != fs1.n_regions) throw Error(ErrorCode::resolution_mismatch, "domain does not match features");
    const auto tau = score(counts(fs1, fs2.plus, fs2.minus));
    if (!tau) throw Error(ErrorCode::invalid_argument, "significance needs a defined relationship score");

    Significance s;
    s.tau_star = *tau;
    const double bar = std::abs(*tau);
    const bool spatial = fs2.n_regions > 1;

    if (!spatial && fs2.steps < 2) {
        // Nothing to randomize: every shift is the identity.
        s.exceedances = cfg.shifts;
    } else {
        CounterRng rng(cfg.seed);
        Bitset p2(fs2.plus.size()), n2(fs2.minus.size());
        for (std::uint32_t k = 0; k < cfg.shifts; ++k) {
            if (spatial) {
                const auto map = toroidal_map(space, rng);
                scatter(fs2.plus, p2, map, fs2.n_regions);
                scatter(fs2.minus, n2, map, fs2.n_regions);
            } else {
                const std::uint64_t shift = 1 + rng.below(fs2.steps - 1);
                p2 = fs2.plus.rotated(shift);
                n2 = fs2.minus.rotated(shift);
            }
            const double tk = score(counts(fs1, p2, n2)).value_or(0.0);
            if (std::abs(tk) >= bar) ++s.exceedances;
        }
    }
    s.p_value = (1.0 + s.exceedances) / (1.0 + cfg.shifts);
    s.significant = s.p_value <= cfg.alpha;
    return s;
}

Evaluation evaluate_pair(const FeatureSet& fs1, const FeatureSet& fs2, const SpatialDomain& space,
                         const Clause& clause, const SignificanceConfig& cfg) {
    Evaluation e;
    const Relatedness r = relatedness(fs1, fs2);
    const auto tau = score(r);
    if (!tau) return e;
    auto& res = e.result;
    res.dataset1 = fs1.dataset;
    res.function1 = fs1.function;
    res.dataset2 = fs2.dataset;
    res.function2 = fs2.function;
    res.resolution = fs1.resolution;
    res.mode = fs1.mode;
    res.tau = *tau;
    res.rho = strength(r).value_or(0.0);
    res.n_sigma = r.n_sigma;
    res.n_pos = r.n_pos;
    res.n_neg = r.n_neg;
    res.seed = cfg.seed;
    res.shifts = cfg.shifts;
    if (std::abs(res.tau) < clause.min_score || res.rho < clause.min_strength) {
        e.outcome = EvalOutcome::filtered;
        return e;
    }
    const auto s = significance(fs1, fs2, space, cfg);
    res.p_value = s.p_value;
    res.significant = s.significant;
    e.outcome = s.significant ? EvalOutcome::significant : EvalOutcome::not_significant;
    return e;
}

std::uint64_t evaluation_seed(std::uint64_t global_seed, const std::string& pair_id, Resolution res, FeatureMode mode) {
    return derive_seed({global_seed, fnv1a(pair_id), static_cast<std::uint64_t>(res.spatial),
                        static_cast<std::uint64_t>(res.temporal), static_cast<std::uint64_t>(mode)});
}

void sort_results(std::vector<RelationshipResult>& results) {
    std::sort(results.begin(), results.end(), [](const RelationshipResult& a, const RelationshipResult& b) {
        const double ta = std::abs(a.tau), tb = std::abs(b.tau);
        if (ta != tb) return ta > tb;
        if (a.rho != b.rho) return a.rho > b.rho;
        return std::tie(a.dataset1, a.function1, a.dataset2, a.function2, a.resolution, a.mode) <
               std::tie(b.dataset1, b.function1, b.dataset2, b.function2, b.resolution, b.mode);
    });
}

}  // namespace topodisc
