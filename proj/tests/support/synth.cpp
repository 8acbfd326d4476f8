#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <numeric>
#include <unistd.h>

namespace synth {

using topodisc::RegionId;

namespace {

std::shared_ptr<const SpatialDomain> make(std::uint32_t n, const std::vector<std::pair<RegionId, RegionId>>& adj) {
    std::vector<RegionId> ids(n);
    std::iota(ids.begin(), ids.end(), RegionId{0});
    return std::make_shared<const SpatialDomain>(std::move(ids), adj);
}

}  // namespace

std::shared_ptr<const SpatialDomain> path_domain(std::uint32_t n) {
    std::vector<std::pair<RegionId, RegionId>> adj;
    for (std::uint32_t i = 0; i + 1 < n; ++i) adj.emplace_back(i, i + 1);
    return make(n, adj);
}

std::shared_ptr<const SpatialDomain> cycle_domain(std::uint32_t n) {
    std::vector<std::pair<RegionId, RegionId>> adj;
    for (std::uint32_t i = 0; i < n; ++i) adj.emplace_back(i, (i + 1) % n);
    return make(n, adj);
}

std::shared_ptr<const SpatialDomain> grid_domain(std::uint32_t w, std::uint32_t h) {
    std::vector<std::pair<RegionId, RegionId>> adj;
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            const RegionId v = x + y * w;
            if (x + 1 < w) adj.emplace_back(v, v + 1);
            if (y + 1 < h) adj.emplace_back(v, v + w);
        }
    return make(w * h, adj);
}

std::shared_ptr<const SpatialDomain> random_planar_domain(std::uint32_t w, std::uint32_t h, CounterRng& rng) {
    // Candidate edges of a triangulated grid; a random spanning tree is kept,
    // other edges survive with probability 1/2.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cand;
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            const std::uint32_t v = x + y * w;
            if (x + 1 < w) cand.emplace_back(v, v + 1);
            if (y + 1 < h) cand.emplace_back(v, v + w);
            if (x + 1 < w && y + 1 < h) cand.emplace_back(v, v + w + 1);
        }
    for (std::size_t i = cand.size(); i > 1; --i) std::swap(cand[i - 1], cand[rng.below(i)]);
    std::vector<std::uint32_t> parent(w * h);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::pair<RegionId, RegionId>> adj;
    for (auto [a, b] : cand) {
        const auto ra = find(a), rb = find(b);
        if (ra != rb) {
            parent[ra] = rb;
            adj.emplace_back(a, b);
        } else if (rng.below(2) == 0) {
            adj.emplace_back(a, b);
        }
    }
    return make(w * h, adj);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_of(const SpatialDomain& d) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t x = 0; x < d.size(); ++x)
        for (auto y : d.neighbors(x))
            if (y > x) out.emplace_back(x, y);
    return out;
}

SmallGraph random_small_graph(CounterRng& rng, std::uint64_t max_vertices) {
    const auto kind = rng.below(3);
    const std::uint64_t steps = 1 + rng.below(6);
    const std::uint64_t budget = std::max<std::uint64_t>(1, max_vertices / steps);
    if (kind == 0) {
        const auto n = static_cast<std::uint32_t>(1 + rng.below(std::min<std::uint64_t>(budget, 40)));
        return {path_domain(n), steps, "path"};
    }
    const auto side = static_cast<std::uint32_t>(std::max<double>(1, std::floor(std::sqrt(double(budget)))));
    const auto w = static_cast<std::uint32_t>(1 + rng.below(side));
    const auto h = static_cast<std::uint32_t>(1 + rng.below(std::max<std::uint64_t>(1, std::min<std::uint64_t>(side, budget / w))));
    if (kind == 1) return {grid_domain(w, h), steps, "grid"};
    return {random_planar_domain(w, h, rng), steps, "planar"};
}

std::vector<double> random_values(CounterRng& rng, std::size_t n, bool with_ties) {
    std::vector<double> v(n);
    for (auto& x : v) x = with_ties ? static_cast<double>(rng.below(5)) : rng.uniform() * 100.0;
    return v;
}

double normal(CounterRng& rng) {
    // Box-Muller on (0, 1] uniforms.
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t component_count(const topodisc::STGraph& g, const std::vector<std::uint8_t>& members) {
    const std::size_t n = members.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t comps = 0;
    for (std::size_t a = 0; a < n; ++a) {
        if (!members[a]) continue;
        ++comps;
        for (std::size_t b = 0; b < a; ++b) {
            if (!members[b] || !g.adjacent(static_cast<topodisc::Vertex>(a), static_cast<topodisc::Vertex>(b)))
                continue;
            const auto ra = find(a), rb = find(b);
            if (ra != rb) {
                parent[ra] = rb;
                --comps;
            }
        }
    }
    return comps;
}

topodisc::Bitset filter_at_least(const std::vector<double>& f, double theta) {
    topodisc::Bitset b(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isnan(f[i]) && f[i] >= theta) b.set(i);
    return b;
}

topodisc::Bitset filter_at_most(const std::vector<double>& f, double theta) {
    topodisc::Bitset b(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isnan(f[i]) && f[i] <= theta) b.set(i);
    return b;
}

std::vector<double> smooth_background(CounterRng& rng, std::size_t n, double amplitude) {
    // Sum of a few random low-frequency sinusoids.
    std::vector<double> s(n, 0.0);
    for (int k = 0; k < 4; ++k) {
        const double period = 200.0 + rng.uniform() * 800.0;
        const double phase = rng.uniform() * 2 * M_PI;
        const double a = amplitude * (0.5 + rng.uniform()) / 4.0;
        for (std::size_t i = 0; i < n; ++i) s[i] += a * std::sin(2 * M_PI * static_cast<double>(i) / period + phase);
    }
    return s;
}

void add_bumps(std::vector<double>& series, const std::vector<Bump>& bumps, double height, double width) {
    for (const auto& b : bumps) {
        const auto reach = static_cast<std::ptrdiff_t>(std::ceil(4 * width));
        for (std::ptrdiff_t d = -reach; d <= reach; ++d) {
            const auto i = static_cast<std::ptrdiff_t>(b.center) + d;
            if (i < 0 || i >= static_cast<std::ptrdiff_t>(series.size())) continue;
            series[static_cast<std::size_t>(i)] += b.sign * height * std::exp(-0.5 * (d / width) * (d / width));
        }
    }
}

std::vector<Bump> random_bumps(CounterRng& rng, std::size_t n, std::size_t count, std::size_t margin) {
    std::vector<Bump> out;
    for (std::size_t attempt = 0; out.size() < count; ++attempt) {
        if (attempt > 100000 || n <= 2 * margin) throw std::invalid_argument("bumps do not fit the series");
        const std::size_t c = margin + rng.below(n - 2 * margin);
        const bool clash = std::any_of(out.begin(), out.end(), [&](const Bump& b) {
            return (b.center > c ? b.center - c : c - b.center) < margin;
        });
        if (!clash) out.push_back({c, rng.below(2) ? 1.0 : -1.0});
    }
    return out;
}

void add_bounded_noise(std::vector<double>& series, CounterRng& rng, double bound) {
    for (auto& x : series) x += std::clamp(normal(rng) * bound / 2.0, -bound, bound);
}

double iqr(std::vector<double> values) {
    std::erase_if(values, [](double v) { return std::isnan(v); });
    std::sort(values.begin(), values.end());
    return topodisc::quantile_linear(values, 0.75) - topodisc::quantile_linear(values, 0.25);
}

topodisc::FeatureSet random_feature_set(CounterRng& rng, std::uint64_t n_regions, std::uint64_t steps,
                                        double density) {
    topodisc::FeatureSet fs;
    fs.dataset = "random";
    fs.function = "density";
    fs.resolution = {n_regions > 1 ? topodisc::SpatialRes::neighborhood : topodisc::SpatialRes::city,
                     topodisc::TemporalRes::hour};
    fs.n_regions = n_regions;
    fs.steps = steps;
    fs.time = topodisc::TemporalDomain{topodisc::TemporalRes::hour, 0, 3600, steps};
    fs.plus = topodisc::Bitset(n_regions * steps);
    fs.minus = topodisc::Bitset(n_regions * steps);
    for (std::uint64_t v = 0; v < n_regions * steps; ++v) {
        const double u = rng.uniform();
        if (u < density / 2) fs.plus.set(v);
        else if (u < density) fs.minus.set(v);
    }
    return fs;
}

void write_grid_regions(const std::filesystem::path& corpus_root, const std::string& base, std::uint32_t w,
                        std::uint32_t h, RegionId first_id) {
    std::ostringstream poly, adj;
    poly << "# id lon lat ...\n";
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            const RegionId id = first_id + x + y * w;
            poly << id << " " << x << " " << y << " " << x + 1 << " " << y << " " << x + 1 << " " << y + 1 << " " << x
                 << " " << y + 1 << "\n";
            if (x + 1 < w) adj << id << " " << id + 1 << "\n";
            if (y + 1 < h) adj << id << " " << id + w << "\n";
        }
    write_file(corpus_root / "regions" / (base + ".poly"), poly.str());
    write_file(corpus_root / "regions" / (base + ".adj"), adj.str());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::pair<std::filesystem::path, std::filesystem::path> write_region_dataset(
    const std::filesystem::path& dir, const std::string& name, const std::string& spatial_res,
    const std::vector<RegionId>& region_ids, std::int64_t t0, std::uint64_t steps, const std::vector<double>& series) {
    const bool city = spatial_res == "city";
    const std::size_t n = city ? 1 : region_ids.size();
    std::ostringstream desc;
    desc << "name: " << name << "\n";
    if (!city) desc << "spatial: region\n";
    desc << "spatial_resolution: " << spatial_res << "\ntemporal: t\ntemporal_resolution: hour\nnumerics: value\n"
         << "time_range: " << t0 << ", " << t0 + static_cast<std::int64_t>(steps) * 3600 << "\n";
    std::string csv = city ? "t,value\n" : "region,t,value\n";
    csv.reserve(n * steps * 24);
    char buf[64];
    for (std::uint64_t z = 0; z < steps; ++z)
        for (std::size_t x = 0; x < n; ++x) {
            const double v = series[x + z * n];
            if (std::isnan(v)) continue;
            if (!city) csv += std::to_string(region_ids[x]) + ",";
            csv += std::to_string(t0 + static_cast<std::int64_t>(z) * 3600);
            std::snprintf(buf, sizeof buf, ",%.17g\n", v);
            csv += buf;
        }
    const auto d = dir / (name + ".txt"), c = dir / (name + ".csv");
    write_file(d, desc.str());
    write_file(c, csv);
    return {d, c};
}

TempDir::TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("topodisc-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace synth
