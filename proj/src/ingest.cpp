#include "topodisc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "topodisc/calendar.hpp"
#include "topodisc/csv.hpp"
#include "topodisc/error.hpp"

namespace topodisc {

namespace {

std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_region(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::missing_column, "column `" + name + "` not in CSV header");
    return static_cast<std::size_t>(it - header.begin());
}

void note(ParseReport* report, std::string msg) {
    if (report && report->messages.size() < 8) report->messages.push_back(std::move(msg));
}

}  // namespace

RecordTable parse_records(std::istream& csv, const DatasetDescriptor& desc, ParseReport* report) {
    RecordTable t;
    t.ids.resize(desc.id_attrs.size());
    t.numerics.resize(desc.numeric_attrs.size());
    std::vector<std::unordered_map<std::string, std::uint32_t>> interned(desc.id_attrs.size());

    std::vector<std::size_t> spatial_cols, id_cols, num_cols;
    std::size_t time_col = 0;
    ParseReport local;
    ParseReport& rep = report ? *report : local;

    auto on_row = [&](std::size_t lineno, std::span<const std::string> fields) {
        ++rep.rows;
        auto field = [&](std::size_t c) -> std::string_view {
            return c < fields.size() ? std::string_view(fields[c]) : std::string_view{};
        };
        LonLat ll{};
        RegionId region = 0;
        if (desc.native.spatial == SpatialRes::gps) {
            auto lon = parse_double(field(spatial_cols[0]));
            auto lat = parse_double(field(spatial_cols[1]));
            if (!lon || !lat) {
                ++rep.skipped_spatial;
                note(&rep, "line " + std::to_string(lineno) + ": unparsable coordinates");
                return;
            }
            ll = {*lon, *lat};
        } else if (desc.native.spatial != SpatialRes::city) {
            auto r = parse_region(field(spatial_cols[0]));
            if (!r) {
                ++rep.skipped_spatial;
                note(&rep, "line " + std::to_string(lineno) + ": unparsable region id");
                return;
            }
            region = *r;
        }
        auto ts = parse_timestamp(field(time_col));
        if (!ts) {
            ++rep.skipped_temporal;
            note(&rep, "line " + std::to_string(lineno) + ": unparsable timestamp");
            return;
        }
        if (desc.native.spatial == SpatialRes::gps) t.coords.push_back(ll);
        else if (desc.native.spatial != SpatialRes::city) t.regions.push_back(region);
        t.times.push_back(*ts);
        for (std::size_t i = 0; i < id_cols.size(); ++i) {
            std::string_view v = field(id_cols[i]);
            if (v.empty()) {
                t.ids[i].push_back(RecordTable::kMissingId);
                continue;
            }
            auto [it, inserted] = interned[i].try_emplace(std::string(v), static_cast<std::uint32_t>(interned[i].size()));
            t.ids[i].push_back(it->second);
        }
        for (std::size_t i = 0; i < num_cols.size(); ++i)
            t.numerics[i].push_back(parse_double(field(num_cols[i])).value_or(kNoData));
    };

    std::string line;
    if (!std::getline(csv, line)) throw Error(ErrorCode::malformed, "CSV has no header row");
    const auto header = split_csv_line(line);
    validate_columns(desc, header);
    if (desc.native.spatial != SpatialRes::city)
        for (const auto& c : desc.spatial_columns) spatial_cols.push_back(column_index(header, c));
    time_col = column_index(header, desc.temporal_column);
    for (const auto& c : desc.id_attrs) id_cols.push_back(column_index(header, c));
    for (const auto& c : desc.numeric_attrs) num_cols.push_back(column_index(header, c));

    std::size_t lineno = 0;
    while (std::getline(csv, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        on_row(lineno, split_csv_line(line));
    }
    return t;
}

RecordTable load_records(const std::filesystem::path& csv, const DatasetDescriptor& desc, ParseReport* report) {
    std::ifstream in(csv);
    if (!in) throw Error(ErrorCode::io, "cannot open: " + csv.string());
    return parse_records(in, desc, report);
}

PointAssignment assign_points(const RecordTable& records, const DatasetDescriptor& desc, Resolution res,
                              const SpatialLayer& layer) {
    const auto& dag = ResolutionDag::standard();
    if (!res.is_evaluation_resolution() || !dag.reaches(desc.native, res))
        throw Error(ErrorCode::unreachable_resolution,
                    to_string(res) + " is not reachable from " + to_string(desc.native));
    if (layer.resolution != res.spatial)
        throw Error(ErrorCode::resolution_mismatch, "spatial layer is " + std::string(to_string(layer.resolution)) +
                                                        ", expected " + std::string(to_string(res.spatial)));
    const bool via_polygons = desc.native.spatial == SpatialRes::gps && res.spatial != SpatialRes::city;
    if (via_polygons && !layer.polygons)
        throw Error(ErrorCode::invalid_argument, "gps data needs polygons for " + std::string(to_string(res.spatial)));

    PointAssignment pa;
    pa.n_regions = layer.domain.size();
    pa.time = TemporalDomain::covering(res.temporal, desc.t_start, desc.t_end);
    pa.point.assign(records.size(), -1);
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::optional<std::uint32_t> x;
        if (res.spatial == SpatialRes::city) {
            x = 0;
        } else if (via_polygons) {
            if (auto id = layer.polygons->locate(records.coords[i])) x = layer.domain.index_of(*id);
        } else {
            x = layer.domain.index_of(records.regions[i]);
        }
        if (!x) {
            ++pa.outside_space;
            continue;
        }
        const std::int64_t t = records.times[i];
        auto z = (t >= desc.t_start && t < desc.t_end) ? pa.time.step_of(t) : std::nullopt;
        if (!z) {
            ++pa.outside_time;
            continue;
        }
        pa.point[i] = static_cast<std::int64_t>(*x + *z * pa.n_regions);
        ++pa.assigned;
    }
    return pa;
}

std::vector<FunctionSpec> function_specs(const DatasetDescriptor& desc) {
    std::vector<FunctionSpec> out{{FunctionKind::density, {}}};
    for (const auto& id : desc.id_attrs) out.push_back({FunctionKind::unique, id});
    for (const auto& a : desc.numeric_attrs) out.push_back({FunctionKind::attribute, a});
    return out;
}

ScalarFunction aggregate(const RecordTable& records, const DatasetDescriptor& desc, Resolution res,
                         const FunctionSpec& spec, const SpatialLayer& layer) {
    return aggregate(records, desc, spec, assign_points(records, desc, res, layer), res);
}

ScalarFunction aggregate(const RecordTable& records, const DatasetDescriptor& desc, const FunctionSpec& spec,
                         const PointAssignment& points, Resolution res) {
    if (points.assigned == 0)
        throw Error(ErrorCode::no_records, "dataset " + desc.name + ": every record was skipped at " + to_string(res));

    ScalarFunction f;
    f.dataset = desc.name;
    f.spec = spec;
    f.resolution = res;
    f.n_regions = points.n_regions;
    f.time = points.time;
    const std::size_t nv = points.n_regions * points.time.steps;

    auto attr_index = [&](const std::vector<std::string>& list) {
        auto it = std::find(list.begin(), list.end(), spec.attribute);
        if (it == list.end())
            throw Error(ErrorCode::missing_column, "dataset " + desc.name + " has no attribute " + spec.attribute);
        return static_cast<std::size_t>(it - list.begin());
    };

    switch (spec.kind) {
        case FunctionKind::density: {
            f.values.assign(nv, 0.0);
            for (std::int64_t p : points.point)
                if (p >= 0) f.values[static_cast<std::size_t>(p)] += 1.0;
            break;
        }
        case FunctionKind::unique: {
            const auto& ids = records.ids[attr_index(desc.id_attrs)];
            std::vector<std::pair<std::int64_t, std::uint32_t>> keyed;
            keyed.reserve(points.assigned);
            for (std::size_t i = 0; i < points.point.size(); ++i)
                if (points.point[i] >= 0 && ids[i] != RecordTable::kMissingId) keyed.emplace_back(points.point[i], ids[i]);
            std::sort(keyed.begin(), keyed.end());
            keyed.erase(std::unique(keyed.begin(), keyed.end()), keyed.end());
            f.values.assign(nv, 0.0);
            for (const auto& [p, id] : keyed) f.values[static_cast<std::size_t>(p)] += 1.0;
            break;
        }
        case FunctionKind::attribute: {
            const auto& vals = records.numerics[attr_index(desc.numeric_attrs)];
            std::vector<double> sum(nv, 0.0);
            f.counts.assign(nv, 0);
            for (std::size_t i = 0; i < points.point.size(); ++i) {
                if (points.point[i] < 0 || is_no_data(vals[i])) continue;
                const auto p = static_cast<std::size_t>(points.point[i]);
                sum[p] += vals[i];
                ++f.counts[p];
            }
            f.values.assign(nv, kNoData);
            for (std::size_t p = 0; p < nv; ++p)
                if (f.counts[p] > 0) f.values[p] = sum[p] / static_cast<double>(f.counts[p]);
            break;
        }
    }
    return f;
}

ScalarFunction downscale(const ScalarFunction& f, Resolution target, const ResolutionDag& dag) {
    if (!dag.reaches(f.resolution, target) || !target.is_evaluation_resolution())
        throw Error(ErrorCode::unreachable_resolution,
                    to_string(target) + " is not reachable from " + to_string(f.resolution));
    if (f.spec.kind == FunctionKind::unique)
        throw Error(ErrorCode::unsupported, "distinct counts are not additive; re-aggregate " + f.spec.name() +
                                                " from records at " + to_string(target));
    if (target.spatial != f.resolution.spatial && target.spatial != SpatialRes::city)
        throw Error(ErrorCode::unsupported, "only city is a coarser evaluation target for " +
                                                std::string(to_string(f.resolution.spatial)));

    ScalarFunction g;
    g.dataset = f.dataset;
    g.spec = f.spec;
    g.resolution = target;
    g.n_regions = target.spatial == f.resolution.spatial ? f.n_regions : 1;
    g.time = TemporalDomain::covering(target.temporal, f.time.t0, f.time.step_start(f.time.steps));

    const std::size_t nv = g.n_regions * g.time.steps;
    std::vector<std::uint64_t> step_map(f.time.steps);
    for (std::uint64_t z = 0; z < f.time.steps; ++z) step_map[z] = *g.time.step_of(f.time.step_start(z));

    auto target_of = [&](std::uint64_t x, std::uint64_t z) {
        const std::uint64_t gx = g.n_regions == 1 ? 0 : x;
        return gx + step_map[z] * g.n_regions;
    };

    if (f.spec.kind == FunctionKind::density) {
        g.values.assign(nv, 0.0);
        for (std::uint64_t z = 0; z < f.time.steps; ++z)
            for (std::uint64_t x = 0; x < f.n_regions; ++x) {
                const double v = f.values[x + z * f.n_regions];
                if (!is_no_data(v)) g.values[target_of(x, z)] += v;
            }
        return g;
    }

    std::vector<double> weighted(nv, 0.0);
    g.counts.assign(nv, 0);
    for (std::uint64_t z = 0; z < f.time.steps; ++z)
        for (std::uint64_t x = 0; x < f.n_regions; ++x) {
            const std::size_t v = x + z * f.n_regions;
            if (is_no_data(f.values[v])) continue;
            const std::uint64_t w = f.counts.empty() ? 1 : f.counts[v];
            const auto t = target_of(x, z);
            weighted[t] += f.values[v] * static_cast<double>(w);
            g.counts[t] += w;
        }
    g.values.assign(nv, kNoData);
    for (std::size_t p = 0; p < nv; ++p)
        if (g.counts[p] > 0) g.values[p] = weighted[p] / static_cast<double>(g.counts[p]);
    return g;
}

}  // namespace topodisc
