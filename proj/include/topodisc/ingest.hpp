#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "topodisc/descriptor.hpp"
#include "topodisc/resolution.hpp"
#include "topodisc/scalar_function.hpp"
#include "topodisc/spatial.hpp"

namespace topodisc {

/// Parsed records, stored column-wise. Identifier values are interned per
/// attribute; a missing identifier is kMissingId. Missing numerics are NaN.
struct RecordTable {
    static constexpr std::uint32_t kMissingId = 0xFFFFFFFFu;

    std::vector<LonLat> coords;      // native gps
    std::vector<RegionId> regions;   // native zip / neighborhood
    std::vector<std::int64_t> times;
    std::vector<std::vector<std::uint32_t>> ids;  // [id attr][record]
    std::vector<std::vector<double>> numerics;    // [numeric attr][record]

    std::size_t size() const { return times.size(); }
};

struct ParseReport {
    std::size_t rows = 0;
    std::size_t skipped_spatial = 0;   // unparsable spatial value
    std::size_t skipped_temporal = 0;  // unparsable timestamp
    std::vector<std::string> messages; // first few problems, for display
};

RecordTable parse_records(std::istream& csv, const DatasetDescriptor& desc, ParseReport* report = nullptr);
RecordTable load_records(const std::filesystem::path& csv, const DatasetDescriptor& desc,
                         ParseReport* report = nullptr);

/// Regions of one spatial resolution, plus polygons when GPS data must be
/// assigned to them.
struct SpatialLayer {
    SpatialRes resolution = SpatialRes::city;
    SpatialDomain domain = SpatialDomain::city();
    std::optional<RegionMap> polygons;

    static SpatialLayer city() { return {}; }
};

/// Point index (x + z * n) of every record at one resolution, -1 if skipped.
struct PointAssignment {
    std::uint64_t n_regions = 1;
    TemporalDomain time;
    std::vector<std::int64_t> point;
    std::size_t outside_space = 0;
    std::size_t outside_time = 0;
    std::size_t assigned = 0;
};

PointAssignment assign_points(const RecordTable& records, const DatasetDescriptor& desc, Resolution res,
                              const SpatialLayer& layer);

/// All density / unique / attribute functions a dataset yields.
std::vector<FunctionSpec> function_specs(const DatasetDescriptor& desc);

/// Aggregates records into one scalar function. Empty points get 0 (density,
/// unique) or no-data (attribute). Throws no_records if every record was skipped.
ScalarFunction aggregate(const RecordTable& records, const DatasetDescriptor& desc, Resolution res,
                         const FunctionSpec& spec, const SpatialLayer& layer);
ScalarFunction aggregate(const RecordTable& records, const DatasetDescriptor& desc, const FunctionSpec& spec,
                         const PointAssignment& points, Resolution res);

/// Re-aggregates a function at a coarser reachable resolution: sums for
/// density, count-weighted means for attributes. Unique functions are not
/// additive and must be re-aggregated from records (throws unsupported).
ScalarFunction downscale(const ScalarFunction& f, Resolution target,
                         const ResolutionDag& dag = ResolutionDag::standard());

}  // namespace topodisc
