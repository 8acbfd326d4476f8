#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "topodisc/calendar.hpp"
#include "topodisc/resolution.hpp"

namespace topodisc {

enum class FunctionKind : std::uint8_t { density, unique, attribute };

/// Which scalar function of a dataset: the record count, the distinct count of
/// one identifier attribute, or the mean of one numeric attribute.
struct FunctionSpec {
    FunctionKind kind = FunctionKind::density;
    std::string attribute;  // empty for density

    /// "density", "unique-<id>", "avg-<attr>".
    std::string name() const;
    static FunctionSpec parse(const std::string& name);

    friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

inline constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();
inline bool is_no_data(double v) { return std::isnan(v); }

/// Values of one (dataset, function, resolution) over the spatio-temporal
/// points; vertex v(x, z) = x + z * n_regions. NaN marks a point without data.
struct ScalarFunction {
    std::string dataset;
    FunctionSpec spec;
    Resolution resolution;
    std::uint64_t n_regions = 1;
    TemporalDomain time;
    std::vector<double> values;
    /// Contributing tuple counts per point (attribute functions); empty otherwise.
    std::vector<std::uint64_t> counts;

    std::uint64_t steps() const { return time.steps; }
    std::size_t vertex_count() const { return values.size(); }
    double at(std::uint64_t region, std::uint64_t step) const { return values[region + step * n_regions]; }
    std::vector<bool> active_mask() const;
};

/// Header, then the n x m value array stored region-major (row = region),
/// then the optional count array in the same layout.
void save_function(const ScalarFunction& f, const std::filesystem::path& path);
ScalarFunction load_function(const std::filesystem::path& path);

}  // namespace topodisc
