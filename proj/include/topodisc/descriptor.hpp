#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topodisc/resolution.hpp"

namespace topodisc {

/// Describes how a CSV maps onto identifier (K), spatial (S), temporal (T)
/// and numeric (A_i) attributes.
///
/// Descriptor document, one `key: value` per line (`#` starts a comment):
///
///     name: taxi
///     spatial: pickup_lon, pickup_lat      # two columns for gps, one region-id column otherwise
///     spatial_resolution: gps
///     temporal: pickup_time                # epoch seconds or ISO-8601 UTC
///     temporal_resolution: second
///     ids: medallion                       # optional, comma separated
///     numerics: fare, distance             # optional, comma separated
///     time_range: 2011-01-01, 2012-01-01   # [t_start, t_end)
///
/// `spatial` may be omitted when the native spatial resolution is city.
struct DatasetDescriptor {
    std::string name;
    std::vector<std::string> spatial_columns;
    std::string temporal_column;
    Resolution native;
    std::vector<std::string> id_attrs;
    std::vector<std::string> numeric_attrs;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
};

/// Syntax and invariant checks only (no CSV header available).
DatasetDescriptor parse_descriptor(std::string_view text);
/// Also checks that every declared column is present in `csv_header`.
DatasetDescriptor parse_descriptor(std::string_view text, std::span<const std::string> csv_header);

void validate_columns(const DatasetDescriptor& desc, std::span<const std::string> csv_header);

std::string format_descriptor(const DatasetDescriptor& desc);

}  // namespace topodisc
