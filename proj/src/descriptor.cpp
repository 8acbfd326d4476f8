#include "topodisc/descriptor.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "topodisc/calendar.hpp"
#include "topodisc/error.hpp"

namespace topodisc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    while (!s.empty()) {
        const auto comma = s.find(',');
        const auto item = trim(s.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

bool is_identifier(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::malformed, "descriptor: " + what); }

}  // namespace

DatasetDescriptor parse_descriptor(std::string_view text) {
    std::map<std::string, std::string, std::less<>> kv;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) malformed("line " + std::to_string(lineno) + " is not `key: value`");
        const std::string key(trim(line.substr(0, colon)));
        if (key.empty()) malformed("empty key on line " + std::to_string(lineno));
        if (kv.count(key)) malformed("duplicate key `" + key + "`");
        kv.emplace(key, std::string(trim(line.substr(colon + 1))));
    }

    static const std::set<std::string, std::less<>> known{
        "name", "spatial", "spatial_resolution", "temporal", "temporal_resolution", "ids", "numerics", "time_range"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) malformed("unknown key `" + k + "`");

    auto required = [&](std::string_view key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) malformed("missing `" + std::string(key) + "`");
        return it->second;
    };
    auto optional = [&](std::string_view key) -> std::string {
        auto it = kv.find(key);
        return it == kv.end() ? std::string{} : it->second;
    };

    DatasetDescriptor d;
    d.name = required("name");
    if (!is_identifier(d.name)) malformed("dataset name must be [A-Za-z0-9_.]+: " + d.name);
    d.native.spatial = parse_spatial(required("spatial_resolution"));
    d.native.temporal = parse_temporal(required("temporal_resolution"));
    d.spatial_columns = split_list(optional("spatial"));
    d.temporal_column = required("temporal");
    d.id_attrs = split_list(optional("ids"));
    d.numeric_attrs = split_list(optional("numerics"));

    const std::size_t want_spatial = d.native.spatial == SpatialRes::gps ? 2 : 1;
    if (d.native.spatial == SpatialRes::city) {
        if (d.spatial_columns.size() > 1) malformed("city-resolution data takes at most one spatial column");
    } else if (d.spatial_columns.size() != want_spatial) {
        malformed("spatial resolution " + std::string(to_string(d.native.spatial)) + " needs " +
                  std::to_string(want_spatial) + " spatial column(s)");
    }
    for (const auto& c : d.spatial_columns)
        if (c == d.temporal_column) malformed("spatial and temporal attributes must be distinct columns");

    for (const auto& list : {d.id_attrs, d.numeric_attrs})
        for (const auto& c : list)
            if (!is_identifier(c)) malformed("attribute names must be [A-Za-z0-9_.]+: " + c);

    const auto range = split_list(required("time_range"));
    if (range.size() != 2) malformed("time_range needs two values");
    const auto t0 = parse_timestamp(range[0]);
    const auto t1 = parse_timestamp(range[1]);
    if (!t0 || !t1) malformed("unparsable time_range");
    d.t_start = *t0;
    d.t_end = *t1;
    if (d.t_start >= d.t_end) malformed("time_range must satisfy t_start < t_end");
    return d;
}

void validate_columns(const DatasetDescriptor& desc, std::span<const std::string> header) {
    auto present = [&](const std::string& c) { return std::find(header.begin(), header.end(), c) != header.end(); };
    auto check = [&](const std::string& c) {
        if (!present(c)) throw Error(ErrorCode::missing_column, "column `" + c + "` not in CSV header");
    };
    for (const auto& c : desc.spatial_columns) check(c);
    check(desc.temporal_column);
    for (const auto& c : desc.id_attrs) check(c);
    for (const auto& c : desc.numeric_attrs) check(c);
}

DatasetDescriptor parse_descriptor(std::string_view text, std::span<const std::string> csv_header) {
    DatasetDescriptor d = parse_descriptor(text);
    validate_columns(d, csv_header);
    return d;
}

std::string format_descriptor(const DatasetDescriptor& d) {
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
        return s;
    };
    std::string out;
    out += "name: " + d.name + "\n";
    if (!d.spatial_columns.empty()) out += "spatial: " + join(d.spatial_columns) + "\n";
    out += "spatial_resolution: " + std::string(to_string(d.native.spatial)) + "\n";
    out += "temporal: " + d.temporal_column + "\n";
    out += "temporal_resolution: " + std::string(to_string(d.native.temporal)) + "\n";
    if (!d.id_attrs.empty()) out += "ids: " + join(d.id_attrs) + "\n";
    if (!d.numeric_attrs.empty()) out += "numerics: " + join(d.numeric_attrs) + "\n";
    out += "time_range: " + std::to_string(d.t_start) + ", " + std::to_string(d.t_end) + "\n";
    return out;
}

}  // namespace topodisc
