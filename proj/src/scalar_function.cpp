#include "topodisc/scalar_function.hpp"

#include "topodisc/binary_io.hpp"
#include "topodisc/error.hpp"

namespace topodisc {

namespace {
constexpr std::string_view kMagic = "TDSF";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string FunctionSpec::name() const {
    switch (kind) {
        case FunctionKind::density: return "density";
        case FunctionKind::unique: return "unique-" + attribute;
        case FunctionKind::attribute: return "avg-" + attribute;
    }
    return "?";
}

FunctionSpec FunctionSpec::parse(const std::string& name) {
    if (name == "density") return {FunctionKind::density, {}};
    if (name.rfind("unique-", 0) == 0 && name.size() > 7) return {FunctionKind::unique, name.substr(7)};
    if (name.rfind("avg-", 0) == 0 && name.size() > 4) return {FunctionKind::attribute, name.substr(4)};
    throw Error(ErrorCode::invalid_argument, "unknown function name: " + name);
}

std::vector<bool> ScalarFunction::active_mask() const {
    std::vector<bool> mask(values.size());
    for (std::size_t v = 0; v < values.size(); ++v) mask[v] = !is_no_data(values[v]);
    return mask;
}

void save_function(const ScalarFunction& f, const std::filesystem::path& path) {
    const std::uint64_t n = f.n_regions;
    const std::uint64_t m = f.time.steps;
    if (f.values.size() != n * m) throw Error(ErrorCode::invalid_argument, "function size does not match domain");

    BinaryWriter w;
    w.magic(kMagic);
    w.u32(kVersion);
    w.str(f.dataset);
    w.str(f.spec.attribute);
    w.u8(static_cast<std::uint8_t>(f.spec.kind));
    w.u8(static_cast<std::uint8_t>(f.resolution.spatial));
    w.u8(static_cast<std::uint8_t>(f.resolution.temporal));
    w.u64(n);
    w.i64(f.time.t0);
    w.i64(f.time.delta);
    w.u64(m);
    w.u8(f.counts.empty() ? 0 : 1);

    std::vector<double> rows(n * m);
    for (std::uint64_t z = 0; z < m; ++z)
        for (std::uint64_t x = 0; x < n; ++x) rows[x * m + z] = f.values[x + z * n];
    w.array<double>(rows);
    if (!f.counts.empty()) {
        std::vector<std::uint64_t> crow(n * m);
        for (std::uint64_t z = 0; z < m; ++z)
            for (std::uint64_t x = 0; x < n; ++x) crow[x * m + z] = f.counts[x + z * n];
        w.array<std::uint64_t>(crow);
    }
    w.save(path);
}

ScalarFunction load_function(const std::filesystem::path& path) {
    BinaryReader r = BinaryReader::load(path);
    r.expect_magic(kMagic);
    if (r.u32() != kVersion) throw Error(ErrorCode::malformed, "unsupported function version: " + path.string());
    ScalarFunction f;
    f.dataset = r.str();
    f.spec.attribute = r.str();
    const auto kind = r.u8();
    const auto sres = r.u8();
    const auto tres = r.u8();
    if (kind > 2 || sres > 3 || tres > 4) throw Error(ErrorCode::malformed, "bad enum in " + path.string());
    f.spec.kind = static_cast<FunctionKind>(kind);
    f.resolution = {static_cast<SpatialRes>(sres), static_cast<TemporalRes>(tres)};
    const std::uint64_t n = r.u64();
    f.n_regions = n;
    f.time.resolution = f.resolution.temporal;
    f.time.t0 = r.i64();
    f.time.delta = r.i64();
    const std::uint64_t m = r.u64();
    f.time.steps = m;
    const bool has_counts = r.u8() != 0;
    if (n == 0 || m == 0 || n > (std::uint64_t{1} << 32) / m)
        throw Error(ErrorCode::malformed, "bad domain size in " + path.string());

    const auto rows = r.array<double>(n * m);
    f.values.resize(n * m);
    for (std::uint64_t z = 0; z < m; ++z)
        for (std::uint64_t x = 0; x < n; ++x) f.values[x + z * n] = rows[x * m + z];
    if (has_counts) {
        const auto crow = r.array<std::uint64_t>(n * m);
        f.counts.resize(n * m);
        for (std::uint64_t z = 0; z < m; ++z)
            for (std::uint64_t x = 0; x < n; ++x) f.counts[x + z * n] = crow[x * m + z];
    }
    if (!r.at_end()) throw Error(ErrorCode::malformed, "trailing bytes in " + path.string());
    return f;
}

}  // namespace topodisc
