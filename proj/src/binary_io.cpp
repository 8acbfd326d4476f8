#include "topodisc/binary_io.hpp"

#include <fstream>
#include <iterator>

namespace topodisc {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::malformed: return "malformed";
        case ErrorCode::unknown_resolution: return "unknown_resolution";
        case ErrorCode::missing_column: return "missing_column";
        case ErrorCode::unreachable_resolution: return "unreachable_resolution";
        case ErrorCode::resolution_mismatch: return "resolution_mismatch";
        case ErrorCode::no_records: return "no_records";
        case ErrorCode::io: return "io";
        case ErrorCode::unknown_dataset: return "unknown_dataset";
        case ErrorCode::not_built: return "not_built";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::unsupported: return "unsupported";
    }
    return "unknown";
}

void BinaryWriter::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    // Write to a sibling then rename so readers never observe a partial file.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io, "cannot open for writing: " + tmp.string());
        out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw Error(ErrorCode::io, "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

BinaryReader BinaryReader::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open: " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return BinaryReader(std::move(data));
}

std::uint64_t fnv1a(std::span<const std::uint8_t> data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
    return fnv1a(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), seed);
}

std::uint64_t file_fingerprint(const std::filesystem::path& path, std::uint64_t seed) {
    return fnv1a(read_text_file(path), seed);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open for writing: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace topodisc
