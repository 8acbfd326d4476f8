#pragma once

// Little-endian fixed-width serialization for the on-disk artifacts.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topodisc/error.hpp"

namespace topodisc {

static_assert(std::endian::native == std::endian::little,
              "artifact I/O assumes a little-endian host");

class BinaryWriter {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void magic(std::string_view m) { bytes(m.data(), m.size()); }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void i64(std::int64_t v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    template <class T>
    void array(std::span<const T> a) {
        static_assert(sizeof(T) == 8, "arrays are stored as 64-bit words");
        bytes(a.data(), a.size_bytes());
    }

    const std::vector<std::uint8_t>& buffer() const { return buf_; }
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::uint8_t> buf_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}
    static BinaryReader load(const std::filesystem::path& path);

    void bytes(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }
    void expect_magic(std::string_view m) {
        std::string got(m.size(), '\0');
        bytes(got.data(), got.size());
        if (got != m) throw Error(ErrorCode::malformed, "bad magic: expected " + std::string(m));
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, sizeof v); return v; }
    std::int64_t i64() { std::int64_t v; bytes(&v, sizeof v); return v; }
    double f64() { double v; bytes(&v, sizeof v); return v; }
    std::string str() {
        const std::uint32_t n = u32();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    template <class T>
    std::vector<T> array(std::size_t count) {
        static_assert(sizeof(T) == 8);
        if (count > (data_.size() - pos_) / 8) throw Error(ErrorCode::malformed, "truncated array");
        std::vector<T> out(count);
        bytes(out.data(), count * 8);
        return out;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw Error(ErrorCode::malformed, "truncated binary artifact");
    }

    std::vector<std::uint8_t> data_;
    std::size_t pos_ = 0;
};

/// 64-bit FNV-1a, used for content fingerprints.
std::uint64_t fnv1a(std::span<const std::uint8_t> data, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t file_fingerprint(const std::filesystem::path& path, std::uint64_t seed = 0xcbf29ce484222325ull);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace topodisc
