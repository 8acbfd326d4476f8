#include "topodisc/bitset.hpp"

#include <algorithm>

#include "topodisc/error.hpp"
#include "topodisc/simd/kernels.hpp"

namespace topodisc {

std::uint64_t Bitset::count() const { return simd::bit_kernels().popcount(w_.data(), w_.size()); }

bool Bitset::none() const {
    return std::all_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w == 0; });
}

Bitset& Bitset::operator|=(const Bitset& o) {
    if (o.n_ != n_) throw Error(ErrorCode::invalid_argument, "bitset size mismatch");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
}

Bitset& Bitset::operator&=(const Bitset& o) {
    if (o.n_ != n_) throw Error(ErrorCode::invalid_argument, "bitset size mismatch");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
}

Bitset& Bitset::subtract(const Bitset& o) {
    if (o.n_ != n_) throw Error(ErrorCode::invalid_argument, "bitset size mismatch");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
    return *this;
}

bool Bitset::subset_of(const Bitset& o) const {
    if (o.n_ != n_) return false;
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i] & ~o.w_[i]) return false;
    return true;
}

Bitset Bitset::rotated(std::size_t k) const {
    Bitset out(n_);
    if (n_ == 0) return out;
    k %= n_;
    if (k == 0) return *this;
    // Word-level shift when the length is a multiple of 64, bit scatter otherwise.
    if (n_ % 64 == 0) {
        const std::size_t nw = w_.size(), ws = k / 64, bs = k % 64;
        for (std::size_t i = 0; i < nw; ++i) {
            const std::uint64_t lo = w_[(i + nw - ws) % nw];
            const std::uint64_t hi = w_[(i + nw - ws - 1) % nw];
            out.w_[i] = bs ? (lo << bs) | (hi >> (64 - bs)) : lo;
        }
        return out;
    }
    for_each([&](std::size_t i) {
        const std::size_t j = i + k;
        out.set(j >= n_ ? j - n_ : j);
    });
    return out;
}

}  // namespace topodisc
