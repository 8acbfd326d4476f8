#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace topodisc {

/// Fixed-length bitset over vertex indices, 64-bit words, bit v in word v / 64.
/// Bits past size() are always zero.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t nbits) : n_(nbits), w_((nbits + 63) / 64, 0) {}

    std::size_t size() const { return n_; }
    std::size_t word_count() const { return w_.size(); }
    std::span<const std::uint64_t> words() const { return w_; }
    std::span<std::uint64_t> words() { return w_; }
    const std::uint64_t* data() const { return w_.data(); }

    bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void clear() { std::fill(w_.begin(), w_.end(), 0); }

    std::uint64_t count() const;
    bool none() const;

    Bitset& operator|=(const Bitset& o);
    Bitset& operator&=(const Bitset& o);
    /// Clears the bits set in o.
    Bitset& subtract(const Bitset& o);
    friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
    friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
    bool subset_of(const Bitset& o) const;

    /// Bit i of the result is bit (i - k) mod size() of this.
    Bitset rotated(std::size_t k) const;

    /// Calls fn(i) for each set bit in increasing order.
    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t w = 0; w < w_.size(); ++w)
            for (std::uint64_t bits = w_[w]; bits; bits &= bits - 1)
                fn(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
    }

    friend bool operator==(const Bitset&, const Bitset&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

}  // namespace topodisc
