#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace topodisc::simd {

/// Per-pair intersection counts of two (positive, negative) feature bitsets.
struct RelationCounts {
    std::uint64_t pp = 0;     // |P1 & P2|
    std::uint64_t nn = 0;     // |N1 & N2|
    std::uint64_t pn = 0;     // |P1 & N2|
    std::uint64_t np = 0;     // |N1 & P2|
    std::uint64_t sigma = 0;  // |(P1 | N1) & (P2 | N2)|

    friend bool operator==(const RelationCounts&, const RelationCounts&) = default;
};

struct BitKernels {
    std::string_view name;
    std::uint64_t (*popcount)(const std::uint64_t* a, std::size_t words);
    std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b, std::size_t words);
    RelationCounts (*relation_counts)(const std::uint64_t* p1, const std::uint64_t* n1, const std::uint64_t* p2,
                                      const std::uint64_t* n2, std::size_t words);
};

/// Sums of centered products: sxx = sum (x - mx)^2, syy likewise, sxy = sum (x - mx)(y - my).
struct Moments {
    double sxx = 0, syy = 0, sxy = 0;
};

// Floating-point kernels accumulate in four interleaved lanes (element i goes
// to lane i % 4) and combine as (l0 + l1) + (l2 + l3), so the scalar and
// vector variants produce identical bits.
struct RealKernels {
    std::string_view name;
    double (*sum)(const double* x, std::size_t n);
    Moments (*centered_moments)(const double* x, const double* y, std::size_t n, double mx, double my);
};

const BitKernels& scalar_bit_kernels();
const RealKernels& scalar_real_kernels();
/// nullptr when the CPU (or the build) lacks AVX2.
const BitKernels* avx2_bit_kernels();
const RealKernels* avx2_real_kernels();

/// Best available variant; TOPODISC_SIMD=scalar forces the reference kernels.
const BitKernels& bit_kernels();
const RealKernels& real_kernels();

}  // namespace topodisc::simd
