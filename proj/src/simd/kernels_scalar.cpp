#include <bit>

#include "topodisc/simd/kernels.hpp"

namespace topodisc::simd {

namespace {

std::uint64_t popcount(const std::uint64_t* a, std::size_t words) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < words; ++i) c += std::popcount(a[i]);
    return c;
}

std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < words; ++i) c += std::popcount(a[i] & b[i]);
    return c;
}

RelationCounts relation_counts(const std::uint64_t* p1, const std::uint64_t* n1, const std::uint64_t* p2,
                               const std::uint64_t* n2, std::size_t words) {
    RelationCounts r;
    for (std::size_t i = 0; i < words; ++i) {
        r.pp += std::popcount(p1[i] & p2[i]);
        r.nn += std::popcount(n1[i] & n2[i]);
        r.pn += std::popcount(p1[i] & n2[i]);
        r.np += std::popcount(n1[i] & p2[i]);
        r.sigma += std::popcount((p1[i] | n1[i]) & (p2[i] | n2[i]));
    }
    return r;
}

double sum(const double* x, std::size_t n) {
    double l[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int k = 0; k < 4; ++k) l[k] += x[i + k];
    for (int k = 0; i < n; ++i, ++k) l[k] += x[i];
    return (l[0] + l[1]) + (l[2] + l[3]);
}

Moments centered_moments(const double* x, const double* y, std::size_t n, double mx, double my) {
    double xx[4] = {0, 0, 0, 0}, yy[4] = {0, 0, 0, 0}, xy[4] = {0, 0, 0, 0};
    auto step = [&](std::size_t i, int k) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        xx[k] += dx * dx;
        yy[k] += dy * dy;
        xy[k] += dx * dy;
    };
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int k = 0; k < 4; ++k) step(i + k, k);
    for (int k = 0; i < n; ++i, ++k) step(i, k);
    return {(xx[0] + xx[1]) + (xx[2] + xx[3]), (yy[0] + yy[1]) + (yy[2] + yy[3]), (xy[0] + xy[1]) + (xy[2] + xy[3])};
}

}  // namespace

const BitKernels& scalar_bit_kernels() {
    static const BitKernels k{"scalar", popcount, and_popcount, relation_counts};
    return k;
}

const RealKernels& scalar_real_kernels() {
    static const RealKernels k{"scalar", sum, centered_moments};
    return k;
}

}  // namespace topodisc::simd
