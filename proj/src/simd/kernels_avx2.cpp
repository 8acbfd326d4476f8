#include <immintrin.h>

#include <bit>

#include "topodisc/simd/kernels.hpp"

namespace topodisc::simd::avx2 {

namespace {

// Nibble-table popcount: per-byte counts via vpshufb, folded into 64-bit
// lanes with vpsadbw.
inline __m256i popcnt256(__m256i v) {
    const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                         0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low = _mm256_set1_epi8(0x0f);
    const __m256i lo = _mm256_and_si256(v, low);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
    const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
    return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

inline std::uint64_t hsum(__m256i v) {
    alignas(32) std::uint64_t t[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(t), v);
    return t[0] + t[1] + t[2] + t[3];
}

inline __m256i load(const std::uint64_t* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); }

std::uint64_t popcount(const std::uint64_t* a, std::size_t words) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= words; i += 4) acc = _mm256_add_epi64(acc, popcnt256(load(a + i)));
    std::uint64_t c = hsum(acc);
    for (; i < words; ++i) c += std::popcount(a[i]);
    return c;
}

std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= words; i += 4) acc = _mm256_add_epi64(acc, popcnt256(_mm256_and_si256(load(a + i), load(b + i))));
    std::uint64_t c = hsum(acc);
    for (; i < words; ++i) c += std::popcount(a[i] & b[i]);
    return c;
}

RelationCounts relation_counts(const std::uint64_t* p1, const std::uint64_t* n1, const std::uint64_t* p2,
                               const std::uint64_t* n2, std::size_t words) {
    __m256i pp = _mm256_setzero_si256(), nn = pp, pn = pp, np = pp, sg = pp;
    std::size_t i = 0;
    for (; i + 4 <= words; i += 4) {
        const __m256i a = load(p1 + i), b = load(n1 + i), c = load(p2 + i), d = load(n2 + i);
        pp = _mm256_add_epi64(pp, popcnt256(_mm256_and_si256(a, c)));
        nn = _mm256_add_epi64(nn, popcnt256(_mm256_and_si256(b, d)));
        pn = _mm256_add_epi64(pn, popcnt256(_mm256_and_si256(a, d)));
        np = _mm256_add_epi64(np, popcnt256(_mm256_and_si256(b, c)));
        sg = _mm256_add_epi64(sg, popcnt256(_mm256_and_si256(_mm256_or_si256(a, b), _mm256_or_si256(c, d))));
    }
    RelationCounts r{hsum(pp), hsum(nn), hsum(pn), hsum(np), hsum(sg)};
    for (; i < words; ++i) {
        r.pp += std::popcount(p1[i] & p2[i]);
        r.nn += std::popcount(n1[i] & n2[i]);
        r.pn += std::popcount(p1[i] & n2[i]);
        r.np += std::popcount(n1[i] & p2[i]);
        r.sigma += std::popcount((p1[i] | n1[i]) & (p2[i] | n2[i]));
    }
    return r;
}

inline double combine(__m256d v) {
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return (t[0] + t[1]) + (t[2] + t[3]);
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    for (int k = 0; i < n; ++i, ++k) l[k] += x[i];
    return (l[0] + l[1]) + (l[2] + l[3]);
}

Moments centered_moments(const double* x, const double* y, std::size_t n, double mx, double my) {
    const __m256d vmx = _mm256_set1_pd(mx), vmy = _mm256_set1_pd(my);
    __m256d xx = _mm256_setzero_pd(), yy = xx, xy = xx;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vmy);
        xx = _mm256_add_pd(xx, _mm256_mul_pd(dx, dx));
        yy = _mm256_add_pd(yy, _mm256_mul_pd(dy, dy));
        xy = _mm256_add_pd(xy, _mm256_mul_pd(dx, dy));
    }
    if (i == n) return {combine(xx), combine(yy), combine(xy)};
    alignas(32) double a[4], b[4], c[4];
    _mm256_store_pd(a, xx);
    _mm256_store_pd(b, yy);
    _mm256_store_pd(c, xy);
    for (int k = 0; i < n; ++i, ++k) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        a[k] += dx * dx;
        b[k] += dy * dy;
        c[k] += dx * dy;
    }
    return {(a[0] + a[1]) + (a[2] + a[3]), (b[0] + b[1]) + (b[2] + b[3]), (c[0] + c[1]) + (c[2] + c[3])};
}

}  // namespace

const BitKernels& bit_kernels() {
    static const BitKernels k{"avx2", popcount, and_popcount, relation_counts};
    return k;
}

const RealKernels& real_kernels() {
    static const RealKernels k{"avx2", sum, centered_moments};
    return k;
}

}  // namespace topodisc::simd::avx2
