#include <cstdlib>
#include <string_view>

#include "topodisc/simd/kernels.hpp"

namespace topodisc::simd {

#ifdef TOPODISC_HAVE_AVX2
namespace avx2 {
const BitKernels& bit_kernels();
const RealKernels& real_kernels();
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#ifdef TOPODISC_HAVE_AVX2
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
    return false;
#endif
}

bool forced_scalar() {
    const char* env = std::getenv("TOPODISC_SIMD");
    return env && std::string_view(env) == "scalar";
}

}  // namespace

const BitKernels* avx2_bit_kernels() {
#ifdef TOPODISC_HAVE_AVX2
    if (cpu_has_avx2()) return &avx2::bit_kernels();
#endif
    return nullptr;
}

const RealKernels* avx2_real_kernels() {
#ifdef TOPODISC_HAVE_AVX2
    if (cpu_has_avx2()) return &avx2::real_kernels();
#endif
    return nullptr;
}

const BitKernels& bit_kernels() {
    static const BitKernels& k = [] () -> const BitKernels& {
        const BitKernels* v = forced_scalar() ? nullptr : avx2_bit_kernels();
        return v ? *v : scalar_bit_kernels();
    }();
    return k;
}

const RealKernels& real_kernels() {
    static const RealKernels& k = [] () -> const RealKernels& {
        const RealKernels* v = forced_scalar() ? nullptr : avx2_real_kernels();
        return v ? *v : scalar_real_kernels();
    }();
    return k;
}

}  // namespace topodisc::simd
