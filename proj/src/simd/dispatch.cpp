#include <cstdlib>
#include <string_view>

#include "captchastar/simd/kernels.hpp"

namespace captchastar::simd {

#if defined(CAPTCHASTAR_HAVE_AVX2)
const KernelTable* avx2_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(CAPTCHASTAR_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active_kernels() {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* forced = std::getenv("CAPTCHASTAR_SIMD");
        if (forced != nullptr && std::string_view(forced) == "scalar") {
            return scalar_kernels();
        }
        if (const KernelTable* avx2 = avx2_kernels()) {
            return *avx2;
        }
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace captchastar::simd
