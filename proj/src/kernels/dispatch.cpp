#include "b5g/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace b5g::simd {

const KernelTable& kernels() {
    static const KernelTable& active = [] () -> const KernelTable& {
        const char* force = std::getenv("B5G_SIMD");
        if (force != nullptr && std::string_view(force) == "scalar") return scalar_kernels();
        if (const KernelTable* t = avx2_kernels()) return *t;
        return scalar_kernels();
    }();
    return active;
}

} // namespace b5g::simd
