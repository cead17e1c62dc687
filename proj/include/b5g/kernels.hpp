#pragma once

// Data-parallel complex kernels. Every kernel has a scalar reference
// implementation and, where the CPU supports it, an AVX2+FMA variant chosen
// once at startup. Set B5G_SIMD=scalar in the environment to force the
// reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace b5g::simd {

using cd = std::complex<double>;

struct RotatedMax {
    double value;
    std::size_t index;
};

struct KernelTable {
    std::string_view name;
    // sum_i conj(x_i) * y_i
    cd (*cdotc)(std::span<const cd> x, std::span<const cd> y);
    // sum_i |x_i|^2
    double (*norm_sq)(std::span<const cd> x);
    // acc_i += s * x_i * y_i
    void (*scaled_product_acc)(std::span<cd> acc, cd s, std::span<const cd> x, std::span<const cd> y);
    // sum_i |x_i| * |y_i|
    double (*abs_product_sum)(std::span<const cd> x, std::span<const cd> y);
    // max_k Re(z * e^{j phi_k}) given cos(phi_k), sin(phi_k); first maximizer on ties
    RotatedMax (*max_rotated_real)(cd z, std::span<const double> cos_tab, std::span<const double> sin_tab);
};

const KernelTable& scalar_kernels();
// nullptr when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();
// Active table, resolved once.
const KernelTable& kernels();

inline cd cdotc(std::span<const cd> x, std::span<const cd> y) { return kernels().cdotc(x, y); }
inline double norm_sq(std::span<const cd> x) { return kernels().norm_sq(x); }
inline void scaled_product_acc(std::span<cd> acc, cd s, std::span<const cd> x, std::span<const cd> y) {
    kernels().scaled_product_acc(acc, s, x, y);
}
inline double abs_product_sum(std::span<const cd> x, std::span<const cd> y) {
    return kernels().abs_product_sum(x, y);
}
inline RotatedMax max_rotated_real(cd z, std::span<const double> cos_tab, std::span<const double> sin_tab) {
    return kernels().max_rotated_real(z, cos_tab, sin_tab);
}

} // namespace b5g::simd
