#include "b5g/kernels.hpp"

#include <cmath>

namespace b5g::simd {
namespace {

cd cdotc_scalar(std::span<const cd> x, std::span<const cd> y) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        re += xr * yr + xi * yi;
        im += xr * yi - xi * yr;
    }
    return {re, im};
}

double norm_sq_scalar(std::span<const cd> x) {
    double s = 0.0;
    for (const auto& v : x) s += v.real() * v.real() + v.imag() * v.imag();
    return s;
}

void scaled_product_acc_scalar(std::span<cd> acc, cd s, std::span<const cd> x, std::span<const cd> y) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double tr = x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
        const double ti = x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
        acc[i] += cd{s.real() * tr - s.imag() * ti, s.real() * ti + s.imag() * tr};
    }
}

double abs_product_sum_scalar(std::span<const cd> x, std::span<const cd> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i]) * std::abs(y[i]);
    return s;
}

RotatedMax max_rotated_real_scalar(cd z, std::span<const double> c, std::span<const double> s) {
    RotatedMax best{-INFINITY, 0};
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double v = z.real() * c[k] - z.imag() * s[k];
        if (v > best.value) best = {v, k};
    }
    return best;
}

} // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        "scalar",
        cdotc_scalar,
        norm_sq_scalar,
        scaled_product_acc_scalar,
        abs_product_sum_scalar,
        max_rotated_real_scalar,
    };
    return table;
}

} // namespace b5g::simd
