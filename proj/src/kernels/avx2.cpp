// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.

#include "b5g/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace b5g::simd {
namespace {

// Two interleaved complex doubles per register: [re0, im0, re1, im1].
inline __m256d load2(const cd* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cd* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d br = _mm256_movedup_pd(b);
    const __m256d bi = _mm256_permute_pd(b, 0xF);
    const __m256d asw = _mm256_permute_pd(a, 0x5);
    return _mm256_fmaddsub_pd(a, br, _mm256_mul_pd(asw, bi));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

cd cdotc_avx2(std::span<const cd> x, std::span<const cd> y) {
    const std::size_t n = x.size();
    __m256d a_re = _mm256_setzero_pd();
    __m256d a_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(&x[i]);
        const __m256d yv = load2(&y[i]);
        a_re = _mm256_fmadd_pd(xv, yv, a_re);
        a_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), a_im);
    }
    // a_im lanes: [xr*yi, xi*yr, ...]
    alignas(32) double t[4];
    _mm256_store_pd(t, a_im);
    double re = hsum(a_re);
    double im = (t[0] - t[1]) + (t[2] - t[3]);
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

double norm_sq_avx2(std::span<const cd> x) {
    const std::size_t n = x.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = load2(&x[i]);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void scaled_product_acc_avx2(std::span<cd> acc, cd s, std::span<const cd> x, std::span<const cd> y) {
    const std::size_t n = acc.size();
    const __m256d sv = _mm256_setr_pd(s.real(), s.imag(), s.real(), s.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d t = cmul(load2(&x[i]), load2(&y[i]));
        store2(&acc[i], _mm256_add_pd(load2(&acc[i]), cmul(sv, t)));
    }
    for (; i < n; ++i) {
        const double tr = x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
        const double ti = x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
        acc[i] += cd{s.real() * tr - s.imag() * ti, s.real() * ti + s.imag() * tr};
    }
}

double abs_product_sum_avx2(std::span<const cd> x, std::span<const cd> y) {
    const std::size_t n = x.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(&x[i]);
        const __m256d yv = load2(&y[i]);
        // [|x0|^2, |y0|^2, |x1|^2, |y1|^2]
        const __m256d mags = _mm256_hadd_pd(_mm256_mul_pd(xv, xv), _mm256_mul_pd(yv, yv));
        const __m256d prod = _mm256_mul_pd(mags, _mm256_permute_pd(mags, 0x5));
        acc = _mm256_add_pd(acc, _mm256_sqrt_pd(prod));
    }
    // each product appears twice
    double s = 0.5 * hsum(acc);
    for (; i < n; ++i) s += std::abs(x[i]) * std::abs(y[i]);
    return s;
}

RotatedMax max_rotated_real_avx2(cd z, std::span<const double> c, std::span<const double> s) {
    const std::size_t n = c.size();
    if (n < 4) return scalar_kernels().max_rotated_real(z, c, s);
    const __m256d zr = _mm256_set1_pd(z.real());
    const __m256d zi = _mm256_set1_pd(z.imag());
    __m256d best = _mm256_set1_pd(-INFINITY);
    __m256d best_idx = _mm256_setzero_pd();
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d four = _mm256_set1_pd(4.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        // no FMA here: values must match the scalar path bit for bit
        const __m256d v = _mm256_sub_pd(_mm256_mul_pd(zr, _mm256_loadu_pd(&c[k])),
                                        _mm256_mul_pd(zi, _mm256_loadu_pd(&s[k])));
        const __m256d gt = _mm256_cmp_pd(v, best, _CMP_GT_OQ);
        best = _mm256_blendv_pd(best, v, gt);
        best_idx = _mm256_blendv_pd(best_idx, idx, gt);
        idx = _mm256_add_pd(idx, four);
    }
    alignas(32) double bv[4], bi[4];
    _mm256_store_pd(bv, best);
    _mm256_store_pd(bi, best_idx);
    RotatedMax out{bv[0], static_cast<std::size_t>(bi[0])};
    for (int lane = 1; lane < 4; ++lane) {
        const auto li = static_cast<std::size_t>(bi[lane]);
        if (bv[lane] > out.value || (bv[lane] == out.value && li < out.index)) out = {bv[lane], li};
    }
    for (; k < n; ++k) {
        const double v = z.real() * c[k] - z.imag() * s[k];
        if (v > out.value) out = {v, k};
    }
    return out;
}

} // namespace

const KernelTable* avx2_kernels() {
    static const KernelTable table{
        "avx2",
        cdotc_avx2,
        norm_sq_avx2,
        scaled_product_acc_avx2,
        abs_product_sum_avx2,
        max_rotated_real_avx2,
    };
    __builtin_cpu_init();
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    return &table;
}

} // namespace b5g::simd

#else

namespace b5g::simd {
const KernelTable* avx2_kernels() { return nullptr; }
} // namespace b5g::simd

#endif
