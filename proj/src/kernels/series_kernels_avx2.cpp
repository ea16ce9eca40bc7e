// AVX2/FMA variants; this translation unit is compiled with -mavx2 -mfma and
// must only be entered through the runtime dispatch in series_kernels.cpp.

#include "mbp/kernels/series_kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace mbp::kernels {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

void fourier_project_avx2(const double* re, const double* im, const double* cs,
                          const double* sn, std::size_t n, double* out_re, double* out_im) {
    __m256d ar = _mm256_setzero_pd();
    __m256d ai = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d r = _mm256_loadu_pd(re + k);
        const __m256d i = _mm256_loadu_pd(im + k);
        const __m256d c = _mm256_loadu_pd(cs + k);
        const __m256d s = _mm256_loadu_pd(sn + k);
        ar = _mm256_fmadd_pd(r, c, ar);
        ar = _mm256_fmadd_pd(i, s, ar);
        ai = _mm256_fmadd_pd(i, c, ai);
        ai = _mm256_fnmadd_pd(r, s, ai);
    }
    double sum_re = hsum(ar);
    double sum_im = hsum(ai);
    for (; k < n; ++k) {
        sum_re += re[k] * cs[k] + im[k] * sn[k];
        sum_im += im[k] * cs[k] - re[k] * sn[k];
    }
    *out_re = sum_re;
    *out_im = sum_im;
}

void polyval_many_avx2(const double* coef, std::size_t ncoef, const double* x, double* y,
                       std::size_t n) {
    std::size_t p = 0;
    if (ncoef == 0) {
        for (; p < n; ++p) y[p] = 0.0;
        return;
    }
    for (; p + 4 <= n; p += 4) {
        const __m256d xv = _mm256_loadu_pd(x + p);
        __m256d acc = _mm256_set1_pd(coef[ncoef - 1]);
        for (std::size_t m = ncoef; m-- > 1;)
            acc = _mm256_fmadd_pd(acc, xv, _mm256_set1_pd(coef[m - 1]));
        _mm256_storeu_pd(y + p, acc);
    }
    if (p < n) polyval_many_scalar(coef, ncoef, x + p, y + p, n - p);
}

}  // namespace mbp::kernels

#endif  // x86_64
