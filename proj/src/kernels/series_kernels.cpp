#include "mbp/kernels/series_kernels.hpp"

namespace mbp::kernels {

namespace {

Backend g_backend = [] {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::Avx2;
#endif
    return Backend::Scalar;
}();

Backend detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

}  // namespace

Backend active_backend() { return g_backend; }
void force_backend(Backend b) { g_backend = b; }
void reset_backend() { g_backend = detect(); }

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const char* backend_name() { return g_backend == Backend::Avx2 ? "avx2" : "scalar"; }

void fourier_project_scalar(const double* re, const double* im, const double* cs,
                            const double* sn, std::size_t n, double* out_re, double* out_im) {
    double ar = 0.0, ai = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        ar += re[k] * cs[k] + im[k] * sn[k];
        ai += im[k] * cs[k] - re[k] * sn[k];
    }
    *out_re = ar;
    *out_im = ai;
}

void polyval_many_scalar(const double* coef, std::size_t ncoef, const double* x, double* y,
                         std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        double acc = ncoef ? coef[ncoef - 1] : 0.0;
        for (std::size_t m = ncoef; m-- > 1;) acc = acc * x[p] + coef[m - 1];
        y[p] = acc;
    }
}

void fourier_project(const double* re, const double* im, const double* cs, const double* sn,
                     std::size_t n, double* out_re, double* out_im) {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_backend == Backend::Avx2) {
        fourier_project_avx2(re, im, cs, sn, n, out_re, out_im);
        return;
    }
#endif
    fourier_project_scalar(re, im, cs, sn, n, out_re, out_im);
}

void polyval_many(const double* coef, std::size_t ncoef, const double* x, double* y,
                  std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_backend == Backend::Avx2) {
        polyval_many_avx2(coef, ncoef, x, y, n);
        return;
    }
#endif
    polyval_many_scalar(coef, ncoef, x, y, n);
}

}  // namespace mbp::kernels
