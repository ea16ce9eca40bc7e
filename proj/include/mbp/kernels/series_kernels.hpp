#pragma once

#include <cstddef>

namespace mbp::kernels {

enum class Backend { Scalar, Avx2 };

/// Backend selected at startup from CPU features (overridable for tests).
Backend active_backend();
void force_backend(Backend b);
void reset_backend();
bool avx2_available();
const char* backend_name();

// Fourier projection of a sampled ring: given samples (re, im) and the
// per-sample cosines/sines of j*theta_k, accumulates
//   out_re = sum re[k]*cs[k] + im[k]*sn[k]
//   out_im = sum im[k]*cs[k] - re[k]*sn[k]
void fourier_project(const double* re, const double* im, const double* cs, const double* sn,
                     std::size_t n, double* out_re, double* out_im);

/// Horner evaluation of one polynomial (coef[0] + coef[1] x + ...) at n points.
void polyval_many(const double* coef, std::size_t ncoef, const double* x, double* y,
                  std::size_t n);

// Reference implementations (always available; the dispatched entry points
// above must agree with these to rounding).
void fourier_project_scalar(const double* re, const double* im, const double* cs,
                            const double* sn, std::size_t n, double* out_re, double* out_im);
void polyval_many_scalar(const double* coef, std::size_t ncoef, const double* x, double* y,
                         std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
void fourier_project_avx2(const double* re, const double* im, const double* cs,
                          const double* sn, std::size_t n, double* out_re, double* out_im);
void polyval_many_avx2(const double* coef, std::size_t ncoef, const double* x, double* y,
                       std::size_t n);
#endif

}  // namespace mbp::kernels
