#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "mbp/kernels/series_kernels.hpp"
#include "mbp/rng.hpp"

using namespace mbp;

namespace {

struct BackendGuard {
    ~BackendGuard() { kernels::reset_backend(); }
};

}  // namespace

TEST_CASE("fourier projection: AVX2 variant matches the scalar reference") {
    if (!kernels::avx2_available()) return;
    BackendGuard guard;
    RngStream rng(112233, 0);
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 257u, 1608u}) {
        std::vector<double> re(n), im(n), cs(n), sn(n);
        double scale_sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            re[k] = 2.0 * rng.uniform() - 1.0;
            im[k] = 2.0 * rng.uniform() - 1.0;
            const double theta = 6.283185307179586 * rng.uniform();
            cs[k] = std::cos(theta);
            sn[k] = std::sin(theta);
            scale_sum += std::abs(re[k]) + std::abs(im[k]);
        }
        double r_ref, i_ref, r_simd, i_simd;
        kernels::fourier_project_scalar(re.data(), im.data(), cs.data(), sn.data(), n, &r_ref,
                                        &i_ref);
        kernels::force_backend(kernels::Backend::Avx2);
        kernels::fourier_project(re.data(), im.data(), cs.data(), sn.data(), n, &r_simd, &i_simd);
        const double tol = 1e-14 * (1.0 + scale_sum);
        CHECK(std::abs(r_ref - r_simd) <= tol);
        CHECK(std::abs(i_ref - i_simd) <= tol);
    }
}

TEST_CASE("polyval batch: AVX2 variant matches the scalar reference") {
    if (!kernels::avx2_available()) return;
    BackendGuard guard;
    RngStream rng(445566, 1);
    for (std::size_t ncoef : {0u, 1u, 2u, 5u, 33u}) {
        for (std::size_t n : {1u, 4u, 5u, 63u, 500u}) {
            std::vector<double> coef(ncoef), x(n), y_ref(n), y_simd(n);
            for (auto& c : coef) c = 2.0 * rng.uniform() - 1.0;
            for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
            kernels::polyval_many_scalar(coef.data(), ncoef, x.data(), y_ref.data(), n);
            kernels::force_backend(kernels::Backend::Avx2);
            kernels::polyval_many(coef.data(), ncoef, x.data(), y_simd.data(), n);
            for (std::size_t p = 0; p < n; ++p)
                CHECK(y_ref[p] == doctest::Approx(y_simd[p]).epsilon(1e-12));
        }
    }
}

TEST_CASE("scalar reference sanity") {
    // projection of a pure harmonic onto itself recovers the sample count
    const std::size_t n = 32;
    std::vector<double> re(n), im(n), cs(n), sn(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = 6.283185307179586 * static_cast<double>(k) / n;
        re[k] = std::cos(theta);
        im[k] = std::sin(theta);
        cs[k] = std::cos(theta);
        sn[k] = std::sin(theta);
    }
    double r, i;
    kernels::fourier_project_scalar(re.data(), im.data(), cs.data(), sn.data(), n, &r, &i);
    CHECK(r == doctest::Approx(static_cast<double>(n)));
    CHECK(i == doctest::Approx(0.0));

    const std::vector<double> coef{1.0, -3.0, 2.0};
    const std::vector<double> xs{0.0, 0.5, 1.0};
    std::vector<double> ys(3);
    kernels::polyval_many_scalar(coef.data(), coef.size(), xs.data(), ys.data(), xs.size());
    CHECK(ys[0] == doctest::Approx(1.0));
    CHECK(ys[1] == doctest::Approx(0.0));
    CHECK(ys[2] == doctest::Approx(0.0));
}

TEST_CASE("dispatch reports a backend") {
    CHECK((kernels::backend_name() == std::string("avx2") ||
           kernels::backend_name() == std::string("scalar")));
    if (kernels::avx2_available()) CHECK(kernels::backend_name() == std::string("avx2"));
}
