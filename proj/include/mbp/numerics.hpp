#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>

#include "mbp/errors.hpp"

namespace mbp {

using Complex = std::complex<double>;

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; node 0 last).
inline constexpr double kGl15Node[8] = {
    0.9879925180204854, 0.9372733924007060, 0.8482065834104272, 0.7244177313601701,
    0.5709721726085388, 0.3941513470775634, 0.2011940939974345, 0.0};
inline constexpr double kGl15Weight[8] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613};

template <class F>
auto gl15_panel(F&& f, double a, double b) -> decltype(f(a)) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto acc = kGl15Weight[7] * f(mid);
    for (int m = 0; m < 7; ++m) {
        const double dx = half * kGl15Node[m];
        acc += kGl15Weight[m] * (f(mid + dx) + f(mid - dx));
    }
    return half * acc;
}

template <class F>
auto gl15_adaptive(F&& f, double a, double b, double tol, int depth) -> decltype(f(a)) {
    auto whole = gl15_panel(f, a, b);
    const double mid = 0.5 * (a + b);
    auto left = gl15_panel(f, a, mid);
    auto right = gl15_panel(f, mid, b);
    const double err = std::abs(left + right - whole);
    if (err <= tol || depth >= 48) {
        if (depth >= 48 && err > 64 * tol)
            throw ToleranceNotMet("quadrature failed to converge");
        return left + right;
    }
    return gl15_adaptive(f, a, mid, 0.5 * tol, depth + 1) +
           gl15_adaptive(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Gauss-Legendre quadrature of f over [a, b].  f may return double
/// or Complex; the integrand must be smooth on the (sub)panels.
template <class F>
auto integrate(F&& f, double a, double b, double tol = 1e-12) -> decltype(f(a)) {
    if (a == b) return decltype(f(a)){};
    return detail::gl15_adaptive(f, a, b, tol, 0);
}

/// Path integral of f along the straight segment from a to b in the plane.
template <class F>
Complex integrate_segment(F&& f, Complex a, Complex b, double tol = 1e-12) {
    const Complex dir = b - a;
    return dir * integrate([&](double u) { return f(a + u * dir); }, 0.0, 1.0, tol);
}

/// log(1+z) accurate for |z| down to underflow.
inline Complex log1p_c(Complex z) {
    if (std::abs(z) < 1e-4) {
        // log(1+z) = z - z^2/2 + z^3/3 - z^4/4 + O(z^5)
        return z * (1.0 + z * (-0.5 + z * (1.0 / 3.0 + z * (-0.25))));
    }
    return std::log(1.0 + z);
}

/// exp(z) - 1 accurate for |z| down to underflow.
inline Complex expm1_c(Complex z) {
    if (std::abs(z) < 1e-4) {
        return z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
    }
    return std::exp(z) - 1.0;
}

// Dormand-Prince 5(4) adaptive step integrator for dy/dt = rhs(t, y).
// Controls the absolute local error of y per step; State is double or Complex.
template <class State, class Rhs>
State ode_integrate(Rhs&& rhs, State y0, double t0, double t1, double tol,
                    int max_steps = 2'000'000) {
    if (t1 == t0) return y0;
    // Butcher tableau.
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double t = t0;
    State y = y0;
    State k1 = rhs(t, y);
    double h = std::min(t1 - t0, 0.1 / (1.0 + std::abs(k1)));
    h = std::max(h, 1e-12);

    for (int step = 0; step < max_steps; ++step) {
        if (t + h > t1) h = t1 - t;
        const State k2 = rhs(t + h * a21, y + h * (a21 * k1));
        const State k3 = rhs(t + h * 0.3, y + h * (a31 * k1 + a32 * k2));
        const State k4 = rhs(t + h * 0.8, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = rhs(t + h * (8.0 / 9.0), y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = rhs(t + h, y5);
        const double err =
            std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));

        if (err <= tol) {
            t += h;
            y = y5;
            k1 = k7;  // first-same-as-last
            if (t >= t1) return y;
        }
        const double scale =
            err > 0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
        h *= std::clamp(scale, 0.2, 5.0);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw ConvergenceFailure("ode step size underflow");
    }
    throw ConvergenceFailure("ode step budget exhausted");
}

/// Find the root of f in [lo, hi] (f(lo), f(hi) of opposite sign) by bisection
/// with secant acceleration.  Returns x with |f(x)| <= ftol.
template <class F>
double find_root(F&& f, double lo, double hi, double ftol, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0)) throw ConvergenceFailure("root not bracketed");
    double x = lo, fx = flo;
    for (int it = 0; it < max_iter; ++it) {
        // Secant candidate, safeguarded by the bracket midpoint.
        double xs = hi - fhi * (hi - lo) / (fhi - flo);
        const double xm = 0.5 * (lo + hi);
        if (!(xs > lo && xs < hi)) xs = xm;
        x = xs;
        fx = f(x);
        if (std::abs(fx) <= ftol && (hi - lo) <= 1e-14 * std::max(1.0, std::abs(x))) return x;
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if (hi - lo <= 4e-17 * std::max(1.0, std::abs(x))) break;
    }
    if (std::abs(fx) > ftol) throw ConvergenceFailure("root residual above tolerance");
    return x;
}

struct WilsonInterval {
    double p_hat;
    double lo;
    double hi;
};

/// 95% Wilson score interval for a binomial proportion.
inline WilsonInterval wilson_interval(long long successes, long long n) {
    const double z = 1.959963984540054;
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    const double z2n = z * z / static_cast<double>(n);
    const double denom = 1.0 + z2n;
    const double center = (p + 0.5 * z2n) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + 0.25 * z2n / static_cast<double>(n)) /
        denom;
    return {p, center - half, center + half};
}

}  // namespace mbp
