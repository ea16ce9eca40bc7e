#include "mbp/power_series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mbp/kernels/series_kernels.hpp"

namespace mbp {

double PowerSeries::sum() const {
    double s = 0.0;
    for (double c : coef) s += c;
    return s;
}

double PowerSeries::sum_from(int j0) const {
    double s = 0.0;
    for (int j = std::max(j0, 0); j < static_cast<int>(coef.size()); ++j) s += coef[j];
    return s;
}

double PowerSeries::evaluate(double s) const {
    double y = 0.0;
    kernels::polyval_many(coef.data(), coef.size(), &s, &y, 1);
    return y;
}

void PowerSeries::evaluate_many(std::span<const double> xs, std::span<double> out) const {
    kernels::polyval_many(coef.data(), coef.size(), xs.data(), out.data(), xs.size());
}

void PowerSeries::write_csv(std::ostream& os) const {
    os << "j,value\n";
    char buf[64];
    for (std::size_t j = 0; j < coef.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", j, coef[j]);
        os << buf;
    }
}

bool is_probability_series(const PowerSeries& ps, double eps) {
    for (double c : ps.coef)
        if (c < -eps) return false;
    return ps.sum() <= 1.0 + eps;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::max(a.size(), b.size());
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double pa = j < a.size() ? a[j] : 0.0;
        const double pb = j < b.size() ? b[j] : 0.0;
        d += std::abs(pa - pb);
    }
    return 0.5 * d;
}

std::vector<double> series_mul(std::span<const double> a, std::span<const double> b, int order) {
    std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
    const int na = static_cast<int>(a.size());
    for (int i = 0; i < na && i <= order; ++i) {
        if (a[i] == 0.0) continue;
        const int jmax = std::min<int>(order - i, static_cast<int>(b.size()) - 1);
        for (int j = 0; j <= jmax; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

std::vector<double> series_pow(std::span<const double> base, long long k, int order) {
    std::vector<double> result(static_cast<std::size_t>(order) + 1, 0.0);
    result[0] = 1.0;
    std::vector<double> sq(base.begin(), base.end());
    sq.resize(static_cast<std::size_t>(order) + 1, 0.0);
    while (k > 0) {
        if (k & 1) result = series_mul(result, sq, order);
        k >>= 1;
        if (k > 0) sq = series_mul(sq, sq, order);
    }
    return result;
}

std::vector<double> series_inv(std::span<const double> a, int order) {
    if (a.empty() || a[0] == 0.0) throw std::invalid_argument("series_inv: zero constant term");
    std::vector<double> inv(static_cast<std::size_t>(order) + 1, 0.0);
    inv[0] = 1.0 / a[0];
    for (int n = 1; n <= order; ++n) {
        double acc = 0.0;
        const int kmax = std::min<int>(n, static_cast<int>(a.size()) - 1);
        for (int k = 1; k <= kmax; ++k) acc += a[k] * inv[n - k];
        inv[n] = -acc / a[0];
    }
    return inv;
}

std::vector<double> series_div(std::span<const double> num, std::span<const double> den,
                               int order) {
    return series_mul(num, series_inv(den, order), order);
}

std::vector<double> series_integrate(std::span<const double> a, int order) {
    std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
    for (int n = 1; n <= order; ++n)
        out[n] = (n - 1 < static_cast<int>(a.size())) ? a[n - 1] / n : 0.0;
    return out;
}

std::vector<double> series_exp(std::span<const double> a, int order) {
    if (!a.empty() && a[0] != 0.0) throw std::invalid_argument("series_exp: nonzero constant term");
    std::vector<double> e(static_cast<std::size_t>(order) + 1, 0.0);
    e[0] = 1.0;
    for (int n = 1; n <= order; ++n) {
        double acc = 0.0;
        const int kmax = std::min<int>(n, static_cast<int>(a.size()) - 1);
        for (int k = 1; k <= kmax; ++k) acc += k * a[k] * e[n - k];
        e[n] = acc / n;
    }
    return e;
}

}  // namespace mbp
