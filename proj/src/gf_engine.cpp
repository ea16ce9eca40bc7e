#include "mbp/gf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mbp/errors.hpp"
#include "mbp/kernels/series_kernels.hpp"

namespace mbp {

namespace {

double polyval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) acc = acc * x + c[m];
    return acc;
}

Complex polyval(const std::vector<double>& c, Complex x) {
    Complex acc = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) acc = acc * x + c[m];
    return acc;
}

/// Coefficients d_m of f(q + x) = sum d_m x^m (repeated synthetic division).
std::vector<double> taylor_shift(std::vector<double> a, double q) {
    const std::size_t n = a.size();
    for (std::size_t m = 0; m + 1 < n; ++m)
        for (std::size_t k = n - 1; k-- > m;) a[k] += q * a[k + 1];
    return a;
}

/// Quotient of f by (u - q); the remainder f(q) is dropped (q is a root).
std::vector<double> deflate(const std::vector<double>& a, double q) {
    if (a.size() < 2) return {};
    std::vector<double> b(a.size() - 1);
    b.back() = a.back();
    for (std::size_t k = a.size() - 2; k-- > 0;) b[k] = a[k + 1] + q * b[k + 1];
    return b;
}

Complex pow_int(Complex z, int i) {
    Complex acc = 1.0;
    for (int k = 0; k < i; ++k) acc *= z;
    return acc;
}

double pow_int(double z, int i) {
    double acc = 1.0;
    for (int k = 0; k < i; ++k) acc *= z;
    return acc;
}

void guard_horizon(double lambda_S, double t) {
    if (lambda_S * t > 600.0)
        throw std::domain_error("t beyond representable decay horizon (lambda_S * t > 600)");
}

}  // namespace

ExtinctionData extinction_data(const OffspringLaw& law, double tol) {
    if (!(tol > 0.0)) throw std::domain_error("tol must be positive");
    law.validate();
    const double a = law.mean();
    if (a <= 0.0) {
        // q = 1 exactly; f'(1) = a.
        return {1.0, std::exp(a), std::abs(a),
                a < 0.0 ? Criticality::Subcritical : Criticality::Critical};
    }
    // f is convex with f(0) = a_0 > 0, f(1) = 0, f'(1) > 0: exactly one root in (0,1).
    double hi = 0.5;
    while (law.f(hi) >= 0.0) {
        hi = 0.5 * (1.0 + hi);
        if (1.0 - hi < 1e-12) throw ConvergenceFailure("could not bracket extinction root");
    }
    const double q = find_root([&](double x) { return law.f(x); }, 0.0, hi, tol);
    const double fpq = law.f_prime(q);
    return {q, std::exp(fpq), std::abs(fpq), Criticality::Supercritical};
}

GfEngine::GfEngine(OffspringLaw law, double ode_tol)
    : law_(std::move(law)), ext_(extinction_data(law_)), tol_(ode_tol) {
    if (!(tol_ > 0.0)) throw std::domain_error("ode_tol must be positive");
    if (!law_.is_stable()) {
        std::vector<double> coef = law_.coefficients(law_.support_order());
        while (coef.size() > 2 && coef.back() == 0.0) coef.pop_back();
        const auto d = taylor_shift(coef, ext_.q);
        phi_.resize(d.size() - 1);
        for (std::size_t k = 0; k + 1 < d.size(); ++k)
            phi_[k] = (k % 2 == 0 ? -1.0 : 1.0) * d[k + 1];
        p_ = deflate(coef, ext_.q);
        auto shifted = p_;
        shifted[0] -= polyval(p_, ext_.q);
        p2_ = deflate(shifted, ext_.q);
    }
}

double GfEngine::flow_ratio(double R) const {
    if (law_.is_stable()) return law_.scale_c() * std::pow(R, law_.nu());
    return polyval(phi_, R);
}

Complex GfEngine::flow_ratio(Complex R) const {
    if (law_.is_stable()) return law_.scale_c() * std::exp(law_.nu() * std::log(R));
    return polyval(phi_, R);
}

double GfEngine::flow_rhs(double u, int sign) const {
    if (law_.is_stable()) return -law_.scale_c() * std::exp(law_.nu() * u);
    return -polyval(phi_, sign * std::exp(u));
}

double GfEngine::solve_u(double t, double u0, int sign, double tol) const {
    return ode_integrate([this, sign](double, double u) { return flow_rhs(u, sign); }, u0, 0.0,
                         t, tol);
}

void GfEngine::residual_check(double t, double u0, double u1, int sign, double tol) const {
    double elapsed;
    if (law_.is_stable()) {
        const double nu = law_.nu(), c = law_.scale_c();
        elapsed = (std::exp(-nu * u1) - std::exp(-nu * u0)) / (c * nu);
    } else {
        elapsed = integrate([this, sign](double w) { return 1.0 / polyval(phi_, sign * std::exp(w)); },
                            u1, u0, 0.1 * tol * std::max(1.0, t));
    }
    if (std::abs(elapsed - t) > 10.0 * tol * std::max(1.0, t))
        throw ToleranceNotMet("backward-equation residual above 10*tol");
}

GfValue GfEngine::solve_F(double t, double s, double tol) const {
    if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
    if (!(s >= 0.0 && s < 1.0)) throw std::domain_error("s must lie in [0,1)");
    const double q = ext_.q;
    if (s == q) return {t, s, q, -std::numeric_limits<double>::infinity(), 0};
    const int sign = s < q ? 1 : -1;
    const double u0 = std::log(std::abs(q - s));
    if (t == 0.0) return {t, s, s, u0, sign};
    const double u1 = solve_u(t, u0, sign, tol);
    residual_check(t, u0, u1, sign, tol);
    return {t, s, q - sign * std::exp(u1), u1, sign};
}

GfEngine::FlowPoint GfEngine::solve_complex(double t, Complex s, double tol) const {
    if (std::abs(s) >= ext_.q) throw std::domain_error("complex flow needs |s| < q");
    const Complex u0 = std::log(ext_.q - s);
    if (t == 0.0) return {s, u0};
    const Complex u1 = ode_integrate(
        [this](double, Complex u) -> Complex {
            if (law_.is_stable()) return -law_.scale_c() * std::exp(law_.nu() * u);
            return -polyval(phi_, std::exp(u));
        },
        u0, 0.0, t, tol);
    return {ext_.q - std::exp(u1), u1};
}

PowerSeries GfEngine::cauchy_extract(const std::function<Complex(Complex)>& value, double radius,
                                     int n, const char* label) const {
    const int M = 8 * (n + 1);
    std::vector<double> wre(M), wim(M);
    double wmax = 0.0;
    for (int k = 0; k <= M / 2; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / M;
        const Complex w = value(radius * std::polar(1.0, theta));
        wre[k] = w.real();
        wim[k] = w.imag();
        if (k > 0 && k < M / 2) {  // conjugate symmetry of real-coefficient series
            wre[M - k] = w.real();
            wim[M - k] = -w.imag();
        }
        wmax = std::max(wmax, std::abs(w));
    }
    std::vector<double> costab(M), sintab(M);
    for (int m = 0; m < M; ++m) {
        costab[m] = std::cos(2.0 * std::numbers::pi * m / M);
        sintab[m] = std::sin(2.0 * std::numbers::pi * m / M);
    }

    PowerSeries ps;
    ps.label = label;
    ps.coef.resize(n + 1);
    std::vector<double> cs(M), sn(M);
    const double eps = std::numeric_limits<double>::epsilon();
    double max_resid = 0.0;
    auto project = [&](long long j, double& out_re, double& out_im) {
        long long idx = 0;
        for (int k = 0; k < M; ++k) {
            cs[k] = costab[idx];
            sn[k] = sintab[idx];
            idx += j;
            if (idx >= M) idx -= M;
        }
        kernels::fourier_project(wre.data(), wim.data(), cs.data(), sn.data(), M, &out_re,
                                 &out_im);
    };
    double rpow = 1.0;
    for (int j = 0; j <= n; ++j) {
        double sum_re, sum_im;
        project(j, sum_re, sum_im);
        ps.coef[j] = sum_re / (M * rpow);
        const double imag_resid = std::abs(sum_im) / (M * rpow);
        // The honest per-coefficient noise floor grows like r^-j.
        const double floor_j = kExtractTolerance + 256.0 * eps * wmax / rpow;
        if (imag_resid > floor_j)
            throw ToleranceNotMet("extraction imaginary residue above tolerance");
        max_resid = std::max(max_resid, imag_resid);
        rpow *= radius;
    }
    // Analyticity check: the would-be coefficient of s^-1 must vanish.
    {
        double are, aim;
        project(M - 1, are, aim);
        const double resid = std::hypot(are, aim) / M;
        if (resid > (kExtractTolerance + 256.0 * eps) * std::max(1.0, wmax))
            throw ToleranceNotMet("extraction analyticity residue above tolerance");
        max_resid = std::max(max_resid, resid);
    }
    ps.extract_residual = max_resid;
    if (n >= 1 && std::abs(ps.coef[n - 1]) > 0.0) {
        const double rho = std::abs(ps.coef[n]) / std::abs(ps.coef[n - 1]);
        ps.tail_estimate = rho < 0.9 ? std::abs(ps.coef[n]) * rho / (1.0 - rho)
                                     : std::abs(ps.coef[n]) * (n + 1);
    }
    return ps;
}

PowerSeries GfEngine::transition_probabilities(double t, int i, int n) const {
    if (i < 1) throw std::domain_error("initial state i must be >= 1");
    if (n < 0) throw std::domain_error("series order must be >= 0");
    if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
    PowerSeries ps;
    ps.label = "P";
    if (t == 0.0) {
        ps.coef.assign(n + 1, 0.0);
        if (i <= n) ps.coef[i] = 1.0;
        return ps;
    }
    guard_horizon(ext_.lambda_S, t);
    const double r = 0.7 * ext_.q;
    if (ext_.lambda_S * t <= 3.0) {
        ps = cauchy_extract(
            [&](Complex z) { return pow_int(solve_complex(t, z, extraction_tol()).F, i); }, r, n, "P");
    } else {
        // beta^-t amplification would sink direct extraction; take the ratio GF
        // route: P_ij = (P_ij / P_11) * P_11 with both factors relative-accurate.
        ps = ratio_series(t, i, n);
        ps.label = "P";
        const double p11t = p11(t);
        for (double& c : ps.coef) c *= p11t;
        const double F0 = solve_F(t, 0.0).value;
        ps.coef[0] = pow_int(F0, i);
        ps.tail_estimate *= p11t;
    }
    return ps;
}

double GfEngine::log_f_of_F(const GfValue& v) const {
    return v.log_abs_R + std::log(std::abs(flow_ratio(v.R())));
}

double GfEngine::log_p11(double t) const {
    return log_f_of_F(solve_F(t, 0.0)) - std::log(law_.a0());
}

double GfEngine::p11(double t) const { return std::exp(log_p11(t)); }

double GfEngine::a_integrand(double u) const {
    const double den = polyval(p_, u);
    if (den == 0.0) throw SingularPoint("f has an interior root on the integration path");
    return polyval(p2_, u) / den;
}

Complex GfEngine::a_integrand(Complex u) const {
    const Complex den = polyval(p_, u);
    if (den == Complex(0.0)) throw SingularPoint("f has an interior root on the integration path");
    return polyval(p2_, u) / den;
}

double GfEngine::a_function(double s) const {
    if (ext_.cls == Criticality::Critical) throw NotApplicable("A(s) needs a non-critical law");
    if (!(s >= 0.0 && s <= ext_.q)) throw std::domain_error("A(s) defined for 0 <= s <= q");
    if (s == ext_.q) return 0.0;
    const double expo = integrate([this](double u) { return a_integrand(u); }, s, ext_.q, 1e-13);
    return (ext_.q - s) * std::exp(expo);
}

Complex GfEngine::a_function(Complex z) const {
    if (ext_.cls == Criticality::Critical) throw NotApplicable("A(s) needs a non-critical law");
    const Complex expo =
        integrate_segment([this](Complex u) { return a_integrand(u); }, z, Complex(ext_.q), 1e-13);
    return (ext_.q - z) * std::exp(expo);
}

double GfEngine::m_script(double s) const {
    if (ext_.cls != Criticality::Critical) throw NotApplicable("M(s) is the critical-case object");
    if (!(s >= 0.0 && s < 1.0)) throw std::domain_error("M(s) defined for 0 <= s < 1");
    if (s == 0.0) return 0.0;
    const double value = integrate([this](double x) { return 1.0 / law_.f(x); }, 0.0, s, 1e-12);
    if (law_.is_stable()) {
        const double nu = law_.nu(), c = law_.scale_c();
        const double closed = (std::pow(1.0 - s, -nu) - 1.0) / (c * nu);
        if (std::abs(value - closed) > 1e-9 * (1.0 + std::abs(closed)))
            throw ToleranceNotMet("M(s) quadrature disagrees with closed form");
    }
    return value;
}

Complex GfEngine::m_script(Complex z) const {
    if (ext_.cls != Criticality::Critical) throw NotApplicable("M(s) is the critical-case object");
    return integrate_segment([this](Complex x) { return 1.0 / law_.f(x); }, Complex(0.0), z,
                             1e-12);
}

double GfEngine::invariant_gf_M(double s) const {
    if (ext_.cls == Criticality::Critical) return law_.a0() * m_script(s);
    if (!(s >= 0.0 && s <= ext_.q))
        throw std::domain_error("M(s) evaluated beyond q (flagged extrapolation)");
    return law_.a0() / ext_.lambda_S * (1.0 - a_function(s) / a_function(0.0));
}

Complex GfEngine::invariant_gf_M(Complex z) const {
    if (ext_.cls == Criticality::Critical) return law_.a0() * m_script(z);
    return law_.a0() / ext_.lambda_S * (1.0 - a_function(z) / a_function(0.0));
}

PowerSeries GfEngine::mu_coefficients(int n) const {
    if (n < 1) throw std::domain_error("mu series needs n >= 1");
    PowerSeries ps =
        cauchy_extract([this](Complex z) { return invariant_gf_M(z); }, 0.7 * ext_.q, n, "mu");
    return ps;
}

std::vector<double> GfEngine::mu_by_recursion(long long n) const {
    if (!law_.is_stable()) throw NotApplicable("closed-form mu recursion is for the stable family");
    // mu_j = (a_0/(c nu)) binom(nu+j-1, j); a_0 = c.
    std::vector<double> mu(static_cast<std::size_t>(n) + 1, 0.0);
    const double nu = law_.nu();
    double b = 1.0;  // binom(nu+j-1, j) at j = 1 is nu
    for (long long j = 1; j <= n; ++j) {
        b *= (nu + static_cast<double>(j) - 1.0) / static_cast<double>(j);
        mu[static_cast<std::size_t>(j)] = b / nu;
    }
    return mu;
}

double GfEngine::mu_partial_sum(long long n) const {
    if (!law_.is_stable()) throw NotApplicable("closed-form mu partial sums are for the stable family");
    const double nu = law_.nu();
    // sum_{j<=n} binom(nu+j-1, j) = binom(nu+n, n); subtract the j = 0 term.
    const double lg = std::lgamma(nu + static_cast<double>(n) + 1.0) -
                      std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(nu + 1.0);
    return (std::exp(lg) - 1.0) / nu;
}

double GfEngine::lemma1_asymptote(double t, double s) const {
    if (!(t > 0.0)) throw std::domain_error("asymptote needs t > 0");
    if (ext_.cls != Criticality::Critical) {
        guard_horizon(ext_.lambda_S, t);
        return a_function(s) * std::exp(t * std::log(ext_.beta));
    }
    const double nu = law_.is_stable() ? law_.nu() : 1.0;
    const double c = law_.is_stable() ? law_.scale_c() : 0.5 * law_.f_second(1.0);
    const double scale = std::pow(c, -1.0 / nu);  // the constant N solving (its) fixed point
    return scale * std::pow(nu * t, -1.0 / nu) *
           std::pow(1.0 + m_script(s) / t, -1.0 / nu);
}

double GfEngine::lemma2_derivative(double t, double s) const {
    if (!(s >= 0.0 && s < 1.0)) throw std::domain_error("s must lie in [0,1)");
    const double fs = law_.f(s);
    if (fs == 0.0 || s == ext_.q) throw SingularPoint("dF/ds undefined at s = q");
    const GfValue v = solve_F(t, s);
    // f(F) = R * phi(R), assembled in logs so late-time values keep accuracy;
    // the ratio f(F)/f(s) is positive on both sides of q.
    const double log_fF = v.log_abs_R + std::log(std::abs(flow_ratio(v.R())));
    return std::exp(log_fF - std::log(std::abs(fs)));
}

double GfEngine::conditioned_gf(double t, int i, double s) const {
    if (i < 1) throw std::domain_error("initial state i must be >= 1");
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("s must lie in [0,1]");
    guard_horizon(ext_.lambda_S, t);
    const double q = ext_.q;
    const GfValue v0 = solve_F(t, 0.0);
    const double R0_over_q = std::exp(v0.log_abs_R - std::log(q));
    const double den = -pow_int(q, i) * std::expm1(i * std::log1p(-R0_over_q));
    if (den < 1e-14) throw DegenerateCondition("conditioning event numerically null");
    if (s == 1.0) return 1.0;
    const GfValue vs = solve_F(t, q * s);
    const double Rs_over_q = std::exp(vs.log_abs_R - std::log(q));
    const double F0i = std::exp(i * std::log1p(-R0_over_q)) * pow_int(q, i);
    const double num = F0i * std::expm1(i * (std::log1p(-Rs_over_q) - std::log1p(-R0_over_q)));
    return num / den;
}

PowerSeries GfEngine::conditioned_transition(double t, int i, int n) const {
    if (i < 1) throw std::domain_error("initial state i must be >= 1");
    PowerSeries ps;
    ps.label = "conditioned";
    if (t == 0.0) {
        ps.coef.assign(n + 1, 0.0);
        if (i <= n) ps.coef[i] = 1.0;
        return ps;
    }
    guard_horizon(ext_.lambda_S, t);
    const double q = ext_.q;
    const GfValue v0 = solve_F(t, 0.0);
    const double log_q = std::log(q);
    const double R0_over_q = std::exp(v0.log_abs_R - log_q);
    const double l0 = std::log1p(-R0_over_q);
    const double den = -pow_int(q, i) * std::expm1(i * l0);
    if (den < 1e-14) throw DegenerateCondition("conditioning event numerically null");
    const double F0i = std::exp(i * l0) * pow_int(q, i);
    ps = cauchy_extract(
        [&](Complex z) {
            const FlowPoint fp = solve_complex(t, q * z, extraction_tol());
            const Complex Rz_over_q = std::exp(fp.u - log_q);
            const Complex num = F0i * expm1_c(static_cast<double>(i) * (log1p_c(-Rz_over_q) - l0));
            return num / den;
        },
        0.7, n, "conditioned");
    return ps;
}

PowerSeries GfEngine::ratio_series(double t, int i, int n) const {
    if (i < 1) throw std::domain_error("initial state i must be >= 1");
    PowerSeries ps;
    ps.label = "ratio";
    if (t == 0.0) {
        ps.coef.assign(n + 1, 0.0);
        if (i <= n) ps.coef[i] = 1.0;
        return ps;
    }
    guard_horizon(ext_.lambda_S, t);
    const double q = ext_.q;
    const double log_q = std::log(q);
    const GfValue v0 = solve_F(t, 0.0);
    const double R0_over_q = std::exp(v0.log_abs_R - log_q);
    const double l0 = std::log1p(-R0_over_q);
    const double log_F0i = i * (l0 + log_q);
    const double lp11 = log_p11(t);
    const double scale = std::exp(log_F0i - lp11);
    ps = cauchy_extract(
        [&](Complex z) {
            const FlowPoint fp = solve_complex(t, z, extraction_tol());
            const Complex Rz_over_q = std::exp(fp.u - log_q);
            return scale * expm1_c(static_cast<double>(i) * (log1p_c(-Rz_over_q) - l0));
        },
        0.7 * q, n, "ratio");
    return ps;
}

double GfEngine::limit_distribution_V(double s) const {
    if (ext_.cls == Criticality::Critical) throw NotApplicable("V(s) needs a non-critical law");
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("s must lie in [0,1]");
    return 1.0 - a_function(ext_.q * s) / a_function(0.0);
}

double GfEngine::limit_V_mean() const {
    if (ext_.cls == Criticality::Critical) throw NotApplicable("V(s) needs a non-critical law");
    return ext_.q / a_function(0.0);
}

PowerSeries GfEngine::nu_coefficients(int n) const {
    if (ext_.cls == Criticality::Critical) throw NotApplicable("V(s) needs a non-critical law");
    const double A0 = a_function(0.0);
    PowerSeries ps = cauchy_extract(
        [&](Complex z) { return 1.0 - a_function(ext_.q * z) / A0; }, 0.7, n, "nu");
    return ps;
}

}  // namespace mbp
