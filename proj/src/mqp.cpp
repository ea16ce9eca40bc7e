#include "mbp/mqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mbp/errors.hpp"

namespace mbp {

namespace {

constexpr long long kMaxWindow = 1LL << 20;
constexpr double kWindowRateFraction = 1e-8;

double geometric_tail_estimate(const std::vector<double>& c) {
    const std::size_t n = c.size();
    if (n < 2 || std::abs(c[n - 2]) == 0.0) return 0.0;
    const double rho = std::abs(c[n - 1]) / std::abs(c[n - 2]);
    return rho < 0.9 ? std::abs(c[n - 1]) * rho / (1.0 - rho)
                     : std::abs(c[n - 1]) * static_cast<double>(n);
}

}  // namespace

QProcess::QProcess(OffspringLaw law, double ode_tol) : eng_(std::move(law), ode_tol) {
    const auto& ext = eng_.extinction();
    cls_ = ext.cls == Criticality::Critical ? MqpClass::Explosive : MqpClass::Restrictive;
    const double f2q = base().f_second(ext.q);
    alpha_ = std::isfinite(f2q) ? ext.q * f2q : std::numeric_limits<double>::infinity();
    gamma_ = cls_ == MqpClass::Restrictive ? alpha_ / ext.lambda_S
                                           : std::numeric_limits<double>::quiet_NaN();
}

bool QProcess::alpha_finite() const { return std::isfinite(alpha_); }

double QProcess::gamma() const {
    if (cls_ != MqpClass::Restrictive) throw NotApplicable("gamma is defined for the restrictive class");
    return gamma_;
}

double QProcess::lambda(long long j) const {
    if (j < 0) throw std::domain_error("lambda index must be >= 0");
    if (j == 0) return 0.0;
    const auto& ext = eng_.extinction();
    if (j == 1) return base().a1() - std::log(ext.beta);
    const double qpow = std::exp(static_cast<double>(j - 1) * std::log(ext.q));
    return static_cast<double>(j) * qpow * base().coefficient(j);
}

double QProcess::g(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("s must lie in [0,1]");
    const auto& ext = eng_.extinction();
    return s * (base().f_prime(ext.q * s) - base().f_prime(ext.q));
}

QMatrixRow QProcess::q_matrix_row(int i, long long window) const {
    if (i < 1) throw std::domain_error("state must be >= 1");
    const auto& ext = eng_.extinction();
    const double ln_beta = std::log(ext.beta);
    QMatrixRow row;
    row.i = i;
    row.diagonal = i * lambda(1) + (i - 1) * ln_beta;

    const double exit_rate = -row.diagonal;
    auto tail_rate = [&](long long k) {
        // Bound on sum_{m>k} (i-1+m) q^{m-1} a_m from the exact closed-form
        // tails (q = 1 for the stable family, so the bound is exact there).
        return ((i - 1) * base().intensity_tail_mass(k) + base().rate_tail_mass(k)) / ext.q;
    };
    long long k_max = window;
    if (k_max < 0) {
        if (!base().is_stable() || base().nu() == 1.0) {
            k_max = base().support_order();
        } else {
            k_max = 16;
            while (k_max <= kMaxWindow && tail_rate(k_max) > kWindowRateFraction * exit_rate)
                k_max *= 2;
            if (k_max > kMaxWindow)
                throw RateOverflow("q-matrix row tail not bounded within window 2^20");
        }
    }
    row.window = k_max;
    row.tail_bound = tail_rate(k_max);

    if (i >= 2) row.off_diagonal.emplace_back(i - 1, (i - 1) * base().a0() / ext.q);
    const auto a = base().coefficients(k_max);
    double qpow = ext.q;  // q^{k-1}
    for (long long k = 2; k <= k_max; ++k) {
        const long long j = i + k - 1;
        const double v = static_cast<double>(j) * qpow * a[static_cast<std::size_t>(k)];
        if (v != 0.0) row.off_diagonal.emplace_back(j, v);
        qpow *= ext.q;
    }
    return row;
}

PowerSeries QProcess::transition(double t, int i, int n) const {
    if (i < 1) throw std::domain_error("initial state i must be >= 1");
    const auto& ext = eng_.extinction();
    PowerSeries q = eng_.transition_probabilities(t, i, n);
    q.label = "Q";
    const double log_q = std::log(ext.q);
    const double log_beta_t = t * std::log(ext.beta);
    for (int j = 0; j <= n; ++j) {
        if (j == 0) {
            q.coef[0] = 0.0;  // state space of the chain excludes 0
            continue;
        }
        const double w = std::exp((j - i) * log_q - log_beta_t) * j / static_cast<double>(i);
        q.coef[j] *= w;
    }
    q.tail_estimate = geometric_tail_estimate(q.coef);
    return q;
}

double QProcess::gf_G(double t, double s, int i) const {
    if (i < 1) throw std::domain_error("initial state i must be >= 1");
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("s must lie in [0,1]");
    if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
    if (s == 0.0) return 0.0;
    if (s == 1.0) return 1.0;
    const auto& ext = eng_.extinction();
    const double fqs = base().f(ext.q * s);
    const GfValue v = eng_.solve_F(t, ext.q * s);
    // log G = (i-1) log(F/q) + log s + t lambda_S + log f(F) - log f(qs).
    const double log_F_over_q = std::log1p(-std::exp(v.log_abs_R - std::log(ext.q)));
    const double expo = (i - 1) * log_F_over_q + std::log(s) - t * std::log(ext.beta) +
                        eng_.log_f_of_F(v) - std::log(fqs);
    return std::exp(expo);
}

Moments QProcess::moments(double t, int i) const {
    if (i < 1) throw std::domain_error("initial state i must be >= 1");
    if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
    if (!alpha_finite()) throw InfiniteMoment("g'(1) is infinite for this law");
    const auto& ext = eng_.extinction();
    if (cls_ == MqpClass::Explosive) {
        return {(i - 1) + alpha_ * t + 1.0, alpha_ * i * t};
    }
    const double beta_t = std::exp(t * std::log(ext.beta));
    const double mean = (i - 1) * beta_t + 1.0 + gamma_ * (1.0 - beta_t);
    const double var = (gamma_ + (i - 1) * (1.0 + gamma_) * beta_t) * (1.0 - beta_t);
    return {mean, var};
}

double QProcess::invariant_U(double s) const {
    if (cls_ != MqpClass::Restrictive)
        throw NotApplicable("the invariant distribution exists for the restrictive class");
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("s must lie in [0,1]");
    if (s == 0.0) return 0.0;
    if (s == 1.0) return 1.0;  // normalization limit
    const auto& ext = eng_.extinction();
    return s * ext.lambda_S * eng_.a_function(ext.q * s) / base().f(ext.q * s);
}

PowerSeries QProcess::u_coefficients(int n) const {
    if (cls_ != MqpClass::Restrictive)
        throw NotApplicable("the invariant distribution exists for the restrictive class");
    const auto& ext = eng_.extinction();
    const double lam = ext.lambda_S;
    PowerSeries ps = eng_.cauchy_extract(
        [&](Complex z) -> Complex {
            if (z == Complex(0.0)) return 0.0;
            return z * lam * eng_.a_function(ext.q * z) / base().f(ext.q * z);
        },
        0.7, n, "u");
    return ps;
}

std::pair<double, double> QProcess::tail_exponent() const {
    if (base().is_stable()) return {base().nu(), base().scale_c()};
    if (cls_ == MqpClass::Explosive) return {1.0, 0.5 * base().f_second(1.0)};
    throw NotApplicable("tail exponent is a critical-case object");
}

std::vector<double> QProcess::pi_coefficients(long long n) const {
    if (cls_ != MqpClass::Explosive)
        throw NotApplicable("pi is the explosive-class invariant measure");
    const auto [nu, c] = tail_exponent();
    // pi(s) = s (1-s)^-(1+nu) / c: pi_j = binom(j-1+nu, j-1)/c.
    std::vector<double> pi(static_cast<std::size_t>(n) + 1, 0.0);
    double b = 1.0 / c;
    for (long long j = 1; j <= n; ++j) {
        if (j > 1) b *= (static_cast<double>(j) - 1.0 + nu) / (static_cast<double>(j) - 1.0);
        pi[static_cast<std::size_t>(j)] = b;
    }
    return pi;
}

double QProcess::pi_partial_sum(long long n) const {
    if (cls_ != MqpClass::Explosive)
        throw NotApplicable("pi is the explosive-class invariant measure");
    const auto [nu, c] = tail_exponent();
    // sum_{j<=n} pi_j = binom(n+nu, n-1)/c.
    const double lg = std::lgamma(static_cast<double>(n) + nu + 1.0) -
                      std::lgamma(static_cast<double>(n)) - std::lgamma(nu + 2.0);
    return std::exp(lg) / c;
}

double QProcess::ratio_limit_W(double s) const {
    if (!(s >= 0.0 && s < 1.0)) throw std::domain_error("s must lie in [0,1)");
    if (s == 0.0) return 0.0;
    const auto& ext = eng_.extinction();
    const double fpq = base().f_prime(ext.q);
    const auto integrand = [&](double x) {
        // |h(x)|/f_hat(x) with h(x) = f'(qx) - f'(q) <= 0 and f_hat = f(qx)/q.
        return ext.q * (fpq - base().f_prime(ext.q * x)) / base().f(ext.q * x);
    };
    return s * std::exp(integrate(integrand, 0.0, s, 1e-12));
}

std::vector<double> QProcess::omega_coefficients(int n) const {
    if (n < 1) throw std::domain_error("omega series needs n >= 1");
    const auto& ext = eng_.extinction();
    const int m = n;  // truncation order of the intermediate series
    std::vector<double> minus_h(m), fhat(m + 1);
    for (int k = 0; k < m; ++k) minus_h[k] = -lambda(k + 1);
    const auto a = base().coefficients(m);
    double qpow = 1.0 / ext.q;  // q^{k-1}
    for (int k = 0; k <= m; ++k) {
        fhat[k] = a[static_cast<std::size_t>(k)] * qpow;
        qpow *= ext.q;
    }
    const auto psi = series_div(minus_h, fhat, m);
    const auto Psi = series_integrate(psi, m);
    const auto E = series_exp(Psi, m);
    std::vector<double> omega(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 1; j <= n; ++j) omega[static_cast<std::size_t>(j)] = E[static_cast<std::size_t>(j - 1)];
    return omega;
}

double limit_law_laplace(double nu, double theta) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::domain_error("nu must lie in (0,1]");
    if (!(theta >= 0.0)) throw std::domain_error("theta must be >= 0");
    return std::pow(1.0 + std::pow(theta, nu), -(1.0 + 1.0 / nu));
}

namespace {

double gaver_stehfest(double nu, double x, int order) {
    const int half = order / 2;
    double acc = 0.0;
    const double ln2_over_x = std::numbers::ln2 / x;
    for (int k = 1; k <= order; ++k) {
        double zeta = 0.0;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            double term = std::pow(static_cast<double>(j), half) /
                          (std::tgamma(half - j + 1.0) * std::tgamma(j + 1.0) *
                           std::tgamma(static_cast<double>(j)) * std::tgamma(k - j + 1.0) *
                           std::tgamma(2.0 * j - k + 1.0));
            term *= std::tgamma(2.0 * j + 1.0);
            zeta += term;
        }
        if ((half + k) % 2 != 0) zeta = -zeta;
        const double theta = k * ln2_over_x;
        acc += zeta * limit_law_laplace(nu, theta) / theta;
    }
    return acc * ln2_over_x;
}

}  // namespace

double limit_law_cdf(double nu, double x) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::domain_error("nu must lie in (0,1]");
    if (x <= 0.0) return 0.0;
    if (nu == 1.0) return -std::expm1(-x) - x * std::exp(-x);
    const double g12 = gaver_stehfest(nu, x, 12);
    const double g14 = gaver_stehfest(nu, x, 14);
    if (std::abs(g12 - g14) > 5e-4)
        throw ToleranceNotMet("Laplace inversion orders disagree");
    return std::clamp(g14, 0.0, 1.0);
}

}  // namespace mbp
